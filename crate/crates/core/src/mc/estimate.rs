use std::io::Write;

use rayon::prelude::*;

use super::ChainState;
use crate::error::{Error, Result};
use crate::events::EventPredicate;

/// Update used for one sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampler {
    /// `|E|` heat-bath updates in edge order.
    HeatBath,
    /// One Chayes–Machta step.
    ChayesMachta,
    /// One Swendsen–Wang step.
    SwendsenWang,
}

impl Sampler {
    pub fn name(self) -> &'static str {
        match self {
            Sampler::HeatBath => "heatbath",
            Sampler::ChayesMachta => "chayes_machta",
            Sampler::SwendsenWang => "swendsen_wang",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "heatbath" => Ok(Sampler::HeatBath),
            "chayes_machta" | "cm" => Ok(Sampler::ChayesMachta),
            "swendsen_wang" | "sw" => Ok(Sampler::SwendsenWang),
            _ => Err(Error::Parse(format!("unknown sampler `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BurnIn {
    Sweeps(u64),
    /// Ten integrated autocorrelation times of the slowest observable,
    /// measured on a pilot run.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub sampler: Sampler,
    /// Number of measurements.
    pub sweeps: u64,
    pub burn_in: BurnIn,
    pub batches: usize,
    /// Sweeps between measurements.
    pub thin: u64,
}

impl RunConfig {
    pub fn new(sampler: Sampler, sweeps: u64, burn_in: BurnIn, batches: usize) -> Self {
        Self {
            sampler,
            sweeps,
            burn_in,
            batches,
            thin: 1,
        }
    }

    fn check(&self) -> Result<()> {
        if self.batches < 8 || self.sweeps < self.batches as u64 || self.thin == 0 {
            return Err(Error::InvalidParams(format!(
                "need sweeps >= batches >= 8 and thin >= 1, got sweeps = {}, batches = {}, thin = {}",
                self.sweeps, self.batches, self.thin
            )));
        }
        Ok(())
    }
}

/// Batch-means estimate of an expectation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub n_batches: u64,
    pub seed: u64,
}

impl Estimate {
    /// Splits `series` into `batches` equal batches, dropping the leading
    /// remainder.
    pub fn from_series(series: &[f64], batches: usize, seed: u64) -> Self {
        let len = series.len() / batches.max(1);
        let used = &series[series.len() - len * batches..];
        let means: Vec<f64> = used.chunks(len.max(1)).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        let var = if means.len() > 1 {
            means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (means.len() - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / means.len() as f64).sqrt(),
            n_samples: used.len() as u64,
            n_batches: means.len() as u64,
            seed,
        }
    }

    /// Sample-size weighted combination of independent estimates.
    pub fn merge(parts: &[Estimate]) -> Estimate {
        let n: u64 = parts.iter().map(|e| e.n_samples).sum();
        let nf = n.max(1) as f64;
        Estimate {
            mean: parts.iter().map(|e| e.mean * e.n_samples as f64).sum::<f64>() / nf,
            std_error: parts
                .iter()
                .map(|e| (e.n_samples as f64 / nf * e.std_error).powi(2))
                .sum::<f64>()
                .sqrt(),
            n_samples: n,
            n_batches: parts.iter().map(|e| e.n_batches).sum(),
            seed: parts.first().map_or(0, |e| e.seed),
        }
    }

    /// Distance to `value` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Integrated autocorrelation time with Sokal's self-consistent window
/// (`W >= 6 tau`).
pub fn integrated_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 2 {
        return 0.5;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centred.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for t in 1..n {
        let ct = centred[..n - t].iter().zip(&centred[t..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        tau += ct / c0;
        if t as f64 >= 6.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

/// Outcome of a run: one estimate per observable and the burn-in applied.
#[derive(Clone, Debug)]
pub struct Run {
    pub estimates: Vec<Estimate>,
    pub burn_in: u64,
}

fn advance(state: &mut ChainState, cfg: &RunConfig) -> Result<()> {
    for _ in 0..cfg.thin {
        state.sweep(cfg.sampler)?;
    }
    Ok(())
}

/// Runs the chain and estimates `n_obs` observables written by `observe`
/// after each measurement. When `log` is given, every measurement is written
/// as `sweep,event_id,value` using the supplied ids.
pub fn estimate_with<F>(
    state: &mut ChainState,
    n_obs: usize,
    cfg: &RunConfig,
    mut observe: F,
    mut log: Option<(&[String], &mut dyn Write)>,
) -> Result<Run>
where
    F: FnMut(&ChainState, &mut [f64]),
{
    cfg.check()?;
    let mut values = vec![0.0; n_obs];
    let burn_in = match cfg.burn_in {
        BurnIn::Sweeps(b) => {
            for _ in 0..b {
                state.sweep(cfg.sampler)?;
            }
            b
        }
        BurnIn::Auto => {
            let pilot = (cfg.sweeps / 10).clamp(64, 2000);
            let mut series = vec![Vec::with_capacity(pilot as usize); n_obs];
            for _ in 0..pilot {
                advance(state, cfg)?;
                observe(state, &mut values);
                for (s, &v) in series.iter_mut().zip(&values) {
                    s.push(v);
                }
            }
            let tau = series.iter().map(|s| integrated_time(s)).fold(0.5, f64::max);
            let extra = (10.0 * tau * cfg.thin as f64).ceil() as u64;
            for _ in 0..extra {
                state.sweep(cfg.sampler)?;
            }
            pilot * cfg.thin + extra
        }
    };
    if let Some((ids, out)) = log.as_mut() {
        if ids.len() != n_obs {
            return Err(Error::InvalidParams(format!("{} log ids for {n_obs} observables", ids.len())));
        }
        writeln!(out, "sweep,event_id,value")?;
    }
    let mut series = vec![Vec::with_capacity(cfg.sweeps as usize); n_obs];
    for _ in 0..cfg.sweeps {
        advance(state, cfg)?;
        observe(state, &mut values);
        if let Some((ids, out)) = log.as_mut() {
            for (id, v) in ids.iter().zip(&values) {
                writeln!(out, "{},{id},{v}", state.sweeps())?;
            }
        }
        for (s, &v) in series.iter_mut().zip(&values) {
            s.push(v);
        }
    }
    Ok(Run {
        estimates: series.iter().map(|s| Estimate::from_series(s, cfg.batches, state.seed())).collect(),
        burn_in,
    })
}

/// Estimates the probabilities of `events`.
pub fn estimate(
    state: &mut ChainState,
    events: &[EventPredicate],
    cfg: &RunConfig,
    log: Option<&mut dyn Write>,
) -> Result<Run> {
    let ids: Vec<String> = events.iter().map(|e| e.id().to_string()).collect();
    estimate_with(
        state,
        events.len(),
        cfg,
        |s, out| {
            for (slot, ev) in out.iter_mut().zip(events) {
                *slot = ev.occurs(s.graph(), s.config()) as u8 as f64;
            }
        },
        log.map(|w| (ids.as_slice(), w)),
    )
}

/// Runs `chains` independent chains in parallel (chain `i` built by
/// `make(i)`) and merges their estimates in chain order.
pub fn estimate_chains<M>(chains: u64, make: M, events: &[EventPredicate], cfg: &RunConfig) -> Result<Vec<Estimate>>
where
    M: Fn(u64) -> Result<ChainState> + Sync,
{
    let runs: Vec<Result<Run>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut state = make(c)?;
            estimate(&mut state, events, cfg, None)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..events.len())
        .map(|i| Estimate::merge(&runs.iter().map(|r| r.estimates[i]).collect::<Vec<_>>()))
        .collect())
}

/// Writes `event_id,mean,std_err,n,seed`.
pub fn write_estimates(ids: &[String], estimates: &[Estimate], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "event_id,mean,std_err,n,seed")?;
    for (id, e) in ids.iter().zip(estimates) {
        writeln!(out, "{id},{},{},{},{}", e.mean, e.std_error, e.n_samples, e.seed)?;
    }
    Ok(())
}

/// Streaming batch means for many observables whose samples arrive as
/// sparse increments.
#[derive(Clone, Debug)]
pub struct BatchMeans {
    batch_len: u64,
    skip: u64,
    seen: u64,
    in_batch: u64,
    current: Vec<f64>,
    means: Vec<Vec<f64>>,
}

impl BatchMeans {
    /// Prepares for `total` samples split into `batches` batches; the
    /// leading remainder is discarded.
    pub fn new(n_obs: usize, total: u64, batches: usize) -> Self {
        let batch_len = (total / batches.max(1) as u64).max(1);
        Self {
            batch_len,
            skip: total.saturating_sub(batch_len * batches as u64),
            seen: 0,
            in_batch: 0,
            current: vec![0.0; n_obs],
            means: vec![Vec::with_capacity(batches); n_obs],
        }
    }

    /// Whether the current sample is recorded.
    pub fn counting(&self) -> bool {
        self.seen >= self.skip
    }

    /// Adds `v` to observable `i` for the current sample.
    pub fn add(&mut self, i: usize, v: f64) {
        if self.counting() {
            self.current[i] += v;
        }
    }

    pub fn end_sample(&mut self) {
        if self.counting() {
            self.in_batch += 1;
            if self.in_batch == self.batch_len {
                for (m, c) in self.means.iter_mut().zip(self.current.iter_mut()) {
                    m.push(*c / self.batch_len as f64);
                    *c = 0.0;
                }
                self.in_batch = 0;
            }
        }
        self.seen += 1;
    }

    pub fn finish(&self, seed: u64) -> Vec<Estimate> {
        self.means
            .iter()
            .map(|m| {
                let mut e = Estimate::from_series(m, m.len(), seed);
                e.n_samples = m.len() as u64 * self.batch_len;
                e
            })
            .collect()
    }
}
