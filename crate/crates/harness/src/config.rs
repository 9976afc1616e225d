//! Experiment configuration: flat `key = value` text, with command-line
//! flags layered on top.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use rcm_core::critical_p;
use rcm_core::lattice::{
    build_box, build_cover_box, build_path, build_rect, read_graph, BoundaryKind, BoundaryPartition, FiniteGraph,
};
use rcm_core::mc::{BurnIn, RunConfig, Sampler};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// `φ^0_{Λ_2n}[0 ↔ ∂Λ_n]`.
    DecayFree,
    /// Horizontal crossing of `[0, αn] x [0, n]` with free boundary.
    CrossingFree,
    /// Open circuit in `Λ_2n \ Λ_n` inside `Λ_Rn`.
    Annulus,
    /// Crossing of `[0, αn] x [0, n]` inside `[-n, (α+1)n] x [-n, 2n]`.
    CrossingUniform,
    /// Two-point function between sheets of the cover box.
    SpiralDecay,
    /// `Σ_{x ∈ Λ_n} φ[0 ↔ x]`.
    Susceptibility,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::DecayFree,
        Experiment::CrossingFree,
        Experiment::Annulus,
        Experiment::CrossingUniform,
        Experiment::SpiralDecay,
        Experiment::Susceptibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DecayFree => "decay_free",
            Experiment::CrossingFree => "crossing_free",
            Experiment::Annulus => "annulus",
            Experiment::CrossingUniform => "crossing_uniform",
            Experiment::SpiralDecay => "spiral_decay",
            Experiment::Susceptibility => "susceptibility",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How an experiment evaluates its probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo => "mc",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "mc" => Ok(Mode::MonteCarlo),
            _ => Err(Error::Config(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub q: f64,
    /// Defaults to the self-dual point of `q`.
    pub p: Option<f64>,
    pub sizes: Vec<u32>,
    pub bc: BoundaryKind,
    /// Defaults to Swendsen–Wang for integer `q >= 2`, Chayes–Machta otherwise.
    pub sampler: Option<Sampler>,
    pub sweeps: u64,
    pub burn_in: BurnIn,
    pub batches: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Aspect ratio of crossing rectangles.
    pub alpha: f64,
    /// Outer box `Λ_{ratio·n}` of the annulus experiment.
    pub ratio: u32,
    /// Sheet separations of the spiral experiment.
    pub ks: Vec<u32>,
    /// Sheets on either side of the origin sheet in the cover box.
    pub height: u32,
    pub mode: Mode,
}

pub const KEYS: [&str; 16] = [
    "experiment", "q", "p", "sizes", "bc", "sampler", "sweeps", "burnin", "batches", "seed", "out", "alpha",
    "ratio", "ks", "height", "mode",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", i + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_list(key: &str, s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::Config(format!("`{key}`: bad entry `{x}`")))
        })
        .collect()
}

fn parse<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Config(format!("`{key}`: bad value `{s}`")))
}

fn join(v: &[u32]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, q: f64) -> Self {
        Self {
            experiment,
            q,
            p: None,
            sizes: vec![8, 16, 32],
            bc: BoundaryKind::Free,
            sampler: None,
            sweeps: 10_000,
            burn_in: BurnIn::Auto,
            batches: 20,
            seed: 1,
            out: None,
            alpha: 1.0,
            ratio: 4,
            ks: (1..=8).collect(),
            height: 48,
            mode: Mode::MonteCarlo,
        }
    }

    /// Builds a configuration from key/value pairs; `experiment` is required.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let experiment = Experiment::from_name(
            map.get("experiment")
                .ok_or_else(|| Error::Config("missing `experiment`".into()))?,
        )?;
        let q = map.get("q").map(|s| parse("q", s)).transpose()?.unwrap_or(2.0);
        let mut cfg = Self::new(experiment, q);
        for (k, v) in map {
            match k.as_str() {
                "experiment" | "q" => {}
                "p" => cfg.p = Some(parse(k, v)?),
                "sizes" => cfg.sizes = parse_list(k, v)?,
                "bc" => cfg.bc = BoundaryKind::from_name(v)?,
                "sampler" => cfg.sampler = if v == "auto" { None } else { Some(Sampler::from_name(v)?) },
                "sweeps" => cfg.sweeps = parse(k, v)?,
                "burnin" => cfg.burn_in = if v == "auto" { BurnIn::Auto } else { BurnIn::Sweeps(parse(k, v)?) },
                "batches" => cfg.batches = parse(k, v)?,
                "seed" => cfg.seed = parse(k, v)?,
                "out" => cfg.out = Some(PathBuf::from(v)),
                "alpha" => cfg.alpha = parse(k, v)?,
                "ratio" => cfg.ratio = parse(k, v)?,
                "ks" => cfg.ks = parse_list(k, v)?,
                "height" => cfg.height = parse(k, v)?,
                "mode" => cfg.mode = Mode::from_name(v)?,
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sizes must be positive and increasing".into()));
        }
        if !(self.q > 0.0) {
            return Err(Error::Config(format!("q = {} must be positive", self.q)));
        }
        if self.mode == Mode::MonteCarlo && self.q < 1.0 {
            return Err(Error::Config(format!("Monte Carlo needs q >= 1, got {}", self.q)));
        }
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("p = {p} is outside [0, 1]")));
            }
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if self.ratio < 2 {
            return Err(Error::Config("ratio must be at least 2".into()));
        }
        if self.ks.is_empty() || self.ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("ks must be increasing".into()));
        }
        if self.experiment == Experiment::SpiralDecay && self.ks.last().copied().unwrap_or(0) > self.height {
            return Err(Error::Config("largest k exceeds the cover height".into()));
        }
        if self.batches < 8 || self.sweeps < self.batches as u64 {
            return Err(Error::Config("need sweeps >= batches >= 8".into()));
        }
        Ok(())
    }

    pub fn p_value(&self) -> f64 {
        self.p.unwrap_or_else(|| critical_p(self.q))
    }

    pub fn sampler_value(&self) -> Sampler {
        self.sampler.unwrap_or(if self.q >= 2.0 && self.q.fract() == 0.0 {
            Sampler::SwendsenWang
        } else {
            Sampler::ChayesMachta
        })
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig::new(self.sampler_value(), self.sweeps, self.burn_in, self.batches)
    }

    /// Every field, resolved defaults included, one `key = value` per line in
    /// a fixed order.
    pub fn canonical(&self) -> String {
        let burn = match self.burn_in {
            BurnIn::Auto => "auto".to_string(),
            BurnIn::Sweeps(b) => b.to_string(),
        };
        let fields: [(&str, String); 16] = [
            ("experiment", self.experiment.name().into()),
            ("q", format!("{:?}", self.q)),
            ("p", format!("{:?}", self.p_value())),
            ("sizes", join(&self.sizes)),
            ("bc", self.bc.name().into()),
            ("sampler", self.sampler_value().name().into()),
            ("sweeps", self.sweeps.to_string()),
            ("burnin", burn),
            ("batches", self.batches.to_string()),
            ("seed", self.seed.to_string()),
            ("out", self.out.as_ref().map_or(String::new(), |p| p.display().to_string())),
            ("alpha", format!("{:?}", self.alpha)),
            ("ratio", self.ratio.to_string()),
            ("ks", join(&self.ks)),
            ("height", self.height.to_string()),
            ("mode", self.mode.name().into()),
        ];
        fields.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Parses `box:N`, `rect:X0,Y0,X1,Y1`, `path:L`, `cover:N,H`, or reads a graph
/// file (with its optional partition) from any other argument.
pub fn parse_graph_spec(spec: &str) -> Result<(FiniteGraph, Option<BoundaryPartition>)> {
    let bad = || Error::Config(format!("bad graph `{spec}`"));
    let nums = |s: &str| -> Result<Vec<i32>> { s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect() };
    let non_negative = |v: i32| u32::try_from(v).map_err(|_| bad());
    let graph = match spec.split_once(':') {
        Some(("box", rest)) => match nums(rest)?.as_slice() {
            [n] => build_box(non_negative(*n)?),
            _ => return Err(bad()),
        },
        Some(("rect", rest)) => match nums(rest)?.as_slice() {
            [x0, y0, x1, y1] => build_rect(*x0, *y0, *x1, *y1)?,
            _ => return Err(bad()),
        },
        Some(("path", rest)) => match nums(rest)?.as_slice() {
            [l] => build_path(non_negative(*l)?),
            _ => return Err(bad()),
        },
        Some(("cover", rest)) => match nums(rest)?.as_slice() {
            [n, h] => build_cover_box(non_negative(*n)?, non_negative(*h)?)?,
            _ => return Err(bad()),
        },
        _ => {
            let file = read_graph(&std::fs::read_to_string(spec)?)?;
            return Ok((file.graph, file.partition));
        }
    };
    Ok((graph, None))
}
