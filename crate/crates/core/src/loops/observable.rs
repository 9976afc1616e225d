use std::collections::HashSet;
use std::io::Write;

use num_complex::Complex64;

use super::domain::DobrushinDomain;
use super::spin_params;
use super::trace::explore;
use crate::error::{Error, Result};
use crate::exact::{CompensatedSum, Enumeration};
use crate::lattice::{BoundaryPartition, Coord};
use crate::mc::{estimate_with, BatchMeans, BurnIn, ChainState, Estimate, RunConfig};
use crate::model::{BondConfiguration, ModelParams};

/// Which of the two observables a field holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Phase `e^{i sigma W}`, or `W e^{i W}` at `q = 4`.
    F,
    /// Phase `e^{i sigma_hat W}`, or `W` at `q = 4`.
    FHat,
}

/// One complex value per medial edge of a domain, indexed like
/// [`DobrushinDomain::edges`].
#[derive(Clone, Debug)]
pub struct ObservableField {
    pub variant: Variant,
    pub q: f64,
    pub p: f64,
    pub values: Vec<Complex64>,
    /// Standard errors of the real and imaginary parts; `None` when exact.
    pub std_err: Option<Vec<(f64, f64)>>,
}

impl ObservableField {
    pub fn is_exact(&self) -> bool {
        self.std_err.is_none()
    }

    /// Whether the field was computed at the self-dual point.
    pub fn is_critical(&self) -> bool {
        (self.p - crate::critical_p(self.q)).abs() < 1e-15
    }

    /// Writes `medial_edge_id,re,im,std_err_re,std_err_im`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "medial_edge_id,re,im,std_err_re,std_err_im")?;
        for (i, v) in self.values.iter().enumerate() {
            let (sr, si) = self.std_err.as_ref().map_or((0.0, 0.0), |s| s[i]);
            writeln!(out, "{i},{:e},{:e},{sr:e},{si:e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Weight attached to a path edge with winding `w` quarter turns.
#[derive(Clone, Debug)]
pub(crate) struct PhaseTable {
    offset: i32,
    f: Vec<Complex64>,
    f_hat: Vec<Complex64>,
}

impl PhaseTable {
    pub(crate) fn new(q: f64, max_turns: usize) -> Result<Self> {
        let s = spin_params(q)?;
        let offset = max_turns as i32;
        let mut f = Vec::with_capacity(2 * max_turns + 1);
        let mut f_hat = Vec::with_capacity(2 * max_turns + 1);
        for t in -offset..=offset {
            let w = t as f64 * std::f64::consts::FRAC_PI_2;
            if q == 4.0 {
                f.push(w * Complex64::new(0.0, w).exp());
                f_hat.push(Complex64::new(w, 0.0));
            } else {
                f.push((Complex64::i() * s.sigma * w).exp());
                f_hat.push((Complex64::i() * s.sigma_hat * w).exp());
            }
        }
        Ok(Self { offset, f, f_hat })
    }

    #[inline]
    pub(crate) fn get(&self, variant: Variant, turns: i32) -> Complex64 {
        let i = (turns + self.offset) as usize;
        match variant {
            Variant::F => self.f[i],
            Variant::FHat => self.f_hat[i],
        }
    }
}

/// Adds the phases of the exploration path of `w` to per-edge sums
/// (F real, F imaginary, F-hat real, F-hat imaginary), each multiplied by
/// `weight`. `path` and `turns` are scratch buffers.
pub(crate) fn accumulate_path(
    d: &DobrushinDomain,
    w: &BondConfiguration,
    table: &PhaseTable,
    weight: f64,
    path: &mut Vec<usize>,
    turns: &mut Vec<i32>,
    mut add: impl FnMut(usize, Complex64, Complex64),
) -> Result<()> {
    path.clear();
    turns.clear();
    path.push(d.e_a());
    if !explore(d, w, |e, t| {
        path.push(e);
        turns.push(t);
    }) {
        return Err(Error::InvalidConfiguration("exploration path leaves the domain".into()));
    }
    let mut wind = 0;
    for i in (0..path.len()).rev() {
        if i < turns.len() {
            wind += turns[i];
        }
        add(
            path[i],
            table.get(Variant::F, wind) * weight,
            table.get(Variant::FHat, wind) * weight,
        );
    }
    Ok(())
}

/// Exact `F` and `F-hat` on the domain at edge weight `params.p()`, by
/// enumerating the free edges under Dobrushin boundary conditions.
pub fn observable_fields_at(d: &DobrushinDomain, params: ModelParams) -> Result<(ObservableField, ObservableField)> {
    let partition = BoundaryPartition::free(d.primal());
    let enumeration = Enumeration {
        graph: d.primal(),
        partition: &partition,
        params,
        free: d.free_edges().to_vec(),
        base: d.base_configuration(),
    };
    let n = d.edges().len();
    let table = PhaseTable::new(params.q(), n)?;
    type Acc = (Vec<CompensatedSum>, Vec<usize>, Vec<i32>, Option<Error>);
    let (acc, z) = enumeration.run(
        || -> Acc { (vec![CompensatedSum::default(); 4 * n], Vec::new(), Vec::new(), None) },
        |acc, w, weight| {
            let (sums, path, turns, err) = acc;
            if err.is_some() {
                return;
            }
            if let Err(e) = accumulate_path(d, w, &table, weight, path, turns, |e, f, fh| {
                sums[4 * e].add(f.re);
                sums[4 * e + 1].add(f.im);
                sums[4 * e + 2].add(fh.re);
                sums[4 * e + 3].add(fh.im);
            }) {
                *err = Some(e);
            }
        },
        |a, b| {
            a.0.iter_mut().zip(&b.0).for_each(|(x, y)| x.merge(y));
            if a.3.is_none() {
                a.3 = b.3;
            }
        },
    )?;
    if let Some(e) = acc.3 {
        return Err(e);
    }
    let sums = acc.0;
    let field = |k: usize, variant| ObservableField {
        variant,
        q: params.q(),
        p: params.p(),
        values: (0..n)
            .map(|e| Complex64::new(sums[4 * e + k].value() / z, sums[4 * e + k + 1].value() / z))
            .collect(),
        std_err: None,
    };
    Ok((field(0, Variant::F), field(2, Variant::FHat)))
}

/// Exact `F` and `F-hat` at the self-dual point `p_c(q)`.
pub fn observable_fields(d: &DobrushinDomain, q: f64) -> Result<(ObservableField, ObservableField)> {
    observable_fields_at(d, ModelParams::critical(q)?)
}

/// Exact field of one variant at `p_c(q)`.
pub fn observable_field(d: &DobrushinDomain, q: f64, variant: Variant) -> Result<ObservableField> {
    let (f, f_hat) = observable_fields(d, q)?;
    Ok(match variant {
        Variant::F => f,
        Variant::FHat => f_hat,
    })
}

/// Contour through the four primal and dual vertices around a medial
/// vertex, counterclockwise, closed.
pub fn elementary_contour(m: Coord) -> Vec<Coord> {
    vec![m.offset(1, 0), m.offset(0, 1), m.offset(-1, 0), m.offset(0, -1), m.offset(1, 0)]
}

/// `sum (z_{i+1} - z_i) F(e_i)` where `e_i` is the medial edge crossing the
/// segment `z_i z_{i+1}`. Points are primal and dual vertices in half units.
pub fn contour_integral(d: &DobrushinDomain, field: &ObservableField, contour: &[Coord]) -> Result<Complex64> {
    if contour.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if contour.first() != contour.last() {
        return Err(Error::InvalidContour("contour is not closed".into()));
    }
    let mut seen = HashSet::new();
    let mut total = Complex64::new(0.0, 0.0);
    for pair in contour.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if (b.x - a.x).abs() != 1 || (b.y - a.y).abs() != 1 {
            return Err(Error::InvalidContour(format!("{a} and {b} are not neighbours")));
        }
        if !seen.insert(if a < b { (a, b) } else { (b, a) }) {
            return Err(Error::InvalidContour(format!("segment {a} - {b} repeated")));
        }
        let e = d
            .edge_by_key((a.x + b.x, a.y + b.y))
            .ok_or_else(|| Error::InvalidContour(format!("segment {a} - {b} crosses no medial edge of the domain")))?;
        let dz = Complex64::new((b.x - a.x) as f64 / 2.0, (b.y - a.y) as f64 / 2.0);
        total += dz * field.values[e];
    }
    Ok(total)
}

/// `F(A) - F(C) - i(F(D) - F(B))` with `A, B, C, D` the edges at `m` listed
/// counterclockwise from the south-east.
pub fn cr_residual(d: &DobrushinDomain, field: &ObservableField, m: Coord) -> Result<Complex64> {
    let at = |dx: i32, dy: i32| {
        d.edge_by_key((2 * m.x + dx, 2 * m.y + dy))
            .map(|e| field.values[e])
            .ok_or_else(|| Error::InvalidVertexSet(format!("{m} lacks an incident edge")))
    };
    let (a, b, c, dd) = (at(1, -1)?, at(1, 1)?, at(-1, 1)?, at(-1, -1)?);
    Ok(a - c - Complex64::i() * (dd - b))
}

/// Medial vertices with all four incident edges in the domain or among
/// `e_a`, `e_b`.
pub fn full_vertices(d: &DobrushinDomain) -> Vec<Coord> {
    (0..d.medial_vertices().len())
        .filter(|&m| d.available_degree(m) == 4)
        .map(|m| d.medial_vertices()[m])
        .collect()
}

/// `sum eta(e) F(e)` over edges with exactly one endpoint in `set`, where
/// `eta` is `+1` for edges pointing into the set and `-1` otherwise.
pub fn vertex_sum_check(d: &DobrushinDomain, field: &ObservableField, set: &[Coord]) -> Result<Complex64> {
    Ok(vertex_sum_functional(d, set)?
        .into_iter()
        .map(|(e, eta)| field.values[e] * eta)
        .sum())
}

/// Monte Carlo estimate of the observables and of linear functionals of
/// `F-hat`.
#[derive(Clone, Debug)]
pub struct SampledObservable {
    pub f: ObservableField,
    pub f_hat: ObservableField,
    /// Real and imaginary parts of each functional.
    pub functionals: Vec<(Estimate, Estimate)>,
}

/// Functional `sum eta(e) F-hat(e)` of [`vertex_sum_check`] as
/// `(edge, eta)` pairs.
pub fn vertex_sum_functional(d: &DobrushinDomain, set: &[Coord]) -> Result<Vec<(usize, f64)>> {
    let mut inside = vec![false; d.medial_vertices().len()];
    for &c in set {
        let m = d
            .medial_vertex(c)
            .ok_or_else(|| Error::InvalidVertexSet(format!("{c} is not a medial vertex of the domain")))?;
        if d.available_degree(m) != 4 {
            return Err(Error::InvalidVertexSet(format!("{c} has fewer than four available edges")));
        }
        inside[m] = true;
    }
    let is_in = |v: Option<usize>| v.is_some_and(|m| inside[m]);
    Ok(d.edges()
        .iter()
        .enumerate()
        .filter_map(|(e, edge)| match (is_in(edge.tail_id), is_in(edge.head_id)) {
            (false, true) => Some((e, 1.0)),
            (true, false) => Some((e, -1.0)),
            _ => None,
        })
        .collect())
}

/// Samples the Dobrushin measure at `params` and averages the path phases.
pub fn sample_observable(
    d: &DobrushinDomain,
    params: ModelParams,
    cfg: &RunConfig,
    seed: u64,
    functionals: &[Vec<(usize, f64)>],
) -> Result<SampledObservable> {
    let mut state = ChainState::dobrushin(d, params, seed, 0)?;
    let n = d.edges().len();
    let table = PhaseTable::new(params.q(), n)?;
    // Burn-in on the indicator that the path passes each free-arc edge.
    let burn = match cfg.burn_in {
        BurnIn::Sweeps(b) => b,
        BurnIn::Auto => {
            let pilot = estimate_with(
                &mut state,
                1,
                &RunConfig {
                    sweeps: (cfg.sweeps / 10).clamp(64, 2000),
                    burn_in: BurnIn::Sweeps(0),
                    batches: 8,
                    ..*cfg
                },
                |s, out| {
                    let mut len = 0;
                    explore(d, s.config(), |_, _| len += 1);
                    out[0] = len as f64;
                },
                None,
            )?;
            pilot.burn_in
        }
    };
    for _ in 0..burn {
        state.sweep(cfg.sampler)?;
    }
    if cfg.batches < 8 || cfg.sweeps < cfg.batches as u64 {
        return Err(Error::InvalidParams("need sweeps >= batches >= 8".into()));
    }
    let slots = 4 * n + 2 * functionals.len();
    let mut acc = BatchMeans::new(slots, cfg.sweeps, cfg.batches);
    let (mut path, mut turns) = (Vec::new(), Vec::new());
    let mut hat = vec![Complex64::new(0.0, 0.0); n];
    let mut touched = Vec::new();
    for _ in 0..cfg.sweeps {
        for _ in 0..cfg.thin.max(1) {
            state.sweep(cfg.sampler)?;
        }
        if acc.counting() {
            touched.clear();
            accumulate_path(d, state.config(), &table, 1.0, &mut path, &mut turns, |e, f, fh| {
                acc.add(4 * e, f.re);
                acc.add(4 * e + 1, f.im);
                acc.add(4 * e + 2, fh.re);
                acc.add(4 * e + 3, fh.im);
                hat[e] = fh;
                touched.push(e);
            })?;
            for (k, fun) in functionals.iter().enumerate() {
                let v: Complex64 = fun.iter().map(|&(e, eta)| hat[e] * eta).sum();
                acc.add(4 * n + 2 * k, v.re);
                acc.add(4 * n + 2 * k + 1, v.im);
            }
            for &e in &touched {
                hat[e] = Complex64::new(0.0, 0.0);
            }
        }
        acc.end_sample();
    }
    let est = acc.finish(seed);
    let field = |k: usize, variant| ObservableField {
        variant,
        q: params.q(),
        p: params.p(),
        values: (0..n).map(|e| Complex64::new(est[4 * e + k].mean, est[4 * e + k + 1].mean)).collect(),
        std_err: Some((0..n).map(|e| (est[4 * e + k].std_error, est[4 * e + k + 1].std_error)).collect()),
    };
    Ok(SampledObservable {
        f: field(0, Variant::F),
        f_hat: field(2, Variant::FHat),
        functionals: (0..functionals.len()).map(|k| (est[4 * n + 2 * k], est[4 * n + 2 * k + 1])).collect(),
    })
}
