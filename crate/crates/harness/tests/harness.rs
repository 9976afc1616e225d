use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;
use rcm_core::lattice::{build_box, BoundaryKind, Coord};
use rcm_core::mc::{BurnIn, RunConfig, Sampler};
use rcm_core::{critical_p, ModelParams};
use rcmlab::config::parse_config_text;
use rcmlab::*;

fn config(text: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_map(&parse_config_text(text)?)
}

#[test]
fn config_text_defaults_and_errors() {
    let cfg = config("experiment = annulus # trailing comment\nq = 3\nsizes = 2, 4\n\n# line comment\n").unwrap();
    assert_eq!(cfg.experiment, Experiment::Annulus);
    assert_eq!(cfg.sizes, vec![2, 4]);
    assert_eq!(cfg.p_value(), critical_p(3.0));
    assert_eq!(cfg.sampler_value(), Sampler::SwendsenWang);
    assert_eq!(config("experiment = annulus\nq = 1.5").unwrap().sampler_value(), Sampler::ChayesMachta);
    assert!(matches!(config("experiment = nope"), Err(Error::UnknownExperiment(_))));
    for bad in [
        "q = 2",
        "experiment = annulus\ncolour = red",
        "experiment = annulus\nsizes = 4,2",
        "experiment = annulus\nsizes = 0,2",
        "experiment = annulus\nq = 0.5",
        "experiment = annulus\np = 1.5",
        "experiment = annulus\nbatches = 4",
        "experiment = spiral_decay\nks = 1,60",
        "experiment = annulus\nline without equals",
    ] {
        assert!(config(bad).is_err(), "{bad}");
    }
    assert!(config("experiment = susceptibility\nq = 0.5\nmode = exact").is_ok());
}

#[test]
fn config_hash_tracks_every_field() {
    let base = ExperimentConfig::new(Experiment::DecayFree, 2.0);
    let mut variants = Vec::new();
    let mut push = |f: &dyn Fn(&mut ExperimentConfig)| {
        let mut c = base.clone();
        f(&mut c);
        variants.push(c);
    };
    push(&|c| c.experiment = Experiment::Annulus);
    push(&|c| c.q = 3.0);
    push(&|c| c.p = Some(0.3));
    push(&|c| c.sizes = vec![8, 16]);
    push(&|c| c.bc = BoundaryKind::Wired);
    push(&|c| c.sampler = Some(Sampler::HeatBath));
    push(&|c| c.sweeps += 1);
    push(&|c| c.burn_in = BurnIn::Sweeps(10));
    push(&|c| c.batches += 1);
    push(&|c| c.seed += 1);
    push(&|c| c.out = Some("x.csv".into()));
    push(&|c| c.alpha = 2.0);
    push(&|c| c.ratio = 3);
    push(&|c| c.ks = vec![1, 2]);
    push(&|c| c.height += 1);
    push(&|c| c.mode = Mode::Exact);
    let mut hashes: Vec<String> = variants.iter().map(|c| c.hash()).collect();
    hashes.push(base.hash());
    let n = hashes.len();
    hashes.sort();
    hashes.dedup();
    assert_eq!(hashes.len(), n);
    assert_eq!(base.hash(), base.clone().hash());
    // Spelling out a default leaves the configuration unchanged.
    let mut explicit = base.clone();
    explicit.p = Some(critical_p(2.0));
    explicit.sampler = Some(Sampler::SwendsenWang);
    assert_eq!(explicit.hash(), base.hash());
    let reparsed = ExperimentConfig::from_map(&parse_config_text(&base.canonical()).unwrap()).unwrap();
    assert_eq!(reparsed.hash(), base.hash());
}

fn sample_report() -> Report {
    Report::new(
        "abc".into(),
        vec![
            Row {
                experiment: "annulus".into(),
                n: 4,
                quantity: "circuit".into(),
                mean: 0.1 + 0.2,
                std_err: 1e-17,
                seed: 9,
            },
            Row {
                experiment: "annulus".into(),
                n: 8,
                quantity: "circuit".into(),
                mean: f64::MIN_POSITIVE,
                std_err: 0.0,
                seed: u64::MAX,
            },
        ],
    )
}

#[test]
fn reports_round_trip() {
    let report = sample_report();
    let mut buf = Vec::new();
    write_report(&report, &mut buf).unwrap();
    assert_eq!(parse_report(&String::from_utf8(buf).unwrap()).unwrap(), report);

    let empty = Report::new("h".into(), vec![]);
    let mut buf = Vec::new();
    write_report(&empty, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(parse_report(&text).unwrap(), empty);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    emit_report(&report, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    emit_report(&report, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);

    assert!(parse_report("experiment,n\n").is_err());
    assert!(parse_report("# version = 1\n# config_hash = x\nexperiment,n,quantity,mean,std_err,seed\na,b,c,d,e,f\n").is_err());
    let mut bad = sample_report();
    bad.rows[0].quantity = "a,b".into();
    assert!(write_report(&bad, Vec::new()).is_err());
}

#[test]
fn experiments_are_reproducible() {
    for experiment in Experiment::ALL {
        let mut cfg = ExperimentConfig::new(experiment, 2.0);
        cfg.sizes = vec![2, 3];
        cfg.sweeps = 400;
        cfg.batches = 10;
        cfg.ks = vec![1, 2];
        cfg.height = 3;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b, "{experiment}");
        assert_eq!(a.config_hash, cfg.hash());
        assert!(a.rows.iter().all(|r| r.experiment == experiment.name() && r.seed == cfg.seed));
        let mut other = cfg.clone();
        other.seed = 2;
        assert_ne!(run_experiment(&other).unwrap().rows, a.rows, "{experiment}");
    }
}

#[test]
fn experiment_rows_follow_the_schedule() {
    let mut cfg = ExperimentConfig::new(Experiment::SpiralDecay, 9.0);
    cfg.sizes = vec![2, 3];
    cfg.ks = vec![1, 2, 3];
    cfg.height = 4;
    cfg.sweeps = 200;
    cfg.batches = 10;
    let report = run_experiment(&cfg).unwrap();
    let labels: Vec<(u32, &str)> = report.rows.iter().map(|r| (r.n, r.quantity.as_str())).collect();
    assert_eq!(
        labels,
        [(2, "two_point_k1"), (2, "two_point_k2"), (2, "two_point_k3"), (3, "two_point_k1"), (3, "two_point_k2"), (3, "two_point_k3")]
    );
    let mut cfg = ExperimentConfig::new(Experiment::DecayFree, 1.0);
    cfg.p = Some(0.4);
    cfg.sizes = vec![2];
    cfg.mode = Mode::Exact;
    let report = run_experiment(&cfg).unwrap_err();
    assert!(matches!(report, Error::Core(rcm_core::Error::TooLarge { .. })), "{report:?}");
}

/// Exact crossing and one-arm probabilities on graphs small enough to
/// enumerate, against the same events computed independently here.
#[test]
fn exact_mode_matches_direct_enumeration() {
    let mut cfg = ExperimentConfig::new(Experiment::CrossingFree, 1.0);
    cfg.p = Some(0.5);
    cfg.sizes = vec![1];
    cfg.alpha = 2.0;
    cfg.mode = Mode::Exact;
    let row = &run_experiment(&cfg).unwrap().rows[0];
    // A horizontal crossing of the 3 x 2 ladder at p = 1/2.
    let ladder = bernoulli_exact(3, 2, |open, w, h| crosses(open, w, h));
    assert!((row.mean - ladder).abs() < 1e-12, "{} vs {ladder}", row.mean);
    assert_eq!(row.std_err, 0.0);
}

/// Probability at `p = 1/2` of an event on the `w x h` vertex grid, by
/// brute force over edge subsets. Edges are horizontal first, row by row.
fn bernoulli_exact(w: usize, h: usize, event: impl Fn(&[bool], usize, usize) -> bool) -> f64 {
    let m = (w - 1) * h + w * (h - 1);
    let hits = (0..1u64 << m)
        .filter(|mask| {
            let open: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
            event(&open, w, h)
        })
        .count();
    hits as f64 / (1u64 << m) as f64
}

fn crosses(open: &[bool], w: usize, h: usize) -> bool {
    let horiz = |x: usize, y: usize| open[y * (w - 1) + x];
    let vert = |x: usize, y: usize| open[(w - 1) * h + y * w + x];
    let mut seen = vec![false; w * h];
    let mut queue: VecDeque<(usize, usize)> = (0..h).map(|y| (0, y)).collect();
    for y in 0..h {
        seen[y * w] = true;
    }
    while let Some((x, y)) = queue.pop_front() {
        if x == w - 1 {
            return true;
        }
        let mut step = |nx: usize, ny: usize, ok: bool| {
            if ok && !seen[ny * w + nx] {
                seen[ny * w + nx] = true;
                queue.push_back((nx, ny));
            }
        };
        step(x + 1, y, horiz(x, y));
        if x > 0 {
            step(x - 1, y, horiz(x - 1, y));
        }
        if y + 1 < h {
            step(x, y + 1, vert(x, y));
        }
        if y > 0 {
            step(x, y - 1, vert(x, y - 1));
        }
    }
    false
}

/// Independent Bernoulli percolation: does the origin of `[-2n, 2n]^2`
/// reach a vertex at sup-distance `n`?
fn bernoulli_one_arm(n: i32, p: f64, rng: &mut StdRng) -> bool {
    let r = 2 * n;
    let side = (2 * r + 1) as usize;
    let idx = |x: i32, y: i32| ((y + r) as usize) * side + (x + r) as usize;
    // Bonds are drawn lazily: each one is examined at most once.
    let mut bond = std::collections::HashMap::new();
    let mut seen = vec![false; side * side];
    let mut queue = VecDeque::from([(0i32, 0i32)]);
    seen[idx(0, 0)] = true;
    while let Some((x, y)) = queue.pop_front() {
        if x.abs().max(y.abs()) >= n {
            return true;
        }
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx.abs() > r || ny.abs() > r || seen[idx(nx, ny)] {
                continue;
            }
            let key = if (x, y) < (nx, ny) { (x, y, nx, ny) } else { (nx, ny, x, y) };
            if *bond.entry(key).or_insert_with(|| rng.gen_bool(p)) {
                seen[idx(nx, ny)] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    false
}

#[test]
fn decay_free_matches_an_independent_bernoulli_simulation() {
    let mut cfg = ExperimentConfig::new(Experiment::DecayFree, 1.0);
    cfg.p = Some(0.4);
    cfg.sizes = vec![3, 6];
    cfg.sweeps = 40_000;
    cfg.batches = 40;
    cfg.sampler = Some(Sampler::HeatBath);
    let report = run_experiment(&cfg).unwrap();
    let mut rng = StdRng::seed_from_u64(77);
    for row in report.series("one_arm") {
        let trials = 40_000;
        let hits = (0..trials).filter(|_| bernoulli_one_arm(row.n as i32, 0.4, &mut rng)).count();
        let phat = hits as f64 / trials as f64;
        let se = (row.std_err.powi(2) + phat * (1.0 - phat) / trials as f64).sqrt();
        assert!((row.mean - phat).abs() < 4.0 * se, "n = {}: {} vs {phat}", row.n, row.mean);
    }
    for (arm, rate) in report.series("one_arm").iter().zip(report.series("rate")) {
        assert!((rate.mean + arm.mean.ln() / arm.n as f64).abs() < 1e-15);
    }
}

#[test]
fn susceptibility_edge_cases_and_oracle() {
    let run = RunConfig::new(Sampler::HeatBath, 200, BurnIn::Sweeps(10), 10);
    for mode in [Mode::Exact, Mode::MonteCarlo] {
        let zero = susceptibility(1, ModelParams::new(0.0, 2.0).unwrap(), BoundaryKind::Free, mode, &run, 1, 0).unwrap();
        assert_eq!(zero.mean, 1.0);
        let full = susceptibility(1, ModelParams::new(1.0, 2.0).unwrap(), BoundaryKind::Free, mode, &run, 1, 0).unwrap();
        assert_eq!(full.mean, 9.0);
    }
    let wired = susceptibility(1, ModelParams::new(0.0, 2.0).unwrap(), BoundaryKind::Wired, Mode::Exact, &run, 1, 0).unwrap();
    assert_eq!(wired.mean, 1.0);

    // Oracle: weight every edge subset of the 3 x 3 box by p^o (1-p)^c 2^k.
    let g = build_box(1);
    let p = critical_p(2.0);
    let origin = g.vertex_at(Coord::site(0, 0)).unwrap();
    let m = g.num_edges();
    let (mut z, mut acc) = (0.0, 0.0);
    for mask in 0..1u32 << m {
        let mut label: Vec<usize> = (0..g.num_vertices()).collect();
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            if mask >> e & 1 == 1 {
                let (a, b) = (label[u], label[v]);
                for l in label.iter_mut() {
                    if *l == b {
                        *l = a;
                    }
                }
            }
        }
        let mut roots = label.clone();
        roots.sort();
        roots.dedup();
        let open = mask.count_ones() as i32;
        let weight = p.powi(open) * (1.0 - p).powi(m as i32 - open) * 2f64.powi(roots.len() as i32);
        z += weight;
        acc += weight * label.iter().filter(|&&l| l == label[origin]).count() as f64;
    }
    let chi = susceptibility(1, ModelParams::critical(2.0).unwrap(), BoundaryKind::Free, Mode::Exact, &run, 1, 0).unwrap();
    assert!((chi.mean - acc / z).abs() < 1e-12, "{} vs {}", chi.mean, acc / z);

    let long = RunConfig::new(Sampler::SwendsenWang, 100_000, BurnIn::Auto, 40);
    let mc = susceptibility(1, ModelParams::critical(2.0).unwrap(), BoundaryKind::Free, Mode::MonteCarlo, &long, 3, 0).unwrap();
    assert!(mc.z_score(acc / z) < 4.0, "{mc:?} vs {}", acc / z);
}

#[test]
fn susceptibility_grows_with_the_box() {
    let mut cfg = ExperimentConfig::new(Experiment::Susceptibility, 2.0);
    cfg.sizes = vec![2, 4, 8];
    cfg.sweeps = 20_000;
    let report = run_experiment(&cfg).unwrap();
    for pair in report.rows.windows(2) {
        let slack = 3.0 * (pair[0].std_err.powi(2) + pair[1].std_err.powi(2)).sqrt();
        assert!(pair[1].mean + slack >= pair[0].mean, "{pair:?}");
    }
}

#[test]
fn graph_specs() {
    assert_eq!(parse_graph_spec("box:2").unwrap().0.num_edges(), 40);
    assert_eq!(parse_graph_spec("rect:0,0,2,1").unwrap().0.num_edges(), 7);
    assert_eq!(parse_graph_spec("path:3").unwrap().0.num_edges(), 3);
    assert_eq!(parse_graph_spec("cover:1,1").unwrap().0.num_vertices(), 27);
    assert!(parse_graph_spec("box:-1").is_err());
    assert!(parse_graph_spec("rect:0,0,2").is_err());
    assert!(matches!(parse_graph_spec("/nonexistent/graph.txt"), Err(Error::Io(_))));

    let g = build_box(1);
    let xi = rcm_core::lattice::BoundaryPartition::wired(&g);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, rcm_core::lattice::write_graph(&g, Some(&xi))).unwrap();
    let (read, partition) = parse_graph_spec(path.to_str().unwrap()).unwrap();
    assert_eq!(read.num_edges(), 12);
    assert_eq!(partition.unwrap().kind(), BoundaryKind::Wired);
}
