use std::sync::Arc;

use rcm_core::events::{box1_catalog, EventPredicate};
use rcm_core::exact::{event_probabilities, exact_measure, potts_enumerate, PottsBoundary};
use rcm_core::lattice::{build_box, build_path, BoundaryPartition, FiniteGraph};
use rcm_core::loops::DobrushinDomain;
use rcm_core::mc::{
    estimate, estimate_chains, heatbath_transition_matrix, BurnIn, ChainState, RunConfig, Sampler,
};
use rcm_core::{critical_p, BondConfiguration, Error, ModelParams};

fn chain(g: &FiniteGraph, xi: &BoundaryPartition, p: f64, q: f64, seed: u64) -> ChainState {
    let params = ModelParams::new(p, q).unwrap();
    ChainState::new(Arc::new(g.clone()), xi.clone(), params, seed, 0).unwrap()
}

fn check_balance(g: &FiniteGraph, xi: &BoundaryPartition, p: f64, q: f64) {
    let state = chain(g, xi, p, q, 1);
    let pi = exact_measure(g, state.params(), xi).unwrap();
    let matrix = heatbath_transition_matrix(&state).unwrap();
    for (i, row) in matrix.iter().enumerate() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (j, &pij) in row.iter().enumerate() {
            let flow = pi[i] * pij - pi[j] * matrix[j][i];
            assert!(flow.abs() < 1e-12, "p={p} q={q} {i}->{j}: {flow}");
        }
    }
    for j in 0..pi.len() {
        let next: f64 = (0..pi.len()).map(|i| pi[i] * matrix[i][j]).sum();
        assert!((next - pi[j]).abs() < 1e-12);
    }
}

#[test]
fn heatbath_detailed_balance() {
    for g in [build_path(1), build_path(4)] {
        for xi in [BoundaryPartition::free(&g), BoundaryPartition::wired(&g)] {
            for (p, q) in [(0.3, 1.0), (0.5, 2.0), (0.7, 3.5), (critical_p(4.0), 4.0)] {
                check_balance(&g, &xi, p, q);
            }
        }
    }
    let g = build_box(1);
    let xi = BoundaryPartition::free(&g);
    assert!(matches!(heatbath_transition_matrix(&chain(&g, &xi, 0.5, 2.0, 0)), Err(Error::TooLarge { .. })));
}

#[test]
fn heatbath_conditional_probabilities() {
    let k2 = build_path(1);
    for p in [0.1, 0.5, 0.9] {
        let mut one = chain(&k2, &BoundaryPartition::free(&k2), p, 1.0, 0);
        assert!((one.open_probability(0) - p).abs() < 1e-15);
        let q = 2.5;
        let mut free = chain(&k2, &BoundaryPartition::free(&k2), p, q, 0);
        assert!((free.open_probability(0) - p / (p + q * (1.0 - p))).abs() < 1e-15);
        let mut wired = chain(&k2, &BoundaryPartition::wired(&k2), p, q, 0);
        assert!((wired.open_probability(0) - p).abs() < 1e-15);
    }
    let g = build_path(4);
    let mut s = chain(&g, &BoundaryPartition::free(&g), 0.5, 2.0, 0);
    s.set_config(BondConfiguration::from_bits(vec![true, true, false, true])).unwrap();
    assert!(!s.connected_without(2));
    assert!(!s.connected_without(0));
    s.set_config(BondConfiguration::open(4)).unwrap();
    assert!(!s.connected_without(1));
}

#[test]
fn pinned_edges_survive_every_sampler() {
    let d = DobrushinDomain::rectangle(0, -2, 2, 2, &[(0, 0)]).unwrap();
    let params = ModelParams::critical(2.0).unwrap();
    for sampler in [Sampler::HeatBath, Sampler::ChayesMachta, Sampler::SwendsenWang] {
        let mut s = ChainState::dobrushin(&d, params, 7, 0).unwrap();
        for _ in 0..200 {
            s.sweep(sampler).unwrap();
            for &e in d.wired_edges() {
                assert!(s.config().is_open(e));
            }
        }
    }
    let g = build_box(1);
    let mut s = chain(&g, &BoundaryPartition::free(&g), 0.5, 1.5, 3);
    s.pin(0, false);
    s.pin(5, true);
    for _ in 0..200 {
        s.sweep(Sampler::ChayesMachta).unwrap();
        assert!(!s.config().is_open(0) && s.config().is_open(5));
    }
}

#[test]
fn cluster_samplers_validate_q() {
    let g = build_box(1);
    let xi = BoundaryPartition::free(&g);
    assert!(matches!(chain(&g, &xi, 0.5, 0.5, 0).chayes_machta_step(), Err(Error::InvalidQ(_))));
    assert!(matches!(chain(&g, &xi, 0.5, 2.5, 0).swendsen_wang_step(), Err(Error::InvalidQ(_))));
    assert!(chain(&g, &xi, 0.5, 1.0, 0).chayes_machta_step().is_ok());
    assert!(chain(&g, &xi, 0.5, 3.0, 0).swendsen_wang_step().is_ok());
}

#[test]
fn swendsen_wang_open_edges_join_equal_colours() {
    let g = build_box(3);
    for xi in [BoundaryPartition::free(&g), BoundaryPartition::wired(&g)] {
        let mut s = chain(&g, &xi, critical_p(3.0), 3.0, 11);
        for _ in 0..100 {
            s.swendsen_wang_step().unwrap();
            let spins = s.last_spins();
            for (e, &[u, v]) in g.edges().iter().enumerate() {
                if s.config().is_open(e) {
                    assert_eq!(spins[u], spins[v]);
                }
            }
        }
    }
}

#[test]
fn swendsen_wang_spins_follow_the_wired_potts_law() {
    let g = build_path(1);
    let q = 3;
    let p = 0.6;
    let xi = BoundaryPartition::wired(&g);
    let exact = potts_enumerate(
        &g,
        q,
        -(1.0f64 - p).ln(),
        &PottsBoundary::Blocks {
            blocks: xi.nontrivial_blocks().cloned().collect(),
            pinned: vec![0],
            color: 0,
        },
    )
    .unwrap();
    let mut s = chain(&g, &xi, p, q as f64, 5);
    let n = 200_000;
    let mut counts = vec![0u64; exact.law.len()];
    for _ in 0..n {
        s.swendsen_wang_step().unwrap();
        let spins = s.last_spins();
        let index: usize = spins.iter().enumerate().map(|(v, &c)| c as usize * (q as usize).pow(v as u32)).sum();
        counts[index] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let prob = exact.law[i];
        let sd = (prob * (1.0 - prob) / n as f64).sqrt();
        assert!((c as f64 / n as f64 - prob).abs() <= 4.0 * sd + 1e-12, "state {i}");
    }
}

fn within_oracle(sampler: Sampler, q: f64, xi_wired: bool, sweeps: u64) {
    let g = build_box(1);
    let xi = if xi_wired { BoundaryPartition::wired(&g) } else { BoundaryPartition::free(&g) };
    let params = ModelParams::critical(q).unwrap();
    let events: Vec<EventPredicate> =
        box1_catalog().iter().map(|s| EventPredicate::resolve(s, &g).unwrap()).collect();
    let exact = event_probabilities(&g, params, &xi, &events).unwrap();
    let mut s = ChainState::new(Arc::new(g.clone()), xi, params, 2024, 0).unwrap();
    let cfg = RunConfig::new(sampler, sweeps, BurnIn::Auto, 50);
    let run = estimate(&mut s, &events, &cfg, None).unwrap();
    for ((ev, est), want) in events.iter().zip(&run.estimates).zip(&exact) {
        let z = est.z_score(*want);
        assert!(z.abs() < 4.0, "{} {} q={q}: {} vs {want} (z={z})", sampler.name(), ev.id(), est.mean);
    }
}

#[test]
fn samplers_match_the_oracle_on_the_small_box() {
    within_oracle(Sampler::HeatBath, 2.0, false, 40_000);
    within_oracle(Sampler::ChayesMachta, 1.5, false, 100_000);
    within_oracle(Sampler::ChayesMachta, 4.0, true, 100_000);
    within_oracle(Sampler::SwendsenWang, 2.0, true, 100_000);
    within_oracle(Sampler::SwendsenWang, 3.0, false, 100_000);
}

fn empirical_tv(sampler: Sampler, n: u64) -> (f64, f64) {
    let g = build_box(1);
    let xi = BoundaryPartition::free(&g);
    let params = ModelParams::critical(2.0).unwrap();
    let pi = exact_measure(&g, params, &xi).unwrap();
    let mut s = ChainState::new(Arc::new(g.clone()), xi, params, 9, 0).unwrap();
    for _ in 0..100 {
        s.sweep(sampler).unwrap();
    }
    let mut counts = vec![0u32; pi.len()];
    for _ in 0..n {
        s.sweep(sampler).unwrap();
        counts[s.config().to_mask() as usize] += 1;
    }
    let tv = 0.5 * counts.iter().zip(&pi).map(|(&c, &p)| (c as f64 / n as f64 - p).abs()).sum::<f64>();
    // Mean TV of n independent exact draws.
    let floor = 0.5
        * pi.iter()
            .map(|p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n as f64)).sqrt())
            .sum::<f64>();
    (tv, floor)
}

#[test]
#[ignore = "independent exact draws already average TV 0.025 at this size"]
fn cluster_samplers_total_variation_below_one_percent() {
    for sampler in [Sampler::ChayesMachta, Sampler::SwendsenWang] {
        let (tv, _) = empirical_tv(sampler, 1_000_000);
        assert!(tv < 0.01, "{}: tv = {tv}", sampler.name());
    }
}

#[test]
fn cluster_samplers_total_variation_at_the_noise_floor() {
    for sampler in [Sampler::ChayesMachta, Sampler::SwendsenWang] {
        let (tv, floor) = empirical_tv(sampler, 1_000_000);
        assert!(tv < 2.0 * floor, "{}: tv = {tv}, floor = {floor}", sampler.name());
    }
}

#[test]
fn wired_chain_dominates_free_chain_under_shared_uniforms() {
    let g = build_box(3);
    let params = ModelParams::critical(2.0).unwrap();
    let arc = Arc::new(g.clone());
    let mut free = ChainState::new(arc.clone(), BoundaryPartition::free(&g), params, 0, 0).unwrap();
    let mut wired = ChainState::new(arc, BoundaryPartition::wired(&g), params, 0, 0).unwrap();
    wired.set_config(BondConfiguration::open(g.num_edges())).unwrap();
    let mut driver = chain(&g, &BoundaryPartition::free(&g), 0.5, 1.0, 42);
    for _ in 0..300 {
        for e in 0..g.num_edges() {
            let u = driver.uniform();
            free.heatbath_update_with(e, u);
            wired.heatbath_update_with(e, u);
        }
        assert!(free.config().le(wired.config()));
    }
}

#[test]
fn estimates_are_reproducible() {
    let g = build_box(2);
    let xi = BoundaryPartition::wired(&g);
    let events = vec![EventPredicate::parse("conn:0,0:1,1", &g).unwrap(), EventPredicate::parse("onearm:2", &g).unwrap()];
    let params = ModelParams::critical(2.0).unwrap();
    let make = |c: u64| ChainState::new(Arc::new(g.clone()), xi.clone(), params, 77, c);
    for sampler in [Sampler::HeatBath, Sampler::SwendsenWang] {
        let cfg = RunConfig::new(sampler, 2000, BurnIn::Auto, 10);
        let a = estimate_chains(4, make, &events, &cfg).unwrap();
        let b = estimate_chains(4, make, &events, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|e| e.std_error >= 0.0 && e.n_samples == 8000));
    }
}

#[test]
fn estimate_edge_cases() {
    let g = build_box(3);
    let xi = BoundaryPartition::free(&g);
    let events = vec![EventPredicate::parse("conn:-3,-3:3,3", &g).unwrap()];
    let mut s = chain(&g, &xi, 0.0, 1.0, 1);
    let run = estimate(&mut s, &events, &RunConfig::new(Sampler::HeatBath, 100, BurnIn::Sweeps(5), 10), None).unwrap();
    assert_eq!(run.estimates[0].mean, 0.0);
    assert_eq!(run.estimates[0].std_error, 0.0);
    assert!(estimate(&mut s, &events, &RunConfig::new(Sampler::HeatBath, 100, BurnIn::Auto, 4), None).is_err());
    assert!(estimate(&mut s, &events, &RunConfig::new(Sampler::HeatBath, 5, BurnIn::Auto, 8), None).is_err());

    let mut log = Vec::new();
    let mut s = chain(&g, &xi, 0.5, 1.0, 1);
    estimate(&mut s, &events, &RunConfig::new(Sampler::HeatBath, 16, BurnIn::Sweeps(0), 8), Some(&mut log)).unwrap();
    let text = String::from_utf8(log).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sweep,event_id,value"));
    assert_eq!(lines.next(), Some("1,conn:-3,-3:3,3,0"));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn bernoulli_square_crossing_is_balanced() {
    let g = build_box(8);
    let xi = BoundaryPartition::free(&g);
    let events = vec![EventPredicate::parse("Ch:-8,-8:8,8", &g).unwrap()];
    let mut s = chain(&g, &xi, 0.5, 1.0, 3);
    let run = estimate(&mut s, &events, &RunConfig::new(Sampler::ChayesMachta, 4000, BurnIn::Sweeps(10), 20), None).unwrap();
    let m = run.estimates[0].mean;
    assert!((0.25..=0.75).contains(&m), "{m}");
}
