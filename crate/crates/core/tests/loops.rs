use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use rcm_core::lattice::{Coord, FiniteGraph};
use rcm_core::loops::*;
use rcm_core::{critical_p, BondConfiguration, Error, ModelParams};

fn r(n: i32) -> DobrushinDomain {
    DobrushinDomain::rectangle(0, -n, n, n, &[(0, 0)]).unwrap()
}

/// 2x2-vertex square wired at one corner: four free edges.
fn square() -> DobrushinDomain {
    DobrushinDomain::rectangle(0, 0, 1, 1, &[(0, 0)]).unwrap()
}

fn configurations(d: &DobrushinDomain) -> impl Iterator<Item = BondConfiguration> + '_ {
    (0u64..1 << d.free_edges().len()).map(move |mask| {
        let mut w = d.base_configuration();
        for (i, &e) in d.free_edges().iter().enumerate() {
            w.set(e, (mask >> i) & 1 == 1);
        }
        w
    })
}

/// Component labels by depth-first search over open edges.
fn components(g: &FiniteGraph, w: &BondConfiguration) -> Vec<usize> {
    let mut label = vec![usize::MAX; g.num_vertices()];
    let mut next = 0;
    for s in 0..g.num_vertices() {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &e in g.incident(v) {
                let u = g.other(e, v);
                if w.is_open(e) && label[u] == usize::MAX {
                    label[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    label
}

/// Dobrushin weight of `w` counted independently of the library.
fn weight(d: &DobrushinDomain, w: &BondConfiguration, p: f64, q: f64) -> f64 {
    let labels = components(d.primal(), w);
    let k = labels.iter().collect::<BTreeSet<_>>().len();
    let open = d.free_edges().iter().filter(|&&e| w.is_open(e)).count();
    p.powi(open as i32) * (1.0 - p).powi((d.free_edges().len() - open) as i32) * q.powi(k as i32)
}

fn heads(d: &DobrushinDomain, path: &[usize]) -> Vec<Coord> {
    path.iter().map(|&e| d.edges()[e].head).collect()
}

#[test]
fn extreme_configurations_follow_the_arcs() {
    for n in 1..=3 {
        let d = r(n);
        let closed = trace_loops(&d, &d.base_configuration()).unwrap();
        let path = closed.path();
        assert_eq!(heads(&d, &path[..path.len() - 1]), d.arc_ba());
        let mut open = d.base_configuration();
        for &e in d.free_edges() {
            open.set(e, true);
        }
        let dec = trace_loops(&d, &open).unwrap();
        let path = dec.path();
        assert_eq!(heads(&d, &path[..path.len() - 1]), d.arc_ab());
        // Loops of the all-open configuration surround the dual vertices.
        for l in dec.loops() {
            assert_eq!(l.len(), 4);
        }
        assert_eq!(dec.loops().len(), 2 * (n * n) as usize);
    }
}

#[test]
fn square_decompositions_cover_every_edge_once() {
    let d = square();
    assert_eq!(d.free_edges().len(), 4);
    let mut relation = BTreeSet::new();
    let mut seen = 0;
    for w in configurations(&d) {
        let dec = trace_loops(&d, &w).unwrap();
        assert_eq!(dec.path()[0], d.e_a());
        assert_eq!(*dec.path().last().unwrap(), d.e_b());
        assert_eq!(dec.traversals(), d.edges().len());
        let mut passes = vec![0; d.medial_vertices().len()];
        let mut used = vec![0; d.edges().len()];
        for &e in dec.path().iter().chain(dec.loops().iter().flatten()) {
            used[e] += 1;
            if let Some(h) = d.edges()[e].head_id {
                passes[h] += 1;
            }
        }
        assert!(used.iter().all(|&u| u == 1));
        for (m, &c) in passes.iter().enumerate() {
            assert_eq!(2 * c, d.available_degree(m));
        }
        // Loop count against the Euler relation: loops - 2k - o is constant.
        let k = components(d.primal(), &w).iter().collect::<BTreeSet<_>>().len() as i64;
        let o = d.free_edges().iter().filter(|&&e| w.is_open(e)).count() as i64;
        relation.insert(dec.loops().len() as i64 - 2 * k - o);
        seen += 1;
    }
    assert_eq!(seen, 16);
    assert_eq!(relation.len(), 1);
}

#[test]
fn loop_count_relation_on_larger_domains() {
    for d in [r(1), DobrushinDomain::rectangle(0, 0, 2, 2, &[(0, 0), (1, 0)]).unwrap()] {
        let mut relation = BTreeSet::new();
        for w in configurations(&d) {
            let dec = trace_loops(&d, &w).unwrap();
            let k = components(d.primal(), &w).iter().collect::<BTreeSet<_>>().len() as i64;
            let o = d.free_edges().iter().filter(|&&e| w.is_open(e)).count() as i64;
            relation.insert(dec.loops().len() as i64 - 2 * k - o);
        }
        assert_eq!(relation.len(), 1);
    }
}

/// Arc edges on the free arc, with the primal vertex on their left.
fn free_arc_edges(d: &DobrushinDomain) -> Vec<(usize, Coord)> {
    d.arc_ab()
        .windows(2)
        .map(|w| {
            let e = d.edge_by_key((w[0].x + w[1].x, w[0].y + w[1].y)).unwrap();
            let (tail, head) = (w[0], w[1]);
            // The primal vertex on the left shares one coordinate with each end.
            let v = if tail.x.rem_euclid(2) == 1 {
                Coord::half(head.x, tail.y)
            } else {
                Coord::half(tail.x, head.y)
            };
            (e, v)
        })
        .collect()
}

#[test]
fn free_arc_edge_on_path_iff_connected_to_wired_arc() {
    for d in [square(), r(1)] {
        let arc = free_arc_edges(&d);
        let a = d.a();
        for w in configurations(&d) {
            let dec = trace_loops(&d, &w).unwrap();
            let labels = components(d.primal(), &w);
            for &(e, x) in &arc {
                let xv = d.primal().vertex_at(x).unwrap();
                assert_eq!(dec.on_path(e), labels[xv] == labels[a], "edge {e} vertex {x}");
            }
        }
    }
}

#[test]
fn windings() {
    let d = r(2);
    let mut boundary: HashMap<usize, BTreeSet<i32>> = HashMap::new();
    let arc_edges: Vec<usize> = [d.arc_ab(), d.arc_ba()]
        .iter()
        .flat_map(|arc| arc.windows(2).map(|w| d.edge_by_key((w[0].x + w[1].x, w[0].y + w[1].y)).unwrap()))
        .collect();
    for w in configurations(&d).step_by(97) {
        let dec = trace_loops(&d, &w).unwrap();
        assert_eq!(dec.winding(d.e_b()), Winding(0));
        assert_eq!(dec.winding(d.e_a()), Winding(3));
        for e in 0..d.edges().len() {
            if !dec.on_path(e) {
                assert_eq!(dec.winding(e), Winding(0));
            }
        }
        for &e in &arc_edges {
            if dec.on_path(e) {
                boundary.entry(e).or_default().insert(dec.winding(e).quarter_turns());
            }
        }
        // Turning number of the full path agrees with its end winding.
        let dirs: Vec<usize> = dec.path().iter().map(|&e| d.edges()[e].dir).collect();
        assert_eq!(path_winding(&dirs), dec.winding(d.e_a()));
    }
    assert!(!boundary.is_empty());
    for (e, set) in boundary {
        assert_eq!(set.len(), 1, "winding of boundary edge {e} is not deterministic");
    }
}

#[test]
fn boundary_values_of_the_observable() {
    let d = square();
    for q in [1.0, 2.0, 3.0, 4.0] {
        let (f, f_hat) = observable_fields(&d, q).unwrap();
        assert!(f.is_exact() && f.is_critical());
        if q == 4.0 {
            assert_eq!(f_hat.values[d.e_b()], Complex64::new(0.0, 0.0));
        } else {
            assert!((f_hat.values[d.e_b()] - 1.0).norm() < 1e-14);
            assert!(f_hat.values.iter().all(|v| v.norm() <= 1.0 + 1e-12));
        }
        let p = critical_p(q);
        let s = spin_params(q).unwrap();
        let mut z = 0.0;
        let mut on = HashMap::<usize, f64>::new();
        let mut wind = HashMap::<usize, i32>::new();
        for w in configurations(&d) {
            let x = weight(&d, &w, p, q);
            z += x;
            let dec = trace_loops(&d, &w).unwrap();
            for &(e, _) in &free_arc_edges(&d) {
                if dec.on_path(e) {
                    *on.entry(e).or_default() += x;
                    wind.insert(e, dec.winding(e).quarter_turns());
                }
            }
        }
        for (e, mass) in on {
            let turns = wind[&e] as f64 * std::f64::consts::FRAC_PI_2;
            let phase = if q == 4.0 {
                Complex64::new(turns, 0.0)
            } else {
                (Complex64::i() * s.sigma_hat * turns).exp()
            };
            assert!((f_hat.values[e] - phase * (mass / z)).norm() < 1e-13, "q={q} e={e}");
        }
    }
}

#[test]
fn rectangle_marked_edges_identity() {
    for q in [1.0, 2.0, 3.0] {
        let d = r(1);
        let (_, f_hat) = observable_fields(&d, q).unwrap();
        let s = spin_params(q).unwrap();
        let want = (Complex64::i() * s.sigma_hat * (3.0 * std::f64::consts::FRAC_PI_2)).exp() - 1.0;
        assert!((f_hat.values[d.e_a()] - f_hat.values[d.e_b()] - want).norm() < 1e-13);
    }
}

/// Contour around a primal vertex through the eight nearest points.
fn contour_around_site(v: Coord) -> Vec<Coord> {
    [(1, 1), (2, 0), (1, -1), (0, -2), (-1, -1), (-2, 0), (-1, 1), (0, 2), (1, 1)]
        .iter()
        .map(|&(dx, dy)| v.offset(dx, dy))
        .collect()
}

fn vanishing_domains() -> Vec<DobrushinDomain> {
    vec![
        square(),
        r(1),
        DobrushinDomain::rectangle(0, 0, 1, 1, &[(0, 0), (1, 0), (1, 1)]).unwrap(),
        DobrushinDomain::rectangle(0, 0, 2, 3, &[(0, 0), (1, 0)]).unwrap(),
        DobrushinDomain::rectangle(0, 0, 2, 4, &[(0, 0), (1, 0), (2, 0)]).unwrap(),
    ]
}

fn worst_residual(d: &DobrushinDomain, params: ModelParams) -> f64 {
    let (f, f_hat) = observable_fields_at(d, params).unwrap();
    let full = full_vertices(d);
    let mut worst: f64 = 0.0;
    for &m in &full {
        worst = worst.max(contour_integral(d, &f, &elementary_contour(m)).unwrap().norm());
        worst = worst.max(cr_residual(d, &f, m).unwrap().norm());
        worst = worst.max(vertex_sum_check(d, &f_hat, &[m]).unwrap().norm());
    }
    for v in d.primal().coords() {
        if let Ok(c) = contour_integral(d, &f, &contour_around_site(*v)) {
            worst = worst.max(c.norm());
        }
    }
    worst.max(vertex_sum_check(d, &f_hat, &full).unwrap().norm())
}

#[test]
fn contour_integrals_vanish_at_criticality() {
    for d in vanishing_domains() {
        assert!(d.free_edges().len() <= 20);
        for q in [1.0, 2.0, 3.0, 4.0] {
            let worst = worst_residual(&d, ModelParams::critical(q).unwrap());
            assert!(worst < 1e-10, "q={q}: residual {worst:e}");
        }
    }
}

#[test]
fn contour_integrals_do_not_vanish_off_criticality() {
    let d = r(1);
    let params = ModelParams::new(0.3, 2.0).unwrap();
    let (f, _) = observable_fields_at(&d, params).unwrap();
    assert!(!f.is_critical());
    assert!(worst_residual(&d, params) > 1e-4);
}

#[test]
fn contour_and_vertex_set_errors() {
    let d = r(1);
    let (f, _) = observable_fields(&d, 2.0).unwrap();
    assert_eq!(contour_integral(&d, &f, &[]).unwrap(), Complex64::new(0.0, 0.0));
    let open = [Coord::half(2, 0), Coord::half(1, 1)];
    assert!(matches!(contour_integral(&d, &f, &open), Err(Error::InvalidContour(_))));
    let far = elementary_contour(Coord::half(41, 0));
    assert!(matches!(contour_integral(&d, &f, &far), Err(Error::InvalidContour(_))));
    let jump = [Coord::half(0, 0), Coord::half(2, 0), Coord::half(0, 0)];
    assert!(matches!(contour_integral(&d, &f, &jump), Err(Error::InvalidContour(_))));
    assert!(matches!(vertex_sum_check(&d, &f, &[Coord::half(9, 0)]), Err(Error::InvalidVertexSet(_))));
    let corner = d.arc_ab()[1];
    if d.available_degree(d.medial_vertex(corner).unwrap()) < 4 {
        assert!(matches!(vertex_sum_check(&d, &f, &[corner]), Err(Error::InvalidVertexSet(_))));
    }
}

#[test]
fn field_csv() {
    let d = square();
    let (f, _) = observable_fields(&d, 2.0).unwrap();
    let mut out = Vec::new();
    f.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("medial_edge_id,re,im,std_err_re,std_err_im"));
    assert_eq!(lines.count(), d.edges().len());
}

#[test]
fn slit_domains_continue_the_exploration_path() {
    let d = r(2);
    let (mut accepted, mut total) = (0, 0);
    for w in configurations(&d).step_by(4099) {
        let dec = trace_loops(&d, &w).unwrap();
        let gamma: Vec<(Coord, Coord)> = dec.path().iter().map(|&e| (d.edges()[e].tail, d.edges()[e].head)).collect();
        for steps in 1..gamma.len() - 1 {
            total += 1;
            let Ok((slit, restricted)) = d.slit(&w, steps) else { continue };
            accepted += 1;
            let again = trace_loops(&slit, &restricted).unwrap();
            let tail: Vec<(Coord, Coord)> =
                again.path().iter().map(|&e| (slit.edges()[e].tail, slit.edges()[e].head)).collect();
            assert!(tail.len() <= gamma.len() - steps);
            assert_eq!(&gamma[gamma.len() - tail.len()..], &tail[..]);
        }
    }
    assert!(3 * accepted > total, "only {accepted} of {total} slits were valid");
}

#[test]
fn sampled_observable_agrees_with_enumeration() {
    use rcm_core::mc::{BurnIn, RunConfig, Sampler};
    let d = r(2);
    for (q, sampler) in [(2.0, Sampler::SwendsenWang), (1.5, Sampler::ChayesMachta), (4.0, Sampler::HeatBath)] {
        let params = ModelParams::critical(q).unwrap();
        let (f, f_hat) = observable_fields_at(&d, params).unwrap();
        let sets: Vec<Vec<Coord>> = full_vertices(&d).into_iter().map(|c| vec![c]).collect();
        let funcs: Vec<_> = sets.iter().map(|s| vertex_sum_functional(&d, s).unwrap()).collect();
        let cfg = RunConfig::new(sampler, 40_000, BurnIn::Auto, 40);
        let mc = sample_observable(&d, params, &cfg, 17, &funcs).unwrap();
        assert!(!mc.f.is_exact());
        for (exact, sampled) in [(&f, &mc.f), (&f_hat, &mc.f_hat)] {
            let errs = sampled.std_err.as_ref().unwrap();
            for (e, (a, b)) in exact.values.iter().zip(&sampled.values).enumerate() {
                let (sr, si) = errs[e];
                assert!((a.re - b.re).abs() <= 4.0 * sr + 1e-12, "q={q} edge {e} re: {a} vs {b}");
                assert!((a.im - b.im).abs() <= 4.0 * si + 1e-12, "q={q} edge {e} im: {a} vs {b}");
            }
        }
        for (re, im) in &mc.functionals {
            assert!(re.z_score(0.0).abs() < 4.0 && im.z_score(0.0).abs() < 4.0);
        }
    }
}
