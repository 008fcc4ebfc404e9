use super::*;
use crate::geometry::{point_distance, Interval};
use crate::spaces::{
    build_circle, build_fan_space, build_identity, build_interval, build_rotation,
    build_square_map, build_star, FanSpec,
};
use rand_chacha::ChaCha8Rng;

const GOLDEN: f64 = 0.6180339887498949;

fn cfg(spacing: f64) -> HausdorffConfig<f64> {
    HausdorffConfig::with_spacing(spacing)
}

fn arc(space: &Space<f64>, e: usize, lo: f64, hi: f64) -> CompactSet<f64> {
    CompactSet::from_arc(space, EdgeId(e), lo, hi).unwrap()
}

/// Brute-force Hausdorff oracle over uniform grids of the masks.
fn hausdorff_brute(space: &Space<f64>, a: &SubsetMask<f64>, b: &SubsetMask<f64>, grid: f64) -> f64 {
    let sample = |m: &SubsetMask<f64>| -> Vec<GraphPoint<f64>> {
        let mut pts = Vec::new();
        for (e, iv) in m.iter() {
            let len = space.edge(e).length;
            let n = (((iv.hi - iv.lo) * len / grid).ceil() as usize).max(1);
            for k in 0..=n {
                pts.push(GraphPoint::new(
                    e.0,
                    iv.lo + (iv.hi - iv.lo) * k as f64 / n as f64,
                ));
            }
        }
        pts
    };
    let pa = sample(a);
    let pb = sample(b);
    let directed = |xs: &[GraphPoint<f64>], ys: &[GraphPoint<f64>]| -> f64 {
        xs.iter()
            .map(|x| {
                ys.iter()
                    .map(|y| point_distance(space, x, y).unwrap())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(&pa, &pb).max(directed(&pb, &pa))
}

#[test]
fn hausdorff_of_a_set_with_itself_is_zero() {
    let sp = build_interval::<f64>();
    let a = arc(&sp, 0, 0.2, 0.8);
    let d = hausdorff(&sp, &a, &a, &cfg(1e-3)).unwrap();
    assert_eq!(d.value, 0.0);
}

#[test]
fn hausdorff_of_singletons_is_point_distance() {
    let sp = build_circle::<f64>(1.0).unwrap();
    let p = GraphPoint::new(0, 0.3);
    let q = GraphPoint::new(1, 0.4);
    let a = CompactSet::from_points(&sp, &[p], 0.0).unwrap();
    let b = CompactSet::from_points(&sp, &[q], 0.0).unwrap();
    let d = hausdorff(&sp, &a, &b, &cfg(1e-3)).unwrap();
    assert!((d.value - point_distance(&sp, &p, &q).unwrap()).abs() < 1e-12);
}

#[test]
fn hausdorff_interval_halves() {
    let sp = build_interval::<f64>();
    let a = arc(&sp, 0, 0.0, 1.0);
    let b = arc(&sp, 0, 0.0, 0.5);
    let d = hausdorff(&sp, &a, &b, &cfg(1e-3)).unwrap();
    assert!((d.value - 0.5).abs() < 1e-9, "got {}", d.value);
    let oracle = hausdorff_brute(&sp, &a.mask, &b.mask, 1e-4);
    assert!((d.value - oracle).abs() <= d.error_bound + 1e-4);
}

#[test]
fn hausdorff_matches_brute_force_on_random_masks() {
    let spaces = [
        build_interval::<f64>(),
        build_circle::<f64>(1.0).unwrap(),
        build_star::<f64>(3, 1.0).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for sp in &spaces {
        for _ in 0..30 {
            let make = |rng: &mut ChaCha8Rng| -> CompactSet<f64> {
                let mut mask = SubsetMask::empty(sp.n_edges(), 0.0);
                let n_ivs = rng.gen_range(1..=3);
                for _ in 0..n_ivs {
                    let e = rng.gen_range(0..sp.n_edges());
                    let lo: f64 = rng.gen_range(0.0..1.0);
                    let hi = (lo + rng.gen_range(0.0..0.4)).min(1.0);
                    mask.add_interval(EdgeId(e), lo, hi);
                }
                CompactSet::new(sp, mask).unwrap()
            };
            let a = make(&mut rng);
            let b = make(&mut rng);
            let d = hausdorff(sp, &a, &b, &cfg(2e-3)).unwrap();
            let oracle = hausdorff_brute(sp, &a.mask, &b.mask, 1e-3);
            assert!(
                (d.value - oracle).abs() <= 4e-3,
                "{}: engine {} vs oracle {oracle}",
                sp.name,
                d.value
            );
        }
    }
}

#[test]
fn hausdorff_matches_brute_force_on_the_fan() {
    // the ambient-euclidean path, including the convex ternary search
    let fan = build_fan_space::<f64>(FanSpec::new(2).unwrap()).unwrap();
    let sp = fan.space();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..30 {
        let mut mask_a = SubsetMask::empty(sp.n_edges(), 0.0);
        let mut mask_b = SubsetMask::empty(sp.n_edges(), 0.0);
        for m in [&mut mask_a, &mut mask_b] {
            for _ in 0..rng.gen_range(1..=3) {
                let e = rng.gen_range(0..sp.n_edges());
                let lo: f64 = rng.gen_range(0.0..1.0);
                let hi = (lo + rng.gen_range(0.0..0.5)).min(1.0);
                m.add_interval(EdgeId(e), lo, hi);
            }
        }
        let a = CompactSet::new(sp, mask_a).unwrap();
        let b = CompactSet::new(sp, mask_b).unwrap();
        let d = hausdorff(sp, &a, &b, &cfg(2e-3)).unwrap();
        let oracle = hausdorff_brute(sp, &a.mask, &b.mask, 1e-3);
        assert!(
            (d.value - oracle).abs() <= 4e-3,
            "engine {} vs oracle {oracle}",
            d.value
        );
    }
}

#[test]
fn hausdorff_rejects_empty_sets() {
    let sp = build_interval::<f64>();
    let empty = SubsetMask::empty(1, 0.0);
    assert!(matches!(
        CompactSet::new(&sp, empty),
        Err(CoreError::EmptySet)
    ));
}

#[test]
fn hausdorff_is_symmetric_and_triangular_on_sampled_sets() {
    let sp = build_circle::<f64>(1.0).unwrap();
    let net = hyper_net(&sp, 0.1, NetMode::Connected, 30, 77, NetConfig::default()).unwrap();
    let c = cfg(2e-3);
    let sampled: Vec<SampledSet<f64>> = net
        .elements
        .iter()
        .map(|a| SampledSet::build(&sp, &a.mask, c.spacing))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..1000 {
        let i = rng.gen_range(0..sampled.len());
        let j = rng.gen_range(0..sampled.len());
        let k = rng.gen_range(0..sampled.len());
        let dij = hausdorff_sampled(&sp, &sampled[i], &sampled[j]);
        let dji = hausdorff_sampled(&sp, &sampled[j], &sampled[i]);
        let djk = hausdorff_sampled(&sp, &sampled[j], &sampled[k]);
        let dik = hausdorff_sampled(&sp, &sampled[i], &sampled[k]);
        assert_eq!(dij, dji, "symmetry must be exact on samples");
        assert!(dik <= dij + djk + 1e-9, "triangle inequality violated");
    }
}

#[test]
fn induced_identity_preserves_sets() {
    let sp = build_interval::<f64>();
    let id = build_identity(&sp);
    let a = arc(&sp, 0, 0.25, 0.5);
    let img = induced_apply(&sp, &id, &a);
    assert_eq!(img.mask, a.mask);
    assert!(img.connected);
}

#[test]
fn induced_rotation_moves_arcs_rigidly() {
    // arc [0, 0.1] in circle coordinates, rotated by a quarter turn
    let sp = build_circle::<f64>(1.0).unwrap();
    let rot = build_rotation(&sp, 0.25).unwrap();
    let a = arc(&sp, 0, 0.0, 0.2); // global [0, 0.1]
    let img = induced_apply(&sp, &rot, &a);
    let expected = arc(&sp, 0, 0.5, 0.7); // global [0.25, 0.35]
    let d = hausdorff(&sp, &img, &expected, &cfg(1e-3)).unwrap();
    assert!(d.value < 1e-9, "image misplaced by {}", d.value);
}

#[test]
fn induced_square_map_squares_endpoints() {
    let sp = build_interval::<f64>();
    let f = build_square_map(&sp).unwrap();
    let a = arc(&sp, 0, 0.5, 0.8);
    let img = induced_apply(&sp, &f, &a);
    let ivs = img.mask.edge_intervals(EdgeId(0));
    assert_eq!(ivs.len(), 1);
    assert!((ivs[0].lo - 0.25).abs() < 1e-6);
    assert!((ivs[0].hi - 0.64).abs() < 1e-6);
    // resolution tracks the declared sup error
    assert!(img.resolution() > 0.0 && img.resolution() <= 1e-6);
}

#[test]
fn induced_map_distributes_over_union_exactly() {
    let sp = build_interval::<f64>();
    let f = build_square_map(&sp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let lo_a: f64 = rng.gen_range(0.0..0.9);
        let a = arc(&sp, 0, lo_a, (lo_a + rng.gen_range(0.0..0.3)).min(1.0));
        let lo_b: f64 = rng.gen_range(0.0..0.9);
        let b = arc(&sp, 0, lo_b, (lo_b + rng.gen_range(0.0..0.3)).min(1.0));
        let union_first =
            induced_apply(&sp, &f, &union_sets(&sp, &[a.clone(), b.clone()]).unwrap());
        let image_first = union_sets(
            &sp,
            &[induced_apply(&sp, &f, &a), induced_apply(&sp, &f, &b)],
        )
        .unwrap();
        assert_eq!(
            union_first.mask, image_first.mask,
            "masks must match exactly"
        );
    }
}

#[test]
fn union_of_equal_singletons_is_the_singleton() {
    let sp = build_interval::<f64>();
    let p = CompactSet::from_points(&sp, &[GraphPoint::new(0, 0.42)], 0.0).unwrap();
    let u = union_sets(&sp, &[p.clone(), p.clone()]).unwrap();
    assert_eq!(u.mask, p.mask);
    assert!(matches!(
        union_sets::<f64>(&sp, &[]),
        Err(CoreError::EmptySet)
    ));
}

#[test]
fn disjoint_arcs_are_disconnected() {
    let sp = build_interval::<f64>();
    let mut mask = SubsetMask::empty(1, 0.0);
    mask.add_interval(EdgeId(0), 0.1, 0.2);
    mask.add_interval(EdgeId(0), 0.6, 0.8);
    let two = CompactSet::new(&sp, mask).unwrap();
    assert!(!two.connected);
    assert!(!is_connected(&sp, &two));
}

#[test]
fn arcs_sharing_a_vertex_are_connected() {
    // two branches of a star joined at the center
    let sp = build_star::<f64>(3, 1.0).unwrap();
    let mut mask = SubsetMask::empty(3, 0.0);
    mask.add_interval(EdgeId(0), 0.0, 0.5);
    mask.add_interval(EdgeId(1), 0.0, 0.5);
    let set = CompactSet::new(&sp, mask).unwrap();
    assert!(set.connected);
}

#[test]
fn union_stability_identical_families() {
    let sp = build_interval::<f64>();
    let a = arc(&sp, 0, 0.1, 0.4);
    let b = arc(&sp, 0, 0.5, 0.9);
    let pairs = vec![(a.clone(), a.clone()), (b.clone(), b.clone())];
    let rep = union_stability_check(&sp, &pairs, 0.0, &cfg(1e-3)).unwrap();
    assert!(rep.precondition_ok);
    assert_eq!(rep.union_distance.unwrap().value, 0.0);
    assert_eq!(rep.holds, Some(true));
}

#[test]
fn union_stability_two_shifted_pairs() {
    let sp = build_interval::<f64>();
    let pairs = vec![
        (arc(&sp, 0, 0.0, 0.2), arc(&sp, 0, 0.05, 0.25)),
        (arc(&sp, 0, 0.5, 0.7), arc(&sp, 0, 0.45, 0.65)),
    ];
    let rep = union_stability_check(&sp, &pairs, 0.1, &cfg(1e-3)).unwrap();
    assert!(rep.precondition_ok);
    assert_eq!(rep.holds, Some(true));
    let d = rep.union_distance.unwrap();
    assert!(d.value <= 0.1 + d.error_bound);
}

#[test]
fn union_stability_on_random_fan_pairs() {
    let fan = build_fan_space::<f64>(FanSpec::new(3).unwrap()).unwrap();
    let sp = fan.space();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let eps = 0.15;
    let mut pairs = Vec::new();
    for _ in 0..50 {
        let e = rng.gen_range(0..sp.n_edges());
        let lo: f64 = rng.gen_range(0.0..0.6);
        let hi = lo + rng.gen_range(0.1..0.4);
        let len = sp.edge(EdgeId(e)).length;
        // shift small enough to keep d_H below eps
        let shift = rng.gen_range(-eps / len / 2.0..eps / len / 2.0);
        let a = arc(sp, e, lo, hi.min(1.0));
        let b = arc(
            sp,
            e,
            (lo + shift).clamp(0.0, 1.0),
            (hi + shift).clamp(0.0, 1.0),
        );
        pairs.push((a, b));
    }
    let rep = union_stability_check(sp, &pairs, eps, &cfg(2e-3)).unwrap();
    assert!(rep.precondition_ok);
    assert_eq!(rep.holds, Some(true));
}

#[test]
fn union_stability_reports_failed_precondition() {
    let sp = build_interval::<f64>();
    let pairs = vec![(arc(&sp, 0, 0.0, 0.1), arc(&sp, 0, 0.8, 0.9))];
    let rep = union_stability_check(&sp, &pairs, 0.05, &cfg(1e-3)).unwrap();
    assert!(!rep.precondition_ok);
    assert!(rep.union_distance.is_none());
}

#[test]
fn hyper_net_budget_one() {
    let sp = build_interval::<f64>();
    let net = hyper_net(&sp, 0.1, NetMode::Full, 1, 1, NetConfig::default()).unwrap();
    assert_eq!(net.elements.len(), 1);
}

#[test]
fn connected_net_on_interval_yields_subintervals() {
    let sp = build_interval::<f64>();
    let net = hyper_net(&sp, 0.1, NetMode::Connected, 100, 7, NetConfig::default()).unwrap();
    for el in &net.elements {
        assert!(el.connected);
        assert_eq!(
            el.mask.edge_intervals(EdgeId(0)).len(),
            1,
            "connected subsets of an arc are intervals"
        );
    }
}

#[test]
fn full_net_elements_come_from_the_delta_net() {
    let sp = build_interval::<f64>();
    let delta = 0.1;
    let net = hyper_net(&sp, delta, NetMode::Full, 200, 11, NetConfig::default()).unwrap();
    let base = geometry::sample_net(&sp, delta).unwrap();
    for el in &net.elements {
        for (e, iv) in el.mask.iter() {
            assert!(iv.is_degenerate());
            let p = GraphPoint::new(e.0, iv.lo);
            assert!(
                base.iter()
                    .any(|q| point_distance(&sp, &p, q).unwrap() < 1e-12),
                "net element point is not a delta-net point"
            );
        }
    }
}

#[test]
fn nets_are_deterministic_under_seed() {
    let sp = build_circle::<f64>(1.0).unwrap();
    let a = hyper_net(&sp, 0.05, NetMode::Connected, 40, 99, NetConfig::default()).unwrap();
    let b = hyper_net(&sp, 0.05, NetMode::Connected, 40, 99, NetConfig::default()).unwrap();
    for (x, y) in a.elements.iter().zip(b.elements.iter()) {
        assert_eq!(x.mask, y.mask);
    }
}

#[test]
fn isometry_preserves_hausdorff_distances() {
    let sp = build_circle::<f64>(1.0).unwrap();
    let rot = build_rotation(&sp, GOLDEN).unwrap();
    let c = cfg(1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..50 {
        let lo_a: f64 = rng.gen_range(0.0..1.0);
        let a = arc(&sp, 0, lo_a * 0.5, (lo_a * 0.5 + 0.3).min(1.0));
        let lo_b: f64 = rng.gen_range(0.0..1.0);
        let b = arc(&sp, 1, lo_b * 0.5, (lo_b * 0.5 + 0.2).min(1.0));
        let d0 = hausdorff(&sp, &a, &b, &c).unwrap().value;
        let d1 = hausdorff(
            &sp,
            &induced_apply(&sp, &rot, &a),
            &induced_apply(&sp, &rot, &b),
            &c,
        )
        .unwrap()
        .value;
        assert!(
            (d0 - d1).abs() <= 2.0 * c.spacing,
            "isometry changed d_H: {d0} -> {d1}"
        );
    }
}

#[test]
fn mask_interval_helpers() {
    let mut m = SubsetMask::<f64>::empty(2, 0.0);
    m.add_interval(EdgeId(0), 0.2, 0.4);
    m.add_point(EdgeId(1), 0.5);
    m.normalize();
    assert!(m.intersects(&m));
    let sub = {
        let mut s = SubsetMask::<f64>::empty(2, 0.0);
        s.add_interval(EdgeId(0), 0.25, 0.3);
        s
    };
    assert!(sub.subset_of(&m));
    assert!(!m.subset_of(&sub));
    assert_eq!(
        m.edge_intervals(EdgeId(1)),
        &[Interval { lo: 0.5, hi: 0.5 }]
    );
}
