//! Property tests over randomized masks and piecewise-linear tables.

use hyperlab_core::geometry::{EdgeId, GraphPoint, SubsetMask};
use hyperlab_core::hyperspace::{induced_apply, union_sets, CompactSet};
use hyperlab_core::spaces::{build_interval, build_square_map, PlMap};
use proptest::prelude::*;

fn interval_strategy() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
}

fn mask_strategy() -> impl Strategy<Value = SubsetMask<f64>> {
    proptest::collection::vec(interval_strategy(), 1..8).prop_map(|ivs| {
        let mut m = SubsetMask::empty(1, 0.0);
        for (lo, hi) in ivs {
            m.add_interval(EdgeId(0), lo, hi);
        }
        m.normalize();
        m
    })
}

proptest! {
    #[test]
    fn normalized_masks_are_sorted_and_disjoint(mask in mask_strategy()) {
        let ivs = mask.edge_intervals(EdgeId(0));
        for w in ivs.windows(2) {
            prop_assert!(w[0].hi < w[1].lo, "intervals must be separated after merging");
        }
        // idempotent
        let mut again = mask.clone();
        again.normalize();
        prop_assert_eq!(&again, &mask);
    }

    #[test]
    fn normalization_preserves_membership(
        ivs in proptest::collection::vec(interval_strategy(), 1..8),
        probe in 0.0f64..=1.0,
    ) {
        let mut m = SubsetMask::<f64>::empty(1, 0.0);
        for (lo, hi) in &ivs {
            m.add_interval(EdgeId(0), *lo, *hi);
        }
        m.normalize();
        let raw = ivs.iter().any(|(lo, hi)| *lo <= probe && probe <= *hi);
        let normalized = m
            .edge_intervals(EdgeId(0))
            .iter()
            .any(|iv| iv.lo <= probe && probe <= iv.hi);
        prop_assert_eq!(raw, normalized);
    }

    #[test]
    fn monotone_tables_invert_exactly_on_breakpoints(
        raw in proptest::collection::vec(0.001f64..1.0, 2..12),
    ) {
        // cumulative sums give strictly increasing tables
        let mut xs = vec![0.0f64];
        let mut ys = vec![0.0f64];
        for (i, step) in raw.iter().enumerate() {
            xs.push(xs[i] + step);
            ys.push(ys[i] + raw[raw.len() - 1 - i]);
        }
        let map = PlMap::new(xs.clone(), ys.clone()).unwrap();
        let inv = map.inverse();
        for &x in &xs {
            let y = map.eval(x);
            let back = inv.eval(y);
            prop_assert!((back - x).abs() < 1e-9 * (1.0 + x.abs()));
        }
        // midpoints round-trip as well
        for w in xs.windows(2) {
            let x = (w[0] + w[1]) / 2.0;
            prop_assert!((inv.eval(map.eval(x)) - x).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn image_of_union_is_union_of_images(
        a in interval_strategy(),
        b in interval_strategy(),
    ) {
        let sp = build_interval::<f64>();
        let f = build_square_map(&sp).unwrap();
        let set_a = CompactSet::from_arc(&sp, EdgeId(0), a.0, a.1).unwrap();
        let set_b = CompactSet::from_arc(&sp, EdgeId(0), b.0, b.1).unwrap();
        let u = union_sets(&sp, &[set_a.clone(), set_b.clone()]).unwrap();
        let lhs = induced_apply(&sp, &f, &u);
        let rhs = union_sets(
            &sp,
            &[induced_apply(&sp, &f, &set_a), induced_apply(&sp, &f, &set_b)],
        )
        .unwrap();
        prop_assert_eq!(lhs.mask, rhs.mask);
    }

    #[test]
    fn canonical_points_compare_equal_across_edges(t in 0.0f64..=1.0) {
        let sp = build_interval::<f64>();
        let p = sp.canonicalize(GraphPoint::new(0, t));
        let q = sp.canonicalize(GraphPoint::new(0, t));
        prop_assert_eq!(p, q);
    }
}

#[test]
fn single_precision_instantiation_works() {
    use hyperlab_core::hyperspace::{hausdorff, HausdorffConfig};
    use hyperlab_core::spaces::{apply_point, build_fan_map, build_fan_space, FanSpec};

    let sp = build_interval::<f32>();
    let f = build_square_map(&sp).unwrap();
    let img = apply_point(&sp, &f, &GraphPoint::new(0, 0.5f32)).unwrap();
    assert!((img.t - 0.25).abs() < 1e-4);

    let fan = build_fan_space::<f32>(FanSpec::new(2).unwrap()).unwrap();
    let fm = build_fan_map(&fan);
    let p = GraphPoint::new(fan.fan_edge(2, 1).0, 0.5f32);
    let orbit_back = apply_point(fan.space(), &fm, &p).unwrap();
    assert_eq!(orbit_back.edge, fan.fan_edge(2, 2));

    let a = CompactSet::from_arc(&sp, EdgeId(0), 0.0f32, 1.0).unwrap();
    let b = CompactSet::from_arc(&sp, EdgeId(0), 0.0f32, 0.5).unwrap();
    let d = hausdorff(&sp, &a, &b, &HausdorffConfig::with_spacing(1e-3f32)).unwrap();
    assert!((d.value - 0.5).abs() < 1e-3);
}
