use proptest::prelude::*;
use rdlearn::prob::FiniteJoint;
use rdlearn::rd::{ba_rd_point, default_slopes, rd_curve, BaConfig};
use rdlearn::LossFunction;

fn joint_strategy(nx: usize, ny: usize) -> impl Strategy<Value = FiniteJoint> {
    prop::collection::vec(0.02f64..1.0, nx * ny).prop_map(move |w| {
        let s: f64 = w.iter().sum();
        let rows: Vec<Vec<f64>> = w.chunks(ny).map(|c| c.iter().map(|v| v / s).collect()).collect();
        FiniteJoint::from_rows((0..ny).map(|y| y as f64 * 0.5).collect(), &rows).unwrap()
    })
}

fn loss_strategy() -> impl Strategy<Value = LossFunction> {
    prop_oneof![
        Just(LossFunction::squared()),
        Just(LossFunction::absolute()),
        Just(LossFunction::hamming()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_objective_never_rises(j in joint_strategy(3, 4), loss in loss_strategy(), slope in 0.1f64..50.0) {
        let sol = ba_rd_point(&j, &loss, slope, &BaConfig::default()).unwrap();
        prop_assert!(sol.point.descent_ok);
        prop_assert!(sol.point.rate >= -1e-12);
        prop_assert!(sol.point.rate <= rdlearn::prob::entropy_bits(&j, rdlearn::prob::Selector::YGivenX) + 1e-9);
    }

    #[test]
    fn curves_are_monotone_and_convex(j in joint_strategy(3, 4), loss in loss_strategy()) {
        let cfg = BaConfig::default();
        let curve = rd_curve(&j, &loss, &default_slopes(&j, &loss, &cfg).unwrap(), &cfg).unwrap();
        let bad = curve.invariant_violations(1e-9);
        prop_assert!(bad.is_empty(), "{bad:?}");
        prop_assert_eq!(curve.descent_failures, 0);
        for r in [0.0, 0.1, 0.4, 0.9] {
            let up = curve.invert(r).unwrap().value;
            prop_assert!(curve.distortion_lower_bound(r) <= up + 1e-9);
        }
    }

    #[test]
    fn side_information_never_hurts(j in joint_strategy(3, 4), loss in loss_strategy(), slope in 0.2f64..20.0) {
        let cfg = BaConfig::default();
        let cond = ba_rd_point(&j, &loss, slope, &cfg).unwrap().point;
        let pooled = ba_rd_point(&j.pooled(), &loss, slope, &cfg).unwrap().point;
        let lag = |p: rdlearn::rd::RdPoint| p.rate + slope * p.distortion;
        prop_assert!(lag(cond) <= lag(pooled) + 1e-6, "{} vs {}", lag(cond), lag(pooled));
    }

    #[test]
    fn difference_losses_are_translation_invariant(
        j in joint_strategy(2, 4),
        c in -5.0f64..5.0,
        slope in 0.2f64..20.0,
        squared in any::<bool>(),
    ) {
        let loss = if squared { LossFunction::squared() } else { LossFunction::absolute() };
        let cfg = BaConfig::default();
        let a = ba_rd_point(&j, &loss, slope, &cfg).unwrap().point;
        let b = ba_rd_point(&j.shifted(c), &loss, slope, &cfg).unwrap().point;
        prop_assert!((a.distortion - b.distortion).abs() < 1e-10, "{a:?} vs {b:?}");
        prop_assert!((a.rate - b.rate).abs() < 1e-10, "{a:?} vs {b:?}");
    }
}
