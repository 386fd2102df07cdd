use proptest::prelude::*;
use rdlearn::prob::{
    discretize_family, entropy_bits, kl_and_variational, kl_and_variational_joint, mutual_information_bits,
    DiscretizationSpec, FiniteJoint, RegressionModel, Selector,
};
use rdlearn::Function1D;

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn joint_strategy(max_x: usize, max_y: usize) -> impl Strategy<Value = FiniteJoint> {
    (1..=max_x, 2..=max_y).prop_flat_map(|(nx, ny)| {
        prop::collection::vec(0.0f64..1.0, nx * ny).prop_filter_map("all zero", move |w| {
            if w.iter().sum::<f64>() < 1e-3 {
                return None;
            }
            let p = normalize(w);
            let rows: Vec<Vec<f64>> = p.chunks(ny).map(|c| c.to_vec()).collect();
            FiniteJoint::from_rows((0..ny).map(|y| y as f64).collect(), &rows).ok()
        })
    })
}

fn pmf(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(normalize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn entropies_and_information_are_nonnegative(j in joint_strategy(4, 5)) {
        for sel in [Selector::X, Selector::Y, Selector::Joint, Selector::YGivenX, Selector::XGivenY] {
            prop_assert!(entropy_bits(&j, sel) >= -1e-12, "{sel}");
        }
        let i = mutual_information_bits(&j);
        prop_assert!(i >= -1e-12);
        let h = entropy_bits(&j, Selector::Y) - entropy_bits(&j, Selector::YGivenX);
        prop_assert!((i - h).abs() < 1e-10);
    }

    #[test]
    fn conditional_information_identity(j in joint_strategy(3, 3), noise in prop::collection::vec(0.01f64..1.0, 27)) {
        let ny = j.ny();
        let m = j
            .extend_with_channel(|x, y| {
                let row: Vec<f64> = (0..ny).map(|k| noise[(x * 9 + y * 3 + k) % noise.len()]).collect();
                normalize(row)
            })
            .unwrap();
        let i = m.mutual_information(&["Y"], &["Yhat"], &["X"]).unwrap();
        let h_y_x = m.entropy(&["Y"], &["X"]).unwrap();
        let h_y_xy = m.entropy(&["Y"], &["X", "Yhat"]).unwrap();
        prop_assert!(i >= -1e-12);
        prop_assert!((i - (h_y_x - h_y_xy)).abs() < 1e-10);
        prop_assert!(i <= m.entropy(&["Yhat"], &["X"]).unwrap() + 1e-10);
    }

    #[test]
    fn pinsker_holds(len in 2usize..12, seed in any::<u64>()) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut draw = || -> Vec<f64> {
            normalize((0..len).map(|_| rand::Rng::random_range(&mut rng, 0.01..1.0)).collect())
        };
        let (p, q) = (draw(), draw());
        let d = kl_and_variational(&p, &q).unwrap();
        prop_assert!(d.kl_nats >= -1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d.dv));
        prop_assert!(d.dv <= d.pinsker_bound() + 1e-12);
    }

    #[test]
    fn divergence_of_identical_pmfs_is_zero(p in pmf(6)) {
        let d = kl_and_variational(&p, &p).unwrap();
        prop_assert!(d.kl_nats.abs() < 1e-15);
        prop_assert_eq!(d.dv, 0.0);
    }
}

#[test]
fn discretized_kl_converges_as_the_grid_refines() {
    let f = Function1D::steps([0.0, 1.0], vec![0.2, 0.8]).unwrap();
    let g = Function1D::steps([0.0, 1.0], vec![0.5, 0.5]).unwrap();
    let sigma = 0.5;
    let exact = (0.09 / 2.0 + 0.09 / 2.0) / (2.0 * sigma * sigma);
    let errs: Vec<f64> = [50, 200, 800]
        .into_iter()
        .map(|y_grid| {
            let spec = DiscretizationSpec { x_bins: 2, y_grid, y_span: 10.0 };
            let models = [
                RegressionModel::new(f.clone(), sigma).unwrap(),
                RegressionModel::new(g.clone(), sigma).unwrap(),
            ];
            let pq = discretize_family(&models, &spec).unwrap();
            (kl_and_variational_joint(&pq[0], &pq[1]).unwrap().kl_nats - exact).abs() / exact
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 1e-2, "{errs:?}");
}
