//! From a function net to a net of the induced Gaussian family, and a
//! measured constant for the finite-sample term.

use rdlearn::analysis::{calibrate_c_prime, finite_sample_bound};
use rdlearn::learning::{covering_number, family_net_from_function_net, ulln_sweep, LipschitzClass, Norm};
use rdlearn::prob::{DiscretizationSpec, RegressionModel};
use rdlearn::{Function1D, LossFunction};

fn main() -> rdlearn::Result<()> {
    let sigma = 0.5;
    let class = LipschitzClass {
        domain: [0.0, 1.0],
        lipschitz: 1.0,
    };
    let (_, grid) = covering_number(&class, 0.25, Norm::Sup, 100_000)?;
    let spec = DiscretizationSpec::new(grid.cells * 2, 800);
    let net = family_net_from_function_net(&grid, sigma, 10, &spec, 3)?;
    println!(
        "function radius {} -> family radius {} in d_V; worst slack over {} pairs {:.4}",
        net.function_radius,
        net.dv_radius,
        net.checks.len(),
        net.worst_slack
    );

    let loss = LossFunction::squared();
    let model = RegressionModel::new(Function1D::linear(vec![0.0, 1.0], vec![0.2, 0.8])?, sigma)?;
    let rows = ulln_sweep(&grid, &model, &loss, &[100, 1000, 10_000], 20, 11)?;
    for r in &rows {
        println!("n = {:>6}: mean max |L_hat - L| = {:.5}", r.n, r.mean());
    }
    let fit = calibrate_c_prime(&rows)?;
    println!("C = {:.4}, C' = {:.4}", fit.c_hat, fit.c_prime);
    let lstar = sigma * sigma;
    for n in [1000, 100_000] {
        println!(
            "bound at l_n = 0.01, n = {n}: {:.5}",
            finite_sample_bound(0.01, &loss, lstar, fit.c_prime, n)?
        );
    }
    Ok(())
}
