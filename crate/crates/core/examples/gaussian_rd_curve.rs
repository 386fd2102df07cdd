//! Blahut–Arimoto on a discretized Gaussian output against `sigma^2 2^(-2R)`.
//!
//! Run with `cargo run --release --example gaussian_rd_curve`.

use rdlearn::prob::{discretize_regression, DiscretizationSpec, RegressionModel};
use rdlearn::rd::{gaussian_drf, solve_at_rate, BaConfig};
use rdlearn::{Function1D, LossFunction};

fn main() -> rdlearn::Result<()> {
    let sigma = 1.0;
    let model = RegressionModel::new(Function1D::constant(0.5, [0.0, 1.0]), sigma)?;
    let joint = discretize_regression(&model, &DiscretizationSpec::new(1, 512))?;
    let loss = LossFunction::squared();

    println!("{:>5} {:>12} {:>12} {:>9}", "R", "solver D", "closed form", "rel err");
    for r in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let p = solve_at_rate(&joint, &loss, r, &BaConfig::default())?;
        let exact = gaussian_drf(sigma, r)?;
        println!(
            "{r:>5} {:>12.6} {:>12.6} {:>9.2e}",
            p.distortion,
            exact,
            (p.distortion - exact).abs() / exact
        );
    }
    Ok(())
}
