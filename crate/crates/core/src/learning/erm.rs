use serde::{Deserialize, Serialize};

use super::HypothesisGrid;
use crate::error::{Error, Result};
use crate::loss::{LossFunction, LossKind};
use crate::function::l2_distance_sq;
use crate::prob::RegressionModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErmResult {
    pub index: usize,
    pub risk: f64,
}

fn check_data(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::usage(format!(
            "{} inputs but {} outputs",
            xs.len(),
            ys.len()
        )));
    }
    if xs.is_empty() {
        return Err(Error::usage("data must be nonempty"));
    }
    Ok(())
}

/// `n^-1 sum l(f(x_i), y_i)`, summed in sample order.
pub fn empirical_risk(
    grid: &HypothesisGrid,
    member: usize,
    xs: &[f64],
    ys: &[f64],
    loss: &LossFunction,
) -> Result<f64> {
    check_data(xs, ys)?;
    if member >= grid.len() {
        return Err(Error::usage(format!("member {member} out of range ({})", grid.len())));
    }
    let sum: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| loss.eval(y, grid.eval(member, x)))
        .sum();
    Ok(sum / xs.len() as f64)
}

/// Empirical risk minimizer over the grid; ties go to the lowest index.
///
/// Candidate risks come from a per-cell table of summed losses. Every member
/// whose table risk is within a relative `1e-9` of the best is then
/// re-evaluated with [`empirical_risk`], and the final choice is made on
/// those values only, so the result agrees exactly with a direct scan.
pub fn erm(grid: &HypothesisGrid, xs: &[f64], ys: &[f64], loss: &LossFunction) -> Result<ErmResult> {
    check_data(xs, ys)?;
    grid.validate()?;
    let nl = grid.levels.len();
    let mut table = vec![0.0; grid.cells * nl];
    for (&x, &y) in xs.iter().zip(ys) {
        let c = grid.cell_of(x);
        for (l, &v) in grid.levels.iter().enumerate() {
            table[c * nl + l] += loss.eval(y, v);
        }
    }
    let approx: Vec<f64> = grid
        .members
        .iter()
        .map(|m| m.iter().enumerate().map(|(c, &l)| table[c * nl + l as usize]).sum::<f64>())
        .collect();
    let best = approx.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = best + 1e-9 * best.abs() + 1e-300;
    let mut winner: Option<ErmResult> = None;
    for (i, &a) in approx.iter().enumerate() {
        if a <= cut {
            let risk = empirical_risk(grid, i, xs, ys, loss)?;
            if winner.is_none_or(|w| risk < w.risk) {
                winner = Some(ErmResult { index: i, risk });
            }
        }
    }
    winner.ok_or_else(|| Error::Internal("no ERM candidate survived".into()))
}

/// Reference minimizer: direct evaluation of every member, lowest index on ties.
pub fn erm_exhaustive(
    grid: &HypothesisGrid,
    xs: &[f64],
    ys: &[f64],
    loss: &LossFunction,
) -> Result<ErmResult> {
    let mut best = ErmResult {
        index: 0,
        risk: empirical_risk(grid, 0, xs, ys, loss)?,
    };
    for i in 1..grid.len() {
        let r = empirical_risk(grid, i, xs, ys, loss)?;
        if r < best.risk {
            best = ErmResult { index: i, risk: r };
        }
    }
    Ok(best)
}

/// Exact risk `||f0 - g||^2 + sigma^2` of a grid member under the regression
/// model, for squared loss.
pub fn true_risk_regression(
    grid: &HypothesisGrid,
    member: usize,
    model: &RegressionModel,
    loss: &LossFunction,
) -> Result<f64> {
    let squared = match loss.kind {
        LossKind::Squared => true,
        LossKind::PPower { p } => p == 2.0,
        _ => false,
    };
    if !squared {
        return Err(Error::usage(format!(
            "closed-form regression risk needs squared loss, got {loss}"
        )));
    }
    if member >= grid.len() {
        return Err(Error::usage(format!("member {member} out of range ({})", grid.len())));
    }
    Ok(l2_distance_sq(&grid.function(member), &model.f0)? + model.sigma * model.sigma)
}

/// `L*`: the smallest exact regression risk over the grid, with its index.
pub fn best_in_class_regression(
    grid: &HypothesisGrid,
    model: &RegressionModel,
    loss: &LossFunction,
) -> Result<ErmResult> {
    let mut best: Option<ErmResult> = None;
    for i in 0..grid.len() {
        let risk = true_risk_regression(grid, i, model, loss)?;
        if best.is_none_or(|b| risk < b.risk) {
            best = Some(ErmResult { index: i, risk });
        }
    }
    best.ok_or_else(|| Error::usage("grid is empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Function1D;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constants() -> HypothesisGrid {
        HypothesisGrid::from_values([0.0, 1.0], &[vec![0.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn dominant_hypothesis_wins() {
        let r = erm(&constants(), &[0.1, 0.5, 0.9], &[1.0, 1.0, 1.0], &LossFunction::squared()).unwrap();
        assert_eq!(r, ErmResult { index: 1, risk: 0.0 });
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let r = erm(&constants(), &[0.1, 0.9], &[0.0, 1.0], &LossFunction::squared()).unwrap();
        assert_eq!(r.index, 0);
        assert_eq!(r.risk, 0.5);
    }

    #[test]
    fn single_point_risk() {
        let g = constants();
        assert_eq!(empirical_risk(&g, 0, &[0.3], &[0.5], &LossFunction::squared()).unwrap(), 0.25);
        assert!(empirical_risk(&g, 0, &[], &[], &LossFunction::squared()).is_err());
        assert!(empirical_risk(&g, 0, &[0.1], &[0.1, 0.2], &LossFunction::squared()).is_err());
    }

    #[test]
    fn interpolating_member_has_zero_risk() {
        let g = HypothesisGrid::steps([0.0, 1.0], 2, 4, None, 100).unwrap();
        let xs = [0.1, 0.2, 0.7, 0.8];
        let ys = [0.25, 0.25, 0.75, 0.75];
        let r = erm(&g, &xs, &ys, &LossFunction::squared()).unwrap();
        assert_eq!(r.risk, 0.0);
        assert_eq!(g.values(r.index), vec![0.25, 0.75]);
    }

    #[test]
    fn risk_matches_compensated_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = HypothesisGrid::steps([0.0, 1.0], 3, 5, None, 1000).unwrap();
        let xs: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        let ys: Vec<f64> = (0..5000).map(|_| rng.random::<f64>() * 1.4 - 0.2).collect();
        for loss in [LossFunction::squared(), LossFunction::absolute()] {
            for m in [0, 17, 124] {
                // Neumaier summation as an independent reference
                let (mut s, mut c) = (0.0f64, 0.0f64);
                for (&x, &y) in xs.iter().zip(&ys) {
                    let v = loss.eval(y, g.eval(m, x));
                    let t = s + v;
                    c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
                    s = t;
                }
                let reference = (s + c) / xs.len() as f64;
                let got = empirical_risk(&g, m, &xs, &ys, &loss).unwrap();
                assert!((got - reference).abs() <= 1e-12 * reference.max(1.0));
            }
        }
    }

    #[test]
    fn regression_risk_closed_form() {
        let g = HypothesisGrid::from_values([0.0, 3.0], &[vec![0.5], vec![0.0]]).unwrap();
        let model = RegressionModel::new(Function1D::constant(0.0, [0.0, 3.0]), 0.5).unwrap();
        let sq = LossFunction::squared();
        assert_eq!(true_risk_regression(&g, 0, &model, &sq).unwrap(), 0.5);
        assert_eq!(true_risk_regression(&g, 1, &model, &sq).unwrap(), 0.25);
        assert!(true_risk_regression(&g, 0, &model, &LossFunction::absolute()).is_err());
        assert_eq!(best_in_class_regression(&g, &model, &sq).unwrap().index, 1);
    }
}
