use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::{empirical_risk, HypothesisGrid};
use crate::loss::LossFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    fn symbol(&self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub label: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    /// `rhs - lhs` for `<=`, `lhs - rhs` for `>=`, `-|lhs - rhs|` for `=`.
    pub slack: f64,
    /// Informational steps are shown but do not enter `worst_slack`.
    pub enforced: bool,
}

impl ChainStep {
    pub fn new(label: impl Into<String>, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let slack = match relation {
            Relation::Le => rhs - lhs,
            Relation::Ge => lhs - rhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        ChainStep {
            label: label.into(),
            lhs,
            relation,
            rhs,
            slack,
            enforced: true,
        }
    }

    fn informational(mut self) -> Self {
        self.enforced = false;
        self
    }
}

/// Values and slacks of a named inequality chain, steps in the order they
/// are written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub name: String,
    pub steps: Vec<ChainStep>,
    pub worst_slack: f64,
}

impl ChainReport {
    pub fn new(name: impl Into<String>, steps: Vec<ChainStep>) -> Self {
        let worst_slack = steps
            .iter()
            .filter(|s| s.enforced)
            .map(|s| s.slack)
            .fold(f64::INFINITY, f64::min);
        ChainReport {
            name: name.into(),
            steps,
            worst_slack,
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.worst_slack >= -tol
    }

    pub fn step(&self, label: &str) -> Option<&ChainStep> {
        self.steps.iter().find(|s| s.label == label)
    }
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        let width = self.steps.iter().map(|s| s.label.len()).max().unwrap_or(0);
        for s in &self.steps {
            writeln!(
                f,
                "  {:width$}  {:>14.9} {:2} {:<14.9}  slack {:+.3e}{}",
                s.label,
                s.lhs,
                s.relation.symbol(),
                s.rhs,
                s.slack,
                if s.enforced { "" } else { "  (info)" },
            )?;
        }
        write!(f, "  worst slack {:+.3e}", self.worst_slack)
    }
}

/// Per-realization check of the learning-from-compressed-data argument.
///
/// With `r` the metric power of the loss and `phi(v) = v^(1/r)`, Minkowski's
/// inequality gives for every hypothesis
/// `|phi(L_XY(f)) - phi(L_XYhat(f))| <= phi(l_n)`, where `l_n` is the
/// distortion between `Y^n` and `Yhat^n`. The chain is then
///
/// * (a) `phi(L_XY(fhat)) <= phi(L_XYhat(fhat)) + phi(l_n)`
/// * (b) `phi(L_XYhat(fhat)) = phi(min_f L_XYhat(f))`
/// * (c) `phi(min_f L_XYhat(f)) + phi(l_n) <= phi(min_f L_XY(f)) + 2 phi(l_n)`
///
/// For `r = 1` this is exactly the modulus form with `eta(t) = t`. The
/// modulus form `L <= L + eta(l_n)` is also listed; it is enforced only when
/// every output and prediction lies in `[0, 1]`, the range the modulus of a
/// `p`-th power is derived for.
///
/// `fhat` must be an empirical risk minimizer on the compressed data unless
/// `allow_non_minimizer` is set, in which case step (b) reports the gap.
pub fn proof_chain_check(
    xs: &[f64],
    ys: &[f64],
    yhat: &[f64],
    grid: &HypothesisGrid,
    loss: &LossFunction,
    fhat: usize,
    allow_non_minimizer: bool,
) -> Result<ChainReport> {
    if yhat.len() != ys.len() {
        return Err(Error::usage("compressed and raw outputs differ in length"));
    }
    let raw: Vec<f64> = (0..grid.len())
        .map(|g| empirical_risk(grid, g, xs, ys, loss))
        .collect::<Result<_>>()?;
    let comp: Vec<f64> = (0..grid.len())
        .map(|g| empirical_risk(grid, g, xs, yhat, loss))
        .collect::<Result<_>>()?;
    if fhat >= grid.len() {
        return Err(Error::usage(format!("hypothesis {fhat} out of range")));
    }
    let min_comp = comp.iter().copied().fold(f64::INFINITY, f64::min);
    let min_raw = raw.iter().copied().fold(f64::INFINITY, f64::min);
    if comp[fhat] != min_comp && !allow_non_minimizer {
        return Err(Error::usage(format!(
            "hypothesis {fhat} has compressed risk {} but the minimum is {min_comp}",
            comp[fhat]
        )));
    }
    let ln = ys.iter().zip(yhat).map(|(&y, &u)| loss.eval(y, u)).sum::<f64>() / ys.len() as f64;
    let r = loss.metric_power();
    let phi = |v: f64| v.max(0.0).powf(1.0 / r);
    let dev = raw
        .iter()
        .zip(&comp)
        .map(|(&a, &b)| (phi(a) - phi(b)).abs())
        .fold(0.0, f64::max);

    let mut steps = vec![
        ChainStep::new("uniform deviation", dev, Relation::Le, phi(ln)),
        ChainStep::new("(a)", phi(raw[fhat]), Relation::Le, phi(comp[fhat]) + phi(ln)),
        ChainStep::new("(b)", phi(comp[fhat]), Relation::Eq, phi(min_comp)),
        ChainStep::new("(c)", phi(min_comp) + phi(ln), Relation::Le, phi(min_raw) + 2.0 * phi(ln)),
    ];
    let eta = loss.eval_eta(ln)?;
    let unit = |v: &f64| (0.0..=1.0).contains(v);
    let in_range = ys.iter().chain(yhat).all(unit) && grid.levels.iter().all(unit);
    let eta_steps = [
        ChainStep::new("eta (a)", raw[fhat], Relation::Le, comp[fhat] + eta),
        ChainStep::new("eta (b)", comp[fhat], Relation::Eq, min_comp),
        ChainStep::new("eta (c)", min_comp + eta, Relation::Le, min_raw + 2.0 * eta),
    ];
    for s in eta_steps {
        steps.push(if in_range || r == 1.0 { s } else { s.informational() });
    }
    Ok(ChainReport::new("empirical risk chain", steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::erm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>, HypothesisGrid) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = HypothesisGrid::steps([0.0, 1.0], 3, 4, Some(1), 1000).unwrap();
        let xs: Vec<f64> = (0..400).map(|_| rng.random()).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x + 0.4 * (rng.random::<f64>() - 0.5)).collect();
        let yhat: Vec<f64> = ys.iter().map(|&y| (y * 4.0).round() / 4.0).collect();
        (xs, ys, yhat, grid)
    }

    #[test]
    fn lossless_collapses() {
        let (xs, ys, _, grid) = setup(1);
        let loss = LossFunction::squared();
        let f = erm(&grid, &xs, &ys, &loss).unwrap().index;
        let rep = proof_chain_check(&xs, &ys, &ys, &grid, &loss, f, false).unwrap();
        assert_eq!(rep.worst_slack, 0.0);
        assert_eq!(rep.step("uniform deviation").unwrap().lhs, 0.0);
    }

    #[test]
    fn chain_holds_on_quantized_data() {
        for seed in 0..20 {
            let (xs, ys, yhat, grid) = setup(seed);
            for loss in [LossFunction::squared(), LossFunction::absolute(), LossFunction::p_power(3.0).unwrap()] {
                let f = erm(&grid, &xs, &yhat, &loss).unwrap().index;
                let rep = proof_chain_check(&xs, &ys, &yhat, &grid, &loss, f, false).unwrap();
                assert!(rep.holds(1e-12), "{rep}");
            }
        }
    }

    #[test]
    fn non_minimizer_is_refused_or_reported() {
        let (xs, ys, yhat, grid) = setup(3);
        let loss = LossFunction::squared();
        let f = erm(&grid, &xs, &yhat, &loss).unwrap().index;
        let other = (f + 1) % grid.len();
        assert!(matches!(
            proof_chain_check(&xs, &ys, &yhat, &grid, &loss, other, false),
            Err(Error::Usage(_))
        ));
        let rep = proof_chain_check(&xs, &ys, &yhat, &grid, &loss, other, true).unwrap();
        assert!(rep.step("(b)").unwrap().slack < 0.0);
        assert!(!rep.holds(1e-12));
    }
}
