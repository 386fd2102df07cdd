use serde::{Deserialize, Serialize};

use super::chain::{ChainReport, ChainStep, Relation};
use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::prob::{FiniteJoint, MultiPmf};
use crate::rd::{geometric_slopes, rd_curve, zero_rate_distortion, BaConfig, RdCurve};

/// How the learner picks a hypothesis from `(x^n, yhat^n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Learner {
    /// Empirical risk minimization over the instance hypotheses, lowest
    /// index on ties.
    Erm,
    /// Hypothesis index per `(x^n, yhat^n)` code.
    Table { table: Vec<u32> },
}

/// A block scheme given by its tables.
///
/// Sequences are coded lexicographically with the first coordinate most
/// significant; `x^n` and `y^n` use alphabet indices. The encoder table is
/// indexed by `xcode * |Y|^n + ycode`, the decoder by
/// `xcode * messages + J` and yields `yhat^n` as `Y` alphabet indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scheme {
    pub encoder: Vec<u32>,
    pub decoder: Vec<Vec<u32>>,
    pub learner: Learner,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixInstance {
    pub joint: FiniteJoint,
    pub loss: LossFunction,
    pub n: usize,
    pub rate: f64,
    /// Each hypothesis as its prediction for every `X` symbol.
    pub hypotheses: Vec<Vec<f64>>,
    pub scheme: Scheme,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixCap {
    pub max_alphabet: usize,
    pub max_n: usize,
}

impl Default for AppendixCap {
    fn default() -> Self {
        AppendixCap {
            max_alphabet: 4,
            max_n: 3,
        }
    }
}

fn messages(n: usize, rate: f64) -> Result<usize> {
    if !(rate >= 0.0) || n as f64 * rate > 24.0 {
        return Err(Error::usage(format!("rate {rate} is negative or too large to tabulate")));
    }
    Ok(((n as f64 * rate).exp2() * (1.0 + 1e-12)).floor() as usize)
}

fn decode_seq(mut code: usize, base: usize, n: usize) -> Vec<u32> {
    let mut v = vec![0u32; n];
    for slot in v.iter_mut().rev() {
        *slot = (code % base) as u32;
        code /= base;
    }
    v
}

fn encode_seq(seq: &[u32], base: usize) -> usize {
    seq.iter().fold(0, |acc, &s| acc * base + s as usize)
}

impl Scheme {
    /// Tabulate a scheme from closures over index sequences.
    pub fn from_fns(
        nx: usize,
        ny: usize,
        n: usize,
        rate: f64,
        encoder: impl Fn(&[u32], &[u32]) -> u32,
        decoder: impl Fn(&[u32], u32) -> Vec<u32>,
        learner: Learner,
    ) -> Result<Scheme> {
        let m = messages(n, rate)?;
        let (xs, ys) = (nx.pow(n as u32), ny.pow(n as u32));
        let mut enc = Vec::with_capacity(xs * ys);
        let mut dec = Vec::with_capacity(xs * m);
        for xc in 0..xs {
            let xseq = decode_seq(xc, nx, n);
            for yc in 0..ys {
                enc.push(encoder(&xseq, &decode_seq(yc, ny, n)));
            }
            for j in 0..m {
                dec.push(decoder(&xseq, j as u32));
            }
        }
        Ok(Scheme {
            encoder: enc,
            decoder: dec,
            learner,
        })
    }
}

/// Curve point compared against `L*` in the dominance check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceRow {
    pub rate: f64,
    pub distortion: f64,
    /// `L* - D(R)`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub chain: ChainReport,
    /// `E l(W_i, Y_i)` for each position.
    pub position_losses: Vec<f64>,
    pub expected_loss: f64,
    pub lstar: f64,
    pub lstar_index: usize,
    pub d_max: f64,
    /// `D(R)` at the scheme rate read off the curve.
    pub drf_at_rate: f64,
    pub dominance: Vec<DominanceRow>,
    pub dominance_holds: bool,
}

impl AppendixReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.chain.holds(tol) && self.dominance_holds
    }
}

impl AppendixInstance {
    pub fn validate(&self, cap: &AppendixCap) -> Result<usize> {
        let (nx, ny, n) = (self.joint.nx(), self.joint.ny(), self.n);
        if nx > cap.max_alphabet || ny > cap.max_alphabet || n > cap.max_n {
            return Err(Error::CapExceeded {
                what: "exhaustive enumeration (|X|, |Y|, n)",
                needed: nx.max(ny).pow(2 * n as u32) as f64,
                cap: cap.max_alphabet.pow(2 * cap.max_n as u32) as f64,
            });
        }
        if n == 0 {
            return Err(Error::usage("block length must be >= 1"));
        }
        let m = messages(n, self.rate)?;
        let (xs, ys) = (nx.pow(n as u32), ny.pow(n as u32));
        if self.hypotheses.is_empty() || self.hypotheses.iter().any(|h| h.len() != nx) {
            return Err(Error::validation(format!(
                "need >= 1 hypothesis with one prediction per X symbol ({nx})"
            )));
        }
        let s = &self.scheme;
        if s.encoder.len() != xs * ys {
            return Err(Error::validation(format!(
                "encoder table has {} entries, expected {}",
                s.encoder.len(),
                xs * ys
            )));
        }
        if let Some(j) = s.encoder.iter().find(|&&j| j as usize >= m) {
            return Err(Error::validation(format!("encoder emits message {j} but rate allows {m}")));
        }
        if s.decoder.len() != xs * m || s.decoder.iter().any(|d| d.len() != n || d.iter().any(|&y| y as usize >= ny)) {
            return Err(Error::validation(format!(
                "decoder table needs {} entries of {n} output indices below {ny}",
                xs * m
            )));
        }
        if let Learner::Table { table } = &s.learner {
            if table.len() != xs * ys || table.iter().any(|&h| h as usize >= self.hypotheses.len()) {
                return Err(Error::validation("learner table has the wrong size or an unknown hypothesis"));
            }
        }
        Ok(m)
    }

    /// Output alphabet together with every hypothesis value, sorted.
    pub fn reproduction_alphabet(&self) -> Vec<f64> {
        let mut rep: Vec<f64> = self
            .joint
            .y_alphabet()
            .iter()
            .chain(self.hypotheses.iter().flatten())
            .copied()
            .collect();
        rep.sort_by(f64::total_cmp);
        rep.dedup();
        rep
    }

    fn learn(&self, xseq: &[u32], yhat: &[u32]) -> usize {
        match &self.scheme.learner {
            Learner::Table { table } => {
                let ny = self.joint.ny();
                table[encode_seq(xseq, self.joint.nx()) * ny.pow(self.n as u32) + encode_seq(yhat, ny)] as usize
            }
            Learner::Erm => {
                let ya = self.joint.y_alphabet();
                let risk = |h: &Vec<f64>| {
                    xseq.iter()
                        .zip(yhat)
                        .map(|(&x, &y)| self.loss.eval(ya[y as usize], h[x as usize]))
                        .sum::<f64>()
                };
                let mut best = (0, risk(&self.hypotheses[0]));
                for (i, h) in self.hypotheses.iter().enumerate().skip(1) {
                    let r = risk(h);
                    if r < best.1 {
                        best = (i, r);
                    }
                }
                best.0
            }
        }
    }

    /// `L(f, P)` for every hypothesis.
    pub fn hypothesis_risks(&self) -> Vec<f64> {
        let ya = self.joint.y_alphabet();
        self.hypotheses
            .iter()
            .map(|h| {
                (0..self.joint.nx())
                    .flat_map(|x| (0..self.joint.ny()).map(move |y| (x, y)))
                    .map(|(x, y)| self.joint.p(x, y) * self.loss.eval(ya[y], h[x]))
                    .sum()
            })
            .collect()
    }
}

fn var_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Exhaustive check of the converse chain for one scheme.
///
/// Builds the exact joint law of `(X^n, Y^n, J, Yhat^n, W^n)` with
/// `W_i = fhat(X^n, Yhat^n)(X_i)` and evaluates every term of
/// `nR >= H(J|X^n) >= ... >= n R(E l_n)`. The rate-distortion terms use the
/// certified lower bound from the curve's dual lines, which is convex, so
/// the final averaging step holds exactly and the whole chain is a valid
/// check on the true function as well.
pub fn appendix_chain_verify(inst: &AppendixInstance, curve: &RdCurve, cap: &AppendixCap) -> Result<AppendixReport> {
    let m = inst.validate(cap)?;
    let (nx, ny, n) = (inst.joint.nx(), inst.joint.ny(), inst.n);
    let rep = inst.reproduction_alphabet();
    let ya = inst.joint.y_alphabet();

    let xv = var_names("X", n);
    let yv = var_names("Y", n);
    let hv = var_names("Yhat", n);
    let wv = var_names("W", n);
    let mut names: Vec<&str> = Vec::with_capacity(4 * n + 1);
    names.extend(xv.iter().map(String::as_str));
    names.extend(yv.iter().map(String::as_str));
    names.push("J");
    names.extend(hv.iter().map(String::as_str));
    names.extend(wv.iter().map(String::as_str));
    let mut pmf = MultiPmf::new(&names)?;

    let ys_count = ny.pow(n as u32);
    let mut outcome = vec![0u32; 4 * n + 1];
    for xc in 0..nx.pow(n as u32) {
        let xseq = decode_seq(xc, nx, n);
        for yc in 0..ys_count {
            let yseq = decode_seq(yc, ny, n);
            let p: f64 = xseq.iter().zip(&yseq).map(|(&x, &y)| inst.joint.p(x as usize, y as usize)).product();
            if p == 0.0 {
                continue;
            }
            let j = inst.scheme.encoder[xc * ys_count + yc];
            let yhat = &inst.scheme.decoder[xc * m + j as usize];
            let h = &inst.hypotheses[inst.learn(&xseq, yhat)];
            outcome[..n].copy_from_slice(&xseq);
            outcome[n..2 * n].copy_from_slice(&yseq);
            outcome[2 * n] = j;
            outcome[2 * n + 1..3 * n + 1].copy_from_slice(yhat);
            for i in 0..n {
                let w = h[xseq[i] as usize];
                outcome[3 * n + 1 + i] = rep.iter().position(|&r| r == w).expect("hypothesis value in alphabet") as u32;
            }
            pmf.add(&outcome, p)?;
        }
    }
    pmf.validate()?;

    fn strs(v: &[String]) -> Vec<&str> {
        v.iter().map(String::as_str).collect()
    }
    fn cat<'a>(parts: &[&[&'a str]]) -> Vec<&'a str> {
        parts.iter().flat_map(|p| p.iter().copied()).collect()
    }
    let (x, y, yh, w) = (strs(&xv), strs(&yv), strs(&hv), strs(&wv));

    let n_r = n as f64 * inst.rate;
    let h_j = pmf.entropy(&["J"], &x)?;
    let h_yhat = pmf.entropy(&yh, &x)?;
    let i_yhat_y = pmf.mutual_information(&yh, &y, &x)?;
    let h_y_x = pmf.entropy(&y, &x)?;
    let diff_yhat = h_y_x - pmf.entropy(&y, &cat(&[&x, &yh]))?;
    let diff_w = h_y_x - pmf.entropy(&y, &cat(&[&x, &yh, &w]))?;
    let mut per_pos_chain = 0.0;
    let mut per_pos_local = 0.0;
    let mut per_pos_mi = 0.0;
    let mut per_pos_rate = 0.0;
    let mut position_losses = Vec::with_capacity(n);
    for i in 0..n {
        let hyi = pmf.entropy(&[y[i]], &[x[i]])?;
        let past = &y[..i];
        per_pos_chain += hyi - pmf.entropy(&[y[i]], &cat(&[&x, &yh, &w, past]))?;
        per_pos_local += hyi - pmf.entropy(&[y[i]], &[x[i], w[i]])?;
        per_pos_mi += pmf.mutual_information(&[y[i]], &[w[i]], &[x[i]])?;
        let li = pmf.expect(|o| inst.loss.eval(ya[o[n + i] as usize], rep[o[3 * n + 1 + i] as usize]));
        per_pos_rate += curve.rate_lower_bound(li);
        position_losses.push(li);
    }
    let expected_loss = position_losses.iter().sum::<f64>() / n as f64;
    let n_r_mean = n as f64 * curve.rate_lower_bound(expected_loss);

    let mut steps = vec![
        ChainStep::new("nR >= H(J|X^n)", n_r, Relation::Ge, h_j),
        ChainStep::new("H(J|X^n) >= H(Yhat^n|X^n)", h_j, Relation::Ge, h_yhat),
        ChainStep::new("H(Yhat^n|X^n) >= I(Yhat^n;Y^n|X^n)", h_yhat, Relation::Ge, i_yhat_y),
        ChainStep::new("I(Yhat^n;Y^n|X^n) = H(Y^n|X^n) - H(Y^n|X^n,Yhat^n)", i_yhat_y, Relation::Eq, diff_yhat),
        ChainStep::new("... = H(Y^n|X^n) - H(Y^n|X^n,Yhat^n,W^n)", diff_yhat, Relation::Eq, diff_w),
        ChainStep::new(
            "... = sum_i H(Y_i|X_i) - H(Y_i|X^n,Yhat^n,W^n,Y^(i-1))",
            diff_w,
            Relation::Eq,
            per_pos_chain,
        ),
        ChainStep::new(
            "... >= sum_i H(Y_i|X_i) - H(Y_i|X_i,W_i)",
            per_pos_chain,
            Relation::Ge,
            per_pos_local,
        ),
        ChainStep::new("... = sum_i I(Y_i;W_i|X_i)", per_pos_local, Relation::Eq, per_pos_mi),
        ChainStep::new("... >= sum_i R(E l(W_i,Y_i))", per_pos_mi, Relation::Ge, per_pos_rate),
        ChainStep::new("... >= n R(E l_n)", per_pos_rate, Relation::Ge, n_r_mean),
        ChainStep::new(
            "E l_n >= D(R)",
            expected_loss,
            Relation::Ge,
            curve.distortion_lower_bound(inst.rate),
        ),
    ];
    let cfg = BaConfig {
        reproduction: Some(rep.clone()),
        ..BaConfig::default()
    };
    let d_max = zero_rate_distortion(&inst.joint, &inst.loss, &cfg)?;
    if inst.rate == 0.0 {
        steps.push(ChainStep::new("E l_n >= D_max at rate 0", expected_loss, Relation::Ge, d_max));
    }

    let risks = inst.hypothesis_risks();
    let (lstar_index, lstar) = risks
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, r)| if r < b.1 { (i, r) } else { b });
    let mut rates: Vec<f64> = curve.points.iter().map(|p| p.rate).collect();
    rates.push(inst.rate);
    let dominance = rates
        .into_iter()
        .map(|r| {
            let d = curve.invert(r)?.value;
            Ok(DominanceRow {
                rate: r,
                distortion: d,
                gap: lstar - d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AppendixReport {
        chain: ChainReport::new("converse chain", steps),
        position_losses,
        expected_loss,
        lstar,
        lstar_index,
        d_max,
        drf_at_rate: curve.invert(inst.rate)?.value,
        dominance_holds: dominance.iter().all(|d| d.gap >= -1e-9),
        dominance,
    })
}

/// Curve for the instance: reproduction alphabet extended by the hypothesis
/// values and a dense slope grid so the dual lower bound is tight.
pub fn appendix_curve(inst: &AppendixInstance) -> Result<RdCurve> {
    let cfg = BaConfig {
        reproduction: Some(inst.reproduction_alphabet()),
        ..BaConfig::default()
    };
    let dmax = zero_rate_distortion(&inst.joint, &inst.loss, &cfg)?;
    let scale = if dmax > 0.0 { 1.0 / dmax } else { 1.0 };
    rd_curve(&inst.joint, &inst.loss, &geometric_slopes(1e-3 * scale, 1e4 * scale, 80), &cfg)
}

/// Build the curve and run [`appendix_chain_verify`].
pub fn verify_appendix(inst: &AppendixInstance, cap: &AppendixCap) -> Result<AppendixReport> {
    inst.validate(cap)?;
    appendix_chain_verify(inst, &appendix_curve(inst)?, cap)
}
