use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blahut::{ba_rd_point, zero_rate_distortion, BaConfig, RdPoint};
use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::prob::FiniteJoint;

/// Sampled conditional rate-distortion curve, sorted by strictly decreasing
/// distortion (so rate is nondecreasing along the list).
///
/// The first point is always the exact zero-rate endpoint `(D_max, 0)`; it
/// carries slope 0 and the trivial dual bound `R >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    pub points: Vec<RdPoint>,
    pub source_id: String,
    pub loss_id: String,
    /// Solver points that were not converged when the iteration cap hit.
    pub nonconverged: usize,
    /// Solver points whose objective rose at some iteration.
    pub descent_failures: usize,
    /// Solver points discarded as dominated or above the convex envelope.
    pub dropped: usize,
}

/// Inverse lookup result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lookup {
    pub value: f64,
    /// The query fell outside the sampled range and was clamped.
    pub clamped: bool,
}

/// 40 geometric slopes over `[1e-3, 1e3] / D_max` (or unscaled when
/// `D_max = 0`).
pub fn default_slopes(joint: &FiniteJoint, loss: &LossFunction, cfg: &BaConfig) -> Result<Vec<f64>> {
    let dmax = zero_rate_distortion(joint, loss, cfg)?;
    let scale = if dmax > 0.0 { 1.0 / dmax } else { 1.0 };
    Ok(geometric_slopes(1e-3 * scale, 1e3 * scale, 40))
}

pub fn geometric_slopes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Raw solver points, one per slope, in slope order.
pub fn rd_points(
    joint: &FiniteJoint,
    loss: &LossFunction,
    slopes: &[f64],
    cfg: &BaConfig,
) -> Result<Vec<RdPoint>> {
    if slopes.is_empty() {
        return Err(Error::usage("slope grid is empty"));
    }
    if slopes.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::usage("slopes must be positive and finite"));
    }
    if slopes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::usage("slopes must be sorted ascending"));
    }
    slopes
        .par_iter()
        .map(|&s| ba_rd_point(joint, loss, s, cfg).map(|sol| sol.point))
        .collect()
}

pub fn rd_curve(
    joint: &FiniteJoint,
    loss: &LossFunction,
    slopes: &[f64],
    cfg: &BaConfig,
) -> Result<RdCurve> {
    let raw = rd_points(joint, loss, slopes, cfg)?;
    let dmax = zero_rate_distortion(joint, loss, cfg)?;
    Ok(RdCurve::from_points(raw, dmax, "joint", &loss.to_string()))
}

/// Tolerance used when merging nearly coincident curve points.
const MERGE_TOL: f64 = 1e-12;

impl RdCurve {
    /// Assemble a curve from solver points and the zero-rate distortion:
    /// keep the Pareto front, then its lower convex envelope.
    pub fn from_points(raw: Vec<RdPoint>, d_max: f64, source_id: &str, loss_id: &str) -> Self {
        let nonconverged = raw.iter().filter(|p| !p.converged).count();
        let descent_failures = raw.iter().filter(|p| !p.descent_ok).count();
        let n_raw = raw.len();
        let endpoint = RdPoint {
            slope: 0.0,
            distortion: d_max,
            rate: 0.0,
            lower_intercept: 0.0,
            converged: true,
            descent_ok: true,
            iterations: 0,
        };
        let mut pts: Vec<RdPoint> = raw;
        pts.push(endpoint);
        // decreasing distortion; ties broken by increasing rate
        pts.sort_by(|a, b| {
            b.distortion
                .partial_cmp(&a.distortion)
                .unwrap()
                .then(a.rate.partial_cmp(&b.rate).unwrap())
        });

        let mut front: Vec<RdPoint> = Vec::with_capacity(pts.len());
        for p in pts {
            if p.distortion > d_max + MERGE_TOL {
                continue;
            }
            if let Some(last) = front.last() {
                if p.distortion >= last.distortion - MERGE_TOL {
                    // same distortion: the list is rate-ascending, keep the first
                    continue;
                }
            }
            while let Some(last) = front.last() {
                if last.rate >= p.rate - MERGE_TOL {
                    front.pop();
                } else {
                    break;
                }
            }
            front.push(p);
        }
        // the endpoint can only be displaced by a point at D_max with rate 0
        if front.first().map(|p| p.rate > 0.0).unwrap_or(true) {
            front.insert(0, endpoint);
        }

        // lower convex envelope, walking in increasing distortion
        front.reverse();
        let mut hull: Vec<RdPoint> = Vec::with_capacity(front.len());
        for p in front {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.distortion - a.distortion) * (p.rate - a.rate)
                    - (b.rate - a.rate) * (p.distortion - a.distortion);
                // b on or above the chord a-p
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.reverse();
        let kept_raw = hull.iter().filter(|p| p.slope > 0.0).count();
        RdCurve {
            points: hull,
            source_id: source_id.to_string(),
            loss_id: loss_id.to_string(),
            nonconverged,
            descent_failures,
            dropped: n_raw - kept_raw,
        }
    }

    pub fn d_max(&self) -> f64 {
        self.points[0].distortion
    }

    pub fn max_rate(&self) -> f64 {
        self.points.last().map(|p| p.rate).unwrap_or(0.0)
    }

    /// Violations of the curve invariants (empty when valid).
    pub fn invariant_violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.points.is_empty() {
            out.push("curve is empty".to_string());
            return out;
        }
        for (i, w) in self.points.windows(2).enumerate() {
            if !(w[1].distortion < w[0].distortion) {
                out.push(format!("distortion not strictly decreasing at {i}"));
            }
            if w[1].rate < w[0].rate - tol {
                out.push(format!("rate decreasing at {i}"));
            }
        }
        for (i, w) in self.points.windows(3).enumerate() {
            // |dR/dD| must shrink as D grows; walking towards smaller D the
            // chords get steeper.
            let s1 = (w[1].rate - w[0].rate) / (w[0].distortion - w[1].distortion);
            let s2 = (w[2].rate - w[1].rate) / (w[1].distortion - w[2].distortion);
            if s2 < s1 - tol * (1.0 + s1.abs()) {
                out.push(format!("convexity violated at {i}: chord slopes {s1} then {s2}"));
            }
        }
        out
    }

    /// `D(R)` by linear interpolation in `(R, D)`.
    pub fn invert(&self, rate: f64) -> Result<Lookup> {
        if self.points.is_empty() {
            return Err(Error::usage("empty curve"));
        }
        if !(rate >= 0.0) {
            return Err(Error::usage(format!("rate must be >= 0, got {rate}")));
        }
        let pts = &self.points;
        let last = pts[pts.len() - 1];
        if rate >= last.rate {
            return Ok(Lookup {
                value: last.distortion,
                clamped: rate > last.rate + MERGE_TOL,
            });
        }
        if rate <= pts[0].rate {
            return Ok(Lookup {
                value: pts[0].distortion,
                clamped: false,
            });
        }
        // first point with rate > query
        let k = pts.partition_point(|p| p.rate <= rate);
        let (a, b) = (pts[k - 1], pts[k]);
        let t = (rate - a.rate) / (b.rate - a.rate);
        Ok(Lookup {
            value: a.distortion + t * (b.distortion - a.distortion),
            clamped: false,
        })
    }

    /// `R(D)` by linear interpolation; distortions below the sampled range
    /// clamp to the largest sampled rate.
    pub fn rate_at(&self, distortion: f64) -> Result<Lookup> {
        if self.points.is_empty() {
            return Err(Error::usage("empty curve"));
        }
        let pts = &self.points;
        if distortion >= pts[0].distortion {
            return Ok(Lookup {
                value: 0.0,
                clamped: false,
            });
        }
        let last = pts[pts.len() - 1];
        if distortion <= last.distortion {
            return Ok(Lookup {
                value: last.rate,
                clamped: distortion < last.distortion,
            });
        }
        // first point with distortion < query
        let k = pts.partition_point(|p| p.distortion >= distortion);
        let (a, b) = (pts[k - 1], pts[k]);
        let t = (a.distortion - distortion) / (a.distortion - b.distortion);
        Ok(Lookup {
            value: a.rate + t * (b.rate - a.rate),
            clamped: false,
        })
    }

    /// Certified lower bound on `R(D)` from the dual lines of all points.
    pub fn rate_lower_bound(&self, distortion: f64) -> f64 {
        self.points
            .iter()
            .map(|p| p.lower_intercept - p.slope * distortion)
            .fold(0.0, f64::max)
    }

    /// Certified lower bound on `D(R)` from the dual lines of all points.
    pub fn distortion_lower_bound(&self, rate: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.slope > 0.0)
            .map(|p| (p.lower_intercept - rate) / p.slope)
            .fold(0.0, f64::max)
    }

    /// CSV with header `slope,distortion,rate`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("slope,distortion,rate\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{}", p.slope, p.distortion, p.rate);
        }
        s
    }

    /// Parse the CSV written by [`RdCurve::to_csv`]. Dual-bound information
    /// is not part of the CSV, so the resulting lower bounds are trivial.
    pub fn from_csv(text: &str, source_id: &str, loss_id: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::validation("empty curve CSV"))?;
        if header.trim() != "slope,distortion,rate" {
            return Err(Error::validation(format!("unexpected curve CSV header {header:?}")));
        }
        let mut points = Vec::new();
        for (i, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::validation(format!("curve CSV row {i} has {} columns", cols.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::validation(format!("bad number {s:?} in curve CSV row {i}")))
            };
            points.push(RdPoint {
                slope: num(cols[0])?,
                distortion: num(cols[1])?,
                rate: num(cols[2])?,
                lower_intercept: 0.0,
                converged: true,
                descent_ok: true,
                iterations: 0,
            });
        }
        let curve = RdCurve {
            points,
            source_id: source_id.to_string(),
            loss_id: loss_id.to_string(),
            nonconverged: 0,
            descent_failures: 0,
            dropped: 0,
        };
        let bad = curve.invariant_violations(1e-9);
        if !bad.is_empty() {
            return Err(Error::validation(format!("curve CSV is not a valid curve: {}", bad.join("; "))));
        }
        Ok(curve)
    }
}
