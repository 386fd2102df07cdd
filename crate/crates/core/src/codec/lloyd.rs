//! Scalar quantizer design on a sample: nearest-level partitions and
//! loss-aware centroids.

use crate::loss::{LossFunction, LossKind};

/// Index of the level with the smallest loss against `y`; lowest index on ties.
#[inline]
pub(crate) fn nearest(levels: &[f64], y: f64, loss: &LossFunction) -> usize {
    let mut best = 0;
    let mut best_loss = loss.eval(y, levels[0]);
    for (k, &c) in levels.iter().enumerate().skip(1) {
        let l = loss.eval(y, c);
        if l < best_loss {
            best = k;
            best_loss = l;
        }
    }
    best
}

/// Mean loss of the sample against its nearest levels.
pub(crate) fn distortion(levels: &[f64], ys: &[f64], loss: &LossFunction) -> f64 {
    if ys.is_empty() {
        return 0.0;
    }
    ys.iter()
        .map(|&y| loss.eval(y, levels[nearest(levels, y, loss)]))
        .sum::<f64>()
        / ys.len() as f64
}

/// `size` midpoints of `[lo, hi]` split into equal cells.
pub(crate) fn uniform_levels(lo: f64, hi: f64, size: usize) -> Vec<f64> {
    let w = (hi - lo) / size as f64;
    (0..size).map(|k| lo + (k as f64 + 0.5) * w).collect()
}

/// Levels at the sample quantiles `(k + 1/2) / size`.
pub(crate) fn quantile_levels(ys: &[f64], size: usize) -> Vec<f64> {
    let mut s = ys.to_vec();
    s.sort_by(f64::total_cmp);
    (0..size)
        .map(|k| {
            let pos = ((k as f64 + 0.5) / size as f64 * s.len() as f64).floor() as usize;
            s[pos.min(s.len() - 1)]
        })
        .collect()
}

/// Point minimizing the summed loss over `cell` (nonempty).
fn centroid(cell: &mut [f64], loss: &LossFunction) -> f64 {
    match loss.kind {
        LossKind::Squared => cell.iter().sum::<f64>() / cell.len() as f64,
        LossKind::PPower { p: 2.0 } => cell.iter().sum::<f64>() / cell.len() as f64,
        LossKind::Absolute => {
            cell.sort_by(f64::total_cmp);
            cell[(cell.len() - 1) / 2]
        }
        LossKind::PPower { p: 1.0 } => centroid(cell, &LossFunction::absolute()),
        LossKind::PPower { p } => {
            // the derivative sum sign(c - y)|c - y|^(p-1) is increasing in c
            let slope = |c: f64| {
                cell.iter()
                    .map(|&y| (c - y).signum() * (c - y).abs().powf(p - 1.0))
                    .sum::<f64>()
            };
            let (mut a, mut b) = cell
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
            while b > a {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if slope(mid) < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            b
        }
        LossKind::Hamming => {
            cell.sort_by(f64::total_cmp);
            let (mut best, mut best_run, mut i) = (cell[0], 0, 0);
            while i < cell.len() {
                let j = cell[i..].iter().position(|&v| v != cell[i]).map_or(cell.len(), |d| i + d);
                if j - i > best_run {
                    best = cell[i];
                    best_run = j - i;
                }
                i = j;
            }
            best
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Lloyd {
    /// Sorted ascending.
    pub levels: Vec<f64>,
    /// Training distortion after initialization and after every update.
    pub history: Vec<f64>,
}

/// Alternate nearest-level partitions and centroid updates until the
/// relative change in training distortion drops below `rel_tol`.
///
/// A centroid is only accepted if it does not raise its cell's loss, so the
/// history is nonincreasing for every loss.
pub(crate) fn lloyd(ys: &[f64], init: Vec<f64>, loss: &LossFunction, rel_tol: f64, max_iter: usize) -> Lloyd {
    let mut levels = init;
    let mut d = distortion(&levels, ys, loss);
    let mut history = vec![d];
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); levels.len()];
    for _ in 0..max_iter {
        if d == 0.0 {
            break;
        }
        cells.iter_mut().for_each(Vec::clear);
        for &y in ys {
            cells[nearest(&levels, y, loss)].push(y);
        }
        for (k, cell) in cells.iter_mut().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let old = levels[k];
            let new = centroid(cell, loss);
            let cost = |c: f64| cell.iter().map(|&y| loss.eval(y, c)).sum::<f64>();
            if cost(new) <= cost(old) {
                levels[k] = new;
            }
        }
        let next = distortion(&levels, ys, loss);
        history.push(next);
        let done = (d - next).abs() <= rel_tol * d;
        d = next;
        if done {
            break;
        }
    }
    levels.sort_by(f64::total_cmp);
    Lloyd { levels, history }
}
