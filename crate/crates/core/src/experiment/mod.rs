//! Seeded Monte Carlo trials of the compress-then-learn pipeline and sweeps
//! over rate and sample size.
//!
//! Every trial draws from its own ChaCha8 stream, keyed by the master seed
//! and `(rate, n, trial)`, so rows do not depend on scheduling or on the
//! number of worker threads.

mod config;

use std::fmt::{self, Write as _};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{CodecSpec, ExperimentConfig, GridSpec, OUTPUT_DIR_ENV};

use crate::analysis::{bound_report, proof_chain_check};
use crate::codec::{train_codec, CodecConfig, CodecKind};
use crate::error::{Error, Result};
use crate::learning::{best_in_class_regression, empirical_risk, erm, true_risk_regression, ErmResult, HypothesisGrid};
use crate::rd::gaussian_drf;

/// Column order of the per-trial CSV.
pub const CSV_COLUMNS: [&str; 18] = [
    "rate",
    "n",
    "trial",
    "stream",
    "achieved_rate",
    "distortion",
    "fhat",
    "raw_risk",
    "compressed_risk",
    "true_risk",
    "sqrt_risk",
    "excess_risk",
    "slack_deviation",
    "slack_a",
    "slack_b",
    "slack_c",
    "chain_worst_slack",
    "error",
];

/// One `(rate, n, trial)` cell of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialKey {
    pub rate: f64,
    pub n: usize,
    pub trial: usize,
}

/// Result of one trial. Numeric fields are NaN when the trial failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub key: TrialKey,
    pub stream: u64,
    pub achieved_rate: f64,
    /// `l_n(Y^n, Yhat^n)`.
    pub distortion: f64,
    /// Grid index of the hypothesis learned from the decoded outputs; the
    /// predictions `W_i` are this member evaluated at `X_i`.
    pub fhat: Option<usize>,
    pub raw_risk: f64,
    pub compressed_risk: f64,
    pub true_risk: f64,
    pub sqrt_risk: f64,
    pub excess_risk: f64,
    pub slack_deviation: f64,
    pub slack_a: f64,
    pub slack_b: f64,
    pub slack_c: f64,
    pub chain_worst_slack: f64,
    pub error: Option<String>,
}

impl TrialRow {
    fn failed(key: TrialKey, stream: u64, error: String) -> Self {
        TrialRow {
            key,
            stream,
            achieved_rate: f64::NAN,
            distortion: f64::NAN,
            fhat: None,
            raw_risk: f64::NAN,
            compressed_risk: f64::NAN,
            true_risk: f64::NAN,
            sqrt_risk: f64::NAN,
            excess_risk: f64::NAN,
            slack_deviation: f64::NAN,
            slack_a: f64::NAN,
            slack_b: f64::NAN,
            slack_c: f64::NAN,
            chain_worst_slack: f64::NAN,
            error: Some(error),
        }
    }

    fn csv_line(&self, out: &mut String) {
        let fhat = self.fhat.map_or(String::new(), |f| f.to_string());
        // commas and newlines would break the fixed column layout
        let err = self.error.as_deref().unwrap_or("").replace([',', '\n', '\r'], ";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.key.rate,
            self.key.n,
            self.key.trial,
            self.stream,
            self.achieved_rate,
            self.distortion,
            fhat,
            self.raw_risk,
            self.compressed_risk,
            self.true_risk,
            self.sqrt_risk,
            self.excess_risk,
            self.slack_deviation,
            self.slack_a,
            self.slack_b,
            self.slack_c,
            self.chain_worst_slack,
            err,
        );
    }
}

/// Aggregate over the trials of one `(rate, n)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub rate: f64,
    pub n: usize,
    pub trials: usize,
    pub failures: usize,
    pub achieved_rate_mean: f64,
    pub distortion_mean: f64,
    pub sqrt_risk_mean: f64,
    pub sqrt_risk_se: f64,
    pub true_risk_mean: f64,
    pub excess_risk_mean: f64,
    pub excess_risk_se: f64,
    pub min_chain_slack: f64,
    /// `sigma^2 2^(-2R)`, the distortion-rate function of every member of
    /// the Gaussian model family.
    pub sup_drf: f64,
    pub theorem1_bound: f64,
    pub theorem2_bound: f64,
    pub theorem3_bound: f64,
    /// `sqrt_risk_mean + 2 sqrt_risk_se <= theorem3_bound`.
    pub theorem3_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub grid_size: usize,
    /// Smallest exact risk over the grid and its index.
    pub lstar: f64,
    pub lstar_index: usize,
    pub rows: Vec<TrialRow>,
    pub summary: Vec<CellSummary>,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream id of a trial. The held-out training block uses the sibling
/// stream with the low bit set.
pub fn stream_id(key: TrialKey) -> u64 {
    let h = mix(key.rate.to_bits() ^ mix(key.n as u64 ^ mix(key.trial as u64)));
    h & !1
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A validated config with its grid and best-in-class risk.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub grid: HypothesisGrid,
    pub lstar: ErmResult,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid.build(config.model.domain())?;
        let lstar = best_in_class_regression(&grid, &config.model, &config.loss)?;
        Ok(Experiment { config, grid, lstar })
    }

    /// All trial keys in report order: rate, then `n`, then trial.
    pub fn keys(&self) -> Vec<TrialKey> {
        let c = &self.config;
        let mut keys = Vec::with_capacity(c.codec.rates.len() * c.n_list.len() * c.trials);
        for &rate in &c.codec.rates {
            for &n in &c.n_list {
                for trial in 0..c.trials {
                    keys.push(TrialKey { rate, n, trial });
                }
            }
        }
        keys
    }

    fn codec_config(&self) -> CodecConfig {
        CodecConfig {
            x_bins: self.config.codec.x_bins,
            x_domain: Some(self.config.model.domain()),
            pilot_grid: (self.config.codec.kind == CodecKind::PilotShift).then(|| self.grid.clone()),
            ..CodecConfig::default()
        }
    }

    fn try_trial(&self, key: TrialKey, stream: u64) -> Result<TrialRow> {
        let cfg = &self.config;
        let loss = &cfg.loss;
        let (xs, ys) = cfg.model.sample(key.n, &mut trial_rng(cfg.seed, stream));
        let codec = if cfg.codec.held_out {
            let (tx, ty) = cfg.model.sample(key.n, &mut trial_rng(cfg.seed, stream | 1));
            train_codec(cfg.codec.kind, &tx, &ty, key.rate, loss, &self.codec_config())?
        } else {
            train_codec(cfg.codec.kind, &xs, &ys, key.rate, loss, &self.codec_config())?
        };
        let yhat = codec.decode(&xs, &codec.encode(&xs, &ys)?)?;
        let distortion = ys.iter().zip(&yhat).map(|(&y, &u)| loss.eval(y, u)).sum::<f64>() / key.n as f64;
        let fit = erm(&self.grid, &xs, &yhat, loss)?;
        let true_risk = true_risk_regression(&self.grid, fit.index, &cfg.model, loss)?;
        let chain = proof_chain_check(&xs, &ys, &yhat, &self.grid, loss, fit.index, false)?;
        let slack = |label: &str| chain.step(label).map_or(f64::NAN, |s| s.slack);
        Ok(TrialRow {
            key,
            stream,
            achieved_rate: codec.achieved_rate(key.n),
            distortion,
            fhat: Some(fit.index),
            raw_risk: empirical_risk(&self.grid, fit.index, &xs, &ys, loss)?,
            compressed_risk: fit.risk,
            true_risk,
            sqrt_risk: true_risk.sqrt(),
            excess_risk: true_risk - self.lstar.risk,
            slack_deviation: slack("uniform deviation"),
            slack_a: slack("(a)"),
            slack_b: slack("(b)"),
            slack_c: slack("(c)"),
            chain_worst_slack: chain.worst_slack,
            error: None,
        })
    }

    /// Sample, compress, learn from the decoded outputs and score one trial.
    /// Failures are recorded in the row with the trial context.
    pub fn run_trial(&self, key: TrialKey) -> TrialRow {
        let stream = stream_id(key);
        self.try_trial(key, stream).unwrap_or_else(|e| {
            TrialRow::failed(
                key,
                stream,
                format!("rate {}, n {}, trial {}: {e}", key.rate, key.n, key.trial),
            )
        })
    }

    /// Order rows by key and aggregate them.
    pub fn assemble(&self, mut rows: Vec<TrialRow>) -> Result<ExperimentReport> {
        let keys = self.keys();
        let pos = |k: &TrialKey| {
            keys.iter()
                .position(|q| q.rate.to_bits() == k.rate.to_bits() && q.n == k.n && q.trial == k.trial)
        };
        let mut ranked = Vec::with_capacity(rows.len());
        for row in rows.drain(..) {
            let p = pos(&row.key).ok_or_else(|| Error::usage(format!("row {:?} is not part of the sweep", row.key)))?;
            ranked.push((p, row));
        }
        ranked.sort_by_key(|(p, _)| *p);
        let rows: Vec<TrialRow> = ranked.into_iter().map(|(_, r)| r).collect();
        let sigma = self.config.model.sigma;
        let mut summary = Vec::new();
        for &rate in &self.config.codec.rates {
            for &n in &self.config.n_list {
                let cell: Vec<&TrialRow> = rows.iter().filter(|r| r.key.rate == rate && r.key.n == n).collect();
                let ok: Vec<&TrialRow> = cell.iter().copied().filter(|r| r.error.is_none()).collect();
                let col = |f: fn(&TrialRow) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
                let (sqrt_mean, sqrt_se) = mean_se(&col(|r| r.sqrt_risk));
                let (excess_mean, excess_se) = mean_se(&col(|r| r.excess_risk));
                let sup_drf = gaussian_drf(sigma, rate)?;
                let bounds = bound_report(rate, self.lstar.risk, &self.config.loss, sup_drf, Some(sigma), None)?;
                let t3 = bounds.theorem3_bound.unwrap_or(f64::NAN);
                summary.push(CellSummary {
                    rate,
                    n,
                    trials: cell.len(),
                    failures: cell.len() - ok.len(),
                    achieved_rate_mean: mean_se(&col(|r| r.achieved_rate)).0,
                    distortion_mean: mean_se(&col(|r| r.distortion)).0,
                    sqrt_risk_mean: sqrt_mean,
                    sqrt_risk_se: sqrt_se,
                    true_risk_mean: mean_se(&col(|r| r.true_risk)).0,
                    excess_risk_mean: excess_mean,
                    excess_risk_se: excess_se,
                    min_chain_slack: col(|r| r.chain_worst_slack).into_iter().fold(f64::INFINITY, f64::min),
                    sup_drf,
                    theorem1_bound: bounds.theorem1_bound,
                    theorem2_bound: bounds.theorem2_bound,
                    theorem3_bound: t3,
                    theorem3_holds: sqrt_mean + 2.0 * sqrt_se <= t3,
                });
            }
        }
        Ok(ExperimentReport {
            config: self.config.clone(),
            grid_size: self.grid.len(),
            lstar: self.lstar.risk,
            lstar_index: self.lstar.index,
            rows,
            summary,
        })
    }

    /// Run every trial, in parallel, and aggregate.
    pub fn run_sweep(&self) -> Result<ExperimentReport> {
        let keys = self.keys();
        let run = || keys.par_iter().map(|&k| self.run_trial(k)).collect::<Vec<_>>();
        let rows = match self.config.threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
                .install(run),
            None => run(),
        };
        self.assemble(rows)
    }
}

/// Build the experiment and run the full sweep.
pub fn run_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::new(config.clone())?.run_sweep()
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for row in &self.rows {
            row.csv_line(&mut out);
        }
        out
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// For each `n`, the mean excess risk never rises by more than two
    /// standard errors when the rate grows.
    pub fn rate_monotone(&self) -> bool {
        let mut cells: Vec<&CellSummary> = self.summary.iter().collect();
        cells.sort_by(|a, b| a.n.cmp(&b.n).then(a.rate.total_cmp(&b.rate)));
        cells.windows(2).filter(|w| w[0].n == w[1].n).all(|w| {
            let se = w[0].excess_risk_se.hypot(w[1].excess_risk_se);
            w[1].excess_risk_mean <= w[0].excess_risk_mean + 2.0 * se
        })
    }

    /// Write `trials.csv` and `summary.json` into `dir`, each through a
    /// temporary file renamed into place.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join("trials.csv");
        let json = dir.join("summary.json");
        write_atomic(dir, &csv, self.to_csv().as_bytes())?;
        let summary = serde_json::json!({
            "config": self.config,
            "grid_size": self.grid_size,
            "lstar": self.lstar,
            "lstar_index": self.lstar_index,
            "failures": self.failures(),
            "summary": self.summary,
        });
        let mut text = serde_json::to_string_pretty(&summary)?;
        text.push('\n');
        write_atomic(dir, &json, text.as_bytes())?;
        Ok((csv, json))
    }
}

fn write_atomic(dir: &Path, target: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(target).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "grid of {} hypotheses, L* = {:.6} (member {})",
            self.grid_size, self.lstar, self.lstar_index
        )?;
        writeln!(
            f,
            "{:>6} {:>7} {:>6} {:>9} {:>10} {:>12} {:>10} {:>10} {:>11} {:>5}",
            "rate", "n", "trials", "achieved", "l_n", "E[L^1/2]", "se", "bound", "min slack", "ok"
        )?;
        for c in &self.summary {
            writeln!(
                f,
                "{:>6} {:>7} {:>6} {:>9.4} {:>10.6} {:>12.6} {:>10.2e} {:>10.6} {:>11.2e} {:>5}",
                c.rate,
                c.n,
                c.trials - c.failures,
                c.achieved_rate_mean,
                c.distortion_mean,
                c.sqrt_risk_mean,
                c.sqrt_risk_se,
                c.theorem3_bound,
                c.min_chain_slack,
                if c.theorem3_holds { "yes" } else { "NO" }
            )?;
        }
        write!(f, "failed trials: {}", self.failures())
    }
}
