//! Fixed-rate scalar codecs with side information.
//!
//! Every codec maps each sample to one of `size` levels, where `size` is the
//! largest integer with `log2(size) <= R`. The index stream is all the
//! decoder sees besides `X^n`.

mod block;
mod lloyd;

pub use block::EncodedBlock;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::uniform_cell;
use crate::learning::{erm, HypothesisGrid};
use crate::loss::LossFunction;
use lloyd::{lloyd, quantile_levels, uniform_levels};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodecKind {
    Uniform,
    LloydMax,
    ConditionalLloydMax,
    PilotShift,
}

impl CodecKind {
    pub const ALL: [CodecKind; 4] = [
        CodecKind::Uniform,
        CodecKind::LloydMax,
        CodecKind::ConditionalLloydMax,
        CodecKind::PilotShift,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CodecKind::Uniform => "uniform",
            CodecKind::LloydMax => "lloyd-max",
            CodecKind::ConditionalLloydMax => "conditional-lloyd-max",
            CodecKind::PilotShift => "pilot-shift",
        }
    }
}

impl fmt::Display for CodecKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodecKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodecKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown codec kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodecConfig {
    /// Number of uniform side-information bins (conditional kind only).
    pub x_bins: usize,
    /// Interval binned for side information; the sample range if absent.
    pub x_domain: Option<[f64; 2]>,
    pub rel_tol: f64,
    pub max_iterations: usize,
    /// Hypotheses the pilot-shift encoder fits and indexes.
    pub pilot_grid: Option<HypothesisGrid>,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            x_bins: 8,
            x_domain: None,
            rel_tol: 1e-8,
            max_iterations: 1000,
            pilot_grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pilot {
    pub grid: HypothesisGrid,
    /// Hypothesis chosen at the encoder; sent as the block header.
    pub index: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codec {
    pub kind: CodecKind,
    pub rate_bits_per_sample: f64,
    pub size: usize,
    pub x_domain: [f64; 2],
    /// One codebook per side-information bin; a single one otherwise. For
    /// pilot-shift the levels are residual levels.
    pub codebooks: Vec<Vec<f64>>,
    /// Bins that had no training samples and reuse the global codebook.
    #[serde(default)]
    pub inherited_bins: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot: Option<Pilot>,
    pub header_bits: u32,
    pub loss: LossFunction,
    /// Training distortion sequence of every Lloyd run (global first).
    #[serde(skip)]
    pub histories: Vec<Vec<f64>>,
}

/// Codebook size for a rate: the largest integer `k >= 1` with `log2 k <= R`.
pub fn codebook_size(rate: f64) -> Result<usize> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::usage(format!(
            "rate {rate} gives fewer than one codeword per sample"
        )));
    }
    if rate > 31.0 {
        return Err(Error::usage(format!("rate {rate} exceeds the 31-bit index limit")));
    }
    Ok((rate.exp2() * (1.0 + 1e-12)).floor() as usize)
}

fn bits_for(size: usize) -> u32 {
    usize::BITS - (size.max(1) - 1).leading_zeros()
}

fn sample_range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)))
}

/// Train a codec on `(x, y)` samples at `rate` bits per sample.
pub fn train_codec(
    kind: CodecKind,
    xs: &[f64],
    ys: &[f64],
    rate: f64,
    loss: &LossFunction,
    cfg: &CodecConfig,
) -> Result<Codec> {
    if xs.len() != ys.len() {
        return Err(Error::usage("inputs and outputs differ in length"));
    }
    if ys.is_empty() {
        return Err(Error::usage("training samples must be nonempty"));
    }
    if ys.iter().chain(xs).any(|v| !v.is_finite()) {
        return Err(Error::usage("training samples must be finite"));
    }
    let size = codebook_size(rate)?;
    let x_domain = match cfg.x_domain {
        Some(d) => d,
        None => {
            let (lo, hi) = sample_range(xs);
            [lo, if hi > lo { hi } else { lo + 1.0 }]
        }
    };
    if !(x_domain[1] > x_domain[0]) {
        return Err(Error::usage("side-information domain must satisfy a < b"));
    }
    let mut codec = Codec {
        kind,
        rate_bits_per_sample: rate,
        size,
        x_domain,
        codebooks: Vec::new(),
        inherited_bins: Vec::new(),
        pilot: None,
        header_bits: 0,
        loss: *loss,
        histories: Vec::new(),
    };
    let run = |ys: &[f64], init: Vec<f64>| lloyd(ys, init, loss, cfg.rel_tol, cfg.max_iterations);
    match kind {
        CodecKind::Uniform => {
            let (lo, hi) = sample_range(ys);
            codec.codebooks.push(uniform_levels(lo, hi, size));
        }
        CodecKind::LloydMax => {
            let q = run(ys, quantile_levels(ys, size));
            codec.codebooks.push(q.levels);
            codec.histories.push(q.history);
        }
        CodecKind::ConditionalLloydMax => {
            if cfg.x_bins == 0 {
                return Err(Error::usage("conditional codec needs x_bins >= 1"));
            }
            let global = run(ys, quantile_levels(ys, size));
            let mut per_bin: Vec<Vec<f64>> = vec![Vec::new(); cfg.x_bins];
            for (&x, &y) in xs.iter().zip(ys) {
                per_bin[uniform_cell(x, x_domain[0], x_domain[1], cfg.x_bins)].push(y);
            }
            let mut histories = vec![global.history.clone()];
            for (b, bin) in per_bin.iter().enumerate() {
                if bin.is_empty() {
                    codec.inherited_bins.push(b);
                    codec.codebooks.push(global.levels.clone());
                    continue;
                }
                // starting from the global codebook guarantees no loss
                // against it on this bin; a local start often does better
                let from_global = run(bin, global.levels.clone());
                let local = run(bin, quantile_levels(bin, size));
                let best = if local.history.last() < from_global.history.last() {
                    local
                } else {
                    from_global
                };
                codec.codebooks.push(best.levels);
                histories.push(best.history);
            }
            codec.histories = histories;
        }
        CodecKind::PilotShift => {
            let grid = cfg
                .pilot_grid
                .as_ref()
                .ok_or_else(|| Error::usage("pilot-shift codec needs a pilot grid"))?;
            let fit = erm(grid, xs, ys, loss)?;
            let residuals: Vec<f64> = xs.iter().zip(ys).map(|(&x, &y)| y - grid.eval(fit.index, x)).collect();
            let q = run(&residuals, quantile_levels(&residuals, size));
            codec.codebooks.push(q.levels);
            codec.histories.push(q.history);
            codec.header_bits = bits_for(grid.len());
            codec.pilot = Some(Pilot {
                grid: grid.clone(),
                index: fit.index as u32,
            });
        }
    }
    Ok(codec)
}

impl Codec {
    /// Bits per sample actually spent on a block of length `n`.
    pub fn achieved_rate(&self, n: usize) -> f64 {
        (self.size as f64).log2() + self.header_bits as f64 / n as f64
    }

    pub fn bits_per_index(&self) -> u8 {
        bits_for(self.size) as u8
    }

    fn codebook_for(&self, x: f64) -> &[f64] {
        if self.codebooks.len() == 1 {
            &self.codebooks[0]
        } else {
            let b = uniform_cell(x, self.x_domain[0], self.x_domain[1], self.codebooks.len());
            &self.codebooks[b]
        }
    }

    fn offset(&self, header: Option<u32>, x: f64) -> Result<f64> {
        match &self.pilot {
            None => Ok(0.0),
            Some(p) => {
                let h = header.ok_or_else(|| Error::usage("pilot-shift block is missing its header"))?;
                if h as usize >= p.grid.len() {
                    return Err(Error::usage(format!("header {h} is not a hypothesis index")));
                }
                Ok(p.grid.eval(h as usize, x))
            }
        }
    }

    pub fn encode(&self, xs: &[f64], ys: &[f64]) -> Result<EncodedBlock> {
        if xs.len() != ys.len() {
            return Err(Error::usage("inputs and outputs differ in length"));
        }
        let n = u32::try_from(xs.len()).map_err(|_| Error::usage("block longer than 2^32 - 1"))?;
        let header = self.pilot.as_ref().map(|p| p.index);
        let mut indices = Vec::with_capacity(xs.len());
        for (&x, &y) in xs.iter().zip(ys) {
            let shift = self.offset(header, x)?;
            let book = self.codebook_for(x);
            // nearest reproduction under the loss, lowest index on ties
            let mut best = 0;
            let mut best_loss = self.loss.eval(y, shift + book[0]);
            for (k, &c) in book.iter().enumerate().skip(1) {
                let l = self.loss.eval(y, shift + c);
                if l < best_loss {
                    best = k;
                    best_loss = l;
                }
            }
            indices.push(best as u32);
        }
        Ok(EncodedBlock {
            n,
            bits_per_index: self.bits_per_index(),
            indices,
            header,
        })
    }

    /// Reproductions from the inputs and the block alone.
    pub fn decode(&self, xs: &[f64], block: &EncodedBlock) -> Result<Vec<f64>> {
        if block.n as usize != xs.len() || block.indices.len() != xs.len() {
            return Err(Error::usage(format!(
                "block carries {} indices for {} inputs",
                block.indices.len(),
                xs.len()
            )));
        }
        if block.header.is_some() && self.pilot.is_none() {
            return Err(Error::usage("block has a header but the codec takes none"));
        }
        xs.iter()
            .zip(&block.indices)
            .map(|(&x, &ix)| {
                let book = self.codebook_for(x);
                let level = book
                    .get(ix as usize)
                    .ok_or_else(|| Error::usage(format!("index {ix} outside codebook of size {}", book.len())))?;
                Ok(self.offset(block.header, x)? + level)
            })
            .collect()
    }

    /// `n^-1 sum l(y_i, yhat_i)` after a full encode/decode round trip.
    pub fn measure_distortion(&self, xs: &[f64], ys: &[f64], loss: &LossFunction) -> Result<f64> {
        let yhat = self.decode(xs, &self.encode(xs, ys)?)?;
        if ys.is_empty() {
            return Ok(0.0);
        }
        Ok(ys.iter().zip(&yhat).map(|(&y, &u)| loss.eval(y, u)).sum::<f64>() / ys.len() as f64)
    }

    /// Mean loss of the codec on its own training sample.
    pub fn training_distortion(&self, xs: &[f64], ys: &[f64]) -> Result<f64> {
        self.measure_distortion(xs, ys, &self.loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = (0..n).map(|_| rng.random::<f64>()).collect();
        let ys = (0..n).map(|_| rng.random::<f64>()).collect();
        (xs, ys)
    }

    #[test]
    fn sizes_and_bad_rates() {
        assert_eq!(codebook_size(0.0).unwrap(), 1);
        assert_eq!(codebook_size(2.0).unwrap(), 4);
        assert_eq!(codebook_size(3f64.log2()).unwrap(), 3);
        assert_eq!(codebook_size(1.5).unwrap(), 2);
        assert!(codebook_size(-0.5).is_err());
        assert_eq!((bits_for(1), bits_for(2), bits_for(3), bits_for(4), bits_for(5)), (0, 1, 2, 2, 3));
    }

    #[test]
    fn uniform_midpoints() {
        let xs = [0.0, 0.5, 1.0];
        let ys = [0.0, 0.3, 1.0];
        let c = train_codec(CodecKind::Uniform, &xs, &ys, 2.0, &LossFunction::squared(), &CodecConfig::default())
            .unwrap();
        assert_eq!(c.codebooks[0], vec![0.125, 0.375, 0.625, 0.875]);
        let yhat = c.decode(&xs, &c.encode(&xs, &ys).unwrap()).unwrap();
        assert_eq!(yhat[1], 0.375);
    }

    #[test]
    fn exact_hit_and_tie() {
        let xs = [0.1, 0.2];
        let c = train_codec(CodecKind::Uniform, &xs, &[0.0, 1.0], 1.0, &LossFunction::squared(), &CodecConfig::default())
            .unwrap();
        // levels 0.25, 0.75; 0.5 is equidistant
        let b = c.encode(&xs, &[0.25, 0.5]).unwrap();
        assert_eq!(b.indices, vec![0, 0]);
        assert_eq!(c.measure_distortion(&xs[..1], &[0.25], &LossFunction::squared()).unwrap(), 0.0);
    }

    #[test]
    fn conditional_not_worse_than_global() {
        let (xs, _) = uniform_data(4000, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ys: Vec<f64> = xs.iter().map(|&x| (6.0 * x).sin() + 0.3 * rng.random::<f64>()).collect();
        let loss = LossFunction::squared();
        let cfg = CodecConfig {
            x_bins: 10,
            ..CodecConfig::default()
        };
        let g = train_codec(CodecKind::LloydMax, &xs, &ys, 2.0, &loss, &cfg).unwrap();
        let c = train_codec(CodecKind::ConditionalLloydMax, &xs, &ys, 2.0, &loss, &cfg).unwrap();
        let (dg, dc) = (g.training_distortion(&xs, &ys).unwrap(), c.training_distortion(&xs, &ys).unwrap());
        assert!(dc <= dg + 1e-9, "{dc} > {dg}");
        assert!(dc < 0.5 * dg);
    }

    #[test]
    fn empty_bins_inherit_global() {
        let xs = [0.05, 0.06, 0.95];
        let ys = [0.0, 1.0, 0.5];
        let cfg = CodecConfig {
            x_bins: 4,
            x_domain: Some([0.0, 1.0]),
            ..CodecConfig::default()
        };
        let c = train_codec(CodecKind::ConditionalLloydMax, &xs, &ys, 1.0, &LossFunction::squared(), &cfg).unwrap();
        assert_eq!(c.inherited_bins, vec![1, 2]);
        assert_eq!(c.codebooks[1], c.codebooks[2]);
    }

    #[test]
    fn pilot_shift_zero_noise_is_lossless() {
        let grid = HypothesisGrid::steps([0.0, 1.0], 4, 4, None, 1000).unwrap();
        let f0 = 77;
        let (xs, _) = uniform_data(500, 3);
        let ys: Vec<f64> = xs.iter().map(|&x| grid.eval(f0, x)).collect();
        let cfg = CodecConfig {
            pilot_grid: Some(grid.clone()),
            ..CodecConfig::default()
        };
        let c = train_codec(CodecKind::PilotShift, &xs, &ys, 0.0, &LossFunction::squared(), &cfg).unwrap();
        assert_eq!(c.pilot.as_ref().unwrap().index, f0 as u32);
        assert_eq!(c.header_bits, 10);
        let block = c.encode(&xs, &ys).unwrap();
        assert_eq!(c.decode(&xs, &block).unwrap(), ys);
        let mut no_header = block.clone();
        no_header.header = None;
        assert!(c.decode(&xs, &no_header).is_err());
        assert!((c.achieved_rate(100) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn round_trip_and_serialization() {
        let (xs, ys) = uniform_data(300, 4);
        let loss = LossFunction::absolute();
        for kind in [CodecKind::Uniform, CodecKind::LloydMax, CodecKind::ConditionalLloydMax] {
            let c = train_codec(kind, &xs, &ys, 3.0, &loss, &CodecConfig::default()).unwrap();
            let b = c.encode(&xs, &ys).unwrap();
            assert!(b.indices.iter().all(|&i| (i as usize) < c.size));
            assert_eq!(EncodedBlock::from_bytes(&b.to_bytes()).unwrap(), b);
            let yhat = c.decode(&xs, &b).unwrap();
            for (x, u) in xs.iter().zip(&yhat) {
                assert!(c.codebook_for(*x).contains(u));
            }
            let back: Codec = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
            assert_eq!(back.encode(&xs, &ys).unwrap(), b);
        }
    }
}
