//! One trial end to end: sample, compress the outputs at 2 bits per sample
//! with the conditional codec, fit by ERM on what the decoder returns and
//! check the per-realization risk chain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdlearn::analysis::proof_chain_check;
use rdlearn::codec::{train_codec, CodecConfig, CodecKind};
use rdlearn::learning::{best_in_class_regression, erm, true_risk_regression, HypothesisGrid};
use rdlearn::prob::RegressionModel;
use rdlearn::LossFunction;

fn main() -> rdlearn::Result<()> {
    let grid = HypothesisGrid::steps([0.0, 1.0], 6, 6, Some(1), 100_000)?;
    let f0 = grid.function(grid.position(&[2.0 / 6.0, 0.5, 4.0 / 6.0, 4.0 / 6.0, 0.5, 2.0 / 6.0]).unwrap());
    let model = RegressionModel::new(f0, 0.5)?;
    let loss = LossFunction::squared();
    let (xs, ys) = model.sample(4096, &mut ChaCha8Rng::seed_from_u64(42));

    let cfg = CodecConfig {
        x_bins: 12,
        x_domain: Some([0.0, 1.0]),
        ..CodecConfig::default()
    };
    let codec = train_codec(CodecKind::ConditionalLloydMax, &xs, &ys, 2.0, &loss, &cfg)?;
    let yhat = codec.decode(&xs, &codec.encode(&xs, &ys)?)?;

    let raw = erm(&grid, &xs, &ys, &loss)?;
    let compressed = erm(&grid, &xs, &yhat, &loss)?;
    let best = best_in_class_regression(&grid, &model, &loss)?;
    println!("grid size {}, L* = {:.6}", grid.len(), best.risk);
    println!(
        "raw data:        member {:>5}  true risk {:.6}",
        raw.index,
        true_risk_regression(&grid, raw.index, &model, &loss)?
    );
    println!(
        "compressed data: member {:>5}  true risk {:.6}",
        compressed.index,
        true_risk_regression(&grid, compressed.index, &model, &loss)?
    );
    println!();
    println!("{}", proof_chain_check(&xs, &ys, &yhat, &grid, &loss, compressed.index, false)?);
    Ok(())
}
