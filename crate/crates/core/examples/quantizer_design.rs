//! The four scalar codecs on regression data: achieved rate and squared
//! error after a full encode/decode round trip, plus the packed block size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdlearn::codec::{train_codec, CodecConfig, CodecKind};
use rdlearn::learning::HypothesisGrid;
use rdlearn::prob::RegressionModel;
use rdlearn::rd::gaussian_drf;
use rdlearn::{Function1D, LossFunction};

fn main() -> rdlearn::Result<()> {
    let sigma = 0.2;
    let f0 = Function1D::linear(vec![0.0, 0.5, 1.0], vec![0.1, 0.9, 0.3])?;
    let model = RegressionModel::new(f0, sigma)?;
    let (xs, ys) = model.sample(4000, &mut ChaCha8Rng::seed_from_u64(7));
    let loss = LossFunction::squared();
    let cfg = CodecConfig {
        x_bins: 16,
        x_domain: Some([0.0, 1.0]),
        pilot_grid: Some(HypothesisGrid::steps([0.0, 1.0], 4, 4, None, 10_000)?),
        ..CodecConfig::default()
    };

    for rate in [1.0, 2.0, 3.0] {
        println!("R = {rate}  (Gaussian noise alone: D = {:.5})", gaussian_drf(sigma, rate)?);
        for kind in CodecKind::ALL {
            let codec = train_codec(kind, &xs, &ys, rate, &loss, &cfg)?;
            let block = codec.encode(&xs, &ys)?;
            let bytes = block.to_bytes();
            println!(
                "  {:<24} achieved {:.4} b/s  D = {:.5}  {} bytes",
                kind.name(),
                codec.achieved_rate(xs.len()),
                codec.measure_distortion(&xs, &ys, &loss)?,
                bytes.len()
            );
        }
    }
    Ok(())
}
