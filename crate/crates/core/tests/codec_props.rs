use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdlearn::codec::{codebook_size, train_codec, CodecConfig, CodecKind, EncodedBlock};
use rdlearn::learning::HypothesisGrid;
use rdlearn::prob::RegressionModel;
use rdlearn::{Function1D, LossFunction};

fn samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((0.0f64..1.0, -3.0f64..3.0), 5..200).prop_map(|v| v.into_iter().unzip())
}

fn step_grid() -> HypothesisGrid {
    HypothesisGrid::steps([0.0, 1.0], 4, 5, None, 10_000).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lloyd_distortion_never_increases((xs, ys) in samples(), rate in 0.0f64..4.0) {
        let loss = LossFunction::squared();
        for kind in [CodecKind::LloydMax, CodecKind::ConditionalLloydMax] {
            let c = train_codec(kind, &xs, &ys, rate, &loss, &CodecConfig::default()).unwrap();
            for h in &c.histories {
                for w in h.windows(2) {
                    prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{kind}: {h:?}");
                }
            }
        }
    }

    #[test]
    fn conditional_codebooks_never_lose_to_the_global_one((xs, ys) in samples(), rate in 0.0f64..4.0, bins in 1usize..10) {
        let loss = LossFunction::squared();
        let cfg = CodecConfig { x_bins: bins, ..CodecConfig::default() };
        let global = train_codec(CodecKind::LloydMax, &xs, &ys, rate, &loss, &cfg).unwrap();
        let cond = train_codec(CodecKind::ConditionalLloydMax, &xs, &ys, rate, &loss, &cfg).unwrap();
        let (g, c) = (global.training_distortion(&xs, &ys).unwrap(), cond.training_distortion(&xs, &ys).unwrap());
        prop_assert!(c <= g + 1e-9, "{c} > {g}");
    }

    #[test]
    fn blocks_are_deterministic_and_round_trip((xs, ys) in samples(), rate in 0.0f64..6.0, kind_ix in 0usize..4) {
        let kind = CodecKind::ALL[kind_ix];
        let cfg = CodecConfig { pilot_grid: Some(step_grid()), ..CodecConfig::default() };
        let loss = LossFunction::squared();
        let c = train_codec(kind, &xs, &ys, rate, &loss, &cfg).unwrap();
        let again = train_codec(kind, &xs, &ys, rate, &loss, &cfg).unwrap();
        let block = c.encode(&xs, &ys).unwrap();
        prop_assert_eq!(&block, &again.encode(&xs, &ys).unwrap());
        prop_assert!(block.indices.iter().all(|&i| (i as usize) < c.size));
        let bytes = block.to_bytes();
        prop_assert_eq!(&EncodedBlock::from_bytes(&bytes).unwrap(), &block);
        prop_assert_eq!(c.decode(&xs, &block).unwrap(), again.decode(&xs, &block).unwrap());
    }

    #[test]
    fn codebook_size_never_exceeds_the_rate(rate in 0.0f64..31.0) {
        let k = codebook_size(rate).unwrap();
        prop_assert!(k >= 1);
        prop_assert!((k as f64).log2() <= rate + 1e-9);
        prop_assert!(((k + 1) as f64).log2() > rate - 1e-9);
    }
}

#[test]
fn pilot_header_cost_vanishes_with_block_length() {
    let model = RegressionModel::new(Function1D::steps([0.0, 1.0], vec![0.1, 0.5, 0.9, 0.3]).unwrap(), 0.2).unwrap();
    let cfg = CodecConfig { pilot_grid: Some(step_grid()), ..CodecConfig::default() };
    let mut gaps = Vec::new();
    for n in [100, 10_000] {
        let (xs, ys) = model.sample(n, &mut ChaCha8Rng::seed_from_u64(3));
        let c = train_codec(CodecKind::PilotShift, &xs, &ys, 2.0, &LossFunction::squared(), &cfg).unwrap();
        let base = (c.size as f64).log2();
        assert!(c.header_bits > 0);
        assert!(c.achieved_rate(n) >= base);
        gaps.push(c.achieved_rate(n) - base);
    }
    assert!(gaps[1] < gaps[0] && gaps[1] < 1e-2, "{gaps:?}");
}

#[test]
fn pilot_shift_beats_global_lloyd_when_the_model_is_in_the_grid() {
    let grid = step_grid();
    let f0 = grid.function(grid.position(&[0.0, 1.0, 0.0, 1.0]).unwrap());
    let model = RegressionModel::new(f0, 0.1).unwrap();
    let cfg = CodecConfig { pilot_grid: Some(grid), ..CodecConfig::default() };
    let loss = LossFunction::squared();
    let diffs: Vec<f64> = (0..10)
        .map(|seed| {
            let (xs, ys) = model.sample(2000, &mut ChaCha8Rng::seed_from_u64(seed));
            let (txs, tys) = model.sample(2000, &mut ChaCha8Rng::seed_from_u64(1000 + seed));
            let pilot = train_codec(CodecKind::PilotShift, &xs, &ys, 1.0, &loss, &cfg).unwrap();
            let global = train_codec(CodecKind::LloydMax, &xs, &ys, 1.0, &loss, &cfg).unwrap();
            pilot.measure_distortion(&txs, &tys, &loss).unwrap() - global.measure_distortion(&txs, &tys, &loss).unwrap()
        })
        .collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
    let se = (var / diffs.len() as f64).sqrt();
    assert!(mean + 3.0 * se < 0.0, "mean {mean}, se {se}");
}
