//! How much rate the decoder-side input saves: the conditional curve of a
//! small joint against the curve of its pooled output.

use rdlearn::prob::{mutual_information_bits, FiniteJoint};
use rdlearn::rd::{default_slopes, rd_curve, BaConfig};
use rdlearn::LossFunction;

fn main() -> rdlearn::Result<()> {
    // X picks which half of {0, 1, 2, 3} Y mostly lives in
    let joint = FiniteJoint::from_rows(
        vec![0.0, 1.0, 2.0, 3.0],
        &[vec![0.2, 0.2, 0.05, 0.05], vec![0.05, 0.05, 0.2, 0.2]],
    )?;
    let loss = LossFunction::hamming();
    let cfg = BaConfig::default();
    let cond = rd_curve(&joint, &loss, &default_slopes(&joint, &loss, &cfg)?, &cfg)?;
    let pooled = joint.pooled();
    let plain = rd_curve(&pooled, &loss, &default_slopes(&pooled, &loss, &cfg)?, &cfg)?;

    println!("I(X;Y) = {:.4} bits", mutual_information_bits(&joint));
    println!("{:>6} {:>10} {:>10} {:>8}", "D", "R_Y(D)", "R_Y|X(D)", "saved");
    for d in [0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let (rc, rp) = (cond.rate_at(d)?.value, plain.rate_at(d)?.value);
        println!("{d:>6} {rp:>10.4} {rc:>10.4} {:>8.4}", rp - rc);
    }
    Ok(())
}
