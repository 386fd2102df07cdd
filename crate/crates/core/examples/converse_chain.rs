//! Exhaustive check of the converse chain on the shipped binary instance,
//! then on a lossless one-letter scheme for comparison.

use std::path::Path;

use rdlearn::analysis::{verify_appendix, AppendixCap, AppendixInstance, Learner, Scheme};

fn main() -> rdlearn::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tiny_appendix.json");
    let inst: AppendixInstance = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let rep = verify_appendix(&inst, &AppendixCap::default())?;
    println!("{}", rep.chain);
    println!("E l_n = {:.6}, L* = {:.6}, D_max = {:.6}", rep.expected_loss, rep.lstar, rep.d_max);
    for d in &rep.dominance {
        println!("  R = {:.4}  D(R) = {:.6}  L* - D(R) = {:+.6}", d.rate, d.distortion, d.gap);
    }

    let lossless = AppendixInstance {
        n: 1,
        scheme: Scheme::from_fns(2, 2, 1, 1.0, |_, y| y[0], |_, j| vec![j], Learner::Erm)?,
        ..inst
    };
    let rep = verify_appendix(&lossless, &AppendixCap::default())?;
    println!("\nidentity scheme, n = 1:\n{}", rep.chain);
    Ok(())
}
