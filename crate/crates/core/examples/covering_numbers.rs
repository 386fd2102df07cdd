//! Sizes of the constructive sup-norm nets of Lipschitz classes and the
//! finite-radius trend of `H(eps) / 2^(c/eps)`.

use rdlearn::analysis::dobrushin_diagnostic;
use rdlearn::learning::{covering_count, covering_number, LipschitzClass, Norm};

fn main() -> rdlearn::Result<()> {
    let class = LipschitzClass {
        domain: [0.0, 1.0],
        lipschitz: 1.0,
    };
    println!("{:>8} {:>6} {:>4} {:>5} {:>12}", "eps", "cells", "q", "jump", "log2 N");
    let mut samples = Vec::new();
    for eps in [0.5, 0.25, 0.125, 0.0625, 0.03125] {
        let cc = covering_count(&class, eps)?;
        println!("{eps:>8} {:>6} {:>4} {:>5} {:>12.3}", cc.cells, cc.q, cc.max_jump, cc.log2_count);
        samples.push((eps, cc.log2_count));
    }

    // small nets can be enumerated and used as hypothesis grids
    let (cc, grid) = covering_number(&class, 0.25, Norm::Sup, 100_000)?;
    println!("\neps = 0.25 net: {} members (count {})", grid.len(), cc.count());

    for t in dobrushin_diagnostic(&samples, &[0.05, 0.5, 2.0])? {
        let r: Vec<String> = t.log2_ratios.iter().map(|v| format!("{v:.2}")).collect();
        println!("c = {:<4} log2 ratio [{}] nonincreasing: {}", t.c, r.join(", "), t.decreasing);
    }
    Ok(())
}
