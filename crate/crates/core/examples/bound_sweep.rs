//! A reduced version of the shipped sweep config: mean root risk with
//! standard errors against `sigma (1 + 2^(1-R))`. Pass a directory to also
//! write `trials.csv` and `summary.json`.

use std::path::{Path, PathBuf};

use rdlearn::experiment::{run_sweep, ExperimentConfig};

fn main() -> rdlearn::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sweep.toml");
    let mut cfg = ExperimentConfig::from_path(&path)?;
    cfg.codec.rates = vec![0.0, 1.0, 2.0, 3.0];
    cfg.n_list = vec![256, 1024];
    cfg.trials = 16;
    cfg.output = std::env::args().nth(1).map(PathBuf::from);

    let report = run_sweep(&cfg)?;
    println!("{report}");
    println!("excess risk nonincreasing in R: {}", report.rate_monotone());
    if let Some(dir) = cfg.output_dir() {
        let (csv, json) = report.write_to(&dir)?;
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}
