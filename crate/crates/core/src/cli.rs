//! Command-line front end: `rd`, `simulate`, `bounds`, `verify-appendix`
//! and `covering`.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors (including a
//! verified chain that fails), 2 for internal errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{bound_report, dobrushin_diagnostic, verify_appendix, AppendixCap, AppendixInstance};
use crate::error::{Error, Result};
use crate::experiment::{run_sweep, ExperimentConfig};
use crate::learning::{covering_number, LipschitzClass, Norm};
use crate::loss::LossFunction;
use crate::prob::{discretize_regression, DiscretizationSpec, FiniteJoint, RegressionModel};
use crate::rd::{default_slopes, gaussian_drf, geometric_slopes, rd_curve, solve_at_rate, BaConfig, RdCurve};
use crate::Function1D;

#[derive(Parser, Debug)]
#[command(name = "rdlearn", version, about = "Rate-distortion curves, compressed-data learning sweeps and bound checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distortion-rate curve of a finite joint or of the Gaussian model, as CSV.
    Rd(RdArgs),
    /// Run a seeded sweep from a JSON or TOML config.
    Simulate(SimulateArgs),
    /// Evaluate the risk bounds at one rate.
    Bounds(BoundsArgs),
    /// Exhaustively check the converse chain on a small instance.
    VerifyAppendix(AppendixArgs),
    /// Sizes of the constructive nets of a Lipschitz class.
    Covering(CoveringArgs),
}

#[derive(Args, Debug)]
struct RdArgs {
    /// Use the Gaussian model `Y = f0(X) + N(0, sigma^2)`.
    #[arg(long, conflicts_with = "joint")]
    gaussian: bool,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// JSON file holding a finite joint.
    #[arg(long)]
    joint: Option<PathBuf>,
    #[arg(long, default_value = "squared")]
    loss: LossFunction,
    /// Report `D(R)` at this rate instead of the whole curve.
    #[arg(long)]
    rate: Option<f64>,
    /// Solve the Gaussian model numerically on this many output points.
    #[arg(long)]
    y_grid: Option<usize>,
    #[arg(long, default_value_t = 1)]
    x_bins: usize,
    /// Number of slopes sampled along the curve.
    #[arg(long, default_value_t = 40)]
    slopes: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config and the environment.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, conflicts_with = "curve")]
    gaussian: bool,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value = "squared")]
    loss: LossFunction,
    /// Best-in-class risk; `sigma^2` for the Gaussian model by default.
    #[arg(long)]
    lstar: Option<f64>,
    /// Curve CSV giving the worst-case `D(R)`.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AppendixArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CoveringArgs {
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
    /// One or more radii.
    #[arg(long, num_args = 1.., required = true)]
    epsilon: Vec<f64>,
    #[arg(long, num_args = 2, default_values_t = [0.0, 1.0])]
    domain: Vec<f64>,
    #[arg(long, default_value = "sup")]
    norm: String,
    /// Largest net that may be enumerated; larger nets are only counted.
    #[arg(long, default_value_t = 0)]
    cap: usize,
    /// Constants for the entropy-condition trend (needs three radii).
    #[arg(long, num_args = 1..)]
    c: Vec<f64>,
}

fn rd(a: RdArgs, out: &mut dyn Write) -> Result<()> {
    let text = if a.gaussian {
        if a.y_grid.is_none() {
            match a.rate {
                Some(r) => format!("D = {}\n", gaussian_drf(a.sigma, r)?),
                None => {
                    let mut s = String::from("slope,distortion,rate\n");
                    for i in 0..=a.slopes {
                        let r = 8.0 * i as f64 / a.slopes.max(1) as f64;
                        let d = gaussian_drf(a.sigma, r)?;
                        // dR/dD = -1 / (2 D ln 2)
                        s.push_str(&format!("{},{},{}\n", 1.0 / (2.0 * d * std::f64::consts::LN_2), d, r));
                    }
                    s
                }
            }
        } else {
            let model = RegressionModel::new(Function1D::constant(0.5, [0.0, 1.0]), a.sigma)?;
            let spec = DiscretizationSpec::new(a.x_bins, a.y_grid.unwrap_or(512));
            let joint = discretize_regression(&model, &spec)?;
            match a.rate {
                Some(_) => solve_finite(&joint, &a)?,
                None => {
                    // fixed rates keep every solve away from the slow
                    // near-zero-rate slopes of a fine grid
                    let cfg = BaConfig::default();
                    let mut s = String::from("slope,distortion,rate\n");
                    for i in 1..=16 {
                        let p = solve_at_rate(&joint, &a.loss, 0.25 * i as f64, &cfg)?;
                        s.push_str(&format!("{},{},{}\n", p.slope, p.distortion, p.rate));
                    }
                    s
                }
            }
        }
    } else {
        let path = a.joint.as_ref().ok_or_else(|| Error::usage("rd needs --gaussian or --joint FILE"))?;
        let joint: FiniteJoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        solve_finite(&joint, &a)?
    };
    emit(out, a.output.as_ref(), &text)
}

fn solve_finite(joint: &FiniteJoint, a: &RdArgs) -> Result<String> {
    let cfg = BaConfig::default();
    match a.rate {
        Some(r) => Ok(format!("D = {}\n", solve_at_rate(joint, &a.loss, r, &cfg)?.distortion)),
        None => {
            let base = default_slopes(joint, &a.loss, &cfg)?;
            let slopes = geometric_slopes(base[0], base[base.len() - 1], a.slopes.max(2));
            Ok(rd_curve(joint, &a.loss, &slopes, &cfg)?.to_csv())
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&a.config)?;
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    let report = run_sweep(&cfg)?;
    writeln!(out, "{report}")?;
    if let Some(dir) = a.output.or_else(|| cfg.output_dir()) {
        let (csv, json) = report.write_to(&dir)?;
        writeln!(out, "wrote {} and {}", csv.display(), json.display())?;
    }
    Ok(())
}

fn bounds(a: BoundsArgs, out: &mut dyn Write) -> Result<()> {
    let (sup_drf, sigma) = if a.gaussian {
        let s = a.sigma.ok_or_else(|| Error::usage("--gaussian needs --sigma"))?;
        (gaussian_drf(s, a.rate)?, Some(s))
    } else {
        let path = a.curve.as_ref().ok_or_else(|| Error::usage("bounds needs --gaussian or --curve FILE"))?;
        let curve = RdCurve::from_csv(&std::fs::read_to_string(path)?, &path.display().to_string(), &a.loss.to_string())?;
        (curve.invert(a.rate)?.value, None)
    };
    let lstar = match (a.lstar, sigma) {
        (Some(l), _) => l,
        (None, Some(s)) => s * s,
        (None, None) => return Err(Error::usage("--lstar is required without --gaussian")),
    };
    writeln!(out, "{}", bound_report(a.rate, lstar, &a.loss, sup_drf, sigma, None)?)?;
    Ok(())
}

fn verify(a: AppendixArgs, out: &mut dyn Write) -> Result<()> {
    let inst: AppendixInstance = serde_json::from_str(&std::fs::read_to_string(&a.instance)?)?;
    let rep = verify_appendix(&inst, &AppendixCap::default())?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?;
    } else {
        writeln!(out, "{}", rep.chain)?;
        writeln!(out, "E l_n = {}  L* = {}  D(R) = {}", rep.expected_loss, rep.lstar, rep.drf_at_rate)?;
        let worst = rep.dominance.iter().map(|d| d.gap).fold(f64::INFINITY, f64::min);
        writeln!(
            out,
            "L* >= D(R) at all {} sampled rates: {} (smallest gap {worst:.3e})",
            rep.dominance.len(),
            if rep.dominance_holds { "yes" } else { "no" }
        )?;
    }
    if rep.holds(1e-9) {
        Ok(())
    } else {
        Err(Error::validation(format!("chain fails: worst slack {:e}", rep.chain.worst_slack)))
    }
}

fn covering(a: CoveringArgs, out: &mut dyn Write) -> Result<()> {
    let norm = match a.norm.as_str() {
        "sup" => Norm::Sup,
        "l2" | "L2" => Norm::L2,
        other => return Err(Error::usage(format!("unknown norm {other:?} (sup or l2)"))),
    };
    let class = LipschitzClass {
        domain: [a.domain[0], a.domain[1]],
        lipschitz: a.lipschitz,
    };
    writeln!(out, "epsilon,cells,q,max_jump,log2_count")?;
    let mut samples = Vec::new();
    for &eps in &a.epsilon {
        let cc = if a.cap > 0 {
            covering_number(&class, eps, norm, a.cap)?.0
        } else {
            crate::learning::covering_count(&class, eps)?
        };
        writeln!(out, "{},{},{},{},{}", cc.epsilon, cc.cells, cc.q, cc.max_jump, cc.log2_count)?;
        samples.push((eps, cc.log2_count));
    }
    if !a.c.is_empty() {
        for t in dobrushin_diagnostic(&samples, &a.c)? {
            let ratios: Vec<String> = t.log2_ratios.iter().map(|r| format!("{r:.3}")).collect();
            writeln!(
                out,
                "c = {}: log2 H/2^(c/eps) = [{}] {}",
                t.c,
                ratios.join(", "),
                if t.decreasing { "nonincreasing" } else { "rising" }
            )?;
        }
    }
    Ok(())
}

/// Parse `argv` (program name first) and run, writing to the given streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Rd(a) => rd(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Bounds(a) => bounds(a, out),
        Command::VerifyAppendix(a) => verify(a, out),
        Command::Covering(a) => covering(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_user_error() || matches!(e, Error::Io(_)) {
                1
            } else {
                2
            }
        }
    }
}

/// [`run_with`] on the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
