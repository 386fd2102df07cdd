use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codec::CodecKind;
use crate::error::{Error, Result};
use crate::learning::{covering_number, HypothesisGrid, LipschitzClass, Norm};
use crate::loss::{LossFunction, LossKind};
use crate::prob::RegressionModel;

/// Environment variable that overrides [`ExperimentConfig::output`].
pub const OUTPUT_DIR_ENV: &str = "RDLEARN_OUTPUT_DIR";

fn default_cap() -> usize {
    1_000_000
}

/// How the hypothesis grid of an experiment is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    /// Step functions with levels `j / q` on `cells` uniform cells of the
    /// model domain.
    Steps {
        cells: usize,
        q: u32,
        #[serde(default)]
        max_jump: Option<u32>,
        #[serde(default = "default_cap")]
        cap: usize,
    },
    /// The constructive sup-norm net of a Lipschitz class.
    LipschitzNet {
        lipschitz: f64,
        epsilon: f64,
        #[serde(default = "default_cap")]
        cap: usize,
    },
    /// Explicit per-cell values.
    Values { functions: Vec<Vec<f64>> },
}

impl GridSpec {
    pub fn build(&self, domain: [f64; 2]) -> Result<HypothesisGrid> {
        match self {
            GridSpec::Steps {
                cells,
                q,
                max_jump,
                cap,
            } => HypothesisGrid::steps(domain, *cells, *q, *max_jump, *cap),
            GridSpec::LipschitzNet { lipschitz, epsilon, cap } => {
                let class = LipschitzClass {
                    domain,
                    lipschitz: *lipschitz,
                };
                Ok(covering_number(&class, *epsilon, Norm::Sup, *cap)?.1)
            }
            GridSpec::Values { functions } => HypothesisGrid::from_values(domain, functions),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecSpec {
    pub kind: CodecKind,
    pub rates: Vec<f64>,
    /// Side-information bins of the conditional codec.
    #[serde(default = "default_x_bins")]
    pub x_bins: usize,
    /// Train the codec on an independent block of the same size instead of
    /// the trial's own data.
    #[serde(default)]
    pub held_out: bool,
}

fn default_x_bins() -> usize {
    12
}

fn default_loss() -> LossFunction {
    LossFunction::squared()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: RegressionModel,
    pub grid: GridSpec,
    #[serde(default = "default_loss")]
    pub loss: LossFunction,
    pub codec: CodecSpec,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Worker threads; the global rayon pool when absent. Results do not
    /// depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Read a config file; `.toml` files are parsed as TOML, anything else
    /// as JSON.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.trials == 0 {
            return Err(Error::validation("trials must be >= 1"));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("n_list must be nonempty, positive and strictly ascending"));
        }
        if self.codec.rates.is_empty() || self.codec.rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::validation("codec rates must be a nonempty list of finite values >= 0"));
        }
        let squared = match self.loss.kind {
            LossKind::Squared => true,
            LossKind::PPower { p } => p == 2.0,
            _ => false,
        };
        if !squared {
            return Err(Error::validation(format!(
                "experiments evaluate the exact regression risk and need squared loss, got {}",
                self.loss
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::validation("threads must be >= 1"));
        }
        Ok(())
    }

    /// Output directory after the environment override.
    pub fn output_dir(&self) -> Option<PathBuf> {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| self.output.clone())
    }
}
