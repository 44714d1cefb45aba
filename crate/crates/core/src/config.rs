//! Declarative run configuration: a TOML file with nested sections mapping
//! onto the library's model specs, loss kinds and MCS settings.

use crate::caviar::CaviarFitConfig;
use crate::dist::InnovationDist;
use crate::error::{Error, Result};
use crate::lossfn::{LevelLossWhich, LossKind, VarLossType, VolLossWhich, DEFAULT_DELTA};
use crate::mcs::{McsConfig, McsStatistic};
use crate::riskeval::{ModelSpec, RollingConfig};
use crate::volmodels::{GarchFamily, GarchSpec, GasDist, GasScaling, GasSpec, OptimizerConfig};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSection {
    /// CSV with `date` + (`price` | `return`) columns
    pub path: PathBuf,
    /// validation (evaluation) sample size
    pub out_of_sample: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSection {
    pub tau: f64,
    #[serde(default = "default_refit_every")]
    pub refit_every: usize,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn default_refit_every() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSection {
    #[serde(default = "default_n_starts")]
    pub n_starts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_caviar_candidates")]
    pub caviar_candidates: usize,
    #[serde(default = "default_caviar_polish")]
    pub caviar_polish: usize,
}

fn default_n_starts() -> usize {
    5
}
fn default_max_iter() -> usize {
    300
}
fn default_caviar_candidates() -> usize {
    10_000
}
fn default_caviar_polish() -> usize {
    10
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            n_starts: default_n_starts(),
            max_iter: default_max_iter(),
            caviar_candidates: default_caviar_candidates(),
            caviar_polish: default_caviar_polish(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossSection {
    /// var | vol | level
    pub family: String,
    /// normal | differentiable | SE1 | SE2 | QLIKE | R2LOG | AE1 | AE2 | SE | AE
    #[serde(default = "default_loss_which")]
    pub which: String,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_loss_which() -> String {
    "normal".into()
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McsSection {
    pub alpha: f64,
    pub b: usize,
    #[serde(default = "default_statistic")]
    pub statistic: String,
    #[serde(default)]
    pub block_length: Option<usize>,
}

fn default_statistic() -> String {
    "TR".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombinationSection {
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_eta() -> f64 {
    10.0
}
fn default_lambda() -> f64 {
    0.99
}

impl Default for CombinationSection {
    fn default() -> Self {
        CombinationSection {
            eta: default_eta(),
            lambda: default_lambda(),
        }
    }
}

/// One `[[models]]` entry; flat fields keep the TOML human-diffable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelEntry {
    #[serde(default)]
    pub name: Option<String>,
    /// garch | gas | caviar
    pub kind: String,
    // ARCH-family fields
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub q: Option<usize>,
    /// gaussian | student_t (GAS: normal | student_t)
    #[serde(default)]
    pub dist: Option<String>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub include_mean: Option<bool>,
    // GAS fields
    /// identity | invsqrt | inverse
    #[serde(default)]
    pub scaling: Option<String>,
    // CAViaR fields
    /// sav | as | ig | adaptive
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub adaptive_g: Option<f64>,
}

impl ModelEntry {
    pub fn to_spec(&self) -> Result<(String, ModelSpec)> {
        let spec = match self.kind.to_lowercase().as_str() {
            "garch" => {
                let family = match self
                    .family
                    .as_deref()
                    .unwrap_or("garch")
                    .to_lowercase()
                    .as_str()
                {
                    "garch" => GarchFamily::Garch,
                    "igarch" => GarchFamily::Igarch,
                    "egarch" => GarchFamily::Egarch,
                    "aparch" => GarchFamily::Aparch,
                    "avgarch" => GarchFamily::Avgarch,
                    "gjrgarch" | "gjr" => GarchFamily::GjrGarch,
                    "tgarch" => GarchFamily::Tgarch,
                    "ngarch" => GarchFamily::Ngarch,
                    "cgarch" | "csgarch" => GarchFamily::Cgarch,
                    other => {
                        return Err(Error::Config(format!("unknown GARCH family `{other}`")))
                    }
                };
                let dist = self.parse_innovation()?;
                let mut spec =
                    GarchSpec::new(family, self.p.unwrap_or(1), self.q.unwrap_or(1), dist)?;
                if self.include_mean.unwrap_or(false) {
                    spec = spec.with_mean();
                }
                ModelSpec::Garch(spec)
            }
            "gas" => {
                let dist = match self
                    .dist
                    .as_deref()
                    .unwrap_or("normal")
                    .to_lowercase()
                    .as_str()
                {
                    "normal" | "gaussian" | "norm" => GasDist::Normal,
                    "student_t" | "studentt" | "std" | "t" => GasDist::StudentT,
                    other => return Err(Error::Config(format!("unknown GAS dist `{other}`"))),
                };
                let scaling = match self
                    .scaling
                    .as_deref()
                    .unwrap_or("inverse")
                    .to_lowercase()
                    .as_str()
                {
                    "identity" => GasScaling::Identity,
                    "invsqrt" | "inv_sqrt" => GasScaling::InvSqrt,
                    "inverse" | "inv" => GasScaling::Inverse,
                    other => {
                        return Err(Error::Config(format!("unknown GAS scaling `{other}`")))
                    }
                };
                ModelSpec::Gas(GasSpec { dist, scaling })
            }
            "caviar" => {
                let variant = match self
                    .variant
                    .as_deref()
                    .unwrap_or("sav")
                    .to_lowercase()
                    .as_str()
                {
                    "sav" | "symmetric_abs_value" => {
                        crate::caviar::CaviarVariant::SymmetricAbsValue
                    }
                    "as" | "asymmetric_slope" => crate::caviar::CaviarVariant::AsymmetricSlope,
                    "ig" | "indirect_garch" => crate::caviar::CaviarVariant::IndirectGarch,
                    "adaptive" | "ad" => crate::caviar::CaviarVariant::Adaptive,
                    other => {
                        return Err(Error::Config(format!("unknown CAViaR variant `{other}`")))
                    }
                };
                ModelSpec::Caviar {
                    variant,
                    adaptive_g: self.adaptive_g,
                }
            }
            other => return Err(Error::Config(format!("unknown model kind `{other}`"))),
        };
        let name = self.name.clone().unwrap_or_else(|| spec.label());
        Ok((name, spec))
    }

    fn parse_innovation(&self) -> Result<InnovationDist> {
        match self
            .dist
            .as_deref()
            .unwrap_or("gaussian")
            .to_lowercase()
            .as_str()
        {
            "gaussian" | "normal" | "norm" => Ok(InnovationDist::Gaussian),
            "student_t" | "studentt" | "std" | "t" => {
                let nu = self
                    .nu
                    .ok_or_else(|| Error::Config("student_t innovations need `nu`".into()))?;
                Ok(InnovationDist::StudentT { nu })
            }
            other => Err(Error::Config(format!("unknown innovation dist `{other}`"))),
        }
    }
}

/// The full declarative run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataSection,
    pub run: RunSection,
    #[serde(default)]
    pub fit: FitSection,
    pub loss: LossSection,
    pub mcs: McsSection,
    #[serde(default)]
    pub combination: CombinationSection,
    pub models: Vec<ModelEntry>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.data.path.exists() {
            return Err(Error::Config(format!(
                "data file {} does not exist",
                self.data.path.display()
            )));
        }
        if !(0.0 < self.run.tau && self.run.tau < 1.0) {
            return Err(Error::Config(format!("tau {} outside (0,1)", self.run.tau)));
        }
        if self.run.refit_every == 0 {
            return Err(Error::Config("refit_every must be positive".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models configured".into()));
        }
        self.loss_kind()?;
        self.mcs_config()?.validate()?;
        let mut seen = HashSet::new();
        for (name, _) in self.model_specs()? {
            if !seen.insert(name.clone()) {
                return Err(Error::Config(format!("duplicate model name `{name}`")));
            }
        }
        Ok(())
    }

    pub fn model_specs(&self) -> Result<Vec<(String, ModelSpec)>> {
        self.models.iter().map(|m| m.to_spec()).collect()
    }

    pub fn loss_kind(&self) -> Result<LossKind> {
        let which = self.loss.which.to_uppercase();
        match self.loss.family.to_lowercase().as_str() {
            "var" => {
                let which = match which.as_str() {
                    "NORMAL" => VarLossType::Normal,
                    "DIFFERENTIABLE" => VarLossType::Differentiable,
                    other => {
                        return Err(Error::Config(format!("unknown VaR loss type `{other}`")))
                    }
                };
                if self.loss.delta <= 0.0 {
                    return Err(Error::Config("loss delta must be positive".into()));
                }
                Ok(LossKind::Var {
                    tau: self.run.tau,
                    which,
                    delta: self.loss.delta,
                })
            }
            "vol" => {
                let which = match which.as_str() {
                    "SE1" => VolLossWhich::Se1,
                    "SE2" => VolLossWhich::Se2,
                    "QLIKE" => VolLossWhich::Qlike,
                    "R2LOG" => VolLossWhich::R2Log,
                    "AE1" => VolLossWhich::Ae1,
                    "AE2" => VolLossWhich::Ae2,
                    other => return Err(Error::Config(format!("unknown vol loss `{other}`"))),
                };
                Ok(LossKind::Vol { which })
            }
            "level" => {
                let which = match which.as_str() {
                    "SE" => LevelLossWhich::Se,
                    "AE" => LevelLossWhich::Ae,
                    other => return Err(Error::Config(format!("unknown level loss `{other}`"))),
                };
                Ok(LossKind::Level { which })
            }
            other => Err(Error::Config(format!("unknown loss family `{other}`"))),
        }
    }

    pub fn mcs_config(&self) -> Result<McsConfig> {
        let statistic: McsStatistic = self.mcs.statistic.parse()?;
        Ok(McsConfig {
            alpha: self.mcs.alpha,
            b: self.mcs.b,
            statistic,
            block_length: self.mcs.block_length,
            seed: self.run.seed,
        })
    }

    pub fn rolling_config(&self) -> RollingConfig {
        RollingConfig {
            out_of_sample_n: self.data.out_of_sample,
            tau: self.run.tau,
            refit_every: self.run.refit_every,
            optimizer: OptimizerConfig {
                n_starts: self.fit.n_starts,
                max_iter: self.fit.max_iter,
                seed: self.run.seed,
            },
            caviar: CaviarFitConfig {
                n_candidates: self.fit.caviar_candidates,
                n_polish: self.fit.caviar_polish,
                max_iter: self.fit.max_iter.max(500),
                seed: self.run.seed,
            },
        }
    }
}
