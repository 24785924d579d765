//! JSON run configurations, one per subcommand.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use sis_phaseless::generators::{GeneratorSpec, SpecKind, SystemLabel};
use sis_phaseless::harness::{TrialConfig, TruthSource};
use sis_phaseless::pdcr::{Mode, PdcrOptions};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Resolves `p` against the directory holding the config file.
pub fn resolve(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        return p.to_path_buf();
    }
    config.parent().map(|d| d.join(p)).unwrap_or_else(|| p.to_path_buf())
}

fn default_tuples() -> usize {
    100
}

fn default_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhcConfig {
    pub generator: GeneratorSpec,
    pub system: SystemLabel,
    #[serde(default = "default_tuples")]
    pub tuples: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub generator: GeneratorSpec,
    pub mode: Mode,
    /// Ground-truth coefficients CSV: synthesize samples, then reconstruct.
    #[serde(default)]
    pub truth: Option<PathBuf>,
    /// Samples CSV: reconstruct only.
    #[serde(default)]
    pub samples: Option<PathBuf>,
    /// Last sampled interval when synthesizing; defaults to the last coefficient index.
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Recover only `c_0..c_{local-1}`.
    #[serde(default)]
    pub local: Option<usize>,
    #[serde(default)]
    pub options: PdcrOptions,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Chirp rates; each replaces the generator's `a`.
    #[serde(default)]
    pub a: Vec<f64>,
    pub snr_db: Vec<f64>,
}

fn default_trials() -> usize {
    1000
}

fn default_threshold() -> f64 {
    -1.8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub generator: GeneratorSpec,
    pub truth: TruthSource,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub mode: Mode,
    pub n_max: usize,
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Only echoed in error messages; `--seed` is mandatory.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub options: PdcrOptions,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

impl MonteCarloConfig {
    pub fn trial_config(&self, seed: u64) -> TrialConfig {
        TrialConfig {
            generator: self.generator.clone(),
            truth: self.truth.clone(),
            trials: self.trials,
            mode: self.mode,
            n_max: self.n_max,
            snr_db: self.snr_db,
            threshold: self.threshold,
            seed,
            options: self.options,
        }
    }

    /// Generator spec with `a` replaced, for chirp sweeps.
    pub fn with_rate(&self, a: f64) -> Result<GeneratorSpec> {
        if !matches!(self.generator.kind, SpecKind::Chirp | SpecKind::ChirpRealPart) {
            bail!("sweeping `a` needs a chirp generator");
        }
        Ok(GeneratorSpec { a: Some(a), ..self.generator.clone() })
    }
}

fn default_bspline() -> GeneratorSpec {
    GeneratorSpec { kind: SpecKind::CubicBspline, a: None, b: None, p: None, support: None, values: None }
}

fn default_len() -> usize {
    4
}

fn default_grid() -> usize {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiguityConfig {
    /// Real generator to modulate.
    #[serde(default = "default_bspline")]
    pub generator: GeneratorSpec,
    pub alpha: f64,
    pub beta: f64,
    /// Highest coefficient index of the pair.
    #[serde(default = "default_len")]
    pub n: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub seed: u64,
}
