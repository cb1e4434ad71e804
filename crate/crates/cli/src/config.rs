//! Run configuration: JSON for full analyses, validated with field-named
//! errors so a bad config points at the offending key.

use anyhow::{anyhow, bail, Context, Result};
use fisherpli::distributions::DistributionSpec;
use fisherpli::geometry::IntegratorMethod;
use fisherpli::models::{ModelKind, ModelSpec};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ModelField {
    Name(String),
    External { external: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    ReverseIs,
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpliModeField {
    MeanShift,
    VarianceScale,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EpliSection {
    pub mode: EpliModeField,
    pub grid: Vec<f64>,
    /// 1-based input numbers; all inputs when omitted.
    #[serde(default)]
    pub inputs: Option<Vec<usize>>,
}

fn default_k() -> usize {
    100
}

fn default_n_steps() -> usize {
    1000
}

fn default_b() -> usize {
    200
}

fn default_integrator() -> IntegratorMethod {
    IntegratorMethod::AdamsMoulton
}

fn default_mode() -> EstimatorMode {
    EstimatorMode::ReverseIs
}

/// One JSON document drives a full run; quick single-object commands use
/// flags instead.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelField,
    /// Input laws; defaults to the built-in model's nominal laws.
    #[serde(default)]
    pub inputs: Option<Vec<DistributionSpec>>,
    pub alpha: f64,
    #[serde(default)]
    pub delta_grid: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorMethod,
    #[serde(default = "default_b")]
    pub b: usize,
    /// Mandatory: there are no nondeterministic defaults.
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: EstimatorMode,
    /// Rows to generate when no sample file is given.
    #[serde(default)]
    pub n: Option<usize>,
    /// Existing sample CSV (x1..xd,y); the expensive-code regime.
    #[serde(default)]
    pub sample_path: Option<PathBuf>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub epli: Option<EpliSection>,
    /// Pick-freeze design size for the sobol subcommand.
    #[serde(default)]
    pub n_base: Option<usize>,
    /// Exceedance threshold for target Sobol indices; defaults to the
    /// α-quantile of a nominal Monte Carlo run.
    #[serde(default)]
    pub threshold: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow!("invalid config {}: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("config field `alpha` must lie strictly inside (0, 1), got {}", self.alpha);
        }
        if self.delta_grid.iter().any(|d| !d.is_finite() || *d <= 0.0)
            || self.delta_grid.windows(2).any(|w| w[0] >= w[1])
        {
            bail!("config field `delta_grid` must be strictly increasing and positive");
        }
        if self.k < 2 {
            bail!("config field `k` must be at least 2, got {}", self.k);
        }
        if self.n_steps < 10 {
            bail!("config field `n_steps` must be at least 10, got {}", self.n_steps);
        }
        if let Some(n) = self.n {
            if n == 0 {
                bail!("config field `n` must be positive when present");
            }
        }
        if let ModelField::Name(name) = &self.model {
            if name != "ishigami" && name != "flood" {
                bail!("config field `model` must be \"ishigami\", \"flood\" or {{\"external\": path}}, got {name:?}");
            }
        }
        Ok(())
    }

    /// Resolve the model and its input laws.
    pub fn model_spec(&self) -> Result<ModelSpec> {
        let kind = match &self.model {
            ModelField::Name(name) => match name.as_str() {
                "ishigami" => ModelKind::Ishigami,
                "flood" => ModelKind::Flood,
                other => bail!("config field `model`: unknown model {other:?}"),
            },
            ModelField::External { external } => ModelKind::External { path: external.clone() },
        };
        let spec = match (&kind, &self.inputs) {
            (ModelKind::Ishigami, None) => ModelSpec::ishigami(),
            (ModelKind::Flood, None) => ModelSpec::flood(),
            (ModelKind::External { .. }, None) => {
                bail!("config field `inputs` is required for external models")
            }
            (_, Some(inputs)) => ModelSpec::new(kind, inputs.clone())
                .map_err(|e| anyhow!("config field `inputs`: {e}"))?,
        };
        Ok(spec)
    }

    /// Load or generate the input/output sample. An external model's own
    /// file is the sample source unless `sample_path` overrides it.
    pub fn sample(&self, model: &ModelSpec) -> Result<fisherpli::IOSample> {
        let path = self.sample_path.clone().or(match &model.kind {
            ModelKind::External { path } => Some(path.clone()),
            _ => None,
        });
        if let Some(path) = path {
            return fisherpli::models::load_sample(&path, &model.input_specs)
                .map_err(|e| anyhow!("config field `sample_path`: {e}"));
        }
        let n = self
            .n
            .ok_or_else(|| anyhow!("config needs `n` (rows to generate) or `sample_path`"))?;
        fisherpli::models::generate_sample(model, n, self.seed)
            .map_err(|e| anyhow!("sample generation failed: {e}"))
    }
}

/// Parse a comma-separated numeric flag value.
pub fn parse_csv_floats(field: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|cell| {
            cell.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("flag `{field}`: cannot parse `{cell}` as a number"))
        })
        .collect()
}

/// Build a distribution spec from --family/--theta/--support flags.
pub fn spec_from_flags(family: &str, theta: &str, support: Option<&str>) -> Result<DistributionSpec> {
    let theta = parse_csv_floats("theta", theta)?;
    let support = match support {
        None => None,
        Some(text) => {
            let v = parse_csv_floats("support", text)?;
            if v.len() != 2 {
                bail!("flag `support` needs exactly lo,hi");
            }
            Some((v[0], v[1]))
        }
    };
    let json = serde_json::json!({
        "family": family,
        "theta": theta,
        "support": support,
    });
    serde_json::from_value(json).map_err(|e| anyhow!("flag `family`/`theta`/`support`: {e}"))
}
