//! Input spec files: the synthetic-data spec and the experiment sweep
//! spec. Both carry the `format_version`/`kind` header like every other
//! file the toolkit touches.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use chilasso::error::{Error, Result};
use chilasso::model::Model;
use chilasso::synth::SynthSpec;

pub const KIND_SYNTH_SPEC: &str = "synth_spec";
pub const KIND_EXPERIMENT: &str = "experiment";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthSpecDto {
    format_version: u64,
    kind: String,
    num_groups: usize,
    atoms_per_group: usize,
    signal_dim: usize,
    k: usize,
    num_active_groups: usize,
    n: usize,
    sigma: f64,
    missing_fraction: f64,
    seed: u64,
}

fn check_header(version: u64, kind: &str, expected: &str) -> Result<()> {
    if version != chilasso::io::FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    if kind != expected {
        return Err(Error::WrongKind {
            expected: expected.to_string(),
            found: kind.to_string(),
        });
    }
    Ok(())
}

pub fn load_synth_spec(path: &Path) -> Result<SynthSpec> {
    let text = std::fs::read_to_string(path)?;
    let dto: SynthSpecDto = serde_json::from_str(&text)?;
    check_header(dto.format_version, &dto.kind, KIND_SYNTH_SPEC)?;
    let spec = SynthSpec {
        num_groups: dto.num_groups,
        atoms_per_group: dto.atoms_per_group,
        signal_dim: dto.signal_dim,
        k: dto.k,
        num_active_groups: dto.num_active_groups,
        n: dto.n,
        sigma: dto.sigma,
        missing_fraction: dto.missing_fraction,
        seed: dto.seed,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn save_synth_spec(spec: &SynthSpec, path: &Path) -> Result<()> {
    let dto = SynthSpecDto {
        format_version: chilasso::io::FORMAT_VERSION,
        kind: KIND_SYNTH_SPEC.to_string(),
        num_groups: spec.num_groups,
        atoms_per_group: spec.atoms_per_group,
        signal_dim: spec.signal_dim,
        k: spec.k,
        num_active_groups: spec.num_active_groups,
        n: spec.n,
        sigma: spec.sigma,
        missing_fraction: spec.missing_fraction,
        seed: spec.seed,
    };
    let mut text = serde_json::to_string(&dto)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// The sweep axis of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Sigma,
    K,
    Groups,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Sigma => "sigma",
            Axis::K => "k",
            Axis::Groups => "groups",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(Axis::Sigma),
            "k" => Ok(Axis::K),
            "groups" => Ok(Axis::Groups),
            other => Err(Error::value(format!(
                "unknown axis `{other}` (expected sigma, k or groups)"
            ))),
        }
    }
}

/// A declarative experiment: sweep one axis, run `trials` trials per
/// axis value, solve every listed model over the whole lambda grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub axis: Axis,
    pub axis_values: Vec<f64>,
    pub trials: usize,
    pub base: SynthSpec,
    pub lambda_grid: Vec<(f64, f64)>,
    pub models: Vec<Model>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentDto {
    format_version: u64,
    kind: String,
    axis: String,
    axis_values: Vec<f64>,
    trials: usize,
    base: SynthSpec,
    lambda_grid: Vec<(f64, f64)>,
    models: Vec<String>,
}

impl ExperimentSpec {
    /// The synthetic spec at one axis value.
    pub fn spec_at(&self, value: f64) -> Result<SynthSpec> {
        let mut spec = self.base.clone();
        match self.axis {
            Axis::Sigma => spec.sigma = value,
            Axis::K => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::value(format!("axis value {value} is not a valid k")));
                }
                spec.k = value as usize;
            }
            Axis::Groups => {
                if value < 2.0 || value.fract() != 0.0 {
                    return Err(Error::value(format!("axis value {value} is not a valid group count")));
                }
                spec.num_groups = value as usize;
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axis_values.is_empty() {
            return Err(Error::value("axis_values must be non-empty"));
        }
        if self.trials == 0 {
            return Err(Error::value("trials must be at least 1"));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::value("lambda_grid must be non-empty"));
        }
        if self.models.is_empty() {
            return Err(Error::value("models must be non-empty"));
        }
        for &(l1, l2) in &self.lambda_grid {
            if !(l1 >= 0.0 && l2 >= 0.0) {
                return Err(Error::value("lambda grid entries must be nonnegative"));
            }
        }
        for &v in &self.axis_values {
            self.spec_at(v)?;
        }
        Ok(())
    }
}

pub fn load_experiment_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    let dto: ExperimentDto = serde_json::from_str(&text)?;
    check_header(dto.format_version, &dto.kind, KIND_EXPERIMENT)?;
    let spec = ExperimentSpec {
        axis: dto.axis.parse()?,
        axis_values: dto.axis_values,
        trials: dto.trials,
        base: dto.base,
        lambda_grid: dto.lambda_grid,
        models: dto
            .models
            .iter()
            .map(|m| m.parse())
            .collect::<Result<Vec<Model>>>()?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn save_experiment_spec(spec: &ExperimentSpec, path: &Path) -> Result<()> {
    let dto = ExperimentDto {
        format_version: chilasso::io::FORMAT_VERSION,
        kind: KIND_EXPERIMENT.to_string(),
        axis: spec.axis.name().to_string(),
        axis_values: spec.axis_values.clone(),
        trials: spec.trials,
        base: spec.base.clone(),
        lambda_grid: spec.lambda_grid.clone(),
        models: spec.models.iter().map(|m| m.name().to_string()).collect(),
    };
    let mut text = serde_json::to_string(&dto)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
