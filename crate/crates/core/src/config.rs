//! Declarative experiment configuration: one TOML file per run, with the
//! experiment name, a seed, and typed per-experiment parameters. Unknown
//! keys are rejected; validation failures carry the offending field path.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ultralocal::{DensityForm, LevyMeasure, QuadratureGrid};

/// Top-level config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub parameters: Parameters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "classical-equiv")]
    ClassicalEquiv,
    #[serde(rename = "qm-equiv")]
    QmEquiv,
    #[serde(rename = "free-field")]
    FreeField,
    #[serde(rename = "phi4")]
    Phi4,
    #[serde(rename = "ultralocal-check")]
    UltralocalCheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ClassicalEquiv => "classical-equiv",
            ExperimentKind::QmEquiv => "qm-equiv",
            ExperimentKind::FreeField => "free-field",
            ExperimentKind::Phi4 => "phi4",
            ExperimentKind::UltralocalCheck => "ultralocal-check",
        }
    }
}

/// Per-experiment parameter block; exactly one variant matches the
/// `experiment` field.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Parameters {
    Classical(ClassicalParams),
    QmEquiv(QmEquivParams),
    FreeField(FreeFieldParams),
    Phi4(Phi4Params),
    Ultralocal(UltralocalCheckParams),
}

/// Positive multiplier profiles for the reparametrized runs.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum LambdaProfile {
    /// `lambda = value`
    #[serde(rename = "constant")]
    Constant { value: f64 },
    /// `lambda = base + amplitude sin(frequency tau)`
    #[serde(rename = "sinusoid")]
    Sinusoid {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `lambda = base + amplitude cos(frequency tau)`
    #[serde(rename = "cosinusoid")]
    Cosinusoid {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `lambda = base + gain tau / (1 + tau)`
    #[serde(rename = "saturating-ramp")]
    SaturatingRamp { base: f64, gain: f64 },
}

impl LambdaProfile {
    pub fn validate(&self, path: &str) -> Result<()> {
        let ok = match *self {
            LambdaProfile::Constant { value } => value > 0.0,
            LambdaProfile::Sinusoid {
                base, amplitude, ..
            }
            | LambdaProfile::Cosinusoid {
                base, amplitude, ..
            } => base - amplitude.abs() > 0.0,
            LambdaProfile::SaturatingRamp { base, gain } => base > 0.0 && base + gain > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(path, "multiplier profile must stay positive"))
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        match *self {
            LambdaProfile::Constant { value } => value,
            LambdaProfile::Sinusoid {
                base,
                amplitude,
                frequency,
            } => base + amplitude * (frequency * tau).sin(),
            LambdaProfile::Cosinusoid {
                base,
                amplitude,
                frequency,
            } => base + amplitude * (frequency * tau).cos(),
            LambdaProfile::SaturatingRamp { base, gain } => base + gain * tau / (1.0 + tau),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            LambdaProfile::Constant { value } => format!("constant({value})"),
            LambdaProfile::Sinusoid {
                base,
                amplitude,
                frequency,
            } => format!("sinusoid({base},{amplitude},{frequency})"),
            LambdaProfile::Cosinusoid {
                base,
                amplitude,
                frequency,
            } => format!("cosinusoid({base},{amplitude},{frequency})"),
            LambdaProfile::SaturatingRamp { base, gain } => {
                format!("saturating-ramp({base},{gain})")
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalParams {
    pub omega: f64,
    pub q0: f64,
    pub p0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub dtau: f64,
    pub profiles: Vec<LambdaProfile>,
    pub max_dev_threshold: f64,
    pub drift_threshold: f64,
}

impl ClassicalParams {
    pub fn validate(&self) -> Result<()> {
        if self.omega <= 0.0 {
            return Err(Error::config("parameters.omega", "must be positive"));
        }
        if self.t_end <= 0.0 {
            return Err(Error::config("parameters.t_end", "must be positive"));
        }
        if self.dt <= 0.0 {
            return Err(Error::config("parameters.dt", "must be positive"));
        }
        if self.dtau <= 0.0 {
            return Err(Error::config("parameters.dtau", "must be positive"));
        }
        if self.profiles.is_empty() {
            return Err(Error::config("parameters.profiles", "need at least one"));
        }
        for (i, p) in self.profiles.iter().enumerate() {
            p.validate(&format!("parameters.profiles[{i}]"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QmEquivParams {
    pub dim: usize,
    pub omega0: f64,
    pub harmonic_omega: f64,
    pub quartic_omega: f64,
    pub quartic_g: f64,
    pub lambda: f64,
    pub n_labels: usize,
    pub label_scale: f64,
    pub dts: Vec<f64>,
    pub equality_threshold: f64,
}

impl QmEquivParams {
    pub fn validate(&self) -> Result<()> {
        if self.lambda <= 0.0 {
            return Err(Error::config(
                "parameters.lambda",
                "Lambda must be positive",
            ));
        }
        if self.dim < 8 {
            return Err(Error::config("parameters.dim", "must be at least 8"));
        }
        if self.n_labels == 0 || self.dts.is_empty() {
            return Err(Error::config(
                "parameters.n_labels/dts",
                "need labels and time values",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeFieldRecovery {
    pub mass: f64,
    pub m_widths: Vec<f64>,
    pub lambda: f64,
    pub dts: Vec<f64>,
    pub n_label_pairs: usize,
    pub label_scale: f64,
    pub d_base: usize,
    pub recovery_threshold: f64,
    pub erasure_threshold: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeFieldSignals {
    pub m_width: f64,
    pub omega_override: Option<f64>,
    pub mass: f64,
    pub lambda: f64,
    pub dt: f64,
    pub n_max: usize,
    pub d_base: usize,
    pub smallness_threshold: f64,
    pub smallness_at: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeFieldParams {
    pub lattice_d: usize,
    pub lattice_n: usize,
    pub l_box: f64,
    #[serde(default)]
    pub recovery: Option<FreeFieldRecovery>,
    #[serde(default)]
    pub signals: Option<FreeFieldSignals>,
}

impl FreeFieldParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = &self.recovery {
            if r.lambda <= 0.0 {
                return Err(Error::config(
                    "parameters.recovery.lambda",
                    "Lambda must be positive",
                ));
            }
            if r.mass <= 0.0 {
                return Err(Error::config(
                    "parameters.recovery.mass",
                    "must be positive",
                ));
            }
            if r.m_widths.is_empty() {
                return Err(Error::config(
                    "parameters.recovery.m_widths",
                    "need at least one width",
                ));
            }
        }
        if let Some(s) = &self.signals {
            if s.lambda <= 0.0 {
                return Err(Error::config(
                    "parameters.signals.lambda",
                    "Lambda must be positive",
                ));
            }
            if s.n_max == 0 {
                return Err(Error::config(
                    "parameters.signals.n_max",
                    "must be positive",
                ));
            }
        }
        if self.recovery.is_none() && self.signals.is_none() {
            return Err(Error::config(
                "parameters",
                "free-field needs a recovery or signals section",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phi4Params {
    pub sites: usize,
    pub m0: f64,
    pub g: f64,
    pub m_width_a: f64,
    pub m_width_b: f64,
    pub dim: usize,
    pub dt: f64,
    pub n_labels: usize,
    pub label_scale: f64,
    pub ground_tol: f64,
    pub e0_threshold: f64,
    pub kurtosis_min: f64,
    pub independence_threshold: f64,
    #[serde(default)]
    pub counterterm: Option<f64>,
    #[serde(default)]
    pub counterterm_provenance: Option<String>,
}

impl Phi4Params {
    pub fn validate(&self) -> Result<()> {
        if self.g < 0.0 {
            return Err(Error::config("parameters.g", "must be nonnegative"));
        }
        if self.m_width_a <= 0.0 || self.m_width_b <= 0.0 {
            return Err(Error::config(
                "parameters.m_width_a/m_width_b",
                "widths must be positive",
            ));
        }
        if self.ground_tol <= 0.0 {
            return Err(Error::config("parameters.ground_tol", "must be positive"));
        }
        Ok(())
    }
}

/// Declarative Levy measure: points, optional named density, grid.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub density: Option<DensityConfig>,
    #[serde(default)]
    pub grid_step: Option<f64>,
    #[serde(default)]
    pub grid_half_range: Option<f64>,
    #[serde(default)]
    pub site_scaling: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "form", deny_unknown_fields)]
pub enum DensityConfig {
    #[serde(rename = "gaussian")]
    Gaussian { amplitude: f64 },
    #[serde(rename = "power-gaussian")]
    PowerGaussian { amplitude: f64, power: i32 },
    #[serde(rename = "flat")]
    Flat { amplitude: f64 },
}

impl MeasureConfig {
    pub fn build(&self, path: &str) -> Result<LevyMeasure> {
        let grid = QuadratureGrid::new(
            self.grid_step.unwrap_or(0.01),
            self.grid_half_range.unwrap_or(8.0),
        )
        .map_err(|e| Error::config(format!("{path}.grid_step"), e.to_string()))?;
        let density = self.density.map(|d| match d {
            DensityConfig::Gaussian { amplitude } => DensityForm::Gaussian { amplitude },
            DensityConfig::PowerGaussian { amplitude, power } => {
                DensityForm::PowerGaussian { amplitude, power }
            }
            DensityConfig::Flat { amplitude } => DensityForm::Flat { amplitude },
        });
        let measure = LevyMeasure {
            point_masses: self.points.iter().map(|p| (p[0], p[1])).collect(),
            density,
            grid,
            site_scaling: self.site_scaling.clone(),
        };
        measure
            .validate()
            .map_err(|e| Error::config(path, e.to_string()))?;
        Ok(measure)
    }
}

/// One named single-field measure case for the admissibility table.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaCase {
    pub name: String,
    pub sigma: MeasureConfig,
    /// Expected classification of the admissibility integral.
    pub expect_admissible: bool,
    /// Expected finiteness of the total mass.
    pub expect_finite_mass: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperposeTriple {
    pub m_width: f64,
    pub m_tilde: f64,
    pub phi_step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UltralocalCheckParams {
    pub lattice_n: usize,
    pub l_box: f64,
    pub sigma_cases: Vec<SigmaCase>,
    pub psd_sets: usize,
    pub psd_set_size: usize,
    pub psd_tol: f64,
    pub config_scale: f64,
    pub superpose_triples: Vec<SuperposeTriple>,
    pub mc_samples: usize,
    pub b_values: Vec<f64>,
    pub b_fit_threshold: f64,
    pub refinement_threshold: f64,
}

impl UltralocalCheckParams {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_cases.is_empty() {
            return Err(Error::config("parameters.sigma_cases", "need at least one"));
        }
        if self.psd_set_size > 12 {
            return Err(Error::config(
                "parameters.psd_set_size",
                "keep PSD sets at 12 configurations or fewer",
            ));
        }
        if self.mc_samples == 0 {
            return Err(Error::config("parameters.mc_samples", "must be positive"));
        }
        Ok(())
    }
}

/// Parse a config file, enforcing the experiment/parameter pairing.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::config("<config>", e.to_string()))?;
    let matches = matches!(
        (&cfg.experiment, &cfg.parameters),
        (ExperimentKind::ClassicalEquiv, Parameters::Classical(_))
            | (ExperimentKind::QmEquiv, Parameters::QmEquiv(_))
            | (ExperimentKind::FreeField, Parameters::FreeField(_))
            | (ExperimentKind::Phi4, Parameters::Phi4(_))
            | (ExperimentKind::UltralocalCheck, Parameters::Ultralocal(_))
    );
    if !matches {
        return Err(Error::config(
            "parameters",
            format!(
                "parameter block does not match experiment `{}`",
                cfg.experiment.name()
            ),
        ));
    }
    match &cfg.parameters {
        Parameters::Classical(p) => p.validate()?,
        Parameters::QmEquiv(p) => p.validate()?,
        Parameters::FreeField(p) => p.validate()?,
        Parameters::Phi4(p) => p.validate()?,
        Parameters::Ultralocal(p) => p.validate()?,
    }
    Ok(cfg)
}
