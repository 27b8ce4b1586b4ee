use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::presets::Preset;
use crate::continuation::{LadderConfig, StepperConfig};
use crate::error::{Error, Result};
use crate::exhaust::{ExhaustionPlan, Profile};
use crate::galerkin::{Formulation, PathChoice};
use crate::lift::{ForcingSpec, MAX_ORDER};

/// Prefix of environment overrides. `LERAYFLOW_NU=0.2` sets `nu`;
/// `LERAYFLOW_STEPPER__RTOL=1e-9` sets `stepper.rtol`. Values are parsed as
/// JSON and fall back to plain strings.
pub const ENV_PREFIX: &str = "LERAYFLOW_";

/// Environment names consumed by command-line flags rather than the config.
pub const FLAG_ENV: [&str; 5] = ["CONFIG", "OUT", "SEED", "FORMULATION", "FIXED_STEP"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Preset(Preset),
    /// Spectral field file in the library's JSON format.
    File(PathBuf),
    /// Closed-form profile cut off at half the box.
    Profile(Profile),
}

/// Which projection the lift recurrence uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftProjection {
    Leray,
    /// Galerkin projection onto the run's basis; keeps the lift in `H_n`.
    Galerkin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderSettings {
    pub safety: f64,
    pub samples_per_rung: usize,
    pub pilot_fraction: f64,
    pub max_rungs: usize,
}

impl Default for LadderSettings {
    fn default() -> Self {
        let d = LadderConfig::default();
        Self {
            safety: d.safety,
            samples_per_rung: d.samples_per_rung,
            pilot_fraction: d.pilot_fraction,
            max_rungs: d.max_rungs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    /// Fault injection: perturb one tensor entry before the skewness check.
    pub corrupt_tensor: bool,
    pub gn_samples: usize,
    pub oracle_modes: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            corrupt_tensor: false,
            gn_samples: 12,
            oracle_modes: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub period: f64,
    /// Quadrature grid used for transforms of the data.
    pub grid: usize,
    /// Basis of all modes with `|k| ≤ basis_radius`...
    pub basis_radius: f64,
    /// ...or of the first `basis_pairs` wavevector pairs when set.
    pub basis_pairs: Option<usize>,
    pub nu: f64,
    pub lift_order: usize,
    pub lift_projection: LiftProjection,
    pub horizon: f64,
    pub formulation: Formulation,
    pub stepper: StepperConfig,
    pub data: DataSpec,
    pub forcing: ForcingSpec,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub blowup_threshold: f64,
    pub ladder: LadderSettings,
    pub path: PathChoice,
    pub tensor_limit: usize,
    /// Mode cap for the residual `q_n` on the enlarged set.
    pub residual_mode_cap: usize,
    pub verify: VerifySettings,
    pub exhaust: Option<ExhaustionPlan>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            period: 2.0 * std::f64::consts::PI,
            grid: 32,
            basis_radius: 4.0,
            basis_pairs: None,
            nu: 0.1,
            lift_order: 2,
            lift_projection: LiftProjection::Leray,
            horizon: 1.0,
            formulation: Formulation::Direct,
            stepper: StepperConfig::default(),
            data: DataSpec::Preset(Preset::TaylorGreen),
            forcing: ForcingSpec::zero(),
            output_dir: PathBuf::from("out"),
            seed: 0,
            blowup_threshold: 1e6,
            ladder: LadderSettings::default(),
            path: PathChoice::Auto,
            tensor_limit: 2000,
            residual_mode_cap: 200_000,
            verify: VerifySettings::default(),
            exhaust: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::config("period", "must be positive"));
        }
        if self.grid < 4 || !self.grid.is_power_of_two() {
            return Err(Error::config("grid", "must be a power of two >= 4"));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::config("nu", format!("viscosity must be positive, got {}", self.nu)));
        }
        if !(self.basis_radius >= 1.0) {
            return Err(Error::config("basis_radius", "must be at least 1"));
        }
        if self.basis_pairs == Some(0) {
            return Err(Error::config("basis_pairs", "must be at least 1"));
        }
        if self.lift_order == 0 || self.lift_order > MAX_ORDER {
            return Err(Error::config("lift_order", format!("must lie in 1..={MAX_ORDER}")));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("horizon", "must be positive"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::config("blowup_threshold", "must be positive"));
        }
        self.stepper.validate()?;
        self.forcing
            .validate()
            .map_err(|e| Error::config("forcing", e.to_string()))?;
        self.ladder_config().validate()?;
        if let Some(p) = &self.exhaust {
            p.validate()?;
        }
        Ok(())
    }

    pub fn ladder_config(&self) -> LadderConfig {
        LadderConfig {
            horizon: self.horizon,
            blowup_threshold: self.blowup_threshold,
            safety: self.ladder.safety,
            samples_per_rung: self.ladder.samples_per_rung,
            pilot_fraction: self.ladder.pilot_fraction,
            max_rungs: self.ladder.max_rungs,
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let js = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(js.as_bytes()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::config("<document>", e.to_string()))?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(v).map_err(|e| Error::config("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub formulation: Option<Formulation>,
    pub fixed_step: Option<f64>,
}

/// Apply `PREFIX_KEY[__SUB...]=value` pairs to a JSON document.
pub fn apply_env_overrides<I>(doc: &mut Value, vars: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<_> = vars
        .into_iter()
        .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|s| (s.to_string(), v)))
        .filter(|(k, _)| !FLAG_ENV.contains(&k.as_str()))
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key.split("__").map(|s| s.to_ascii_lowercase()).collect();
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw.clone()));
        let mut node = &mut *doc;
        for (i, seg) in path.iter().enumerate() {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| Error::config(key.to_ascii_lowercase(), "cannot override inside a non-object"))?;
            if i + 1 == path.len() {
                obj.insert(seg.clone(), value.clone());
                break;
            }
            node = obj.entry(seg.clone()).or_insert_with(|| Value::Object(Default::default()));
        }
    }
    Ok(())
}

/// Read the config file (or defaults), then the environment, then flags.
pub fn load_config<I>(path: Option<&Path>, env: I, flags: &Overrides) -> Result<RunConfig>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut doc = match path {
        Some(p) => {
            let s = std::fs::read_to_string(p)
                .map_err(|e| Error::config("--config", format!("{}: {e}", p.display())))?;
            serde_json::from_str(&s).map_err(|e| Error::config("<document>", e.to_string()))?
        }
        None => Value::Object(Default::default()),
    };
    if !doc.is_object() {
        return Err(Error::config("<document>", "config must be a JSON object"));
    }
    apply_env_overrides(&mut doc, env)?;
    let mut cfg: RunConfig =
        serde_json::from_value(doc).map_err(|e| Error::config("<document>", e.to_string()))?;
    if let Some(o) = &flags.output_dir {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(f) = flags.formulation {
        cfg.formulation = f;
    }
    if let Some(h) = flags.fixed_step {
        cfg.stepper = StepperConfig::fixed(h);
    }
    cfg.validate()?;
    Ok(cfg)
}
