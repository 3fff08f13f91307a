//! Strict JSON run configurations.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use viscid_waves::blayer::{F0Preset, FreestreamPreset};
use viscid_waves::{KernelVariant, ModelSwitches, RegimeParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl RegimeConfig {
    pub fn build(&self) -> Result<RegimeParams, CliError> {
        Ok(RegimeParams::regime(self.epsilon, self.a, self.b, self.r)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GuessKind {
    #[default]
    LargeRe,
    ModerateRe,
    Inviscid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    pub k: Vec<f64>,
    pub beta: f64,
    pub reynolds: f64,
    #[serde(default)]
    pub guess: GuessKind,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlayerConfig {
    pub regime: RegimeConfig,
    pub freestream: FreestreamPreset,
    #[serde(default = "default_f0")]
    pub f0: F0Preset,
    #[serde(default)]
    pub x: f64,
    /// Output times; each must be a multiple of `dt`.
    pub times: Vec<f64>,
    #[serde(default = "default_blayer_dt")]
    pub dt: f64,
    #[serde(default = "default_gamma_max")]
    pub gamma_max: f64,
    #[serde(default = "default_n_gamma")]
    pub n_gamma: usize,
}

fn default_f0() -> F0Preset {
    F0Preset::Zero
}
fn default_blayer_dt() -> f64 {
    1e-3
}
fn default_gamma_max() -> f64 {
    10.0
}
fn default_n_gamma() -> usize {
    101
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Soliton,
    Gaussian,
    Mode,
}

/// Initial surface; velocity follows the right-going relation of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub amplitude: f64,
    /// Centre as a fraction of the box (soliton, gaussian).
    #[serde(default = "half")]
    pub center: f64,
    /// Gaussian width.
    #[serde(default = "one")]
    pub width: f64,
    /// Mode number for `mode`.
    #[serde(default = "one_usize")]
    pub mode: usize,
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoussinesqConfig {
    pub regime: RegimeConfig,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub dt: f64,
    pub t_end: f64,
    pub initial: InitialConfig,
    #[serde(default = "viscous")]
    pub switches: ModelSwitches,
    #[serde(default = "one")]
    pub z_eval: f64,
    #[serde(default = "default_every")]
    pub output_every: usize,
    /// Shape of a non-Euler initial boundary layer, used when `switches.ic_term` is set.
    #[serde(default = "default_f0")]
    pub f0: F0Preset,
}

fn viscous() -> ModelSwitches {
    ModelSwitches::VISCOUS
}
fn default_every() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdvConfig {
    pub regime: RegimeConfig,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub dt: f64,
    pub tau_end: f64,
    #[serde(default)]
    pub tau_start: f64,
    pub initial: InitialConfig,
    #[serde(default = "km")]
    pub variant: KernelVariant,
    #[serde(default = "default_every")]
    pub output_every: usize,
    /// Initial boundary-layer defect; its memory term is not part of the
    /// KdV model and is only admissible away from `tau = 0`.
    #[serde(default = "default_f0")]
    pub f0: F0Preset,
}

fn km() -> KernelVariant {
    KernelVariant::KmInfinite
}

/// Keys without a default, per config, with nested objects as dotted paths.
fn required_keys(kind: &str) -> &'static [&'static str] {
    const REGIME: [&str; 4] = ["regime.epsilon", "regime.a", "regime.b", "regime.R"];
    match kind {
        "dispersion" => &["k", "beta", "reynolds"],
        "blayer" => &["regime", "freestream", "times", REGIME[0], REGIME[1], REGIME[2], REGIME[3]],
        "boussinesq" => &[
            "regime", "n", "L", "dt", "t_end", "initial", "initial.kind", "initial.amplitude", REGIME[0], REGIME[1],
            REGIME[2], REGIME[3],
        ],
        "kdv" => &[
            "regime", "n", "L", "dt", "tau_end", "initial", "initial.kind", "initial.amplitude", REGIME[0],
            REGIME[1], REGIME[2], REGIME[3],
        ],
        _ => &[],
    }
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |node, key| node.get(key))
}

/// Every required key that is absent, so that one run reports them all.
pub fn missing_keys(kind: &str, value: &Value) -> Vec<String> {
    required_keys(kind)
        .iter()
        .filter(|path| {
            // report a nested key only when its parent object exists
            let parent_present = match path.rsplit_once('.') {
                Some((parent, _)) => lookup(value, parent).is_some(),
                None => true,
            };
            parent_present && lookup(value, path).is_none()
        })
        .map(|s| s.to_string())
        .collect()
}

pub fn parse_value<T: DeserializeOwned>(kind: &str, value: Value) -> Result<T, CliError> {
    let missing = missing_keys(kind, &value);
    if !missing.is_empty() {
        return Err(CliError::Config(format!("missing required keys: {}", missing.join(", "))));
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

pub fn read_value(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse_config<T: DeserializeOwned>(kind: &str, path: &Path) -> Result<(T, Value), CliError> {
    let value = read_value(path)?;
    Ok((parse_value(kind, value.clone())?, value))
}
