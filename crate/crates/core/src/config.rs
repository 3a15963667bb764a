//! Run configuration: flat `key = value` files, presets and flag overrides.
//!
//! Keys are SI with angular frequencies in rad/s:
//!
//! | key               | field                   |
//! |-------------------|-------------------------|
//! | `wavelength_m`    | laser wavelength        |
//! | `cavity_length_m` | cavity length           |
//! | `mass_kg`         | mirror mass             |
//! | `kappa_rad_s`     | cavity half-linewidth   |
//! | `omega_m_rad_s`   | mechanical frequency    |
//! | `quality`         | mechanical quality      |
//! | `power_w`         | laser power             |
//! | `temperature_k`   | bath temperature        |
//! | `squeeze_r`       | squeezing parameter     |
//! | `squeeze_phi`     | squeezing phase         |
//! | `detuning0_rad_s` | bare detuning           |
//!
//! Blank lines and `#` comments are ignored.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::spectrum::{CothModel, TOL_RANGE};
use crate::steadystate::BranchPolicy;

pub const WORKERS_ENV: &str = "OPTOSQUEEZE_WORKERS";

/// Config keys paired with the field name used in validation errors.
pub const KEYS: [(&str, &str); 11] = [
    ("wavelength_m", "wavelength_lambda"),
    ("cavity_length_m", "cavity_length_L"),
    ("mass_kg", "mass_m"),
    ("kappa_rad_s", "kappa"),
    ("omega_m_rad_s", "omega_m"),
    ("quality", "quality_Q"),
    ("power_w", "laser_power_P"),
    ("temperature_k", "temperature_T"),
    ("squeeze_r", "squeeze_r"),
    ("squeeze_phi", "squeeze_phi"),
    ("detuning0_rad_s", "detuning_Delta0"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    /// One JSON object per line.
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" | "jsonl" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format `{other}` (csv, json)")),
        }
    }
}

/// Partially specified parameters, one slot per config key.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamSet {
    pub slots: [Option<f64>; 11],
}

impl ParamSet {
    pub fn from_params(p: &SystemParams<f64>) -> Self {
        let v = [
            p.wavelength,
            p.cavity_length,
            p.mass,
            p.kappa,
            p.omega_m,
            p.quality,
            p.power,
            p.temperature,
            p.squeeze_r,
            p.squeeze_phi,
            p.detuning0,
        ];
        ParamSet { slots: v.map(Some) }
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let i = KEYS
            .iter()
            .position(|(k, _)| *k == key)
            .ok_or_else(|| Error::UnknownKey(key.to_string()))?;
        self.slots[i] = Some(value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        KEYS.iter().position(|(k, _)| *k == key).and_then(|i| self.slots[i])
    }

    /// Values in `other` win.
    pub fn overlay(&self, other: &ParamSet) -> ParamSet {
        let mut out = *self;
        for (o, v) in out.slots.iter_mut().zip(other.slots) {
            if v.is_some() {
                *o = v;
            }
        }
        out
    }

    /// Complete and validate. A missing key is reported under its field name.
    pub fn resolve(&self) -> Result<SystemParams<f64>> {
        let mut v = [0.0; 11];
        for (i, slot) in self.slots.iter().enumerate() {
            v[i] = slot.ok_or_else(|| Error::validation(KEYS[i].1, format!("missing (config key `{}`)", KEYS[i].0)))?;
        }
        let p = SystemParams {
            wavelength: v[0],
            cavity_length: v[1],
            mass: v[2],
            kappa: v[3],
            omega_m: v[4],
            quality: v[5],
            power: v[6],
            temperature: v[7],
            squeeze_r: v[8],
            squeeze_phi: v[9],
            detuning0: v[10],
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn parse_config_str(text: &str) -> Result<ParamSet> {
    let mut set = ParamSet::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            line: n + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value: f64 = value.trim().parse().map_err(|_| Error::Config {
            line: n + 1,
            reason: format!("`{}` is not a number", value.trim()),
        })?;
        set.set(key, value)?;
    }
    Ok(set)
}

pub fn parse_config_file(path: &Path) -> Result<ParamSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        line: 0,
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config_str(&text)
}

pub fn preset(name: &str) -> Result<SystemParams<f64>> {
    match name {
        "groeblacher" => Ok(SystemParams::groeblacher()),
        other => Err(Error::validation("preset", format!("unknown preset `{other}` (groeblacher)"))),
    }
}

/// Everything a subcommand needs besides its own arguments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: SystemParams<f64>,
    /// `None` defers to [`CothModel::default_for`] at the point's temperature.
    pub coth: Option<CothModel>,
    pub tol: f64,
    pub branch_policy: BranchPolicy,
    pub output: OutputFormat,
    pub workers: usize,
}

impl RunConfig {
    pub fn coth_model(&self) -> CothModel {
        self.coth.unwrap_or_else(|| CothModel::default_for(self.params.temperature))
    }
}

/// Sources for a [`RunConfig`], lowest precedence first: preset, file, flags.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources<'a> {
    pub preset: Option<&'a str>,
    pub file: Option<&'a Path>,
    pub flags: ParamSet,
    pub coth: Option<CothModel>,
    pub tol: Option<f64>,
    pub branch_policy: Option<BranchPolicy>,
    pub output: Option<OutputFormat>,
    pub workers: Option<usize>,
    /// Value of [`WORKERS_ENV`], if set.
    pub workers_env: Option<String>,
}

pub fn parse_config(src: &ConfigSources<'_>) -> Result<RunConfig> {
    let mut set = match src.preset {
        Some(name) => ParamSet::from_params(&preset(name)?),
        None => ParamSet::default(),
    };
    if let Some(path) = src.file {
        set = set.overlay(&parse_config_file(path)?);
    }
    let params = set.overlay(&src.flags).resolve()?;

    let tol = src.tol.unwrap_or(1e-7);
    if !(tol >= TOL_RANGE.0 && tol <= TOL_RANGE.1) {
        return Err(Error::validation(
            "tol",
            format!("must lie in [{:e}, {:e}], got {tol}", TOL_RANGE.0, TOL_RANGE.1),
        ));
    }
    let workers = match (src.workers, &src.workers_env) {
        (Some(w), _) => w,
        (None, Some(s)) => s
            .trim()
            .parse()
            .map_err(|_| Error::validation("workers", format!("{WORKERS_ENV}=`{s}` is not a positive integer")))?,
        (None, None) => 1,
    };
    if workers == 0 {
        return Err(Error::validation("workers", "must be >= 1"));
    }
    Ok(RunConfig {
        params,
        coth: src.coth,
        tol,
        branch_policy: src.branch_policy.unwrap_or_default(),
        output: src.output.unwrap_or_default(),
        workers,
    })
}
