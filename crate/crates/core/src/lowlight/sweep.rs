use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Config, DegradationParams};
use crate::error::{Error, Result};

/// The parameter varied by a one-at-a-time sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Noise standard deviation `sigma` (8-bit units).
    Noise,
    Gamma,
    /// Saturation scale `alpha_s`.
    Saturation,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Noise => "noise",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Saturation => "saturation",
        }
    }

    /// Name of the parameter field this axis drives.
    pub fn param_name(self) -> &'static str {
        match self {
            SweepAxis::Noise => "sigma",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Saturation => "alpha_s",
        }
    }

    /// Grid used for this axis in the reference low-light study.
    pub fn reference_values(self) -> Vec<f64> {
        match self {
            SweepAxis::Noise => vec![10.0, 25.0, 40.0, 55.0, 70.0],
            SweepAxis::Gamma | SweepAxis::Saturation => vec![0.2, 0.3, 0.4, 0.5, 0.6],
        }
    }

    pub fn get(self, p: &DegradationParams) -> f64 {
        match self {
            SweepAxis::Noise => p.sigma,
            SweepAxis::Gamma => p.gamma,
            SweepAxis::Saturation => p.alpha_s,
        }
    }

    pub fn set(self, p: &mut DegradationParams, value: f64) {
        match self {
            SweepAxis::Noise => p.sigma = value,
            SweepAxis::Gamma => p.gamma = value,
            SweepAxis::Saturation => p.alpha_s = value,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noise" | "sigma" => Ok(SweepAxis::Noise),
            "gamma" => Ok(SweepAxis::Gamma),
            "saturation" | "alpha_s" => Ok(SweepAxis::Saturation),
            other => Err(Error::Usage(format!(
                "unknown sweep axis `{other}` (expected noise, gamma or saturation)"
            ))),
        }
    }
}

/// Parses a comma-separated list of reals, e.g. `10,25,40`.
pub fn parse_values(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Usage(format!("`{s}` is not a number")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub defaults: DegradationParams,
}

impl SweepSpec {
    /// Reads `axis`, `values` and any model keys; absent model keys keep the reference defaults.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let axis = cfg
            .get("axis")
            .ok_or_else(|| Error::Usage("missing config key `axis`".into()))?
            .parse()?;
        let values = parse_values(
            cfg.get("values")
                .ok_or_else(|| Error::Usage("missing config key `values`".into()))?,
        )?;
        let mut defaults = DegradationParams::default();
        for (key, slot) in [
            ("alpha", &mut defaults.alpha),
            ("beta", &mut defaults.beta),
            ("gamma", &mut defaults.gamma),
            ("alpha_s", &mut defaults.alpha_s),
            ("sigma", &mut defaults.sigma),
            ("mu", &mut defaults.mu),
        ] {
            if cfg.get(key).is_some() {
                *slot = cfg.require_f64(key)?;
            }
        }
        if let Some(seed) = cfg.get_u64("seed")? {
            defaults.seed = seed;
        }
        defaults.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(SweepSpec {
            axis,
            values,
            defaults,
        })
    }
}

/// One parameter record per sweep value; every other field equals `spec.defaults`.
pub fn sweep_grid(spec: &SweepSpec) -> Result<Vec<DegradationParams>> {
    if spec.values.is_empty() {
        return Err(Error::Param("sweep needs at least one value".into()));
    }
    spec.values
        .iter()
        .map(|&v| {
            let mut p = spec.defaults;
            spec.axis.set(&mut p, v);
            p.validate()?;
            Ok(p)
        })
        .collect()
}
