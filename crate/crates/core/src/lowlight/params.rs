use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the low-light model `g = C(alpha * f^gamma + beta) + noise`.
///
/// `sigma` and `mu` are in 8-bit units (0..255 scale) and converted to the
/// normalized scale when noise is added.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha_s: f64,
    pub sigma: f64,
    pub mu: f64,
    pub seed: u64,
}

impl Default for DegradationParams {
    /// Defaults of the one-at-a-time sweeps: sigma 10, gamma 0.5, alpha_s 0.4, alpha 0.4.
    fn default() -> Self {
        DegradationParams {
            alpha: 0.4,
            beta: 0.0,
            gamma: 0.5,
            alpha_s: 0.4,
            sigma: 10.0,
            mu: 0.0,
            seed: 0,
        }
    }
}

impl DegradationParams {
    /// Parameters under which the model is the identity map.
    pub fn identity() -> Self {
        DegradationParams {
            alpha: 1.0,
            beta: 0.0,
            gamma: 1.0,
            alpha_s: 1.0,
            sigma: 0.0,
            mu: 0.0,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("alpha_s", self.alpha_s),
            ("sigma", self.sigma),
            ("mu", self.mu),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Param(format!("{name} must be finite, got {v}")));
        }
        if self.gamma <= 0.0 {
            return Err(Error::Param(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.alpha < 0.0 {
            return Err(Error::Param(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.alpha_s < 0.0 {
            return Err(Error::Param(format!("alpha_s must be >= 0, got {}", self.alpha_s)));
        }
        if self.sigma < 0.0 {
            return Err(Error::Param(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Builds parameters from a parsed config; every model key except `seed` is required.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let p = DegradationParams {
            alpha: cfg.require_f64("alpha")?,
            beta: cfg.require_f64("beta")?,
            gamma: cfg.require_f64("gamma")?,
            alpha_s: cfg.require_f64("alpha_s")?,
            sigma: cfg.require_f64("sigma")?,
            mu: cfg.require_f64("mu")?,
            seed: cfg.get_u64("seed")?.unwrap_or(0),
        };
        p.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(p)
    }

    /// Renders in the config-file syntax accepted by [`Config::parse`].
    pub fn to_config_string(&self) -> String {
        format!(
            "alpha = {}\nbeta = {}\ngamma = {}\nalpha_s = {}\nsigma = {}\nmu = {}\nseed = {}\n",
            self.alpha, self.beta, self.gamma, self.alpha_s, self.sigma, self.mu, self.seed
        )
    }
}

impl fmt::Display for DegradationParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={} beta={} gamma={} alpha_s={} sigma={} mu={} seed={}",
            self.alpha, self.beta, self.gamma, self.alpha_s, self.sigma, self.mu, self.seed
        )
    }
}

const KNOWN_KEYS: &[&str] = &[
    "alpha", "beta", "gamma", "alpha_s", "sigma", "mu", "seed", "axis", "values",
];

/// Flat `key = value` configuration, one pair per line, `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Usage(format!("config line {}: unknown key `{key}`", i + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Usage(format!("config line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Usage(msg) => Error::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::Usage(format!("missing config key `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::Usage(format!("config key `{key}`: `{raw}` is not a number")))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|raw| {
                raw.parse()
                    .map_err(|_| Error::Usage(format!("config key `{key}`: `{raw}` is not an integer")))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config_with_comments() {
        let text = "# low light\nalpha = 0.4\nbeta=0\ngamma = 0.5 # contrast\nalpha_s = 0.4\nsigma = 10\nmu = 0\nseed = 17\n";
        let p = DegradationParams::from_config(&Config::parse(text).unwrap()).unwrap();
        assert_eq!(p, DegradationParams::default().with_seed(17));
    }

    #[test]
    fn missing_key_is_usage_error() {
        let cfg = Config::parse("alpha = 1\nbeta = 0\ngamma = 1\nalpha_s = 1\nmu = 0\n").unwrap();
        let err = DegradationParams::from_config(&cfg).unwrap_err();
        assert!(matches!(err, Error::Usage(ref m) if m.contains("sigma")));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(Config::parse("alpha 0.4").is_err());
        assert!(Config::parse("colour = 1").is_err());
        assert!(Config::parse("alpha = 1\nalpha = 2").is_err());
        let cfg = Config::parse("alpha = x").unwrap();
        assert!(cfg.require_f64("alpha").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut p = DegradationParams::identity();
        p.gamma = 0.0;
        assert!(p.validate().is_err());
        p.gamma = 1.0;
        p.sigma = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn config_string_round_trips() {
        let p = DegradationParams {
            alpha: 0.35,
            beta: 0.01,
            gamma: 0.3,
            alpha_s: 0.2,
            sigma: 55.0,
            mu: 0.0,
            seed: 99,
        };
        let back = DegradationParams::from_config(&Config::parse(&p.to_config_string()).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
