use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// A rejected configuration field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Everything a run needs. Loaded from JSON, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    pub kappa: Option<f64>,
    /// Cells per side (carpet grids) or along the real axis (mu0).
    pub grid: Option<usize>,
    pub eps: Option<f64>,
    pub n_traces: Option<usize>,
    pub n_fields: Option<usize>,
    pub n_replicas: Option<usize>,
    /// Driver steps per trace.
    pub steps: Option<usize>,
    pub c_sequence: Option<Vec<f64>>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: String::new(),
            kappa: None,
            grid: None,
            eps: None,
            n_traces: None,
            n_fields: None,
            n_replicas: None,
            steps: None,
            c_sequence: None,
            seeds: Vec::new(),
            out: PathBuf::from("slelab-out"),
            csv: true,
            json: true,
            svg: false,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))
    }

    pub fn kappa(&self) -> Result<f64, ConfigError> {
        self.kappa.ok_or_else(|| ConfigError::new("kappa", "required by this subcommand"))
    }

    pub fn grid_or(&self, default: usize) -> usize {
        self.grid.unwrap_or(default)
    }

    pub fn eps_or(&self, default: f64) -> f64 {
        self.eps.unwrap_or(default)
    }

    /// Checks shared by all subcommands plus the subcommand's own preconditions.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seeds.is_empty() {
            return Err(ConfigError::new(
                "seeds",
                "at least one seed is required (pass --seed, or --random-seed to draw one)",
            ));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        if let Some(k) = self.kappa {
            if !k.is_finite() {
                return Err(ConfigError::new("kappa", "must be finite"));
            }
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(ConfigError::new("eps", format!("{e} is not in (0, ∞)")));
            }
        }
        if let Some(g) = self.grid {
            if g < 16 {
                return Err(ConfigError::new("grid", format!("{g} is below the minimum of 16")));
            }
        }
        for (field, v) in [
            ("n_traces", self.n_traces),
            ("n_fields", self.n_fields),
            ("n_replicas", self.n_replicas),
            ("steps", self.steps),
        ] {
            if v == Some(0) {
                return Err(ConfigError::new(field, "must be at least 1"));
            }
        }
        let open = |lo: f64, hi: f64, range: &str| -> Result<(), ConfigError> {
            let k = self.kappa()?;
            if k > lo && k < hi {
                Ok(())
            } else {
                Err(ConfigError::new("kappa", format!("{k} is not in {range}")))
            }
        };
        let soup = || -> Result<(), ConfigError> {
            let k = self.kappa()?;
            if k > 8.0 / 3.0 && k <= 4.0 {
                Ok(())
            } else {
                Err(ConfigError::new("kappa", format!("{k} is not in (8/3, 4]")))
            }
        };
        match self.subcommand.as_str() {
            "params" => {
                let k = self.kappa()?;
                if k >= 8.0 / 3.0 && k < 8.0 {
                    Ok(())
                } else {
                    Err(ConfigError::new("kappa", format!("{k} is not in [8/3, 8)")))
                }
            }
            "sle-trace" | "dim-est" => {
                let k = self.kappa()?;
                if k >= 0.0 {
                    Ok(())
                } else {
                    Err(ConfigError::new("kappa", format!("{k} is negative")))
                }
            }
            "loop-soup" | "carpet" | "xi-estimate" | "covariance-check" | "markov-test" | "uniqueness-check" => soup(),
            "mu0-estimate" | "stable-scaling" => open(4.0, 8.0, "(4, 8)"),
            "ode-check" => open(0.0, 8.0 + 1e-12, "(0, 8]"),
            "bessel-check" => open(0.0, f64::INFINITY, "(0, ∞)"),
            "cle4-coupling" => {
                let seq = self.c_sequence.clone().unwrap_or_else(default_c_sequence);
                if seq.is_empty() || seq.last() != Some(&1.0) {
                    return Err(ConfigError::new("c_sequence", "must be nonempty and end at 1"));
                }
                if seq[0] <= 0.0 || seq.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(ConfigError::new("c_sequence", "must be strictly increasing in (0, 1]"));
                }
                Ok(())
            }
            other => Err(ConfigError::new("subcommand", format!("unknown subcommand `{other}`"))),
        }
    }
}

pub fn default_c_sequence() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}
