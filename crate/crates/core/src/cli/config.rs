use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::harness::{Algorithm, InstanceSpec, Overrides, Preset};
use crate::solvers::{StopRule, DEFAULT_MAX_SWEEPS};

/// Everything a command needs, resolved as defaults < config file < flags.
///
/// Fields a preset also sets are optional here: `compare` and `sweep` pass
/// them through as overrides, while `solve` fills the gaps from
/// [`RunConfig::resolved`]. The resolved value is echoed next to every
/// output as `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k_star: Option<usize>,
    pub column_normalize: Option<bool>,
    /// `None` means noiseless.
    pub snr_db: Option<f64>,
    pub seed: u64,
    /// Directory holding `A.csv`, `y.csv` and optionally `x_true.csv`.
    /// When unset the instance is generated from the fields above.
    pub instance_dir: Option<PathBuf>,

    pub algorithm: Algorithm,
    pub lambda: Option<f64>,
    pub q: Option<f64>,
    /// Absolute step size; `None` picks the algorithm default.
    pub mu: Option<f64>,
    pub max_sweeps: Option<usize>,
    /// `None` keeps the solver (or preset) default.
    pub stop_rule: Option<StopRule>,
    pub record_time: bool,

    pub preset: Option<Preset>,
    pub q_values: Option<Vec<f64>>,
    /// Preset step grid in units of `1/L_max`.
    pub mu_values: Option<Vec<f64>>,

    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: None,
            n: None,
            k_star: None,
            column_normalize: None,
            snr_db: None,
            seed: 0,
            instance_dir: None,
            algorithm: Algorithm::Gaita,
            lambda: None,
            q: None,
            mu: None,
            max_sweeps: None,
            stop_rule: None,
            record_time: false,
            preset: None,
            q_values: None,
            mu_values: None,
            out_dir: PathBuf::from("."),
        }
    }
}

pub const DEFAULT_LAMBDA: f64 = 0.001;
pub const DEFAULT_Q: f64 = 0.5;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fills every single-run field with its default.
    pub fn resolved(mut self) -> Self {
        let std = InstanceSpec::standard(self.seed);
        if self.instance_dir.is_none() {
            self.m.get_or_insert(std.m);
            self.n.get_or_insert(std.n);
            self.k_star.get_or_insert(std.k_star);
            self.column_normalize.get_or_insert(std.column_normalize);
        }
        self.lambda.get_or_insert(DEFAULT_LAMBDA);
        self.q.get_or_insert(DEFAULT_Q);
        self.max_sweeps.get_or_insert(DEFAULT_MAX_SWEEPS);
        self.stop_rule.get_or_insert_with(StopRule::default);
        self
    }

    pub fn instance_spec(&self) -> InstanceSpec {
        let std = InstanceSpec::standard(self.seed);
        InstanceSpec {
            m: self.m.unwrap_or(std.m),
            n: self.n.unwrap_or(std.n),
            k_star: self.k_star.unwrap_or(std.k_star),
            column_normalize: self.column_normalize.unwrap_or(std.column_normalize),
            snr_db: self.snr_db,
            seed: self.seed,
        }
    }

    pub fn overrides(&self) -> Overrides {
        Overrides {
            m: self.m,
            n: self.n,
            k_star: self.k_star,
            column_normalize: self.column_normalize,
            snr_db: self.snr_db,
            lambda: self.lambda,
            q_values: self.q_values.clone().or_else(|| self.q.map(|q| vec![q])),
            mu_values: self.mu_values.clone(),
            max_sweeps: self.max_sweeps,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.instance_dir.is_none() {
            self.instance_spec().validate()?;
        }
        if let Some(lambda) = self.lambda {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(CliError::Config(format!("lambda must be positive, got {lambda}")));
            }
        }
        let qs = self.q.iter().chain(self.q_values.iter().flatten());
        for &q in qs {
            if !(q > 0.0 && q < 1.0) {
                return Err(CliError::Config(format!("q must lie in (0, 1), got {q}")));
            }
        }
        let mus = self.mu.iter().chain(self.mu_values.iter().flatten());
        for &mu in mus {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(CliError::Config(format!("mu must be positive, got {mu}")));
            }
        }
        match self.stop_rule {
            Some(StopRule::IterateChange { tol } | StopRule::Rmse { tol }) if !(tol >= 0.0) => {
                Err(CliError::Config(format!("stop tolerance must be nonnegative, got {tol}")))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_parse_and_unknown_fields_fail() {
        let c: RunConfig = serde_json::from_str(r#"{"m": 20, "algorithm": "jaita", "stop_rule": {"kind": "rmse", "tol": 0.01}}"#).unwrap();
        assert_eq!(c.m, Some(20));
        assert_eq!(c.algorithm, Algorithm::Jaita);
        assert_eq!(c.stop_rule, Some(StopRule::Rmse { tol: 0.01 }));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn resolved_fills_defaults() {
        let c = RunConfig::default().resolved();
        assert_eq!(c.m, Some(250));
        assert_eq!(c.lambda, Some(DEFAULT_LAMBDA));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn bad_values_rejected() {
        let c = RunConfig {
            q: Some(1.5),
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            k_star: Some(600),
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
