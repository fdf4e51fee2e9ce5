//! Run configuration: JSON file, then command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cuspkit_core::ode::{IntegratorOptions, TRANSIENT_FRACTION};
use cuspkit_core::signature::DEFAULT_SAO_THRESHOLD;
use cuspkit_core::{BuiltinModel, SlowFastModel, Tolerances};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let d = IntegratorOptions::default();
        IntegratorConfig {
            rtol: d.rtol,
            atol: d.atol,
            max_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions {
            rtol: self.rtol,
            atol: self.atol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: String,
    pub epsilon: Option<f64>,
    pub params: BTreeMap<String, f64>,
    pub tolerances: Tolerances,
    pub integrator: IntegratorConfig,
    /// Search interval for symmetric folds; the model default when absent.
    pub fold_bracket: Option<[f64; 2]>,
    /// Which fold to analyze when the bracket holds several.
    pub fold_index: usize,
    /// Simulation end time; 3000 for Curtu and 20000 for Morris–Lecar when absent.
    pub t_end: Option<f64>,
    pub transient_fraction: f64,
    pub sao_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "curtu".into(),
            epsilon: None,
            params: BTreeMap::new(),
            tolerances: Tolerances::default(),
            integrator: IntegratorConfig::default(),
            fold_bracket: None,
            fold_index: 0,
            t_end: None,
            transient_fraction: TRANSIENT_FRACTION,
            sao_threshold: DEFAULT_SAO_THRESHOLD,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }

    /// Apply one `key=value` parameter override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| {
            CliError::config(format!("--set expects key=value, got '{assignment}'"))
        })?;
        let value = parse_f64(v.trim(), k)?;
        self.params.insert(k.trim().to_string(), value);
        Ok(())
    }

    /// Built-in model with epsilon and parameter overrides applied.
    pub fn build_model(&self) -> Result<BuiltinModel, CliError> {
        let mut m = BuiltinModel::by_name(&self.model).map_err(CliError::from_core)?;
        if let Some(eps) = self.epsilon {
            m = m.with_param("epsilon", eps).map_err(CliError::from_core)?;
        }
        for (k, v) in &self.params {
            m = m.with_param(k, *v).map_err(CliError::from_core)?;
        }
        Ok(m)
    }

    pub fn fold_bracket_for<M: SlowFastModel>(&self, m: &M) -> (f64, f64) {
        self.fold_bracket
            .map(|b| (b[0], b[1]))
            .unwrap_or_else(|| m.default_fold_bracket())
    }

    pub fn t_end_for(&self) -> f64 {
        self.t_end.unwrap_or(if self.model == "morris_lecar" {
            20000.0
        } else {
            3000.0
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.transient_fraction >= 0.0 && self.transient_fraction < 1.0) {
            return Err(CliError::config("transient_fraction must lie in [0, 1)"));
        }
        if !(self.sao_threshold > 0.0 && self.sao_threshold < 1.0) {
            return Err(CliError::config("sao_threshold must lie in (0, 1)"));
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::config("t_end must be positive"));
            }
        }
        if let Some([lo, hi]) = self.fold_bracket {
            if !(lo < hi) {
                return Err(CliError::config("fold_bracket must be increasing"));
            }
        }
        Ok(())
    }
}

pub fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::config(format!("{what}: '{s}' is not a finite number")))
}

/// Parse `lo,hi`.
pub fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::config(format!("{what} expects lo,hi, got '{s}'")))?;
    Ok((parse_f64(a.trim(), what)?, parse_f64(b.trim(), what)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let r: Result<RunConfig, _> = serde_json::from_str(r#"{"model": "curtu", "colour": 3}"#);
        assert!(r.is_err());
        let r: Result<RunConfig, _> = serde_json::from_str(r#"{"tolerances": {"y_solv": 1e-9}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn partial_config_takes_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"model": "curtu", "epsilon": 0.01, "params": {"b": 0.6055}}"#)
                .unwrap();
        assert_eq!(c.sao_threshold, DEFAULT_SAO_THRESHOLD);
        let m = c.build_model().unwrap();
        assert_eq!(m.epsilon(), 0.01);
    }

    #[test]
    fn overrides_must_name_existing_parameters() {
        let mut c = RunConfig::default();
        c.set("nope=1").unwrap();
        assert_eq!(c.build_model().unwrap_err().code, 4);
        assert!(c.set("b").is_err());
        assert!(c.set("b=x").is_err());
    }

    #[test]
    fn pairs_parse() {
        assert_eq!(parse_pair("0.55, 0.66", "bracket").unwrap(), (0.55, 0.66));
        assert!(parse_pair("0.55", "bracket").is_err());
    }
}
