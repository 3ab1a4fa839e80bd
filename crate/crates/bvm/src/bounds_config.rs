//! `bounds.json`: model constants in, the composed budget out.

use serde::{Deserialize, Serialize};

use bvm_core::bounds::{
    bvm_budget_with, sieve_budget, solve_r0, BvmBudget, DeltaProfile, ModelConstants, TauVariant,
};
use bvm_core::CoreError;

use crate::error::{ConfigError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub nu0: f64,
    pub omega: f64,
    pub g: f64,
    pub b: f64,
    pub p: usize,
    pub p_star: usize,
    pub x: f64,
    /// Either a radius or `solve_r0: true`.
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub solve_r0: bool,
    /// `δ(r) = delta_coeff · r`.
    pub delta_coeff: f64,
    #[serde(rename = "trace_B")]
    pub trace_b: f64,
    #[serde(rename = "lambda_B")]
    pub lambda_b: f64,
    #[serde(default)]
    pub alpha_m: Option<f64>,
    #[serde(default)]
    pub beta_m: Option<f64>,
    #[serde(default)]
    pub tau_variant: TauVariant,
}

impl BoundsConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: BoundsConfig = serde_json::from_str(text)?;
        cfg.validate().map_err(|e| e.locate(text))?;
        Ok(cfg)
    }

    pub fn constants(&self) -> ModelConstants {
        ModelConstants {
            nu0: self.nu0,
            omega: self.omega,
            g: self.g,
            b: self.b,
            delta: DeltaProfile::Linear {
                coeff: self.delta_coeff,
            },
            p_star: self.p_star,
            p: self.p,
            trace_b: self.trace_b,
            lambda_b: self.lambda_b,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::field(name, "must be positive and finite"))
            }
        };
        positive(self.nu0, "nu0")?;
        positive(self.g, "g")?;
        positive(self.x, "x")?;
        positive(self.lambda_b, "lambda_B")?;
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(ConfigError::field("omega", "must be nonnegative"));
        }
        if !(self.b > 0.0 && self.b <= 1.0) {
            return Err(ConfigError::field("b", "must lie in (0, 1]"));
        }
        if self.p == 0 {
            return Err(ConfigError::field("p", "must be at least 1"));
        }
        if self.p_star < self.p {
            return Err(ConfigError::field("p_star", "must be at least p"));
        }
        if !(self.delta_coeff >= 0.0) || !self.delta_coeff.is_finite() {
            return Err(ConfigError::field("delta_coeff", "must be nonnegative"));
        }
        if !(self.trace_b >= self.lambda_b) || !self.trace_b.is_finite() {
            return Err(ConfigError::field("trace_B", "must be at least lambda_B"));
        }
        match (self.r0, self.solve_r0) {
            (Some(_), true) => {
                return Err(ConfigError::field(
                    "r0",
                    "give either r0 or solve_r0, not both",
                ))
            }
            (None, false) => {
                return Err(ConfigError::field(
                    "r0",
                    "r0 is required unless solve_r0 is true",
                ))
            }
            (Some(r), false) => positive(r, "r0")?,
            (None, true) => {}
        }
        for (v, name) in [(self.alpha_m, "alpha_m"), (self.beta_m, "beta_m")] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(ConfigError::field(name, "must be nonnegative"));
                }
            }
        }
        Ok(())
    }
}

/// Budget for a validated configuration; sieve corrections apply when either
/// `alpha_m` or `beta_m` is given.
pub fn run_bounds(cfg: &BoundsConfig) -> Result<BvmBudget> {
    cfg.validate()?;
    let constants = cfg.constants();
    let r0 = match cfg.r0 {
        Some(r) => r,
        None => solve_r0(&constants, cfg.x)?,
    };
    let budget = bvm_budget_with(&constants, r0, cfg.x, cfg.tau_variant)?;
    if cfg.alpha_m.is_none() && cfg.beta_m.is_none() {
        return Ok(budget);
    }
    Ok(sieve_budget(
        &budget,
        cfg.alpha_m.unwrap_or(0.0),
        cfg.beta_m.unwrap_or(0.0),
    )?)
}

/// Pretty JSON of the budget with a trailing newline.
pub fn budget_json(budget: &BvmBudget) -> Result<String> {
    let mut s = serde_json::to_string_pretty(budget).map_err(std::io::Error::from)?;
    s.push('\n');
    Ok(s)
}

/// Parses, validates and evaluates `bounds.json` text.
pub fn bounds_from_json(text: &str) -> Result<String> {
    let cfg = BoundsConfig::from_json(text)?;
    let budget = run_bounds(&cfg).map_err(|e| match e {
        crate::error::BvmError::Numerical(CoreError::InvalidInput(msg)) => {
            ConfigError::message(msg).into()
        }
        other => other,
    })?;
    budget_json(&budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
  "nu0": 1.0,
  "omega": 0.0,
  "g": 1.0,
  "b": 1.0,
  "p": 1,
  "p_star": 2,
  "x": 5.0,
  "r0": 1.0,
  "delta_coeff": 0.1,
  "trace_B": 1.0,
  "lambda_B": 1.0
}"#;

    #[test]
    fn worked_example_mean_bound() {
        let cfg = BoundsConfig::from_json(EXAMPLE).unwrap();
        let b = run_bounds(&cfg).unwrap();
        assert!((b.delta - 0.1).abs() < 1e-15);
        assert!((b.mean_bound - 0.5078).abs() < 1e-4);
        let json = bounds_from_json(EXAMPLE).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!((v["mean_bound"].as_f64().unwrap() - 0.5078).abs() < 1e-4);
        assert_eq!(json, bounds_from_json(EXAMPLE).unwrap());
    }

    #[test]
    fn missing_field_is_named() {
        let text = EXAMPLE.replace("  \"nu0\": 1.0,\n", "");
        let e = BoundsConfig::from_json(&text).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("nu0"));
        assert!(e.line.is_some());
    }

    #[test]
    fn invalid_value_is_located() {
        let text = EXAMPLE.replace("\"b\": 1.0", "\"b\": 1.5");
        let e = BoundsConfig::from_json(&text).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("b"));
        assert_eq!(e.line, Some(5));
    }

    #[test]
    fn solve_r0_and_sieve() {
        let text = EXAMPLE
            .replace("\"r0\": 1.0", "\"solve_r0\": true")
            .replace(
                "\"delta_coeff\": 0.1",
                "\"delta_coeff\": 0.0001, \"alpha_m\": 0.1, \"beta_m\": 0.01",
            );
        let cfg = BoundsConfig::from_json(&text).unwrap();
        let b = run_bounds(&cfg).unwrap();
        assert!(b.r0 >= 1.0);
        let star = 4.0 * b.delta + 16.0 * (-5.0f64).exp();
        assert!((b.mean_bound - (1.01 * star + 0.1)).abs() < 1e-12);
        assert!(b.sieve.is_some());
        let both = EXAMPLE.replace("\"r0\": 1.0", "\"r0\": 1.0, \"solve_r0\": true");
        assert_eq!(
            BoundsConfig::from_json(&both).unwrap_err().field.as_deref(),
            Some("r0")
        );
    }
}
