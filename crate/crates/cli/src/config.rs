//! Sweep configuration: flat JSON-compatible key-value file with CLI-flag
//! overrides; precedence CLI > file > defaults. Everything is deterministic
//! (no seeds anywhere).

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A Schatten index that may be ∞; serialized as a number or the string
/// "inf" so configs round-trip losslessly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue(pub f64);

impl Serialize for PValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(PValue(x)),
            Raw::Str(s) if s == "inf" || s == "infinity" || s == "∞" => {
                Ok(PValue(f64::INFINITY))
            }
            Raw::Str(s) => s
                .parse::<f64>()
                .map(PValue)
                .map_err(|_| serde::de::Error::custom(format!("bad p value {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub d: Vec<usize>,
    pub beta: Vec<f64>,
    pub hbar: Vec<f64>,
    pub lambda: Vec<f64>,
    pub p: Vec<PValue>,
    pub weight_n: Vec<u32>,
    /// Bound identifiers to evaluate in `verify`; names match the CSV
    /// bound_id column.
    pub bounds: Vec<String>,
    pub tail_tol: f64,
    pub mu_tol: f64,
    pub slack: f64,
    pub dense_ceiling: usize,
    /// "d" for the dimension-dependent Schatten prefactor, "3" for the
    /// literal display.
    pub schatten_exponent: String,
    /// When n = 0: "identity" (default) or "double" for 1 + |p|⁰ = 2.
    pub weight_zero_convention: String,
    /// Radial extent of the wigner sample grid.
    pub wigner_zmax: f64,
    pub wigner_samples: usize,
    /// Moment orders for the wigner table.
    pub moments: Vec<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        // the default verify grid is the bound-campaign grid
        Self {
            d: vec![1, 2, 3],
            beta: vec![0.25, 1.0, 4.0, 16.0],
            hbar: vec![0.8, 0.4, 0.1, 0.02],
            lambda: vec![0.1, 1.0, std::f64::consts::TAU],
            p: vec![PValue(2.0), PValue(4.0), PValue(f64::INFINITY)],
            weight_n: vec![0],
            bounds: vec![
                "main_theorem".into(),
                "main_theorem_gibbs".into(),
                "linf_prop".into(),
                "linf_prop_gibbs".into(),
                "fugacity_upper".into(),
                "fugacity_lower".into(),
                "mu_upper".into(),
            ],
            tail_tol: 1e-12,
            mu_tol: 1e-12,
            slack: 1e-9,
            dense_ceiling: 4000,
            schatten_exponent: "d".into(),
            weight_zero_convention: "identity".into(),
            wigner_zmax: 5.0,
            wigner_samples: 101,
            moments: vec![0, 1, 2, 4],
        }
    }
}

impl SweepConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            None => SweepConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
        };
        cfg.normalize();
        Ok(cfg)
    }

    fn normalize(&mut self) {
        self.d.sort_unstable();
        self.d.dedup();
        for v in [&mut self.beta, &mut self.hbar, &mut self.lambda] {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup();
        }
        self.p.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        self.p.dedup_by(|a, b| a.0 == b.0);
        self.weight_n.sort_unstable();
        self.weight_n.dedup();
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.is_empty()
            || self.beta.is_empty()
            || self.hbar.is_empty()
            || self.lambda.is_empty()
            || self.p.is_empty()
            || self.weight_n.is_empty()
        {
            bail!("empty grid: every one of d, beta, hbar, lambda, p, weight_n needs at least one value");
        }
        if self.d.iter().any(|&d| d == 0) {
            bail!("dimension 0 in the d grid");
        }
        for (name, vals) in [("beta", &self.beta), ("lambda", &self.lambda)] {
            if vals.iter().any(|&v| !v.is_finite() || v <= 0.0) {
                bail!("non-positive value in the {name} grid");
            }
        }
        if self.hbar.iter().any(|&v| !(0.0..=1.0).contains(&v) || v == 0.0) {
            bail!("hbar grid must lie in (0, 1]");
        }
        if self.p.iter().any(|&PValue(p)| !(p >= 1.0)) {
            bail!("Schatten p grid must satisfy p >= 1");
        }
        if !(self.tail_tol > 0.0 && self.mu_tol > 0.0 && self.slack > 0.0) {
            bail!("tolerances must be positive");
        }
        match self.schatten_exponent.as_str() {
            "d" | "3" => {}
            other => bail!("schatten_exponent must be \"d\" or \"3\", got {other:?}"),
        }
        match self.weight_zero_convention.as_str() {
            "identity" | "double" => {}
            other => bail!("weight_zero_convention must be \"identity\" or \"double\", got {other:?}"),
        }
        if self.wigner_samples < 2 {
            bail!("wigner_samples must be at least 2");
        }
        Ok(())
    }

    pub fn schatten_exponent_value(&self, d: usize) -> f64 {
        if self.schatten_exponent == "3" {
            3.0
        } else {
            d as f64
        }
    }

    /// One-line canonical form for the CSV run manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_losslessly() {
        let cfg = SweepConfig::default();
        let json = cfg.canonical_json();
        let back: SweepConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(json, back.canonical_json());
        assert!(back.p.iter().any(|p| p.0.is_infinite()));
    }

    #[test]
    fn p_value_parses_inf() {
        let cfg: SweepConfig = serde_json::from_str(r#"{"p": [2, "inf"]}"#).unwrap();
        assert_eq!(cfg.p.len(), 2);
        assert!(cfg.p[1].0.is_infinite());
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg: SweepConfig = serde_json::from_str(r#"{"beta": []}"#).unwrap();
        assert!(cfg.validate().is_err());
    }
}
