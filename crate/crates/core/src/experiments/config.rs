use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::demand::{DemandError, DemandModel, ModelFile};
use crate::policies::PolicyKind;

use super::ExperimentError;

/// Initial inventory rule `round(c*T)` with a rational `c`, evaluated in
/// integer arithmetic (halves round up).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Y0Rule {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Y0Rule {
    pub fn new(num: u64, den: u64) -> Result<Self, ExperimentError> {
        if den == 0 {
            return Err(ExperimentError::Config("y0 rule: zero denominator".into()));
        }
        let g = gcd(num, den).max(1);
        Ok(Self { num: num / g, den: den / g })
    }

    /// `c` from its shortest decimal representation, so `0.325` is `13/40`.
    pub fn from_decimal(c: f64) -> Result<Self, ExperimentError> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(ExperimentError::Config(format!("y0 coefficient {c} must be finite and nonnegative")));
        }
        let (n, d) = parse_rational(&c.to_string())?;
        Y0Rule::new(n, d)
    }

    pub fn coefficient(&self) -> (u64, u64) {
        (self.num, self.den)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn apply(&self, horizon: usize) -> usize {
        let twice = 2 * self.num as u128 * horizon as u128 + self.den as u128;
        (twice / (2 * self.den as u128)) as usize
    }
}

/// `"5/16"`, `"0.3125"` or `"2"` as an exact fraction.
fn parse_rational(s: &str) -> Result<(u64, u64), ExperimentError> {
    let bad = || ExperimentError::Config(format!("y0 rule: cannot parse coefficient {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        return Ok((n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return Err(bad());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
    Ok((num, den))
}

impl FromStr for Y0Rule {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix("round(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|r| r.strip_suffix("*T"))
            .ok_or_else(|| ExperimentError::Config(format!("y0 rule {s:?} is not of the form round(c*T)")))?;
        let (n, d) = parse_rational(inner)?;
        Y0Rule::new(n, d)
    }
}

impl fmt::Display for Y0Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "round({}/{}*T)", self.num, self.den)
    }
}

impl Serialize for Y0Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Y0Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Surfaces an invalid embedded model as a model error rather than a parse error.
fn check_model(text: &str) -> Result<(), ExperimentError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
    match value.get("model").map(|m| ModelFile::from_value(m.clone())) {
        Some(Err(e @ DemandError::Invalid(_))) => Err(e.into()),
        _ => Ok(()),
    }
}

fn default_replications() -> usize {
    10_000
}

/// A regret experiment over a list of horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: DemandModel,
    pub t_list: Vec<usize>,
    pub y0_rule: Y0Rule,
    pub policies: Vec<PolicyKind>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The benchmark table: `T = 2^6..2^15`, `y0 = round(5T/16)`.
    pub fn table2() -> Self {
        Self {
            name: "table2".into(),
            model: DemandModel::benchmark_instance(),
            t_list: (6..=15).map(|k| 1usize << k).collect(),
            y0_rule: Y0Rule::new(5, 16).expect("nonzero denominator"),
            policies: vec![PolicyKind::Static, PolicyKind::Resolving],
            replications: default_replications(),
            base_seed: 0,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.t_list.is_empty() {
            return Err(ExperimentError::Config("t_list is empty".into()));
        }
        if self.t_list[0] == 0 || self.t_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::Config("t_list must be positive and strictly ascending".into()));
        }
        if self.policies.is_empty() {
            return Err(ExperimentError::Config("no policies listed".into()));
        }
        if self.replications == 0 {
            return Err(ExperimentError::Config("replications must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        check_model(text)?;
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Vary `x_T` toward `x^u` on the benchmark demand curve.
    Gap,
    /// Vary `a = b` in `d = a - b p` at fixed `x_T`.
    Concavity,
}

/// Resolving-regret curves over `T` for several model or inventory settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    /// `x_T` values for a gap sweep, `a = b` values for a concavity sweep.
    pub values: Vec<f64>,
    pub t_list: Vec<usize>,
    /// Fixed `x_T` of a concavity sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_t: Option<f64>,
}

impl SweepConfig {
    pub fn gap() -> Self {
        Self {
            kind: SweepKind::Gap,
            values: vec![0.3, 0.325, 0.35, 0.375],
            t_list: (4..=16).map(|k| 1usize << k).collect(),
            x_t: None,
        }
    }

    pub fn concavity() -> Self {
        Self {
            kind: SweepKind::Concavity,
            values: vec![0.3, 0.5, 0.7, 0.9],
            t_list: (4..=16).map(|k| 1usize << k).collect(),
            x_t: Some(0.1),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.values.is_empty() || self.t_list.is_empty() {
            return Err(ExperimentError::Config("sweep needs values and horizons".into()));
        }
        if self.t_list[0] == 0 || self.t_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::Config("t_list must be positive and strictly ascending".into()));
        }
        if self.kind == SweepKind::Concavity && self.x_t.is_none() {
            return Err(ExperimentError::Config("concavity sweep needs x_t".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Hindsight-benchmark comparison on an additive-noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoCompareConfig {
    pub model: DemandModel,
    pub t_list: Vec<usize>,
    pub x_t: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
}

impl HoCompareConfig {
    /// `w = 0.1` on the benchmark demand curve, `T = 2^6..2^12`.
    pub fn preset() -> Self {
        Self {
            model: DemandModel::linear_additive(0.75, 0.5, 0.0, 1.0, 0.1).expect("valid preset"),
            t_list: (6..=12).map(|k| 1usize << k).collect(),
            x_t: 5.0 / 16.0,
            replications: default_replications(),
            base_seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        check_model(text)?;
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        if cfg.t_list.is_empty() || cfg.replications == 0 {
            return Err(ExperimentError::Config("ho-compare needs horizons and replications".into()));
        }
        Ok(cfg)
    }
}
