//! Evaluators for explicit moment and tail inequalities.
//!
//! A [`TailBound`] describes `P(sup ≥ threshold(u)) ≤ envelope(u)` on a
//! u-domain; a [`MomentBound`] is a bound on `(E sup^p)^{1/p}` split into
//! named nonnegative terms. Constants come from a [`ConstantRegistry`];
//! anything not taken from the literature is marked fitted and the flag
//! travels with every bound that uses it.

mod appendix;
mod chaos;
mod supremum;

pub use appendix::*;
pub use chaos::*;
pub use supremum::*;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KEY_C2: &str = "chaining.C.2";
pub const KEY_D2: &str = "chaining.D.2";
pub const KEY_UNION: &str = "union.c";

/// A constant together with where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantValue {
    pub value: f64,
    pub fitted: bool,
}

pub type ConstantsUsed = BTreeMap<String, ConstantValue>;

/// Literature constants plus user overrides. Overrides are always fitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRegistry {
    literature: BTreeMap<String, f64>,
    overrides: BTreeMap<String, f64>,
}

impl Default for ConstantRegistry {
    fn default() -> Self {
        let literature = [(KEY_C2, 86.0), (KEY_D2, 9.0), (KEY_UNION, 16.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self { literature, overrides: BTreeMap::new() }
    }
}

impl ConstantRegistry {
    pub fn with_overrides<I, K>(overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        let mut reg = Self::default();
        for (k, v) in overrides {
            reg.set(k, v)?;
        }
        Ok(reg)
    }

    /// Reads a JSON object `{"name": value, ...}` of fitted constants.
    pub fn from_json(text: &str) -> Result<Self> {
        let map: BTreeMap<String, f64> = serde_json::from_str(text)?;
        Self::with_overrides(map)
    }

    pub fn set(&mut self, key: impl Into<String>, value: f64) -> Result<()> {
        let key = key.into();
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Domain(format!("constant {key} must be positive and finite, got {value}")));
        }
        self.overrides.insert(key, value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Result<ConstantValue> {
        if let Some(&value) = self.overrides.get(key) {
            return Ok(ConstantValue { value, fitted: true });
        }
        if let Some(&value) = self.literature.get(key) {
            return Ok(ConstantValue { value, fitted: false });
        }
        Err(Error::MissingConstant(key.to_string()))
    }

    /// All constants currently defined.
    pub fn snapshot(&self) -> ConstantsUsed {
        let mut out: ConstantsUsed =
            self.literature.iter().map(|(k, &v)| (k.clone(), ConstantValue { value: v, fitted: false })).collect();
        for (k, &v) in &self.overrides {
            out.insert(k.clone(), ConstantValue { value: v, fitted: true });
        }
        out
    }

    /// Chaining constants (C_α, D_α). Only α = 2 has literature values.
    pub fn chaining(&self, alpha: f64) -> Result<(ConstantValue, ConstantValue)> {
        Ok((self.get(&chaining_key('C', alpha))?, self.get(&chaining_key('D', alpha))?))
    }
}

pub fn chaining_key(which: char, alpha: f64) -> String {
    format!("chaining.{which}.{alpha}")
}

/// `leading · (a0 + a_half·√u + a1·u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub leading: f64,
    pub a0: f64,
    pub a_half: f64,
    pub a1: f64,
}

impl Threshold {
    pub fn at(&self, u: f64) -> f64 {
        self.leading * (self.a0 + self.a_half * u.sqrt() + self.a1 * u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Envelope {
    /// `min(1, prefactor · exp(−rate · u^power))`
    Stretched { prefactor: f64, rate: f64, power: f64 },
    /// `min(1, 2 exp(−c · min(u²/s2², u/s_inf)))`
    HansonWright { c: f64, s2: f64, s_inf: f64 },
}

impl Envelope {
    pub fn at(&self, u: f64) -> f64 {
        let raw = match *self {
            Envelope::Stretched { prefactor, rate, power } => prefactor * (-rate * u.powf(power)).exp(),
            Envelope::HansonWright { c, s2, s_inf } => {
                if u <= 0.0 {
                    2.0
                } else if s_inf == 0.0 {
                    0.0
                } else {
                    2.0 * (-c * (u * u / (s2 * s2)).min(u / s_inf)).exp()
                }
            }
        };
        raw.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBound {
    pub name: String,
    pub threshold: Threshold,
    pub envelope: Envelope,
    /// Smallest u for which the inequality is claimed.
    pub u_min: f64,
    pub constants_used: ConstantsUsed,
    pub fitted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub u: f64,
    pub threshold: f64,
    pub envelope: f64,
}

impl TailBound {
    fn new(name: &str, threshold: Threshold, envelope: Envelope, u_min: f64, constants: ConstantsUsed) -> Self {
        let fitted = constants.values().any(|c| c.fitted);
        Self { name: name.into(), threshold, envelope, u_min, constants_used: constants, fitted }
    }

    pub fn threshold_at(&self, u: f64) -> f64 {
        self.threshold.at(u)
    }

    pub fn envelope_at(&self, u: f64) -> f64 {
        self.envelope.at(u)
    }

    /// Threshold and envelope at u; u must lie in the stated domain.
    pub fn at(&self, u: f64) -> Result<TailPoint> {
        if !(u >= self.u_min) || !u.is_finite() {
            return Err(Error::Domain(format!("{} holds for u >= {}, got u = {u}", self.name, self.u_min)));
        }
        Ok(TailPoint { u, threshold: self.threshold_at(u), envelope: self.envelope_at(u) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentBound {
    pub name: String,
    pub p: f64,
    pub value: f64,
    pub decomposition: Vec<(String, f64)>,
    pub constants_used: ConstantsUsed,
    pub fitted: bool,
}

impl MomentBound {
    fn new(name: &str, p: f64, terms: Vec<(&str, f64)>, constants: ConstantsUsed) -> Self {
        let decomposition: Vec<(String, f64)> = terms.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let value = decomposition.iter().map(|(_, v)| v).sum();
        let fitted = constants.values().any(|c| c.fitted);
        Self { name: name.into(), p, value, decomposition, constants_used: constants, fitted }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.decomposition.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

fn used<const N: usize>(items: [(&str, ConstantValue); N]) -> ConstantsUsed {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn nonneg(name: &str, x: f64) -> Result<f64> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{name} must be finite and nonnegative, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{name} must be finite and positive, got {x}")))
    }
}

fn order(p: f64) -> Result<f64> {
    if p >= 1.0 && p.is_finite() {
        Ok(p)
    } else {
        Err(Error::Domain(format!("moment order must be a finite p >= 1, got {p}")))
    }
}
