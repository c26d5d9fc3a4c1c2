use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::ast::{Formula, Number};

pub const DEFAULT_NATURAL_BOUND: u64 = 16;
pub const DEFAULT_MAX_ASSIGNMENTS: u64 = 10_000_000;

/// Finite sample domains used to enumerate REAL and NATURAL values.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBounds {
    /// Strictly ascending.
    pub real_grid: Vec<Number>,
    /// Naturals range over `0..=natural_bound`.
    pub natural_bound: u64,
    /// Type name to explicit sample values. Keyed by `REAL` or `NATURAL` it
    /// replaces that domain; keyed by a function type it replaces the REAL
    /// sample points of that function's arguments.
    pub overrides: BTreeMap<String, Vec<Number>>,
    pub max_assignments: u64,
}

impl Default for DomainBounds {
    fn default() -> Self {
        DomainBounds {
            real_grid: vec![Number::zero()],
            natural_bound: DEFAULT_NATURAL_BOUND,
            overrides: BTreeMap::new(),
            max_assignments: DEFAULT_MAX_ASSIGNMENTS,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("bounds file is not valid TOML: {0}")]
    Toml(String),
    #[error("`{0}` must be a list of numbers")]
    NotAList(String),
    #[error("bad number `{0}` in `{1}`")]
    BadNumber(String, String),
    #[error("real_grid must be non-empty and strictly ascending")]
    Grid,
    #[error("`{0}` must be a non-negative integer")]
    BadCount(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

pub(crate) fn parse_rational(s: &str) -> Option<Number> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Number::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let mut num: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let mut den: i64 = 1;
    for c in frac.chars() {
        num = num.checked_mul(10)?.checked_add(c.to_digit(10)? as i64)?;
        den = den.checked_mul(10)?;
    }
    Some(Number::new(if neg { -num } else { num }, den))
}

fn numbers(key: &str, v: &toml::Value) -> Result<Vec<Number>, BoundsError> {
    let arr = v.as_array().ok_or_else(|| BoundsError::NotAList(key.into()))?;
    arr.iter()
        .map(|x| {
            let parsed = match x {
                toml::Value::Integer(i) => Some(Number::from_integer(*i)),
                toml::Value::Float(f) => parse_rational(&f.to_string()),
                toml::Value::String(s) => parse_rational(s),
                _ => None,
            };
            parsed.ok_or_else(|| BoundsError::BadNumber(x.to_string(), key.into()))
        })
        .collect()
}

fn count(key: &str, v: &toml::Value) -> Result<u64, BoundsError> {
    v.as_integer().and_then(|i| u64::try_from(i).ok()).ok_or_else(|| BoundsError::BadCount(key.into()))
}

impl DomainBounds {
    /// Parses a TOML bounds file. Missing keys keep the values of `base`.
    pub fn from_toml(text: &str, base: DomainBounds) -> Result<DomainBounds, BoundsError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| BoundsError::Toml(e.message().to_string()))?;
        let mut b = base;
        for (k, v) in &table {
            match k.as_str() {
                "real_grid" => {
                    b.real_grid = numbers(k, v)?;
                }
                "natural_bound" => b.natural_bound = count(k, v)?,
                "max_assignments" => b.max_assignments = count(k, v)?,
                "overrides" => {
                    let t = v.as_table().ok_or_else(|| BoundsError::NotAList(k.clone()))?;
                    for (name, vals) in t {
                        let mut ns = numbers(name, vals)?;
                        ns.sort();
                        ns.dedup();
                        b.overrides.insert(name.clone(), ns);
                    }
                }
                other => return Err(BoundsError::UnknownKey(other.into())),
            }
        }
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.real_grid.is_empty() || self.real_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BoundsError::Grid);
        }
        Ok(())
    }

    /// Default bounds for deciding `formulas`: every numeric literal `c`
    /// contributes `c-1, c, c+1`, and midpoints between neighbours are added.
    pub fn derived_for(formulas: &[&Formula]) -> DomainBounds {
        DomainBounds { real_grid: default_grid(formulas), ..DomainBounds::default() }
    }
}

pub fn default_grid(formulas: &[&Formula]) -> Vec<Number> {
    let mut pts: Vec<Number> = Vec::new();
    for f in formulas {
        for c in f.numbers() {
            pts.extend([c - Number::one(), c, c + Number::one()]);
        }
    }
    if pts.is_empty() {
        return vec![Number::zero()];
    }
    pts.sort();
    pts.dedup();
    let mids: Vec<Number> = pts.windows(2).map(|w| (w[0] + w[1]) / Number::from_integer(2)).collect();
    pts.extend(mids);
    pts.sort();
    pts.dedup();
    pts
}
