//! Flat dotted-key JSON configuration with flag overrides.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde_json::Value;

pub struct Config {
    values: BTreeMap<String, Value>,
    read: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn empty() -> Self {
        Self {
            values: BTreeMap::new(),
            read: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let root: Value =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let Value::Object(map) = root else {
            bail!("config {} must be a JSON object", path.display());
        };
        let mut cfg = Self::empty();
        for (key, value) in map {
            let scalar_list = |v: &Value| v.as_array().is_some_and(|a| a.iter().all(|x| !x.is_object() && !x.is_array()));
            if value.is_object() || (value.is_array() && !scalar_list(&value)) {
                bail!("config key {key:?}: nested values are not supported, use flat dotted keys");
            }
            cfg.values.insert(key, value);
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_string(), value);
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.read.borrow_mut().insert(key.to_string());
        self.values.get(key)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => number(key, v),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => whole(key, v).map(|n| n as usize),
        }
    }

    pub fn u64_opt(&self, key: &str) -> Result<Option<u64>> {
        self.get(key).map(|v| whole(key, v)).transpose()
    }

    pub fn i32(&self, key: &str, default: i32) -> Result<i32> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_i64()
                .and_then(|n| i32::try_from(n).ok())
                .with_context(|| format!("config key {key:?} must be an integer")),
        }
    }

    pub fn string(&self, key: &str, default: &str) -> Result<String> {
        match self.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => bail!("config key {key:?} must be a string"),
        }
    }

    pub fn string_opt(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => bail!("config key {key:?} must be a string"),
        }
    }

    /// A nonempty list of numbers; a bare number counts as a one-element list.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let out = match self.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => items.iter().map(|v| number(key, v)).collect::<Result<_>>()?,
            Some(v) => vec![number(key, v)?],
        };
        if out.is_empty() {
            bail!("config key {key:?}: grids must be nonempty");
        }
        Ok(out)
    }

    /// Complex parameters written as numbers or strings such as `"2i"` or `"0.5+1i"`.
    pub fn complex_list(&self, key: &str, default: &[Complex64]) -> Result<Vec<Complex64>> {
        let out = match self.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => items.iter().map(|v| complex(key, v)).collect::<Result<_>>()?,
            Some(v) => vec![complex(key, v)?],
        };
        if out.is_empty() {
            bail!("config key {key:?}: grids must be nonempty");
        }
        Ok(out)
    }

    /// Rejects keys that no part of the subcommand asked for.
    pub fn finish(&self) -> Result<()> {
        let read = self.read.borrow();
        let unknown: Vec<&String> = self.values.keys().filter(|k| !read.contains(*k)).collect();
        if !unknown.is_empty() {
            bail!("unknown config keys for this subcommand: {unknown:?}");
        }
        Ok(())
    }
}

fn number(key: &str, v: &Value) -> Result<f64> {
    let x = v
        .as_f64()
        .with_context(|| format!("config key {key:?} must be numeric, got {v}"))?;
    if !x.is_finite() {
        bail!("config key {key:?} must be finite");
    }
    Ok(x)
}

fn whole(key: &str, v: &Value) -> Result<u64> {
    v.as_u64()
        .with_context(|| format!("config key {key:?} must be a nonnegative integer, got {v}"))
}

fn complex(key: &str, v: &Value) -> Result<Complex64> {
    match v {
        Value::String(s) => parse_complex(s).with_context(|| format!("config key {key:?}")),
        other => Ok(Complex64::new(number(key, other)?, 0.0)),
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        bail!("empty complex number");
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse().with_context(|| format!("bad number {s:?}"))?, 0.0));
    };
    // split "a+bi" at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().with_context(|| format!("bad imaginary part in {s:?}"))?,
    };
    let re: f64 = re.parse().with_context(|| format!("bad real part in {s:?}"))?;
    Ok(Complex64::new(re, im))
}

/// Comma-separated numbers from a flag.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad number {x:?} in list")))
        .collect()
}
