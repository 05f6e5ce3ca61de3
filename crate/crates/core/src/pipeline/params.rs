use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{parse_positive_rational, Rational};
use crate::groups::{GroupDescriptor, GroupElement};
use crate::subshift::{CylinderSet, Sample};
use crate::words::{CylinderPattern, Word};

/// Typed access to a parameter object, with JSON-pointer error paths.
#[derive(Clone, Copy)]
pub struct Params<'a> {
    v: &'a Value,
    base: &'a str,
}

impl<'a> Params<'a> {
    pub fn new(v: &'a Value, base: &'a str) -> Self {
        Params { v, base }
    }

    pub fn pointer(&self, key: &str) -> String {
        format!("{}/{key}", self.base)
    }

    pub fn get(&self, key: &str) -> Option<&'a Value> {
        self.v.get(key).filter(|x| !x.is_null())
    }

    fn required(&self, key: &str) -> Result<&'a Value> {
        self.get(key).ok_or_else(|| Error::config(self.pointer(key), "missing parameter"))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(x) => x
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| Error::config(self.pointer(key), "expected nonnegative integer")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.required(key)?;
        self.usize_or(key, 0)
    }

    pub fn i64_or(&self, key: &str, default: i64) -> Result<i64> {
        match self.get(key) {
            None => Ok(default),
            Some(x) => x.as_i64().ok_or_else(|| Error::config(self.pointer(key), "expected integer")),
        }
    }

    pub fn str_or(&self, key: &str, default: &'a str) -> Result<&'a str> {
        match self.get(key) {
            None => Ok(default),
            Some(x) => x.as_str().ok_or_else(|| Error::config(self.pointer(key), "expected string")),
        }
    }

    /// A positive rational written `"p/q"`.
    pub fn rational(&self, key: &str) -> Result<Rational> {
        let x = self.required(key)?;
        let s = x
            .as_str()
            .ok_or_else(|| Error::config(self.pointer(key), "expected a rational string \"p/q\""))?;
        parse_positive_rational(s).map_err(|e| Error::config(self.pointer(key), e.to_string()))
    }

    pub fn rational_or(&self, key: &str, default: Rational) -> Result<Rational> {
        if self.get(key).is_none() {
            return Ok(default);
        }
        self.rational(key)
    }

    pub fn element(&self, group: &GroupDescriptor, key: &str) -> Result<GroupElement> {
        let x = self.required(key)?;
        group.parse_element(x).map_err(|e| nest(self.pointer(key), e))
    }

    /// A list of elements; the string `"gens"` (or absence) means the
    /// symmetric generating set.
    pub fn elements_or_gens(&self, group: &GroupDescriptor, key: &str) -> Result<Vec<GroupElement>> {
        match self.get(key) {
            None => Ok(group.symmetric_generators()),
            Some(Value::String(s)) if s == "gens" => Ok(group.symmetric_generators()),
            Some(Value::Array(xs)) => xs
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    group
                        .parse_element(x)
                        .map_err(|e| nest(format!("{}/{i}", self.pointer(key)), e))
                })
                .collect(),
            Some(_) => Err(Error::config(self.pointer(key), "expected \"gens\" or an array of elements")),
        }
    }

    pub fn pattern(&self, word: &Word, key: &str) -> Result<CylinderPattern> {
        CylinderPattern::from_json(self.required(key)?, word, &self.pointer(key))
    }

    pub fn cylinder(&self, sample: &Sample, key: &str) -> Result<CylinderSet> {
        CylinderSet::from_json(self.required(key)?, sample, &self.pointer(key))
    }

    pub fn value(&self, key: &str) -> Result<&'a Value> {
        self.required(key)
    }
}

/// Re-roots a config error raised relative to a nested value.
fn nest(base: String, e: Error) -> Error {
    match e {
        Error::Config { pointer, message } => Error::Config { pointer: base + &pointer, message },
        other => Error::config(base, other.to_string()),
    }
}
