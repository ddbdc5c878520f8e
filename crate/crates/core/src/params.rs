use std::collections::BTreeMap;

use crate::error::{QmtError, Result};

/// Named parameter values `λ`, e.g. `{B: 1.0}`.
///
/// Names are unique and values finite. Iteration order is by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamPoint {
    values: BTreeMap<String, f64>,
}

impl ParamPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut point = Self::new();
        for (name, value) in pairs {
            if point.values.contains_key(name) {
                return Err(QmtError::invalid(format!("duplicate parameter `{name}`")));
            }
            point = point.with(name, value)?;
        }
        Ok(point)
    }

    /// Returns a copy with `name` set to `value`, replacing any previous value.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(QmtError::invalid(format!("parameter `{name}` = {value} is not finite")));
        }
        let mut values = self.values.clone();
        values.insert(name.to_string(), value);
        Ok(Self { values })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<f64> {
        self.get(name).ok_or_else(|| QmtError::UnboundParameter(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (n, (k, v)) in self.values.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_non_finite() {
        assert!(ParamPoint::from_pairs([("B", 1.0), ("B", 2.0)]).is_err());
        assert!(ParamPoint::from_pairs([("B", f64::INFINITY)]).is_err());
        let p = ParamPoint::from_pairs([("g", 0.5), ("B", 2.0)]).unwrap();
        assert_eq!(p.names().collect::<Vec<_>>(), ["B", "g"]);
        assert_eq!(p.require("B"), Ok(2.0));
        assert_eq!(p.require("m"), Err(QmtError::UnboundParameter("m".into())));
    }
}
