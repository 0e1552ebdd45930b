//! Flat `key = value` text files used for configs, scenario specs and search spaces.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may repeat only
//! if the caller allows it; this parser rejects duplicates outright.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KeyValues {
    file: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(file: &str, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(file, i + 1, "expected `key = value`"))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::parse(file, i + 1, "empty key"));
            }
            if entries
                .insert(key.to_string(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(Error::parse(file, i + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self {
            file: file.to_string(),
            entries,
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Parses `key` if present.
    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::parse(&self.file, *line, format!("{key}: {e}"))),
        }
    }

    /// Parses `key` into `slot` if present, leaving it untouched otherwise.
    pub fn read<V: FromStr>(&self, key: &str, slot: &mut V) -> Result<()>
    where
        V::Err: std::fmt::Display,
    {
        if let Some(v) = self.get(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Fails on the first key not accepted by `known`.
    pub fn reject_unknown(&self, known: impl Fn(&str) -> bool) -> Result<()> {
        for (k, (line, _)) in &self.entries {
            if !known(k) {
                return Err(Error::parse(&self.file, *line, format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_skips_comments() {
        let kv = KeyValues::parse("c", "# hi\n\n a = 1.5 \nb=x\n").unwrap();
        assert_eq!(kv.get::<f64>("a").unwrap(), Some(1.5));
        assert_eq!(kv.raw("b"), Some("x"));
        assert_eq!(kv.get::<f64>("z").unwrap(), None);
    }

    #[test]
    fn errors_carry_lines() {
        let err = KeyValues::parse("c", "a = 1\nnope\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = KeyValues::parse("c", "a = 1\na = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let kv = KeyValues::parse("c", "a = x\n").unwrap();
        assert!(kv.get::<f64>("a").is_err());
        let kv = KeyValues::parse("c", "a = 1\nb = 2\n").unwrap();
        assert!(matches!(kv.reject_unknown(|k| k == "a"), Err(Error::Parse { line: 2, .. })));
    }
}
