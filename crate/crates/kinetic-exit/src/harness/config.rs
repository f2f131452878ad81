//! Flat `key = value` configuration files (UTF-8, `#` comments) and the
//! canonical FNV-1a digest used by run manifests.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Resolved settings: a sorted key→value map (BTreeMap keeps canonical order).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse `key = value` lines; `#` starts a comment, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Usage(format!("config line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Usage(format!("config line {}: empty key", lineno + 1)));
            }
            map.insert(key.to_string(), v.trim().to_string());
        }
        Ok(Self { map })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.map
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Usage(format!("config key `{key}`: `{v}` is not a number")))
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.map
            .get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| Error::Usage(format!("config key `{key}`: `{v}` is not an integer")))
            })
            .transpose()
    }

    /// Canonical text: sorted `key=value` lines, no comments or padding.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.map {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// FNV-1a 64-bit digest of the canonical text, platform-independent.
    pub fn digest(&self) -> u64 {
        fnv1a64(self.canonical().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_strips_comments_and_whitespace() {
        let s = Settings::parse("# run setup\n  sigma = 1.0  # noise\n\nseed=7\n").unwrap();
        assert_eq!(s.get("sigma"), Some("1.0"));
        assert_eq!(s.get_u64("seed").unwrap(), Some(7));
        assert_eq!(s.get("missing"), None);
    }

    #[test]
    fn digest_invariant_under_formatting_and_order() {
        let a = Settings::parse("a=1\nb = 2 # note\n").unwrap();
        let b = Settings::parse("  b=2\na =  1\n").unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = Settings::parse("a=1\nb=3\n").unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn malformed_lines_are_usage_errors() {
        assert!(Settings::parse("just a bare word\n").is_err());
        assert!(Settings::parse("= 3\n").is_err());
    }

    #[test]
    fn fnv_reference_vector() {
        // FNV-1a test vector: empty input hashes to the offset basis
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
