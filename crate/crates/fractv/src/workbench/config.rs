//! Line-oriented run configuration.
//!
//! The grammar is deliberately small enough to parse from any language:
//! UTF-8 text, `[section]` headers, `key = value` lines, and `#` comments
//! running to the end of the line. Values never contain `#`. Keys live in
//! exactly one section and are addressed as `section.key`; later assignments
//! win, and command-line `--set section.key=value` flags override file
//! values.
//!
//! Typed accessors live here too, including the two grid-axis notations used
//! by training grounds: a bare number denotes a frozen axis, and
//! `lo : hi : count` an evenly sampled closed interval. Exponent lists are
//! comma-separated and accept `inf` for the supremum norm.

use std::collections::BTreeMap;
use std::path::Path;

use crate::bilevel::Axis;
use crate::error::{invalid, FractvError, Result};
use crate::lp::LpExponent;

fn parse_err(offset: usize, message: impl Into<String>) -> FractvError {
    FractvError::Parse { offset, message: message.into() }
}

/// Flat `section.key -> value` map with typed accessors.
#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn new() -> Self {
        ConfigMap::default()
    }

    /// Parse config text, merging into the map. Parse errors report the byte
    /// offset of the offending line.
    pub fn parse_str(&mut self, text: &str) -> Result<()> {
        let mut section: Option<String> = None;
        let mut offset = 0usize;
        for raw_line in text.split_inclusive('\n') {
            let line_start = offset;
            offset += raw_line.len();
            // strip the comment, then surrounding whitespace
            let no_comment = match raw_line.find('#') {
                Some(i) => &raw_line[..i],
                None => raw_line,
            };
            let line = no_comment.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(parse_err(line_start, format!("unterminated section header {line:?}")));
                };
                let name = name.trim();
                if name.is_empty() {
                    return Err(parse_err(line_start, "empty section name"));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(parse_err(
                    line_start,
                    format!("expected `key = value` or `[section]`, got {line:?}"),
                ));
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if key.is_empty() {
                return Err(parse_err(line_start, "empty key"));
            }
            let Some(sec) = &section else {
                return Err(parse_err(
                    line_start,
                    format!("key {key:?} appears before any [section] header"),
                ));
            };
            self.entries.insert(format!("{sec}.{key}"), value.to_string());
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut map = ConfigMap::new();
        map.parse_str(&text)?;
        Ok(map)
    }

    /// Apply one `section.key=value` override.
    pub fn set_kv(&mut self, spec: &str) -> Result<()> {
        let Some(eq) = spec.find('=') else {
            return Err(invalid(format!("--set takes section.key=value, got {spec:?}")));
        };
        let key = spec[..eq].trim();
        let value = spec[eq + 1..].trim();
        if key.split('.').count() != 2 || key.split('.').any(|part| part.is_empty()) {
            return Err(invalid(format!("--set key must look like section.key, got {key:?}")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| invalid(format!("missing required config key {key:?}")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| invalid(format!("config key {key:?} must be a number, got {s:?}"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| invalid(format!("config key {key:?} must be an integer, got {s:?}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    /// Parse a grid axis: either a single number (frozen axis) or
    /// `lo : hi : count`.
    pub fn axis(&self, key: &str) -> Result<Option<Axis>> {
        let Some(s) = self.get(key) else { return Ok(None) };
        Ok(Some(parse_axis(s).map_err(|e| invalid(format!("config key {key:?}: {e}")))?))
    }

    pub fn require_axis(&self, key: &str) -> Result<Axis> {
        self.axis(key)?.ok_or_else(|| invalid(format!("missing required config key {key:?}")))
    }

    /// Parse a comma-separated exponent list; `inf` denotes the supremum
    /// norm.
    pub fn p_list(&self, key: &str) -> Result<Option<Vec<LpExponent>>> {
        let Some(s) = self.get(key) else { return Ok(None) };
        let list = s
            .split(',')
            .map(|tok| parse_exponent(tok.trim()))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| invalid(format!("config key {key:?}: {e}")))?;
        if list.is_empty() {
            return Err(invalid(format!("config key {key:?} must list at least one exponent")));
        }
        Ok(Some(list))
    }

    /// Parse a comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(s) = self.get(key) else { return Ok(None) };
        s.split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    invalid(format!("config key {key:?} must list numbers, got {tok:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn parse_axis(s: &str) -> Result<Axis> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [v] => {
            let v: f64 = v.parse().map_err(|_| invalid(format!("bad axis value {v:?}")))?;
            Axis::point(v)
        }
        [lo, hi, count] => {
            let lo: f64 = lo.parse().map_err(|_| invalid(format!("bad axis endpoint {lo:?}")))?;
            let hi: f64 = hi.parse().map_err(|_| invalid(format!("bad axis endpoint {hi:?}")))?;
            let count: usize =
                count.parse().map_err(|_| invalid(format!("bad axis count {count:?}")))?;
            Axis::new(lo, hi, count)
        }
        _ => Err(invalid(format!("axis must be `v` or `lo : hi : count`, got {s:?}"))),
    }
}

/// Parse one exponent token: a number in `[1, inf)` or the literal `inf`.
pub fn parse_exponent(tok: &str) -> Result<LpExponent> {
    if tok.eq_ignore_ascii_case("inf") {
        return Ok(LpExponent::infinity());
    }
    let v: f64 = tok.parse().map_err(|_| invalid(format!("bad exponent {tok:?}")))?;
    LpExponent::new(v)
}
