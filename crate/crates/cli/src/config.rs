//! Flat `key = value` configuration with `[problem]`, `[solver]` and
//! `[output]` sections. Command-line flags override file values.

use std::collections::BTreeMap;
use std::fmt;

/// Every accepted key with its default; `auto` defers to the subcommand.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("problem", "n", "2"),
    ("problem", "k", "1"),
    ("problem", "radius", "1"),
    ("problem", "family", "power"),
    ("problem", "gamma", "3"),
    ("problem", "table", ""),
    ("problem", "weight", "auto"),
    ("problem", "lambda", "0"),
    ("problem", "mu", "2"),
    ("problem", "b", "const:1"),
    ("problem", "theta_c", "1"),
    ("problem", "theta_p", "0"),
    ("problem", "karamata_c", "1"),
    ("problem", "karamata_sigma", "1"),
    ("problem", "barrier", "auto"),
    ("solver", "points", "2048"),
    ("solver", "s_max", "32"),
    ("solver", "levels", "24"),
    ("solver", "delta0", "1e-3"),
    ("solver", "tol", "1e-6"),
    ("solver", "report_distance", "1e-3"),
    ("solver", "barrier_grid", "4096"),
    ("solver", "method", "anchored"),
    ("solver", "rate_start", "0.1"),
    ("solver", "rate_tolerance", "0.02"),
    ("solver", "parameter", "lambda"),
    ("solver", "schedule", ""),
    ("solver", "probes", "0"),
    ("solver", "t_min", "1e-6"),
    ("solver", "t_max", "10"),
    ("solver", "samples", "57"),
    ("solver", "verify_points", "64"),
    ("output", "csv", ""),
    ("output", "plot", ""),
];

/// A malformed configuration, located by file line or flag name.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    /// Where the value came from, for diagnostics.
    origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
enum Origin {
    Default,
    Line(usize),
    Flag,
}

/// Raw `section.key → value` assignments after merging defaults, the file
/// and the flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

fn known(section: &str, key: &str) -> bool {
    KEYS.iter().any(|&(s, k, _)| s == section && k == key)
}

impl Default for RawConfig {
    fn default() -> Self {
        let entries = KEYS
            .iter()
            .map(|&(s, k, d)| (format!("{s}.{k}"), Entry { value: d.to_string(), origin: Origin::Default }))
            .collect();
        RawConfig { entries }
    }
}

impl RawConfig {
    /// Applies a configuration file's assignments.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut section: Option<String> = None;
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split(['#', ';']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError { line: Some(line), message };
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header '{body}'")))?
                    .trim();
                if !KEYS.iter().any(|&(s, _, _)| s == name) {
                    return Err(err(format!("unknown section [{name}] (expected problem, solver or output)")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', found '{body}'")))?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            let sec = section.as_deref().ok_or_else(|| err(format!("key '{key}' appears before any section")))?;
            if !known(sec, key) {
                return Err(err(format!("unknown key '{key}' in [{sec}]")));
            }
            let full = format!("{sec}.{key}");
            if let Some(prev) = seen.insert(full.clone(), line) {
                return Err(err(format!("duplicate key '{key}' in [{sec}] (first set on line {prev})")));
            }
            self.entries.insert(full, Entry { value: value.to_string(), origin: Origin::Line(line) });
        }
        Ok(())
    }

    /// Overrides `section.key` with a command-line value.
    pub fn set_flag(&mut self, full: &str, value: String) {
        debug_assert!(self.entries.contains_key(full), "{full}");
        self.entries.insert(full.to_string(), Entry { value, origin: Origin::Flag });
    }

    pub fn get(&self, full: &str) -> &str {
        &self.entries[full].value
    }

    fn error(&self, full: &str, message: String) -> ConfigError {
        let entry = &self.entries[full];
        let (section, key) = full.split_once('.').unwrap_or(("", full));
        match entry.origin {
            Origin::Line(l) => ConfigError { line: Some(l), message: format!("[{section}] {key}: {message}") },
            Origin::Flag => ConfigError { line: None, message: format!("--{}: {message}", flag_name(key)) },
            Origin::Default => ConfigError { line: None, message: format!("default {full}: {message}") },
        }
    }

    pub fn f64(&self, full: &str) -> Result<f64, ConfigError> {
        let v = self.get(full);
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.error(full, format!("expected a finite number, found '{v}'")))
    }

    pub fn usize(&self, full: &str) -> Result<usize, ConfigError> {
        let v = self.get(full);
        v.parse::<usize>().map_err(|_| self.error(full, format!("expected a nonnegative integer, found '{v}'")))
    }

    pub fn list(&self, full: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.get(full);
        if v.trim().is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.error(full, format!("expected a comma-separated list of numbers, found '{v}'")))
            })
            .collect()
    }

    /// Checks a parsed value against its documented range.
    pub fn check(&self, full: &str, ok: bool, range: &str) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            Err(self.error(full, format!("'{}' outside the range {range}", self.get(full))))
        }
    }

    pub fn invalid(&self, full: &str, message: String) -> ConfigError {
        self.error(full, message)
    }

    /// The full resolved configuration on one line, in key order.
    pub fn describe(&self) -> String {
        self.entries.iter().map(|(k, e)| format!("{k}={}", e.value)).collect::<Vec<_>>().join(" ")
    }
}

/// Command-line spelling of a config key.
pub fn flag_name(key: &str) -> String {
    match key {
        "n" => "N".into(),
        "radius" => "R".into(),
        "csv" => "output".into(),
        other => other.replace('_', "-"),
    }
}
