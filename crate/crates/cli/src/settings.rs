//! Option resolution: command-line flag, then config file, then default.
//!
//! Config file grammar, one entry per line:
//!
//! ```text
//! # comment
//! key = value   # trailing comment
//! ```
//!
//! Keys are the long flag names without the leading dashes (`error-p`, `tau-m`).

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::args::{Options, KNOWN_KEYS};
use crate::error::{validation, CliError, CliResult};

pub fn parse_config(text: &str) -> CliResult<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| validation(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(validation(format!(
                "config line {}: unknown key '{key}'",
                i + 1
            )));
        }
        if map
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(validation(format!(
                "config line {}: duplicate key '{key}'",
                i + 1
            )));
        }
    }
    Ok(map)
}

pub struct Resolver {
    flags: HashMap<&'static str, String>,
    file: HashMap<String, String>,
    echo: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(options: &Options) -> CliResult<Self> {
        let file = match &options.config {
            Some(path) => parse_config(&read(path)?)?,
            None => HashMap::new(),
        };
        Ok(Self::from_parts(
            options.flags().into_iter().collect(),
            file,
        ))
    }

    pub fn from_parts(flags: HashMap<&'static str, String>, file: HashMap<String, String>) -> Self {
        Self {
            flags,
            file,
            echo: Vec::new(),
        }
    }

    fn raw(&mut self, key: &str, default: Option<&str>) -> Option<String> {
        let v = self
            .flags
            .get(key)
            .cloned()
            .or_else(|| self.file.get(key).cloned())
            .or_else(|| default.map(str::to_string))?;
        self.record(key, &v);
        Some(v)
    }

    /// Adds or replaces an entry of the echoed specification.
    pub fn record(&mut self, key: &str, value: &str) {
        match self.echo.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value.to_string(),
            None => self.echo.push((key.to_string(), value.to_string())),
        }
    }

    pub fn text(&mut self, key: &str, default: &str) -> String {
        self.raw(key, Some(default)).unwrap_or_default()
    }

    pub fn optional_text(&mut self, key: &str) -> Option<String> {
        self.raw(key, None)
    }

    pub fn get<T: FromStr>(&mut self, key: &str, default: &str) -> CliResult<T> {
        let v = self.text(key, default);
        parse_value(key, &v)
    }

    pub fn optional<T: FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        self.raw(key, None)
            .map(|v| parse_value(key, &v))
            .transpose()
    }

    pub fn flag(&mut self, key: &str) -> CliResult<bool> {
        let v = self.get::<bool>(key, "false")?;
        Ok(v)
    }

    pub fn echo(&self) -> Vec<(String, String)> {
        self.echo.clone()
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim()
        .parse()
        .map_err(|_| validation(format!("--{key}: cannot parse '{v}'")))
}

/// `8`, `1..16` (inclusive), `1-16` or `4,8,12`; returned sorted and unique.
pub fn parse_digits(spec: &str) -> CliResult<Vec<u32>> {
    let spec = spec.trim();
    let range = spec.split_once("..").or_else(|| spec.split_once('-'));
    let mut out: Vec<u32> = if let Some((a, b)) = range {
        let a: u32 = parse_value("digits", a)?;
        let b: u32 = parse_value("digits", b)?;
        (a..=b).collect()
    } else {
        spec.split(',')
            .map(|x| parse_value("digits", x))
            .collect::<CliResult<_>>()?
    };
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(validation(format!("--digits: empty range '{spec}'")));
    }
    if out[0] == 0 {
        return Err(validation("--digits: digit counts start at 1"));
    }
    Ok(out)
}

pub fn parse_floats(key: &str, spec: &str) -> CliResult<Vec<f64>> {
    let out: Vec<f64> = spec
        .split(',')
        .map(|x| parse_value::<f64>(key, x))
        .collect::<CliResult<_>>()?;
    if out.iter().any(|x| !x.is_finite()) {
        return Err(validation(format!("--{key}: values must be finite")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_grammar() {
        let m = parse_config("# header\nruns = 100 # inline\n\n  tau-m=2e-6\n").unwrap();
        assert_eq!(m["runs"], "100");
        assert_eq!(m["tau-m"], "2e-6");
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("runs 100").is_err());
        assert!(parse_config("runs = 1\nruns = 2").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let flags = HashMap::from([("runs", "5".to_string())]);
        let file = HashMap::from([
            ("runs".to_string(), "7".to_string()),
            ("seed".to_string(), "3".to_string()),
        ]);
        let mut r = Resolver::from_parts(flags, file);
        assert_eq!(r.get::<usize>("runs", "1").unwrap(), 5);
        assert_eq!(r.get::<u64>("seed", "1").unwrap(), 3);
        assert_eq!(r.get::<u64>("batches", "10").unwrap(), 10);
        assert!(r.get::<u64>("seed", "x").is_ok());
        let keys: Vec<String> = r.echo().into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys, ["runs", "seed", "batches"]);
    }

    #[test]
    fn digit_specs() {
        assert_eq!(parse_digits("8").unwrap(), vec![8]);
        assert_eq!(parse_digits("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_digits("3-5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_digits("12,4,8,4").unwrap(), vec![4, 8, 12]);
        assert!(parse_digits("5..3").is_err());
        assert!(parse_digits("0..3").is_err());
        assert!(parse_digits("a").is_err());
    }

    #[test]
    fn float_lists() {
        assert_eq!(parse_floats("error-p", "0, 1e-4").unwrap(), vec![0.0, 1e-4]);
        assert!(parse_floats("error-p", "0,nan").is_err());
    }
}
