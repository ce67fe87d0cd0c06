//! Flag / config-file / default resolution.
//!
//! Every value is looked up as: command-line flag, then the `key = value`
//! config file, then the built-in default. The resolved values are echoed as
//! a header so any run can be reproduced from its output.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile(BTreeMap<String, String>);

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
            map.insert(normalise(k.trim()), v.trim().to_string());
        }
        Ok(Self(map))
    }
}

// `eps_snd`, `eps-snd` and `EPS-SND` all name the same key.
fn normalise(k: &str) -> String {
    k.to_ascii_lowercase().replace('_', "-")
}

/// Resolves values and records them for the header.
pub struct Resolver {
    file: ConfigFile,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Self { file, resolved: Vec::new() }
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.file.0.get(&normalise(key)) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config value for `{key}` is invalid: {v:?}"))),
        }
    }

    fn record(&mut self, key: &str, v: String) {
        self.resolved.push((key.to_string(), v));
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let v = match flag {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn required<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        let v = match flag {
            Some(v) => v,
            None => self
                .from_file(key)?
                .ok_or_else(|| CliError::Usage(format!("missing required value --{key}")))?,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        self.record(key, v.as_ref().map_or_else(|| "none".into(), |v| v.to_string()));
        Ok(v)
    }

    /// Prints `# key=value` lines.
    pub fn print_header(&self, command: &str) {
        println!("# diqkd {command}");
        for (k, v) in &self.resolved {
            println!("# {k}={v}");
        }
    }
}

/// A count that may be written as `100000` or `1e5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count(pub u64);

impl FromStr for Count {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Count(v));
        }
        let f: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
        if f >= 0.0 && f.fract() == 0.0 && f < 2f64.powi(63) {
            Ok(Count(f as u64))
        } else {
            Err(format!("not a non-negative integer: {s}"))
        }
    }
}

impl Display for Count {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `NUM/DEN`, kept as text so it prints back verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fraction(pub String);

impl FromStr for Fraction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        diqkd_core::model::parse_ratio(s).map_err(|e| e.to_string())?;
        Ok(Fraction(s.trim().to_string()))
    }
}

impl Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_flag_file_default() {
        let file = ConfigFile::parse("# comment\nn = 2000\neps_snd = 1e-8  # trailing\n").unwrap();
        let mut r = Resolver::new(file);
        assert_eq!(r.get("n", Some(Count(5)), Count(1)).unwrap(), Count(5));
        assert_eq!(r.get("n", None, Count(1)).unwrap(), Count(2000));
        assert_eq!(r.get("eps-snd", None, 1e-10).unwrap(), 1e-8);
        assert_eq!(r.get("Q", None, 0.018).unwrap(), 0.018);
        assert!(r.required::<f64>("S", None).is_err());
    }

    #[test]
    fn bad_lines_and_values_are_usage_errors() {
        assert!(ConfigFile::parse("n 5").is_err());
        let mut r = Resolver::new(ConfigFile::parse("n = many").unwrap());
        assert!(matches!(r.get("n", None, Count(1)), Err(CliError::Usage(_))));
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!("1.5e6".parse::<Count>().unwrap(), Count(1_500_000));
        assert_eq!("42".parse::<Count>().unwrap(), Count(42));
        assert!("1.5".parse::<Count>().is_err());
        assert!("-3".parse::<Count>().is_err());
    }
}
