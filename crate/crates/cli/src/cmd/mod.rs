//! Subcommand implementations.

use std::path::{Path, PathBuf};

use diqkd_core::bits;
use num_rational::Ratio;

use crate::config::Fraction;
use crate::CliError;

pub mod ec_bench;
pub mod extract;
pub mod hash;
pub mod keylen;
pub mod run;

pub struct Ctx {
    pub seed: u64,
    pub out: PathBuf,
}

impl Ctx {
    /// Path inside the output directory, creating the directory.
    pub fn artifact(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out)?;
        Ok(self.out.join(name))
    }
}

pub fn ratio(f: &Fraction) -> Ratio<u64> {
    diqkd_core::model::parse_ratio(&f.0).expect("validated when parsed")
}

pub fn ratio_f64(f: &Fraction) -> f64 {
    let r = ratio(f);
    *r.numer() as f64 / *r.denom() as f64
}

pub fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Hex string to 0/1 bits.
pub fn hex_bits(what: &str, hex: &str) -> Result<Vec<u8>, CliError> {
    bits::from_hex(hex, None).ok_or_else(|| usage(format!("{what}: invalid hex")))
}

pub fn read_bits(what: &str, path: &Path) -> Result<Vec<u8>, CliError> {
    bits::read_bits_file(path).map_err(|e| usage(format!("{what} {}: {e}", path.display())))
}
