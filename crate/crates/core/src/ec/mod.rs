//! Slepian-Wolf error correction with spatially-coupled LDPC codes.
//!
//! Alice sends the syndrome of her shuffled string; Bob runs belief
//! propagation with per-bit priors derived from the round type (test or key)
//! and his own outcome.

pub mod bounds;
mod code;
mod decoder;
mod format;

pub use bounds::{finite_bsc_bounds, overhead_bounds, syndrome_length, FiniteBsc, OverheadBounds};
pub use code::{build_code, build_for_rate, choose_family, CodeConfig, Lineage, Protograph, ScLdpcCode, MIN_LIFT};
pub use decoder::{decode, BpDecoder, DecodeFailure, Decoded, DEFAULT_MAX_ITERS};

use thiserror::Error;

use crate::model::{DeviceModel, ModelError};

/// LLR magnitude cap.
pub const LLR_CLIP: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum EcError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("code construction failed: {0}")]
    Construction(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("malformed code file: {0}")]
    Format(String),
    #[error("invalid priors: {0}")]
    Priors(String),
}

/// Joint distributions `p[a][b]` used to seed the decoder.
///
/// For test rounds Bob's outcome is taken flipped when `x = y = 1`, so that
/// `a = b` is the likely event in every round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderPriors {
    pub test_joint: [[f64; 2]; 2],
    pub key_joint: [[f64; 2]; 2],
}

impl DecoderPriors {
    /// The priors measured for the experimental run.
    pub const MEASURED: DecoderPriors = DecoderPriors {
        test_joint: [[0.4210, 0.0807], [0.0847, 0.4136]],
        key_joint: [[0.5017, 0.0034], [0.0110, 0.4839]],
    };

    pub fn new(test_joint: [[f64; 2]; 2], key_joint: [[f64; 2]; 2]) -> Result<Self, EcError> {
        for (name, j) in [("test", &test_joint), ("key", &key_joint)] {
            let sum: f64 = j.iter().flatten().sum();
            if j.iter().flatten().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(EcError::Priors(format!("{name} joint sums to {sum} or has negative entries")));
            }
        }
        Ok(Self { test_joint, key_joint })
    }

    /// Averages the four test settings (with the flip) and takes the key setting as is.
    pub fn from_model(model: &DeviceModel) -> Result<Self, ModelError> {
        let mut test = [[0.0; 2]; 2];
        for &(x, y) in &crate::model::SETTING_PAIRS[..4] {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let bf = b ^ (x & y);
                    test[a as usize][bf as usize] += model.joint_prob(a, b, x, y)? / 4.0;
                }
            }
        }
        let mut key = [[0.0; 2]; 2];
        for a in 0..2u8 {
            for b in 0..2u8 {
                key[a as usize][b as usize] = model.joint_prob(a, b, 0, 2)?;
            }
        }
        Ok(Self { test_joint: test, key_joint: key })
    }

    /// Log-likelihood ratio `ln P(A=0, B=b) / P(A=1, B=b)` for one round.
    pub fn llr(&self, b: u8, x: u8, y: u8) -> f64 {
        let (joint, b) = if y == 2 { (&self.key_joint, b) } else { (&self.test_joint, b ^ (x & y)) };
        let floor = 1e-300;
        let l = (joint[0][b as usize].max(floor) / joint[1][b as usize].max(floor)).ln();
        l.clamp(-LLR_CLIP, LLR_CLIP)
    }

    /// LLRs for a whole string; `settings[i] = (x_i, y_i)`.
    pub fn llrs(&self, b: &[u8], settings: &[(u8, u8)]) -> Result<Vec<f64>, EcError> {
        if b.len() != settings.len() {
            return Err(EcError::Length { expected: b.len(), got: settings.len() });
        }
        Ok(b.iter().zip(settings).map(|(&bi, &(x, y))| self.llr(bi, x, y)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::conditional_entropy;

    #[test]
    fn parametric_priors_are_symmetric_channels() {
        let m = DeviceModel::parametric(2.6507, 0.0239).unwrap();
        let p = DecoderPriors::from_model(&m).unwrap();
        let d = (4.0 - 2.6507) / 8.0;
        assert!((p.test_joint[0][1] - d / 2.0).abs() < 1e-12);
        assert!((p.key_joint[1][0] - 0.0239 / 2.0).abs() < 1e-12);
        DecoderPriors::new(p.test_joint, p.key_joint).unwrap();
    }

    #[test]
    fn measured_priors_entropies() {
        let p = DecoderPriors::MEASURED;
        assert!(conditional_entropy(&p.test_joint) > conditional_entropy(&p.key_joint));
    }

    #[test]
    fn flip_applies_only_to_both_ones() {
        let p = DecoderPriors::from_model(&DeviceModel::parametric(2.8, 0.01).unwrap()).unwrap();
        assert!(p.llr(0, 0, 0) > 0.0);
        assert!(p.llr(0, 1, 1) < 0.0);
        assert!(p.llr(1, 0, 2) < 0.0);
        assert_eq!(p.llr(0, 1, 1), p.llr(1, 0, 1));
    }

    #[test]
    fn deterministic_channel_is_clipped() {
        let p = DecoderPriors::new([[0.5, 0.0], [0.0, 0.5]], [[0.5, 0.0], [0.0, 0.5]]).unwrap();
        assert_eq!(p.llr(0, 0, 2), LLR_CLIP);
        assert_eq!(p.llr(1, 0, 0), -LLR_CLIP);
    }

    #[test]
    fn rejects_unnormalised() {
        assert!(DecoderPriors::new([[0.5, 0.1], [0.0, 0.5]], [[0.5, 0.0], [0.0, 0.5]]).is_err());
    }
}
