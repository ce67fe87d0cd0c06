//! Fixtures shared by the benchmarks.
//!
//! Each fixture is built deterministically from a seed so runs are
//! comparable across machines and commits.

use diqkd_core::ec::{build_for_rate, syndrome_length, CodeConfig, DecoderPriors, ScLdpcCode};
use diqkd_core::keylen::SecurityParams;
use diqkd_core::model::{completeness_threshold, parse_ratio, sample_round, DeviceModel, InputPolicy};
use diqkd_core::rng::{derive_seed, seeded};
use diqkd_core::trevisan::ExtractorParams;
use rand::Rng;

pub const GAMMA: f64 = 13.0 / 256.0;

/// One reconciliation instance at the simulation operating point.
pub struct DecodeFixture {
    pub code: ScLdpcCode,
    pub a: Vec<u8>,
    pub b: Vec<u8>,
    pub settings: Vec<(u8, u8)>,
    pub priors: DecoderPriors,
    pub syndrome: Vec<u8>,
}

impl DecodeFixture {
    pub fn new(n: usize, seed: u64) -> Self {
        let (s, q) = (2.6507, 0.0239);
        let model = DeviceModel::parametric(s, q).expect("valid model");
        let policy = InputPolicy::new(parse_ratio("13/256").expect("valid ratio")).expect("valid policy");
        let m = syndrome_length(n as u64, GAMMA, s, q) as usize;
        let code = build_for_rate(n, m, &CodeConfig::default(), &mut seeded(derive_seed(seed, "code")))
            .expect("code for the rule's rate");
        let mut rng = seeded(derive_seed(seed, "rounds"));
        let rounds: Vec<_> = (0..n).map(|i| sample_round(i, &model, &policy, &mut rng)).collect();
        let a: Vec<u8> = rounds.iter().map(|r| r.a).collect();
        let syndrome = code.encode(&a).expect("length matches");
        Self {
            b: rounds.iter().map(|r| r.b).collect(),
            settings: rounds.iter().map(|r| (r.x, r.y)).collect(),
            priors: DecoderPriors::from_model(&model).expect("valid model"),
            code,
            a,
            syndrome,
        }
    }
}

/// Source, seed and parameters for one extraction.
pub struct ExtractFixture {
    pub source: Vec<u8>,
    pub seed: Vec<u8>,
    pub params: ExtractorParams,
}

impl ExtractFixture {
    pub fn new(n: usize, ell: usize, eps_pa: f64, seed: u64) -> Self {
        let params = ExtractorParams::plan(n, ell, eps_pa).expect("valid extractor parameters");
        let mut rng = seeded(seed);
        Self {
            source: random_bits(&mut rng, n),
            seed: random_bits(&mut rng, params.s),
            params,
        }
    }
}

fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

pub fn random_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = seeded(seed);
    (0..len).map(|_| rng.random()).collect()
}

/// Key-length inputs at the reported operating point.
pub struct KeylenFixture {
    pub n: u64,
    pub omega_thresh: f64,
    pub m: u64,
    pub sec: SecurityParams,
}

impl KeylenFixture {
    pub fn reference_point() -> Self {
        let n = 1_500_000;
        let (s, q) = (2.64, 0.018);
        let omega_thresh = completeness_threshold((4.0 + s) / 8.0, GAMMA, n as f64, 3.0).expect("feasible");
        let eps = 2e-11;
        let sec = SecurityParams {
            t: 0.8,
            eps_h: diqkd_core::hashing::EPS_H,
            eps_pa: 1e-13,
            eps_ea: eps,
            alpha1: 1.001,
            alpha2: 1.003,
            eps_s: eps,
            eps_s1: eps / 2.0,
            eps_s2: eps / 5.0,
        };
        Self { n, omega_thresh, m: syndrome_length(n, GAMMA, s, q), sec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use diqkd_core::ec::{decode, DEFAULT_MAX_ITERS};
    use diqkd_core::keylen::key_length;

    #[test]
    fn decode_fixture_is_decodable() {
        let f = DecodeFixture::new(10_000, 1);
        let d = decode(&f.code, &f.b, &f.settings, &f.priors, &f.syndrome, DEFAULT_MAX_ITERS).unwrap().unwrap();
        assert_eq!(d.a_hat, f.a);
    }

    #[test]
    fn extract_fixture_has_matching_lengths() {
        let f = ExtractFixture::new(4096, 64, 1e-10, 2);
        assert_eq!((f.source.len(), f.seed.len()), (f.params.n, f.params.s));
    }

    #[test]
    fn keylen_fixture_is_valid() {
        let f = KeylenFixture::reference_point();
        assert!(key_length(f.n, GAMMA, f.omega_thresh, f.m, &f.sec).is_ok());
    }
}
