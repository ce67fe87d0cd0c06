//! Trevisan extractor: a block weak design over a one-bit
//! Reed-Solomon/Hadamard extractor.
//!
//! One-bit extractor, for a subseed of `t` bits and `m = t/2`:
//! `α` is the first `m` subseed bits and `β` the next `m`, both read as
//! elements of `GF(2^m)` (bit `j` is the coefficient of `x^j`). The source is
//! cut into `L = ⌈n/m⌉` blocks `c_0..c_{L-1}` (source bit `b·m + j` is bit
//! `j` of `c_b`, zero padded), the Reed-Solomon step evaluates
//! `y = Σ_b c_b α^b`, and the output is the Hadamard parity `⟨y, β⟩`.
//! Subseed bit `a` of output `i` is seed bit `S̄_i[a]`, see [`design`].

mod design;
mod gf2m;
mod irreducible;
mod primes;
pub mod reference;

pub use design::WeakDesign;
pub use gf2m::{Elem, Field};
pub use primes::{is_prime, next_prime};

use rayon::prelude::*;
use thiserror::Error;

/// `b` in `Υ_b`, the value used throughout the key-length analysis.
pub const UPSILON_B: f64 = 4.0 / std::f64::consts::LN_2;

/// Largest supported `t` (fields up to `GF(2^256)`).
pub const MAX_T: usize = 512;

#[derive(Debug, Error, PartialEq)]
pub enum TrevisanError {
    #[error("Υ is only defined here for x ≥ 1, got {0}")]
    Domain(f64),
    #[error("invalid extractor parameters: {0}")]
    Params(String),
    #[error("{what} has {got} bits, expected {expected}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("weak design needs {blocks} blocks but the seed allows {allowed}")]
    DesignTooLarge { blocks: usize, allowed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractorParams {
    /// Source length in bits.
    pub n: usize,
    /// Output length in bits.
    pub ell: usize,
    /// Per-bit error `ε_PA / ℓ`.
    pub eps1: f64,
    pub t: usize,
    pub t_plus: u64,
    /// Seed length in bits.
    pub s: usize,
}

/// Number of `t_+²` blocks in the seed.
pub fn seed_blocks(ell: usize, t_plus: u64) -> usize {
    let e = std::f64::consts::E;
    let r = ((ell as f64 - e).ln() - (t_plus as f64 - e).ln()) / (1.0 - (e - 1.0).ln());
    if r.is_nan() {
        return 2;
    }
    // r.ceil() + 1 may be negative; max handles it before the cast.
    (r.ceil() + 1.0).max(2.0) as usize
}

pub fn seed_length(ell: usize, t_plus: u64) -> usize {
    seed_blocks(ell, t_plus) * (t_plus as usize).pow(2)
}

impl ExtractorParams {
    pub fn plan(n: usize, ell: usize, eps_pa: f64) -> Result<Self, TrevisanError> {
        if ell == 0 || n == 0 {
            return Err(TrevisanError::Params(format!("need n, ℓ ≥ 1 (n={n}, ℓ={ell})")));
        }
        if !(eps_pa > 0.0 && eps_pa < 1.0) {
            return Err(TrevisanError::Params(format!("ε_PA = {eps_pa} outside (0,1)")));
        }
        let eps1 = eps_pa / ell as f64;
        let t = 2 * ((n as f64).log2() + 2.0 * (2.0 / eps1).log2()).ceil() as usize;
        let mut p = Self::from_parts(n, ell, t)?;
        p.eps1 = eps1;
        Ok(p)
    }

    /// Parameters for an explicit (even) `t`; `eps1` is the per-bit error
    /// that `t` certifies for this `n`.
    pub fn from_parts(n: usize, ell: usize, t: usize) -> Result<Self, TrevisanError> {
        if n == 0 || ell == 0 {
            return Err(TrevisanError::Params(format!("need n, ℓ ≥ 1 (n={n}, ℓ={ell})")));
        }
        if t % 2 != 0 || !(4..=MAX_T).contains(&t) {
            return Err(TrevisanError::Params(format!("t = {t} must be even and in [4, {MAX_T}]")));
        }
        let t_plus = next_prime(t as u64);
        let eps1 = 2.0 * 2f64.powf(-((t / 2) as f64 - (n as f64).log2()) / 2.0);
        Ok(Self { n, ell, eps1, t, t_plus, s: seed_length(ell, t_plus) })
    }

    /// Degree of the Reed-Solomon field.
    pub fn field_bits(&self) -> usize {
        self.t / 2
    }
}

/// Unique `y > 0` with `y + b ln y = x`.
pub fn upsilon(x: f64, b: f64) -> Result<f64, TrevisanError> {
    if !(x >= 1.0) || !(b > 0.0) || !x.is_finite() {
        return Err(TrevisanError::Domain(x));
    }
    let g = |y: f64| y + b * y.ln() - x;
    let mut lo = (x - b * x.max(2.0).ln()).max(1e-9);
    let mut hi = x;
    if g(hi) <= 0.0 {
        return Ok(hi);
    }
    let mut y = hi;
    for _ in 0..200 {
        let gy = g(y);
        if gy == 0.0 {
            return Ok(y);
        }
        if gy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let newton = y - gy / (1.0 + b / y);
        y = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (hi - lo) <= 1e-15 * hi || (gy / (1.0 + b / y)).abs() <= 1e-13 * y {
            break;
        }
    }
    Ok(y)
}

/// `⌊Υ_b(hmin − 6 − 5 log₂(1/ε_PA))⌋`, or 0 when the argument is below 1.
pub fn max_extractable(hmin: f64, eps_pa: f64) -> u64 {
    let x = hmin - 6.0 - 5.0 * (1.0 / eps_pa).log2();
    match upsilon(x, UPSILON_B) {
        Ok(y) => y.floor() as u64,
        Err(_) => 0,
    }
}

pub fn block_weak_design(params: &ExtractorParams) -> Result<WeakDesign, TrevisanError> {
    WeakDesign::new(params)
}

fn check_len(what: &'static str, bits: &[u8], expected: usize) -> Result<(), TrevisanError> {
    if bits.len() != expected {
        return Err(TrevisanError::Length { what, expected, got: bits.len() });
    }
    Ok(())
}

/// Source blocks `c_0..c_{L-1}` as field elements.
fn source_blocks(field: &Field, source: &[u8]) -> Vec<Elem> {
    source.chunks(field.degree()).map(|c| field.from_bits(c)).collect()
}

fn one_bit(field: &Field, blocks: &[Elem], subseed: &[u8]) -> u8 {
    let m = field.degree();
    let alpha = field.from_bits(&subseed[..m]);
    let beta = field.from_bits(&subseed[m..2 * m]);
    let mul = field.multiplier(&alpha);
    let mut y = gf2m::ZERO;
    for c in blocks.iter().rev() {
        y = gf2m::add(&mul.apply(&y), c);
    }
    gf2m::inner_product(&y, &beta)
}

/// Extracts `params.ell` bits from `source` (n bits) with `seed` (s bits).
pub fn extract(source: &[u8], seed: &[u8], params: &ExtractorParams) -> Result<Vec<u8>, TrevisanError> {
    check_len("source", source, params.n)?;
    check_len("seed", seed, params.s)?;
    let design = block_weak_design(params)?;
    let field = Field::new(params.field_bits()).expect("t within range");
    let blocks = source_blocks(&field, source);
    let key = (0..params.ell)
        .into_par_iter()
        .map_init(
            || (vec![0usize; params.t], vec![0u8; params.t]),
            |(pos, sub), i| {
                design.set_into(i, pos);
                for (b, &p) in sub.iter_mut().zip(pos.iter()) {
                    *b = seed[p];
                }
                one_bit(&field, &blocks, sub)
            },
        )
        .collect();
    Ok(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn random_bits(n: usize, rng: &mut impl Rng) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2)).collect()
    }

    #[test]
    fn upsilon_fixed_points() {
        assert_eq!(upsilon(1.0, UPSILON_B).unwrap(), 1.0);
        assert!((upsilon(6.0, UPSILON_B).unwrap() - 2.0).abs() < 1e-10);
        for x in [10.0, 100.0, 1e5] {
            let y = upsilon(x, UPSILON_B).unwrap();
            assert!(x - UPSILON_B * x.ln() <= y && y <= x, "x={x} y={y}");
            assert!((y + UPSILON_B * y.ln() - x).abs() <= 1e-12 * x);
        }
        assert!(upsilon(0.5, UPSILON_B).is_err());
        assert!(upsilon(f64::NAN, UPSILON_B).is_err());
    }

    #[test]
    fn max_extractable_threshold() {
        let eps = 1e-10;
        let base = 6.0 + 5.0 * (1.0 / eps as f64).log2();
        assert_eq!(max_extractable(base, eps), 0);
        assert!(max_extractable(base + 1.0, eps) <= 1);
        let x = 1e5 - base;
        let l = max_extractable(1e5, eps) as f64;
        assert!((x - 4.0 * x.log2()).floor() <= l && l <= x);
    }

    #[test]
    fn plan_examples() {
        let p = ExtractorParams::plan(1000, 1, 0.5).unwrap();
        assert_eq!(seed_blocks(1, p.t_plus), 2);
        assert_eq!(p.s, 2 * (p.t_plus as usize).pow(2));
        assert_eq!(next_prime(100), 101);
        let p = ExtractorParams::plan(1_000_000, 95_884, 1e-10).unwrap();
        assert!(is_prime(p.t_plus) && p.t_plus >= p.t as u64);
        assert!((p.eps1 - 1e-10 / 95_884.0).abs() < 1e-25);
        assert!(ExtractorParams::plan(10, 0, 0.1).is_err());
        assert!(ExtractorParams::plan(10, 3, 1.5).is_err());
    }

    #[test]
    fn design_fits_planned_seed() {
        for (n, ell) in [(100_000, 1), (100_000, 5_000), (1_500_000, 95_884), (3_000_000, 200_000)] {
            let p = ExtractorParams::plan(n, ell, 1e-10).unwrap();
            let d = block_weak_design(&p).unwrap();
            assert!(d.seed_span() <= p.s);
        }
    }

    #[test]
    fn zero_source_gives_zero_key() {
        let p = ExtractorParams::from_parts(64, 16, 8).unwrap();
        let seed = random_bits(p.s, &mut seeded(1));
        assert!(extract(&vec![0; 64], &seed, &p).unwrap().iter().all(|&b| b == 0));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let p = ExtractorParams::from_parts(64, 4, 8).unwrap();
        assert!(matches!(extract(&[0; 63], &vec![0; p.s], &p), Err(TrevisanError::Length { .. })));
        assert!(matches!(extract(&[0; 64], &vec![0; p.s - 1], &p), Err(TrevisanError::Length { .. })));
    }

    #[test]
    fn matches_reference_and_is_thread_independent() {
        let mut rng = seeded(2);
        let p = ExtractorParams::plan(3_000, 50, 1e-6).unwrap();
        let src = random_bits(p.n, &mut rng);
        let seed = random_bits(p.s, &mut rng);
        let fast = extract(&src, &seed, &p).unwrap();
        assert_eq!(fast, reference::extract(&src, &seed, &p).unwrap());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        assert_eq!(pool.install(|| extract(&src, &seed, &p).unwrap()), fast);
    }
}
