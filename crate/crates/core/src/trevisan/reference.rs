//! Brute-force reference for the one-bit extractor.
//!
//! Field elements are plain `Vec<u8>` coefficient vectors; multiplication is
//! schoolbook followed by long division. Nothing here shares code with the
//! limb arithmetic except the modulus choice. Slow; meant for tests.

use super::{block_weak_design, ExtractorParams, Field, TrevisanError};

/// `GF(2)[x]` polynomial, index = exponent, trailing zeros trimmed.
type Poly = Vec<u8>;

fn trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[u8], b: &[u8]) -> Poly {
    let mut r = vec![0u8; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            r[i + j] ^= x & y;
        }
    }
    trim(r)
}

fn poly_rem(a: &[u8], f: &[u8]) -> Poly {
    let mut r = trim(a.to_vec());
    let df = f.len() - 1;
    while r.len() > df {
        let shift = r.len() - 1 - df;
        for (j, &c) in f.iter().enumerate() {
            r[shift + j] ^= c;
        }
        r = trim(r);
    }
    r
}

fn poly_add(a: &[u8], b: &[u8]) -> Poly {
    let mut r = vec![0u8; a.len().max(b.len())];
    for (i, x) in r.iter_mut().enumerate() {
        *x = a.get(i).copied().unwrap_or(0) ^ b.get(i).copied().unwrap_or(0);
    }
    trim(r)
}

fn poly_gcd(a: &[u8], b: &[u8]) -> Poly {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Modulus of the field of degree `m` as a coefficient vector.
pub fn modulus(m: usize) -> Poly {
    let f = Field::new(m).expect("supported degree");
    let mut p = vec![0u8; m + 1];
    for e in f.modulus_exponents() {
        p[e] = 1;
    }
    p
}

/// Rabin's test: `f` of degree `m` is irreducible iff `x^(2^m) ≡ x (mod f)`
/// and `gcd(x^(2^(m/q)) − x, f) = 1` for every prime `q | m`.
pub fn is_irreducible(f: &[u8]) -> bool {
    let m = f.len() - 1;
    let x: Poly = vec![0, 1];
    // x^(2^k) mod f by repeated squaring, which over GF(2) just spreads bits.
    let frob = |k: usize| {
        let mut r = x.clone();
        for _ in 0..k {
            let mut sq = vec![0u8; 2 * r.len()];
            for (i, &c) in r.iter().enumerate() {
                sq[2 * i] = c;
            }
            r = poly_rem(&sq, f);
        }
        r
    };
    if poly_add(&frob(m), &x).iter().any(|&c| c != 0) {
        return false;
    }
    let primes = (2..=m).filter(|&q| m % q == 0 && (2..q).all(|d| q % d != 0));
    for q in primes {
        let g = poly_gcd(&poly_add(&frob(m / q), &x), f);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// `⟨Σ_b c_b α^b, β⟩` with the powers `α^b` computed independently.
pub fn one_bit(source: &[u8], subseed: &[u8], m: usize) -> u8 {
    let f = modulus(m);
    let alpha = trim(subseed[..m].to_vec());
    let beta = &subseed[m..2 * m];
    let mut y: Poly = Vec::new();
    let mut power: Poly = vec![1];
    for block in source.chunks(m) {
        let term = poly_rem(&poly_mul(&trim(block.to_vec()), &power), &f);
        y = poly_add(&y, &term);
        power = poly_rem(&poly_mul(&power, &alpha), &f);
    }
    y.iter().zip(beta).fold(0, |acc, (&a, &b)| acc ^ (a & b))
}

/// Sequential brute-force extraction.
pub fn extract(source: &[u8], seed: &[u8], params: &ExtractorParams) -> Result<Vec<u8>, TrevisanError> {
    super::check_len("source", source, params.n)?;
    super::check_len("seed", seed, params.s)?;
    let design = block_weak_design(params)?;
    Ok((0..params.ell)
        .map(|i| {
            let sub: Vec<u8> = design.set(i).iter().map(|&p| seed[p]).collect();
            one_bit(source, &sub, params.field_bits())
        })
        .collect())
}
