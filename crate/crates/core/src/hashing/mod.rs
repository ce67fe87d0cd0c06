//! 64-bit almost-Δ-universal hashing and Wegman-Carter tags.
//!
//! # Construction
//!
//! The seed is 1280 bits: an NH key `k_1..k_16` (16 × 64 bits), a
//! polynomial key `k_p` (127 bits, stored in 128) and an output key `k_o`
//! (128 bits).
//!
//! 1. The message is cut into 128-byte chunks (the last one zero padded),
//!    each read as 16 little-endian words, and compressed with
//!    `NH(m) = Σ_{i<8} (m_{2i} + k_{2i}) · (m_{2i+1} + k_{2i+1}) mod 2^128`
//!    (additions mod `2^64`).
//! 2. The two 64-bit halves of every NH output, followed by the message
//!    length in bits, are the coefficients `c_1..c_N` of the monic polynomial
//!    `k^N + c_1 k^{N-1} + … + c_N`, evaluated by Horner's rule at `k_p`
//!    modulo `p = 2^127 - 1`, giving `z`. The leading 1 keeps `z` (and so the
//!    tag) seed-dependent even for the empty message.
//! 3. The tag is the low 64 bits of `z · k_o` in `GF(2^128)`.
//!
//! # Bound
//!
//! Take messages `M ≠ M'` and any `Δ`.
//! * If `z ≠ z'`, then `(z ⊕ z') · k_o` is uniform over `GF(2^128)`, so any
//!   fixed 64-bit truncation equals `Δ` with probability `2^-64`.
//! * `z = z'` requires the coefficient sequences to collide under the
//!   polynomial hash. Different bit lengths give different final
//!   coefficients. With equal lengths, some chunk differs, and NH is
//!   `2^-64`-almost-universal on equal-length inputs. Otherwise the
//!   difference is a nonzero polynomial of degree at most `N ≤ 2^54`, which
//!   vanishes at `k_p mod p` with probability at most `2N / 2^127 ≤ 2^-72`.
//!
//! Hence `ε ≤ 2^-64 + 2^-72 + 2^-64 < 2^-62`, within the `ε_h = 2^-61`
//! budget assumed by the key-length formula. Messages are capped at `2^62`
//! bits.

mod field;
mod k0;

pub use k0::{K0Error, PadId, SharedKeyK0};

use rand::Rng;
use thiserror::Error;

use field::{add_mod127, gf128_mul, mul_mod127, reduce127};

/// Seed length in bits.
pub const SEED_BITS: usize = 1280;
/// Largest accepted message, in bits.
pub const MAX_MESSAGE_BITS: u128 = 1 << 62;
/// Proven almost-Δ-universality bound of the family.
pub const FAMILY_EPSILON: f64 = 1.0 / (1u64 << 62) as f64;
/// Per-tag failure probability charged by the security analysis.
pub const EPS_H: f64 = 1.0 / (1u64 << 61) as f64;

const CHUNK_BYTES: usize = 128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HashError {
    #[error("message of {0} bytes exceeds the 2^62-bit cap")]
    MessageTooLong(usize),
    #[error("hash seed must be {SEED_BITS} bits, got {0}")]
    SeedLength(usize),
}

/// A 64-bit tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tag64(pub u64);

impl Tag64 {
    pub fn to_bytes(self) -> [u8; 8] {
        self.0.to_be_bytes()
    }

    pub fn from_bytes(b: [u8; 8]) -> Self {
        Self(u64::from_be_bytes(b))
    }

    /// Equality without data-dependent branches.
    pub fn ct_eq(self, other: Tag64) -> bool {
        let d = std::hint::black_box(self.0 ^ other.0);
        let folded = (d | d.wrapping_neg()) >> 63;
        folded == 0
    }
}

/// Reusable hashing key.
#[derive(Clone, PartialEq, Eq)]
pub struct HashSeed {
    nh: [u64; 16],
    kp: u128,
    ko: u128,
}

impl std::fmt::Debug for HashSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("HashSeed(..)")
    }
}

impl HashSeed {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; SEED_BITS / 8];
        rng.fill(&mut bytes[..]);
        Self::from_bytes(&bytes)
    }

    /// Builds the seed from 160 bytes: 16 NH words, `k_p`, `k_o` (little endian).
    pub fn from_bytes(bytes: &[u8; SEED_BITS / 8]) -> Self {
        let mut nh = [0u64; 16];
        for (i, w) in nh.iter_mut().enumerate() {
            *w = u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
        }
        let kp = u128::from_le_bytes(bytes[128..144].try_into().unwrap()) & ((1u128 << 127) - 1);
        let ko = u128::from_le_bytes(bytes[144..160].try_into().unwrap());
        Self { nh, kp, ko }
    }

    pub fn to_bytes(&self) -> [u8; SEED_BITS / 8] {
        let mut out = [0u8; SEED_BITS / 8];
        for (i, w) in self.nh.iter().enumerate() {
            out[8 * i..8 * i + 8].copy_from_slice(&w.to_le_bytes());
        }
        out[128..144].copy_from_slice(&self.kp.to_le_bytes());
        out[144..160].copy_from_slice(&self.ko.to_le_bytes());
        out
    }

    /// From a 0/1 bit string of exactly [`SEED_BITS`] bits.
    pub fn from_bits(bits: &[u8]) -> Result<Self, HashError> {
        if bits.len() != SEED_BITS {
            return Err(HashError::SeedLength(bits.len()));
        }
        let packed = crate::bits::pack(bits);
        Ok(Self::from_bytes(packed.as_slice().try_into().expect("1280 bits pack to 160 bytes")))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        crate::bits::unpack(&self.to_bytes(), SEED_BITS).expect("full length")
    }
}

fn nh(key: &[u64; 16], chunk: &[u8; CHUNK_BYTES]) -> u128 {
    let mut acc = 0u128;
    for i in 0..8 {
        let m0 = u64::from_le_bytes(chunk[16 * i..16 * i + 8].try_into().unwrap());
        let m1 = u64::from_le_bytes(chunk[16 * i + 8..16 * i + 16].try_into().unwrap());
        let a = m0.wrapping_add(key[2 * i]) as u128;
        let b = m1.wrapping_add(key[2 * i + 1]) as u128;
        acc = acc.wrapping_add(a * b);
    }
    acc
}

/// The almost-Δ-universal hash.
pub fn au_hash(seed: &HashSeed, message: &[u8]) -> Result<Tag64, HashError> {
    let bit_len = message.len() as u128 * 8;
    if bit_len > MAX_MESSAGE_BITS {
        return Err(HashError::MessageTooLong(message.len()));
    }
    let k = reduce127(seed.kp);
    let mut h = 1u128;
    let mut horner = |c: u128| h = add_mod127(mul_mod127(h, k), c);
    let mut chunks = message.chunks_exact(CHUNK_BYTES);
    for chunk in &mut chunks {
        let v = nh(&seed.nh, chunk.try_into().unwrap());
        horner(v >> 64);
        horner(v & u64::MAX as u128);
    }
    let rest = chunks.remainder();
    if !rest.is_empty() {
        let mut last = [0u8; CHUNK_BYTES];
        last[..rest.len()].copy_from_slice(rest);
        let v = nh(&seed.nh, &last);
        horner(v >> 64);
        horner(v & u64::MAX as u128);
    }
    horner(bit_len);
    Ok(Tag64(gf128_mul(h, seed.ko) as u64))
}

/// Wegman-Carter tag `au_hash ⊕ pad`.
pub fn wc_tag(seed: &HashSeed, otp: u64, message: &[u8]) -> Result<Tag64, HashError> {
    Ok(Tag64(au_hash(seed, message)?.0 ^ otp))
}

/// Recomputes and compares in constant time; oversize messages are rejected.
pub fn verify_tag(seed: &HashSeed, otp: u64, message: &[u8], tag: Tag64) -> bool {
    match wc_tag(seed, otp, message) {
        Ok(t) => t.ct_eq(tag),
        Err(_) => false,
    }
}
