//! `GF(2^m)` for `2 ≤ m ≤ 256`, elements as four little-endian `u64` limbs
//! (bit `j` = coefficient of `x^j`).

use super::irreducible::IRREDUCIBLE;

pub type Elem = [u64; 4];

pub const ZERO: Elem = [0; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    m: usize,
    /// The modulus without its leading `x^m` term.
    low: Elem,
}

fn set_bit(e: &mut Elem, j: usize) {
    e[j / 64] |= 1 << (j % 64);
}

fn bit(e: &Elem, j: usize) -> bool {
    (e[j / 64] >> (j % 64)) & 1 == 1
}

fn xor(a: &Elem, b: &Elem) -> Elem {
    [a[0] ^ b[0], a[1] ^ b[1], a[2] ^ b[2], a[3] ^ b[3]]
}

impl Field {
    pub fn new(m: usize) -> Option<Self> {
        if !(2..=256).contains(&m) {
            return None;
        }
        let (a, b, c) = IRREDUCIBLE[m - 2];
        let mut low = ZERO;
        set_bit(&mut low, 0);
        set_bit(&mut low, a as usize);
        if b != 0 {
            set_bit(&mut low, b as usize);
            set_bit(&mut low, c as usize);
        }
        Some(Self { m, low })
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    /// Exponents of the modulus, highest first.
    pub fn modulus_exponents(&self) -> Vec<usize> {
        let mut e = vec![self.m];
        e.extend((0..self.m).rev().filter(|&j| bit(&self.low, j)));
        e
    }

    /// Element from bits `bits[0..m]` (0/1 bytes); missing bits are zero.
    pub fn from_bits(&self, bits: &[u8]) -> Elem {
        let mut e = ZERO;
        for (j, &b) in bits.iter().take(self.m).enumerate() {
            if b & 1 == 1 {
                set_bit(&mut e, j);
            }
        }
        e
    }

    /// Multiplication by `x`.
    pub fn mul_x(&self, a: &Elem) -> Elem {
        let top = bit(a, self.m - 1);
        let mut r = [a[0] << 1, (a[1] << 1) | (a[0] >> 63), (a[2] << 1) | (a[1] >> 63), (a[3] << 1) | (a[2] >> 63)];
        if self.m < 256 {
            r[self.m / 64] &= !(1u64 << (self.m % 64));
        }
        if top {
            r = xor(&r, &self.low);
        }
        r
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let mut acc = ZERO;
        let mut a = *a;
        for j in 0..self.m {
            if bit(b, j) {
                acc = xor(&acc, &a);
            }
            a = self.mul_x(&a);
        }
        acc
    }

    /// Precomputed multiplication by a fixed element.
    pub fn multiplier(&self, alpha: &Elem) -> Multiplier {
        let nibbles = self.m.div_ceil(4);
        let mut table = vec![ZERO; nibbles * 16];
        let mut base = *alpha;
        for k in 0..nibbles {
            let t = &mut table[16 * k..16 * k + 16];
            let mut p = base;
            for i in 0..4 {
                t[1 << i] = p;
                p = self.mul_x(&p);
            }
            for v in 3..16usize {
                if v & (v - 1) != 0 {
                    let low = v & v.wrapping_neg();
                    t[v] = xor(&t[v ^ low], &t[low]);
                }
            }
            base = p;
        }
        Multiplier { nibbles, table }
    }
}

/// Nibble tables for `y ↦ y · α`.
pub struct Multiplier {
    nibbles: usize,
    table: Vec<Elem>,
}

impl Multiplier {
    #[inline]
    pub fn apply(&self, y: &Elem) -> Elem {
        let mut acc = ZERO;
        for k in 0..self.nibbles {
            let v = ((y[k / 16] >> (4 * (k % 16))) & 0xf) as usize;
            let t = &self.table[16 * k + v];
            acc[0] ^= t[0];
            acc[1] ^= t[1];
            acc[2] ^= t[2];
            acc[3] ^= t[3];
        }
        acc
    }
}

pub fn add(a: &Elem, b: &Elem) -> Elem {
    xor(a, b)
}

/// Parity of the bitwise AND.
pub fn inner_product(a: &Elem, b: &Elem) -> u8 {
    ((a[0] & b[0]).count_ones() + (a[1] & b[1]).count_ones() + (a[2] & b[2]).count_ones() + (a[3] & b[3]).count_ones())
        as u8
        & 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_elem(f: &Field, rng: &mut impl Rng) -> Elem {
        let bits: Vec<u8> = (0..f.degree()).map(|_| rng.random_range(0..2)).collect();
        f.from_bits(&bits)
    }

    #[test]
    fn small_fields_have_full_multiplicative_order() {
        // In a field every nonzero element satisfies a^(2^m - 1) = 1, and the
        // map is injective; check both exhaustively for m ≤ 10.
        for m in 2..=10 {
            let f = Field::new(m).unwrap();
            let one = f.from_bits(&[1]);
            let mut seen = std::collections::HashSet::new();
            for v in 1u64..(1 << m) {
                let a: Elem = [v, 0, 0, 0];
                let mut p = one;
                for _ in 0..((1u64 << m) - 1) {
                    p = f.mul(&p, &a);
                }
                assert_eq!(p, one, "m={m} a={v}");
                assert!(seen.insert(f.mul(&a, &[3, 0, 0, 0])));
            }
        }
    }

    #[test]
    fn modulus_is_low_weight() {
        for m in 2..=256 {
            let w = Field::new(m).unwrap().modulus_exponents().len();
            assert!(w == 3 || w == 5, "m={m}");
        }
        assert!(Field::new(1).is_none());
        assert!(Field::new(257).is_none());
    }

    #[test]
    fn multiplier_matches_mul_all_sizes() {
        let mut rng = seeded(11);
        for m in [2, 3, 7, 63, 64, 65, 125, 127, 128, 129, 200, 255, 256] {
            let f = Field::new(m).unwrap();
            for _ in 0..20 {
                let a = random_elem(&f, &mut rng);
                let y = random_elem(&f, &mut rng);
                assert_eq!(f.multiplier(&a).apply(&y), f.mul(&y, &a), "m={m}");
            }
        }
    }

    proptest! {
        #[test]
        fn field_axioms(m in 2usize..=256, seed: u64) {
            let f = Field::new(m).unwrap();
            let mut rng = seeded(seed);
            let (a, b, c) = (random_elem(&f, &mut rng), random_elem(&f, &mut rng), random_elem(&f, &mut rng));
            prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
            prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
            prop_assert_eq!(f.mul(&a, &add(&b, &c)), add(&f.mul(&a, &b), &f.mul(&a, &c)));
        }
    }
}
