//! Arithmetic modulo `2^127 - 1` and in `GF(2^128)`.

pub const P127: u128 = (1u128 << 127) - 1;

/// Full 128×128 → 256-bit product as `(hi, lo)`.
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = (a >> 64, a & u64::MAX as u128);
    let (b1, b0) = (b >> 64, b & u64::MAX as u128);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let (mid, carry) = p01.overflowing_add(p10);
    let (lo, c1) = p00.overflowing_add(mid << 64);
    let hi = p11 + (mid >> 64) + ((carry as u128) << 64) + c1 as u128;
    (hi, lo)
}

/// Reduces any `u128` into `[0, p)`.
pub fn reduce127(x: u128) -> u128 {
    let r = (x & P127) + (x >> 127);
    if r >= P127 {
        r - P127
    } else {
        r
    }
}

/// `a · b mod p` for `a, b < 2^127`.
pub fn mul_mod127(a: u128, b: u128) -> u128 {
    let (hi, lo) = mul_wide(a, b);
    // 2^127 ≡ 1: value = hi·2^128 + lo = (2·hi + lo_top)·2^127 + lo_low.
    let low = lo & P127;
    let high = (hi << 1) | (lo >> 127);
    reduce127(reduce127(low) + reduce127(high))
}

pub fn add_mod127(a: u128, b: u128) -> u128 {
    reduce127(a + b)
}

/// Multiplication in `GF(2)[x] / (x^128 + x^7 + x^2 + x + 1)`.
pub fn gf128_mul(a: u128, b: u128) -> u128 {
    const R: u128 = 0x87;
    let mut acc = 0u128;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        let carry = a >> 127;
        a <<= 1;
        if carry == 1 {
            a ^= R;
        }
        b >>= 1;
    }
    acc
}
