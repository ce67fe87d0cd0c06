//! Shared information-theoretic helpers.

use statrs::distribution::{ContinuousCDF, Normal};

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Inverse of the Gaussian tail `Q(x) = P(Z > x)`.
pub fn inverse_gaussian_tail(eps: f64) -> f64 {
    let std = Normal::standard();
    -std.inverse_cdf(eps)
}

/// Conditional entropy `H(A|B)` in bits of a 2x2 joint table `p[a][b]`.
pub fn conditional_entropy(joint: &[[f64; 2]; 2]) -> f64 {
    let mut h = 0.0;
    for b in 0..2 {
        let pb = joint[0][b] + joint[1][b];
        for row in joint {
            let p = row[b];
            if p > 0.0 {
                h -= p * (p / pb).log2();
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints_and_peak() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_inverse_at_one_per_mille() {
        assert!((inverse_gaussian_tail(1e-3) - 3.0902).abs() < 1e-3);
        assert!(inverse_gaussian_tail(0.5).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_of_bsc() {
        let d = 0.11;
        let joint = [[(1.0 - d) / 2.0, d / 2.0], [d / 2.0, (1.0 - d) / 2.0]];
        assert!((conditional_entropy(&joint) - binary_entropy(d)).abs() < 1e-12);
    }
}
