//! Block weak design over `GF(p)`, `p = t_+`.
//!
//! Convention: block `b` owns the seed range `[b·p², (b+1)·p²)`. A block of
//! degree `c` and width `q` holds one set per polynomial `f` over `GF(p)` of
//! degree `≤ c` whose `x^c` coefficient lies in `[0, q)`. The set of `f` is
//! `{ b·p² + a·p + f(a) : 0 ≤ a < t }`.
//!
//! Two distinct polynomials of the block agree on at most `c` of the `t`
//! points, and for `|T| = k ≤ c` exactly `q·p^(c-k)` of them agree with a
//! fixed one on `T`. Counting subsets of intersections therefore bounds the
//! in-block weight of any set by `n_b·ρ(c) - 1`, with
//! `ρ(c) = Σ_{k≤c} C(t,k) p^{-k} < e`. Sets from other blocks are disjoint
//! and weigh `1` each. Blocks are sized greedily so that
//! `N_before + n_b·ρ(c) ≤ ℓ`, which gives
//! `Σ_{i<j} 2^{|S_i ∩ S_j|} ≤ ℓ - 1` for every `j`, a weak design with `r = 1`.

use super::{ExtractorParams, TrevisanError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    first: usize,
    len: usize,
    degree: usize,
    seed_offset: usize,
}

/// Sets are generated on demand; only block descriptors are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakDesign {
    p: usize,
    t: usize,
    ell: usize,
    blocks: Vec<Block>,
}

fn rho(t: usize, p: usize, c: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=c {
        term *= (t + 1 - k) as f64 / (k as f64 * p as f64);
        sum += term;
    }
    sum
}

impl WeakDesign {
    pub fn new(params: &ExtractorParams) -> Result<Self, TrevisanError> {
        let d = Self::build(params.ell, params.t, params.t_plus as usize);
        let allowed = params.s / (params.t_plus as usize).pow(2);
        if d.blocks.len() > allowed {
            return Err(TrevisanError::DesignTooLarge { blocks: d.blocks.len(), allowed });
        }
        Ok(d)
    }

    /// Greedy construction for `ell` sets of size `t` over `GF(p)`, `t ≤ p`.
    pub fn build(ell: usize, t: usize, p: usize) -> Self {
        assert!(t <= p && t >= 1, "need 1 ≤ t ≤ p");
        let mut blocks = Vec::new();
        let mut done = 0usize;
        while done < ell {
            let remaining = ell - done;
            let mut chosen = (0usize, remaining.min(p));
            // Largest q·p^c fitting the weight budget, c ≥ 1.
            let mut pc = p as u128;
            for c in 1..t {
                let r = rho(t, p, c);
                let cap = (remaining as f64 / r).floor() as u128;
                if pc > cap {
                    break;
                }
                let q = (cap / pc).min(p as u128);
                let len = (q * pc) as usize;
                if len > chosen.1 || chosen.0 == 0 && len >= chosen.1 {
                    chosen = (c, len);
                }
                pc *= p as u128;
            }
            blocks.push(Block { first: done, len: chosen.1, degree: chosen.0, seed_offset: blocks.len() * p * p });
            done += chosen.1;
        }
        Self { p, t, ell, blocks }
    }

    pub fn len(&self) -> usize {
        self.ell
    }

    pub fn is_empty(&self) -> bool {
        self.ell == 0
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn set_size(&self) -> usize {
        self.t
    }

    /// Seed bits actually referenced.
    pub fn seed_span(&self) -> usize {
        self.blocks.len() * self.p * self.p
    }

    /// Writes the seed positions of set `i` into `out` (length `t`).
    pub fn set_into(&self, i: usize, out: &mut [usize]) {
        assert!(i < self.ell);
        let bi = self.blocks.partition_point(|b| b.first + b.len <= i);
        let b = &self.blocks[bi];
        let p = self.p;
        // Coefficients of f: low digits base p, leading one is the quotient.
        let mut k = i - b.first;
        let mut coeffs = vec![0usize; b.degree + 1];
        for c in coeffs.iter_mut().take(b.degree) {
            *c = k % p;
            k /= p;
        }
        coeffs[b.degree] = k;
        for (a, o) in out.iter_mut().enumerate().take(self.t) {
            let v = coeffs.iter().rev().fold(0usize, |acc, &c| (acc * a + c) % p);
            *o = b.seed_offset + a * p + v;
        }
    }

    pub fn set(&self, i: usize) -> Vec<usize> {
        let mut out = vec![0; self.t];
        self.set_into(i, &mut out);
        out
    }

    /// `max_j Σ_{i<j} 2^{|S_i ∩ S_j|}` by brute force.
    pub fn max_overlap_weight(&self) -> f64 {
        let sets: Vec<std::collections::HashSet<usize>> =
            (0..self.ell).map(|i| self.set(i).into_iter().collect()).collect();
        let mut worst = 0.0f64;
        for j in 0..self.ell {
            let w: f64 = (0..j).map(|i| 2f64.powi(sets[i].intersection(&sets[j]).count() as i32)).sum();
            worst = worst.max(w);
        }
        worst
    }
}
