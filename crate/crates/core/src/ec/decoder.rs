//! Flooding-schedule belief propagation in the LLR domain.
//!
//! Messages live in edge arrays ordered by check. The check update uses a
//! sign / log-magnitude split of the tanh rule; the variable update works on
//! a variable-major copy obtained by gathering through a fixed permutation.
//! Every element is computed independently from the previous half-iteration,
//! so the result does not depend on how rayon splits the work.

use rayon::prelude::*;

use super::{DecoderPriors, EcError, ScLdpcCode, LLR_CLIP};

pub const DEFAULT_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub a_hat: Vec<u8>,
    /// Full BP iterations run; 0 when the channel LLRs already satisfy the syndrome.
    pub iterations: usize,
}

/// Syndrome still unsatisfied after the iteration budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeFailure {
    pub best_guess: Vec<u8>,
    pub iterations: usize,
}

/// Decoder state tied to one code; reusable across decodes.
pub struct BpDecoder<'a> {
    code: &'a ScLdpcCode,
    /// Edge column, in check-major order.
    edge_col: Vec<u32>,
    /// Check-major index of each variable-major edge.
    var_to_edge: Vec<u32>,
    /// Variable-major index of each check-major edge.
    edge_to_var: Vec<u32>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(code: &'a ScLdpcCode) -> Self {
        let e = code.num_edges();
        let edge_col = code.row_cols.clone();
        let mut fill = code.col_ptr[..code.n].to_vec();
        let mut var_to_edge = vec![0u32; e];
        let mut edge_to_var = vec![0u32; e];
        for (edge, &c) in edge_col.iter().enumerate() {
            let slot = fill[c as usize];
            fill[c as usize] += 1;
            var_to_edge[slot] = edge as u32;
            edge_to_var[edge] = slot as u32;
        }
        Self { code, edge_col, var_to_edge, edge_to_var }
    }

    /// Decodes from raw LLRs of the unshuffled string.
    pub fn decode_llrs(&self, llrs: &[f64], syndrome: &[u8], max_iters: usize) -> Result<Result<Decoded, DecodeFailure>, EcError> {
        let code = self.code;
        if llrs.len() != code.n {
            return Err(EcError::Length { expected: code.n, got: llrs.len() });
        }
        if syndrome.len() != code.m() {
            return Err(EcError::Length { expected: code.m(), got: syndrome.len() });
        }
        let channel: Vec<f64> = code.shuffle.iter().map(|&s| llrs[s as usize]).collect();
        let unshuffle = |bits: Vec<u8>| {
            let mut out = vec![0u8; code.n];
            for (j, &s) in code.shuffle.iter().enumerate() {
                out[s as usize] = bits[j];
            }
            out
        };

        let mut hard: Vec<u8> = channel.iter().map(|&l| u8::from(l < 0.0)).collect();
        if code.syndrome_of_shuffled(&hard) == syndrome {
            return Ok(Ok(Decoded { a_hat: unshuffle(hard), iterations: 0 }));
        }

        let e = self.edge_col.len();
        let mut v2c: Vec<f64> = self.edge_col.par_iter().map(|&c| channel[c as usize]).collect();
        let mut c2v = vec![0.0f64; e];
        let mut c2v_var = vec![0.0f64; e];
        let mut v2c_var = vec![0.0f64; e];
        let mut total = vec![0.0f64; code.n];

        for iter in 1..=max_iters {
            // Check update.
            let row_ptr = &code.row_ptr;
            let v2c_ref = &v2c;
            let row_slices = split_by_ptr(&mut c2v, row_ptr);
            row_slices.into_par_iter().enumerate().with_min_len(256).for_each(|(r, out)| {
                let inp = &v2c_ref[row_ptr[r]..row_ptr[r + 1]];
                check_update(inp, syndrome[r], out);
            });

            // Variable update on the variable-major copy.
            c2v_var.par_iter_mut().zip(&self.var_to_edge).with_min_len(4096).for_each(|(d, &ed)| *d = c2v[ed as usize]);
            let col_ptr = &code.col_ptr;
            let c2v_var_ref = &c2v_var;
            let col_slices = split_by_ptr(&mut v2c_var, col_ptr);
            col_slices
                .into_par_iter()
                .zip(total.par_iter_mut())
                .zip(hard.par_iter_mut())
                .enumerate()
                .with_min_len(256)
                .for_each(|(v, ((out, tot), h))| {
                    let inp = &c2v_var_ref[col_ptr[v]..col_ptr[v + 1]];
                    let t = channel[v] + inp.iter().sum::<f64>();
                    *tot = t;
                    *h = u8::from(t < 0.0);
                    for (o, &m) in out.iter_mut().zip(inp) {
                        *o = (t - m).clamp(-LLR_CLIP, LLR_CLIP);
                    }
                });
            v2c.par_iter_mut().zip(&self.edge_to_var).with_min_len(4096).for_each(|(d, &s)| *d = v2c_var[s as usize]);

            if self.satisfied(&hard, syndrome) {
                return Ok(Ok(Decoded { a_hat: unshuffle(hard), iterations: iter }));
            }
        }
        Ok(Err(DecodeFailure { best_guess: unshuffle(hard), iterations: max_iters }))
    }

    fn satisfied(&self, hard: &[u8], syndrome: &[u8]) -> bool {
        let code = self.code;
        (0..code.m()).into_par_iter().with_min_len(1024).all(|r| {
            code.row(r).iter().fold(0u8, |acc, &c| acc ^ hard[c as usize]) == syndrome[r]
        })
    }
}

/// Splits `buf` into consecutive slices delimited by `ptr`.
fn split_by_ptr<'b>(mut buf: &'b mut [f64], ptr: &[usize]) -> Vec<&'b mut [f64]> {
    let mut out = Vec::with_capacity(ptr.len() - 1);
    for w in ptr.windows(2) {
        let (head, tail) = buf.split_at_mut(w[1] - w[0]);
        out.push(head);
        buf = tail;
    }
    out
}

/// `out_e = (-1)^s · 2 atanh(Π_{e' ≠ e} tanh(in_e' / 2))`.
///
/// Signs and magnitudes are handled separately; exact zeros are counted so
/// that a single zero input annihilates every other outgoing message.
fn check_update(inp: &[f64], s: u8, out: &mut [f64]) {
    let mut neg = s & 1;
    let mut zeros = 0usize;
    let mut prod = 1.0f64;
    for (o, &x) in out.iter_mut().zip(inp) {
        neg ^= u8::from(x < 0.0);
        let t = tanh_half(x.abs());
        *o = t;
        if t == 0.0 {
            zeros += 1;
        } else {
            prod *= t;
        }
    }
    for (o, &x) in out.iter_mut().zip(inp) {
        let t = *o;
        let mag = match (zeros, t == 0.0) {
            (0, _) => prod / t,
            (1, true) => prod,
            _ => 0.0,
        };
        let m = atanh2(mag);
        *o = if neg ^ u8::from(x < 0.0) == 1 { -m } else { m };
    }
}

#[inline]
fn tanh_half(x: f64) -> f64 {
    let e = (-x).exp();
    (1.0 - e) / (1.0 + e)
}

/// `2 atanh(p)` for `p ∈ [0, 1]`, capped at the LLR clip.
#[inline]
fn atanh2(p: f64) -> f64 {
    if p >= 1.0 {
        return LLR_CLIP;
    }
    ((1.0 + p) / (1.0 - p)).ln().min(LLR_CLIP)
}

/// Convenience wrapper: builds LLRs from Bob's data and decodes.
pub fn decode(
    code: &ScLdpcCode,
    b: &[u8],
    settings: &[(u8, u8)],
    priors: &DecoderPriors,
    syndrome: &[u8],
    max_iters: usize,
) -> Result<Result<Decoded, DecodeFailure>, EcError> {
    if b.len() != code.n() {
        return Err(EcError::Length { expected: code.n(), got: b.len() });
    }
    let llrs = priors.llrs(b, settings)?;
    let out = BpDecoder::new(code).decode_llrs(&llrs, syndrome, max_iters)?;
    if let Ok(d) = &out {
        assert_eq!(code.encode(&d.a_hat)?, syndrome, "decoder returned a string off the syndrome");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{build_for_rate, CodeConfig};
    use super::*;
    use crate::entropy::binary_entropy;
    use crate::rng::seeded;
    use rand::Rng;

    fn bsc_instance(n: usize, delta: f64, seed: u64) -> (Vec<u8>, Vec<u8>) {
        let mut rng = seeded(seed);
        let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let b = a.iter().map(|&x| x ^ u8::from(rng.random::<f64>() < delta)).collect();
        (a, b)
    }

    fn bsc_priors(delta: f64) -> DecoderPriors {
        let j = [[(1.0 - delta) / 2.0, delta / 2.0], [delta / 2.0, (1.0 - delta) / 2.0]];
        DecoderPriors::new(j, j).unwrap()
    }

    #[test]
    fn check_update_zero_annihilates() {
        let mut out = [9.0; 3];
        check_update(&[0.0, 2.0, -3.0], 0, &mut out);
        assert_eq!(out[1], 0.0);
        assert_eq!(out[2], 0.0);
        assert!(out[0] < 0.0);
    }

    #[test]
    fn check_update_matches_tanh_rule() {
        let inp = [1.3, -0.4, 2.2, 5.0];
        let mut out = [0.0; 4];
        check_update(&inp, 1, &mut out);
        for e in 0..4 {
            let p: f64 = (0..4).filter(|&k| k != e).map(|k| (inp[k] / 2.0).tanh()).product();
            let expect = -2.0 * p.atanh();
            assert!((out[e] - expect).abs() < 1e-10, "{} vs {}", out[e], expect);
        }
    }

    #[test]
    fn perfect_side_information_needs_no_iterations() {
        let n = 3000;
        let code = build_for_rate(n, 600, &CodeConfig::default(), &mut seeded(1)).unwrap();
        let (a, _) = bsc_instance(n, 0.0, 2);
        let p = DecoderPriors::new([[0.5, 0.0], [0.0, 0.5]], [[0.5, 0.0], [0.0, 0.5]]).unwrap();
        let s = code.encode(&a).unwrap();
        let d = decode(&code, &a, &vec![(0, 2); n], &p, &s, 50).unwrap().unwrap();
        assert_eq!(d.iterations, 0);
        assert_eq!(d.a_hat, a);
    }

    #[test]
    fn decodes_moderate_bsc() {
        let n = 20_000;
        let delta = 0.03;
        let m = ((binary_entropy(delta) + 0.15) * n as f64) as usize;
        let code = build_for_rate(n, m, &CodeConfig::default(), &mut seeded(4)).unwrap();
        let (a, b) = bsc_instance(n, delta, 5);
        let s = code.encode(&a).unwrap();
        let d = decode(&code, &b, &vec![(0, 2); n], &bsc_priors(delta), &s, DEFAULT_MAX_ITERS).unwrap().unwrap();
        assert_eq!(d.a_hat, a);
    }

    #[test]
    fn fails_below_capacity() {
        let n = 10_000;
        let delta = 0.08;
        let m = ((binary_entropy(delta) - 0.05) * n as f64) as usize;
        let code = build_for_rate(n, m, &CodeConfig::default(), &mut seeded(4)).unwrap();
        let (a, b) = bsc_instance(n, delta, 6);
        let s = code.encode(&a).unwrap();
        let r = decode(&code, &b, &vec![(0, 2); n], &bsc_priors(delta), &s, 100).unwrap();
        assert!(r.is_err());
    }

    #[test]
    fn result_independent_of_thread_count() {
        let n = 8000;
        let delta = 0.04;
        let m = ((binary_entropy(delta) + 0.06) * n as f64) as usize;
        let code = build_for_rate(n, m, &CodeConfig::default(), &mut seeded(7)).unwrap();
        let (a, b) = bsc_instance(n, delta, 8);
        let s = code.encode(&a).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                decode(&code, &b, &vec![(0, 2); n], &bsc_priors(delta), &s, 30).unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }
}
