//! Finite-size secure key length.
//!
//! The length is `ℓ = ⌊Υ_b(X)⌋` (0 when `X < 1`) where `X` is the sum of the
//! terms in [`KeyLengthBreakdown`], built on the CHSH entropy bound `η`, its
//! tangents `g_t` and the affine min-tradeoff function `f_t`.

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::entropy::binary_entropy;
use crate::hashing::EPS_H;
use crate::rng::seeded;
use crate::trevisan::{upsilon, UPSILON_B};

pub const OMEGA_MIN: f64 = (1.0 - std::f64::consts::FRAC_1_SQRT_2) / 2.0;
pub const OMEGA_MAX: f64 = (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0;

/// Grid size for the infimum over `ω`.
pub const INF_GRID: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum KeyLenError {
    #[error("η is undefined at ω = {0}")]
    Domain(f64),
    #[error("tangent point t = {0} must lie in (3/4, ω_max)")]
    Tangent(f64),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("no feasible parameters: {0}")]
    Infeasible(String),
}

/// CHSH entropy bound.
pub fn eta(omega: f64) -> Result<f64, KeyLenError> {
    if !(OMEGA_MIN..=OMEGA_MAX).contains(&omega) {
        return Err(KeyLenError::Domain(omega));
    }
    if (0.25..=0.75).contains(&omega) {
        return Ok(0.0);
    }
    Ok(eta_formula(omega))
}

fn eta_formula(omega: f64) -> f64 {
    let r = (16.0 * omega * (omega - 1.0) + 3.0).max(0.0);
    1.0 - binary_entropy((1.0 + r.sqrt()) / 2.0)
}

/// `dη/dω` on the curved branch, in closed form.
pub fn eta_prime(omega: f64) -> Result<f64, KeyLenError> {
    if !(omega > 0.75 && omega <= OMEGA_MAX) {
        return Err(KeyLenError::Tangent(omega));
    }
    let s = (16.0 * omega * (omega - 1.0) + 3.0).max(0.0).sqrt();
    let z = (1.0 + s) / 2.0;
    let dz = 4.0 * (2.0 * omega - 1.0) / s;
    // h'(z) = log2((1-z)/z)
    Ok(-((1.0 - z) / z).log2() * dz)
}

/// `ϑ_ε = log₂(1/(1 − √(1 − ε²)))`, rewritten to avoid cancellation.
pub fn vartheta(eps: f64) -> f64 {
    ((1.0 + (1.0 - eps * eps).sqrt()) / (eps * eps)).log2()
}

/// Tangent `g_t` and the affine min-tradeoff function `f_t` for a given `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffTerms {
    pub t: f64,
    pub gamma: f64,
    eta_t: f64,
    slope: f64,
    /// `f_t(δ_0)`.
    pub f0: f64,
    /// `f_t(δ_1) = f_t(δ_⊥)`.
    pub f1: f64,
}

impl TradeoffTerms {
    pub fn new(t: f64, gamma: f64) -> Result<Self, KeyLenError> {
        let slope = eta_prime(t)?;
        if !slope.is_finite() {
            return Err(KeyLenError::Tangent(t));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(KeyLenError::Params(format!("γ = {gamma} outside (0,1)")));
        }
        let eta_t = eta_formula(t);
        let g = |w: f64| eta_t + (w - t) * slope;
        let f1 = g(1.0);
        let f0 = g(0.0) / gamma + (1.0 - 1.0 / gamma) * f1;
        Ok(Self { t, gamma, eta_t, slope, f0, f1 })
    }

    pub fn g(&self, omega: f64) -> f64 {
        self.eta_t + (omega - self.t) * self.slope
    }

    /// `f_t(p)` for `p = (p(0), p(1), p(⊥))`.
    pub fn f(&self, p: [f64; 3]) -> f64 {
        p[0] * self.f0 + (p[1] + p[2]) * self.f1
    }

    pub fn variance(&self, p: [f64; 3]) -> f64 {
        let mean = self.f(p);
        p[0] * self.f0 * self.f0 + (p[1] + p[2]) * self.f1 * self.f1 - mean * mean
    }

    pub fn max_f(&self) -> f64 {
        self.g(1.0)
    }

    pub fn min_f(&self) -> f64 {
        self.g(OMEGA_MIN)
    }

    /// `q(ω) = (γ(1−ω), γω, 1−γ)`.
    pub fn q(&self, omega: f64) -> [f64; 3] {
        [self.gamma * (1.0 - omega), self.gamma * omega, 1.0 - self.gamma]
    }

    /// `V(f_t, p)`.
    pub fn v(&self, p: [f64; 3]) -> f64 {
        let var = self.variance(p).max(0.0);
        std::f64::consts::LN_2 / 2.0 * (33f64.log2() + (2.0 + var).sqrt()).powi(2)
    }

    /// `K_α′(f_t)`.
    pub fn k(&self, alpha1: f64) -> f64 {
        let e = 2.0 + self.max_f() - self.min_f();
        1.0 / (6.0 * (2.0 - alpha1).powi(3) * std::f64::consts::LN_2)
            * 2f64.powf((alpha1 - 1.0) * e)
            * (2f64.powf(e) + std::f64::consts::E.powi(2)).ln().powi(3)
    }

    fn gap(&self, omega: f64, eta_w: f64, alpha1: f64) -> f64 {
        eta_w - self.f(self.q(omega)) - (alpha1 - 1.0) * self.v(self.q(omega))
    }

    /// `inf_ω Δ(f_t, ω) − (α′−1) V(f_t, q(ω))` over `[ω_min, ω_max]`: the
    /// smallest value on a dense grid, refined by golden section around it.
    pub fn eat_infimum(&self, alpha1: f64) -> f64 {
        let grid = eta_grid();
        let (mut best_k, mut best) = (0, f64::INFINITY);
        for (k, &(w, e)) in grid.iter().enumerate() {
            let v = self.gap(w, e, alpha1);
            if v < best {
                best = v;
                best_k = k;
            }
        }
        let lo = grid[best_k.saturating_sub(1)].0;
        let hi = grid[(best_k + 1).min(grid.len() - 1)].0;
        let phi = |w: f64| self.gap(w, eta(w).expect("inside Q̃"), alpha1);
        best.min(golden_min(phi, lo, hi))
    }
}

fn eta_grid() -> &'static [(f64, f64)] {
    static GRID: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    GRID.get_or_init(|| {
        (0..INF_GRID)
            .map(|k| {
                let w = (OMEGA_MIN + (OMEGA_MAX - OMEGA_MIN) * k as f64 / (INF_GRID - 1) as f64).min(OMEGA_MAX);
                (w, eta(w).expect("grid inside Q̃"))
            })
            .collect()
    })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.min(fd);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.min(fc).min(fd);
        if b - a < 1e-14 {
            break;
        }
    }
    best
}

/// The free parameters of the security statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityParams {
    pub t: f64,
    pub eps_h: f64,
    pub eps_pa: f64,
    pub eps_ea: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eps_s: f64,
    pub eps_s1: f64,
    pub eps_s2: f64,
}

impl SecurityParams {
    pub fn validate(&self) -> Result<(), KeyLenError> {
        let bad = |what: &str| Err(KeyLenError::Params(what.to_string()));
        if !(self.t > 0.75 && self.t <= OMEGA_MAX) {
            return bad("t outside (3/4, ω_max]");
        }
        for (name, e) in [
            ("ε_h", self.eps_h),
            ("ε_PA", self.eps_pa),
            ("ε_EA", self.eps_ea),
            ("ε_s", self.eps_s),
            ("ε_s′", self.eps_s1),
            ("ε_s″", self.eps_s2),
        ] {
            if !(e > 0.0 && e < 1.0) {
                return Err(KeyLenError::Params(format!("{name} = {e} outside (0,1)")));
            }
        }
        if !(self.alpha1 > 1.0 && self.alpha1 < 2.0) {
            return bad("α′ outside (1,2)");
        }
        if !(self.alpha2 > 1.0 && self.alpha2 < 1.0 + 1.0 / 5f64.log2()) {
            return bad("α″ outside (1, 1 + 1/log 5)");
        }
        if !(self.eps_s1 + 2.0 * self.eps_s2 < self.eps_s) {
            return bad("ε_s′ + 2ε_s″ must be below ε_s");
        }
        Ok(())
    }

    pub fn soundness(&self) -> f64 {
        self.eps_ea.max(self.eps_pa + 2.0 * self.eps_s) + 4.0 * self.eps_h
    }
}

/// Term-by-term evaluation; `pre_upsilon` is the sum of the nine terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyLengthBreakdown {
    pub entropy_rate: f64,
    pub eat_gap: f64,
    pub second_order: f64,
    pub hmax_cost: f64,
    pub renyi_costs: f64,
    pub chain_rule: f64,
    pub pa_cost: f64,
    pub leakage: f64,
    pub constant: f64,
    pub pre_upsilon: f64,
    pub ell: u64,
    pub soundness: f64,
}

impl KeyLengthBreakdown {
    pub fn terms(&self) -> [(&'static str, f64); 9] {
        [
            ("entropy_rate", self.entropy_rate),
            ("eat_gap", self.eat_gap),
            ("second_order", self.second_order),
            ("hmax_cost", self.hmax_cost),
            ("renyi_costs", self.renyi_costs),
            ("chain_rule", self.chain_rule),
            ("pa_cost", self.pa_cost),
            ("leakage", self.leakage),
            ("constant", self.constant),
        ]
    }
}

fn ell_of(pre: f64) -> u64 {
    if pre >= 1.0 {
        upsilon(pre, UPSILON_B).map(|y| y.floor() as u64).unwrap_or(0)
    } else {
        0
    }
}

pub fn key_length(
    n: u64,
    gamma: f64,
    omega_thresh: f64,
    m: u64,
    sec: &SecurityParams,
) -> Result<KeyLengthBreakdown, KeyLenError> {
    sec.validate()?;
    if !(omega_thresh > 0.75 && omega_thresh <= OMEGA_MAX) {
        return Err(KeyLenError::Params(format!("ω_th = {omega_thresh} outside (3/4, ω_max]")));
    }
    let ft = TradeoffTerms::new(sec.t, gamma)?;
    let n = n as f64;
    let log_ea = (1.0 / sec.eps_ea).log2();
    let (a1, a2) = (sec.alpha1, sec.alpha2);
    let mut b = KeyLengthBreakdown {
        entropy_rate: n * ft.g(omega_thresh),
        eat_gap: n * ft.eat_infimum(a1),
        second_order: -n * (a1 - 1.0).powi(2) * ft.k(a1),
        hmax_cost: -n * gamma - n * (a2 - 1.0) * 5f64.log2().powi(2),
        renyi_costs: -(vartheta(sec.eps_s1) + a1 * log_ea) / (a1 - 1.0)
            - (vartheta(sec.eps_s2) + a2 * log_ea) / (a2 - 1.0),
        chain_rule: -3.0 * vartheta(sec.eps_s - sec.eps_s1 - 2.0 * sec.eps_s2),
        pa_cost: -5.0 * (1.0 / sec.eps_pa).log2(),
        leakage: -(m as f64),
        constant: -264.0,
        pre_upsilon: 0.0,
        ell: 0,
        soundness: sec.soundness(),
    };
    b.pre_upsilon = b.terms().iter().map(|(_, v)| v).sum();
    b.ell = ell_of(b.pre_upsilon);
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub seed: u64,
    /// Objective evaluations per start.
    pub max_evals: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { starts: 32, seed: 0, max_evals: 4_000 }
    }
}

/// Search coordinates: `t`, `log₁₀(α′−1)`, `log₁₀(α″−1)`, `log₁₀ ε_PA`,
/// `log₁₀(ε_s′/ε_s)`, `log₁₀(ε_s″/ε_s)`. `ε_EA` and `ε_s` sit at the largest
/// values the soundness target allows, since the length is increasing in both.
type Point = [f64; 6];

fn decode(x: &Point, budget: f64) -> Option<SecurityParams> {
    let eps_pa = 10f64.powf(x[3]);
    if !(eps_pa < budget) {
        return None;
    }
    let eps_s = (budget - eps_pa) / 2.0;
    let sec = SecurityParams {
        t: x[0],
        eps_h: EPS_H,
        eps_pa,
        eps_ea: budget,
        alpha1: 1.0 + 10f64.powf(x[1]),
        alpha2: 1.0 + 10f64.powf(x[2]),
        eps_s,
        eps_s1: eps_s * 10f64.powf(x[4]),
        eps_s2: eps_s * 10f64.powf(x[5]),
    };
    sec.validate().ok().map(|_| sec)
}

/// Maximises the key length subject to `soundness ≤ eps_snd_target`.
pub fn optimize(
    n: u64,
    gamma: f64,
    omega_thresh: f64,
    m: u64,
    eps_snd_target: f64,
) -> Result<(SecurityParams, KeyLengthBreakdown), KeyLenError> {
    optimize_with(n, gamma, omega_thresh, m, eps_snd_target, OptimizerConfig::default())
}

pub fn optimize_with(
    n: u64,
    gamma: f64,
    omega_thresh: f64,
    m: u64,
    eps_snd_target: f64,
    cfg: OptimizerConfig,
) -> Result<(SecurityParams, KeyLengthBreakdown), KeyLenError> {
    let budget = eps_snd_target - 4.0 * EPS_H;
    if !(budget > 0.0) {
        return Err(KeyLenError::Infeasible(format!(
            "soundness target {eps_snd_target:e} is below the hashing floor 4ε_h = {:e}",
            4.0 * EPS_H
        )));
    }
    let budget = budget.min(1.0 - 1e-12);
    if !(omega_thresh > 0.75 && omega_thresh <= OMEGA_MAX) {
        return Err(KeyLenError::Infeasible(format!("ω_th = {omega_thresh} leaves no entropy")));
    }
    let eval = |x: &Point| -> Option<(SecurityParams, KeyLengthBreakdown)> {
        let sec = decode(x, budget)?;
        key_length(n, gamma, omega_thresh, m, &sec).ok().map(|b| (sec, b))
    };
    let score = |x: &Point| eval(x).map_or(f64::NEG_INFINITY, |(_, b)| b.pre_upsilon);

    let lb = budget.log10();
    let a2_max = (1.0 / 5f64.log2()).log10();
    let mut starts: Vec<Point> = vec![[(0.75 + OMEGA_MAX) / 2.0, -3.0, -2.5, lb - 0.3, -0.3, -0.7]];
    let mut rng = seeded(cfg.seed);
    while starts.len() < cfg.starts.max(1) {
        starts.push([
            rng.random_range(0.76..OMEGA_MAX - 1e-3),
            rng.random_range(-5.0..-1.0),
            rng.random_range(-5.0..a2_max),
            rng.random_range(lb - 6.0..lb - 1e-3),
            rng.random_range(-4.0..-0.05),
            rng.random_range(-4.0..-0.4),
        ]);
    }

    let results: Vec<(f64, Point)> = starts
        .par_iter()
        .map(|&x0| coordinate_descent(&score, x0, cfg.max_evals))
        .collect();
    // Ties go to the lowest start index, independent of scheduling.
    let (best_val, best_x) = results
        .iter()
        .fold((f64::NEG_INFINITY, None), |(bv, bx), (v, x)| if *v > bv { (*v, Some(*x)) } else { (bv, bx) });
    match best_x.and_then(|x| eval(&x)) {
        Some(r) if best_val.is_finite() => Ok(r),
        _ => Err(KeyLenError::Infeasible("no start reached a feasible point".into())),
    }
}

fn coordinate_descent(score: &impl Fn(&Point) -> f64, mut x: Point, max_evals: usize) -> (f64, Point) {
    let mut steps = [0.01, 0.5, 0.5, 0.5, 0.5, 0.5];
    let min_steps = [1e-9, 1e-7, 1e-7, 1e-7, 1e-7, 1e-7];
    let mut fx = score(&x);
    let mut evals = 1;
    while evals < max_evals && steps.iter().zip(&min_steps).any(|(s, m)| s > m) {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] += dir * steps[i];
                let fy = score(&y);
                evals += 1;
                if fy > fx {
                    // Keep moving while it pays.
                    x = y;
                    fx = fy;
                    improved = true;
                    loop {
                        let mut z = x;
                        z[i] += dir * steps[i];
                        let fz = score(&z);
                        evals += 1;
                        if fz > fx && evals < max_evals {
                            x = z;
                            fx = fz;
                        } else {
                            break;
                        }
                    }
                    break;
                }
            }
        }
        if !improved {
            for s in &mut steps {
                *s /= 2.0;
            }
        }
    }
    (fx, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eta_examples() {
        assert_eq!(eta(0.75).unwrap(), 0.0);
        assert!((eta(OMEGA_MAX).unwrap() - 1.0).abs() < 1e-12);
        assert!((eta(0.80).unwrap() - 0.3468).abs() < 1e-3);
        assert!(eta(0.9).is_err());
        assert!(eta(0.1).is_err());
    }

    #[test]
    fn eta_is_non_decreasing() {
        let mut prev = 0.0;
        for k in 0..=10_000 {
            let w = 0.75 + (OMEGA_MAX - 0.75) * k as f64 / 10_000.0;
            let e = eta(w).unwrap();
            assert!(e >= prev - 1e-15, "ω={w}");
            prev = e;
        }
    }

    #[test]
    fn analytic_derivative_matches_central_differences() {
        for w in [0.76, 0.8, 0.83, 0.85] {
            let h = 1e-6;
            let fd = (eta(w + h).unwrap() - eta(w - h).unwrap()) / (2.0 * h);
            assert!((eta_prime(w).unwrap() - fd).abs() < 1e-5 * fd.abs().max(1.0), "ω={w}");
        }
        assert!(eta_prime(0.7).is_err());
    }

    #[test]
    fn tangent_lines_lie_below() {
        for t in [0.76, 0.8, 0.825, 0.85] {
            let ft = TradeoffTerms::new(t, 13.0 / 256.0).unwrap();
            assert!((ft.g(t) - eta(t).unwrap()).abs() < 1e-14);
            assert_eq!(ft.f([0.0, 0.0, 1.0]), ft.g(1.0));
            for k in 1..=1000 {
                let w = 0.75 + (OMEGA_MAX - 0.75) * k as f64 / 1000.0;
                assert!(ft.g(w) <= eta(w).unwrap() + 1e-12, "t={t} ω={w}");
            }
        }
    }

    #[test]
    fn f_on_q_is_the_tangent() {
        let ft = TradeoffTerms::new(0.82, 0.05).unwrap();
        for w in [0.2, 0.5, 0.8] {
            assert!((ft.f(ft.q(w)) - ft.g(w)).abs() < 1e-12);
        }
    }

    #[test]
    fn vartheta_is_stable_and_bounded() {
        for e in [1e-2, 1e-6, 1e-12] {
            let v = vartheta(e);
            assert!(v.is_finite() && v <= (2.0 / (e * e)).log2() + 1e-12);
        }
        // Direct formula is fine at moderate ε.
        let e: f64 = 0.3;
        assert!((vartheta(e) - (1.0 / (1.0 - (1.0 - e * e).sqrt())).log2()).abs() < 1e-12);
    }

    fn sample_sec() -> SecurityParams {
        SecurityParams {
            t: 0.83,
            eps_h: EPS_H,
            eps_pa: 5e-11,
            eps_ea: 1e-10,
            alpha1: 1.0007,
            alpha2: 1.003,
            eps_s: 2.4e-11,
            eps_s1: 1e-11,
            eps_s2: 5e-12,
        }
    }

    #[test]
    fn soundness_formula_is_exact() {
        let s = sample_sec();
        assert_eq!(s.soundness(), f64::max(1e-10, 5e-11 + 2.0 * 2.4e-11) + 4.0 * EPS_H);
    }

    #[test]
    fn small_n_is_negative() {
        let b = key_length(1_000, 13.0 / 256.0, 0.76, 100, &sample_sec()).unwrap();
        assert!(b.pre_upsilon < 1.0);
        assert_eq!(b.ell, 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = sample_sec();
        s.eps_s1 = s.eps_s;
        assert!(key_length(1_000_000, 0.05, 0.82, 0, &s).is_err());
        let mut s = sample_sec();
        s.alpha2 = 1.5;
        assert!(key_length(1_000_000, 0.05, 0.82, 0, &s).is_err());
        assert!(optimize(1_000_000, 0.05, 0.82, 0, 1e-20).is_err());
    }

    #[test]
    fn monotone_in_leakage_and_epsilons() {
        let s = sample_sec();
        let at = |m: u64, s: &SecurityParams| key_length(1_500_000, 13.0 / 256.0, 0.8255, m, s).unwrap().pre_upsilon;
        assert!(at(0, &s) >= at(1_000, &s) && at(1_000, &s) >= at(2_000, &s));
        let tighter = |f: f64| SecurityParams { eps_pa: s.eps_pa * f, eps_ea: s.eps_ea * f, ..s };
        assert!(at(0, &tighter(1.0)) >= at(0, &tighter(0.1)) && at(0, &tighter(0.1)) >= at(0, &tighter(0.01)));
    }

    #[test]
    fn optimizer_is_thread_independent() {
        let cfg = OptimizerConfig { starts: 4, seed: 3, max_evals: 600 };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| optimize_with(1_000_000, 13.0 / 256.0, 0.824, 200_000, 1e-10, cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    proptest! {
        #[test]
        fn variance_is_non_negative(t in 0.751f64..0.85, g in 0.01f64..0.99, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let ft = TradeoffTerms::new(t, g).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(ft.variance([lo, hi - lo, 1.0 - hi]) >= -1e-9);
        }

        #[test]
        fn breakdown_sums(t in 0.76f64..0.85, a1 in 1.0001f64..1.1, m in 0u64..400_000) {
            let sec = SecurityParams { t, alpha1: a1, ..sample_sec() };
            let b = key_length(1_500_000, 13.0 / 256.0, 0.8255, m, &sec).unwrap();
            let sum: f64 = b.terms().iter().map(|(_, v)| v).sum();
            prop_assert!((sum - b.pre_upsilon).abs() <= 1e-9 * b.pre_upsilon.abs().max(1.0));
        }
    }
}
