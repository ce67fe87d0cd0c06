use diqkd_core::ec::syndrome_length;
use diqkd_core::keylen::{optimize_with, KeyLenError, OptimizerConfig};
use diqkd_core::model::{completeness_threshold, DeviceModel, ModelError};
use diqkd_core::protocol::THRESHOLD_SIGMAS;
use diqkd_core::trevisan::ExtractorParams;

use super::{ratio_f64, usage, Ctx};
use crate::config::{Count, Fraction, Resolver};
use crate::{CliError, KeylenArgs, EXIT_NO_KEY, EXIT_OK};

pub fn run(ctx: &Ctx, r: &mut Resolver, a: KeylenArgs) -> Result<u8, CliError> {
    let n = r.required("n", a.n)?.0;
    let gamma = r.get("gamma", a.gamma, Fraction("13/256".into()))?;
    let s = r.get("S", a.s, 2.64)?;
    let q = r.get("Q", a.q, 0.018)?;
    let eps_snd = r.get("eps-snd", a.eps_snd, 1e-10)?;
    let omega_override = r.optional("omega-thresh", a.omega_thresh)?;
    let m_override = r.optional("m", a.m)?;
    let starts = r.get("starts", a.starts, OptimizerConfig::default().starts)?;
    let max_evals = r.get("max-evals", a.max_evals, OptimizerConfig::default().max_evals)?;
    r.print_header("keylen");

    if n == 0 {
        return Err(usage("n must be positive"));
    }
    DeviceModel::parametric(s, q).map_err(usage)?;
    if !(eps_snd > 0.0 && eps_snd < 1.0) {
        return Err(usage(format!("eps-snd {eps_snd} outside (0,1)")));
    }
    let g = ratio_f64(&gamma);
    let m = m_override.map_or_else(|| syndrome_length(n, g, s, q), |Count(m)| m);
    println!("m={m}");

    let omega = match omega_override {
        Some(w) => w,
        None => match completeness_threshold((4.0 + s) / 8.0, g, n as f64, THRESHOLD_SIGMAS) {
            Ok(w) => w,
            Err(e @ ModelError::Infeasible { .. }) => return no_key(&e.to_string()),
            Err(e) => return Err(usage(e)),
        },
    };
    println!("omega_thresh={omega:.9}");

    let cfg = OptimizerConfig { starts, seed: ctx.seed, max_evals };
    let (sec, b) = match optimize_with(n, g, omega, m, eps_snd, cfg) {
        Ok(v) => v,
        Err(e @ KeyLenError::Infeasible(_)) => return no_key(&e.to_string()),
        Err(e) => return Err(usage(e)),
    };

    println!();
    println!("{:<14} {:>16}", "term", "bits");
    for (name, v) in b.terms() {
        println!("{name:<14} {v:>16.2}");
    }
    println!("{:<14} {:>16.2}", "pre_upsilon", b.pre_upsilon);
    println!("{:<14} {:>16}", "ell", b.ell);
    println!();

    for (name, v) in b.terms() {
        println!("{name}={v:.6}");
    }
    println!("pre_upsilon={:.6}", b.pre_upsilon);
    println!("ell={}", b.ell);
    println!("rate={:.6}", b.ell as f64 / n as f64);
    println!("soundness={:e}", b.soundness);
    println!("t={:.9}", sec.t);
    println!("alpha1={:.9}", sec.alpha1);
    println!("alpha2={:.9}", sec.alpha2);
    println!("eps_h={:e}", sec.eps_h);
    println!("eps_pa={:e}", sec.eps_pa);
    println!("eps_ea={:e}", sec.eps_ea);
    println!("eps_s={:e}", sec.eps_s);
    println!("eps_s1={:e}", sec.eps_s1);
    println!("eps_s2={:e}", sec.eps_s2);
    if b.ell == 0 {
        return Ok(EXIT_NO_KEY);
    }
    if let Ok(p) = ExtractorParams::plan(n as usize, b.ell as usize, sec.eps_pa) {
        println!("extractor_t={}", p.t);
        println!("extractor_t_plus={}", p.t_plus);
        println!("extractor_seed_bits={}", p.s);
    }
    Ok(EXIT_OK)
}

fn no_key(reason: &str) -> Result<u8, CliError> {
    println!("ell=0");
    println!("reason={reason}");
    Ok(EXIT_NO_KEY)
}
