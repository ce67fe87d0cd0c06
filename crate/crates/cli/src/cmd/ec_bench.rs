use diqkd_core::ec::{build_for_rate, decode, overhead_bounds, syndrome_length, CodeConfig, DecoderPriors};
use diqkd_core::model::{sample_round, DeviceModel, InputPolicy};
use diqkd_core::rng::{derive_seed, seeded};

use super::{ratio, ratio_f64, usage, Ctx};
use crate::config::{Count, Fraction, Resolver};
use crate::{CliError, EcBenchArgs, EXIT_OK};

/// Largest block length the benchmark accepts.
pub const MAX_N: u64 = 200_000;

pub fn run(ctx: &Ctx, r: &mut Resolver, a: EcBenchArgs) -> Result<u8, CliError> {
    let n = r.get("n", a.n, Count(100_000))?.0;
    let gamma = r.get("gamma", a.gamma, Fraction("13/256".into()))?;
    let s = r.get("S", a.s, 2.6507)?;
    let q = r.get("Q", a.q, 0.0239)?;
    let grid = r.get("eta-grid", a.eta_grid, "0.16:0.36:0.04".to_string())?;
    let trials = r.get("trials", a.trials, 10)?;
    let max_iters = r.get("max-iters", a.max_iters, diqkd_core::ec::DEFAULT_MAX_ITERS)?;
    r.print_header("ec-bench");

    if !(1..=MAX_N).contains(&n) {
        return Err(usage(format!("n must be in [1, {MAX_N}]")));
    }
    let etas = parse_grid(&grid)?;
    let model = DeviceModel::parametric(s, q).map_err(usage)?;
    let priors = DecoderPriors::from_model(&model).map_err(usage)?;
    let policy = InputPolicy::new(ratio(&gamma)).map_err(usage)?;
    let g = ratio_f64(&gamma);
    let nu = n as usize;

    if let Ok(b) = overhead_bounds(n as f64, g, s, q, 1e-3) {
        println!("eta_inf={:.6}", b.eta_inf);
        println!("eta_est={:.6}", b.eta_est);
    }
    println!("eta_rule={:.6}", syndrome_length(n, g, s, q) as f64 / n as f64);
    println!("# eta m successes trials rate mean_iters");
    if trials == 0 {
        return Ok(EXIT_OK);
    }

    let instances: Vec<_> = (0..trials)
        .map(|k| {
            let mut rng = seeded(derive_seed(ctx.seed, &format!("trial-{k}")));
            let rounds: Vec<_> = (0..nu).map(|i| sample_round(i, &model, &policy, &mut rng)).collect();
            let a: Vec<u8> = rounds.iter().map(|r| r.a).collect();
            let b: Vec<u8> = rounds.iter().map(|r| r.b).collect();
            let settings: Vec<(u8, u8)> = rounds.iter().map(|r| (r.x, r.y)).collect();
            (a, b, settings)
        })
        .collect();

    for eta in etas {
        let m = (eta * n as f64).ceil() as usize;
        let code = match build_for_rate(nu, m, &CodeConfig::default(), &mut seeded(derive_seed(ctx.seed, "code"))) {
            Ok(c) => c,
            Err(e) => {
                println!("eta={eta:.4} m={m} error={e}");
                continue;
            }
        };
        let mut ok = 0u64;
        let mut iters = 0usize;
        for (a, b, settings) in &instances {
            let syn = code.encode(a).map_err(usage)?;
            match decode(&code, b, settings, &priors, &syn, max_iters).map_err(usage)? {
                Ok(d) => {
                    ok += u64::from(&d.a_hat == a);
                    iters += d.iterations;
                }
                Err(f) => iters += f.iterations,
            }
        }
        println!(
            "eta={eta:.4} m={m} successes={ok} trials={trials} rate={:.3} mean_iters={:.1}",
            ok as f64 / trials as f64,
            iters as f64 / trials as f64
        );
    }
    Ok(EXIT_OK)
}

/// `lo:hi:step`, inclusive of `hi` up to rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("eta-grid {s:?}: expected lo:hi:step")))?;
    let [lo, hi, step] = parts[..] else {
        return Err(usage(format!("eta-grid {s:?}: expected lo:hi:step")));
    };
    if !(lo > 0.0 && hi < 1.0 && lo <= hi && step > 0.0) {
        return Err(usage(format!("eta-grid {s:?}: need 0 < lo <= hi < 1 and step > 0")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = parse_grid("0.16:0.24:0.02").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4] - 0.24).abs() < 1e-12);
        assert_eq!(parse_grid("0.2:0.2:0.1").unwrap(), vec![0.2]);
        assert!(parse_grid("0.3:0.2:0.1").is_err());
        assert!(parse_grid("0.1:0.2").is_err());
    }
}
