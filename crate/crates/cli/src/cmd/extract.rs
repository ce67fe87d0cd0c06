use diqkd_core::bits;
use diqkd_core::rng::{derive_seed, seeded};
use diqkd_core::trevisan::{extract, ExtractorParams};
use rand::Rng;

use super::{hex_bits, read_bits, usage, Ctx};
use crate::config::Resolver;
use crate::{CliError, ExtractArgs, EXIT_OK};

pub fn run(ctx: &Ctx, r: &mut Resolver, a: ExtractArgs) -> Result<u8, CliError> {
    let source_file = r.optional("source", a.source.map(|p| p.display().to_string()))?;
    let source_hex = r.optional("source-hex", a.source_hex)?;
    let seed_file = r.optional("seed-file", a.seed_file.map(|p| p.display().to_string()))?;
    let seed_hex = r.optional("seed-hex", a.seed_hex)?;
    let ell = r.required("ell", a.ell)?.0 as usize;
    let eps_pa = r.get("eps-pa", a.eps_pa, 1e-10)?;
    let t = r.optional("t", a.t)?;
    r.print_header("extract");

    let source = match (source_file, source_hex) {
        (Some(p), _) => read_bits("source", p.as_ref())?,
        (None, Some(h)) => hex_bits("source-hex", &h)?,
        (None, None) => return Err(usage("missing required value --source or --source-hex")),
    };
    let params = match t {
        Some(t) => ExtractorParams::from_parts(source.len(), ell, t),
        None => ExtractorParams::plan(source.len(), ell, eps_pa),
    }
    .map_err(usage)?;
    println!("n={}", params.n);
    println!("ell={}", params.ell);
    println!("t={}", params.t);
    println!("t_plus={}", params.t_plus);
    println!("seed_bits={}", params.s);
    println!("eps1={:e}", params.eps1);

    let seed = match (seed_file, seed_hex) {
        (Some(p), _) => read_bits("seed-file", p.as_ref())?,
        (None, Some(h)) => hex_bits("seed-hex", &h)?,
        (None, None) => {
            let mut rng = seeded(derive_seed(ctx.seed, "extract"));
            let s: Vec<u8> = (0..params.s).map(|_| rng.random_range(0..2)).collect();
            bits::write_bits_file(&ctx.artifact("extract_seed.bin")?, &s)?;
            println!("seed_source=generated");
            s
        }
    };
    // Hex seeds come in whole bytes; ignore the padding.
    let seed = match seed.len() {
        l if l == params.s => seed,
        l if l > params.s && l - params.s < 8 => seed[..params.s].to_vec(),
        l => return Err(usage(format!("seed has {l} bits, the extractor needs {}", params.s))),
    };
    let key = extract(&source, &seed, &params).map_err(usage)?;
    bits::write_bits_file(&ctx.artifact("key.bin")?, &key)?;
    println!("key_hex={}", bits::to_hex(&key));
    Ok(EXIT_OK)
}
