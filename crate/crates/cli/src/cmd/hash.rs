use diqkd_core::hashing::{au_hash, wc_tag, HashSeed};
use diqkd_core::rng::{derive_seed, seeded};
use diqkd_core::{bits, SharedKeyK0};

use super::{hex_bits, usage, Ctx};
use crate::config::Resolver;
use crate::{CliError, HashArgs, EXIT_OK};

pub fn run(ctx: &Ctx, r: &mut Resolver, a: HashArgs) -> Result<u8, CliError> {
    let message_file = r.optional("message", a.message.map(|p| p.display().to_string()))?;
    let message_hex = r.optional("message-hex", a.message_hex)?;
    let k0 = r.optional("k0", a.k0.map(|p| p.display().to_string()))?;
    let pad = r.optional("pad", a.pad)?;
    r.print_header("hash");

    let message = match (message_file, message_hex) {
        (Some(p), _) => std::fs::read(&p).map_err(|e| usage(format!("message {p}: {e}")))?,
        (None, Some(h)) => bits::pack(&hex_bits("message-hex", &h)?),
        (None, None) => return Err(usage("missing required value --message or --message-hex")),
    };
    let seed = match &k0 {
        Some(p) => SharedKeyK0::load(p.as_ref())?.hash_seed().clone(),
        None => HashSeed::random(&mut seeded(derive_seed(ctx.seed, "hash"))),
    };
    let tag = match pad {
        Some(p) => {
            let otp = u64::from_str_radix(p.trim_start_matches("0x"), 16).map_err(|_| usage("pad: expected 64-bit hex"))?;
            wc_tag(&seed, otp, &message)
        }
        None => au_hash(&seed, &message),
    }
    .map_err(usage)?;
    println!("message_bytes={}", message.len());
    println!("seed_source={}", if k0.is_some() { "k0" } else { "seed" });
    println!("tag={:016x}", tag.0);
    Ok(EXIT_OK)
}
