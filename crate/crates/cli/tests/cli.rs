//! Exercises the `diqkd` binary: exit codes, artifacts and determinism.

use std::path::Path;
use std::process::{Command, Output};

use diqkd_core::bits;
use diqkd_core::hashing::{au_hash, HashSeed};
use diqkd_core::rng::{derive_seed, seeded};
use diqkd_core::trevisan::{extract, ExtractorParams};

fn diqkd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diqkd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

fn free_port() -> u16 {
    // Two consecutive free ports: the channel and the device link.
    loop {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let p = l.local_addr().unwrap().port();
        if p < u16::MAX && std::net::TcpListener::bind(("127.0.0.1", p + 1)).is_ok() {
            return p;
        }
    }
}

#[test]
fn keylen_usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let o = diqkd(&["keylen"], dir.path());
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--n"));
    assert_eq!(diqkd(&["keylen", "--n", "10", "--bogus"], dir.path()).status.code(), Some(64));
    assert_eq!(diqkd(&["keylen", "--n", "10", "--gamma", "1/0"], dir.path()).status.code(), Some(64));
    assert_eq!(diqkd(&["frobnicate"], dir.path()).status.code(), Some(64));
    assert_eq!(diqkd(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn keylen_without_budget_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = diqkd(&["keylen", "--n", "1000", "--S", "2.1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert_eq!(value(&out, "ell"), Some("0"));
    assert!(out.lines().any(|l| l == "# n=1000"));
}

#[test]
fn keylen_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = diqkd(&["keylen", "--n", "1.5e6", "--gamma", "13/256", "--S", "2.64", "--Q", "0.018"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let ell: u64 = value(&out, "ell").unwrap().parse().unwrap();
    assert!(ell >= 90_000, "{ell}");
    assert_eq!(value(&out, "m"), Some("296518"));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.conf"), "# study\nn = 1000\nS = 2.1\nstarts = 2\n").unwrap();
    let o = diqkd(&["keylen", "--config", "c.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("# n=1000") && out.contains("# S=2.1") && out.contains("# Q=0.018"));
    let o = diqkd(&["keylen", "--config", "c.conf", "--n", "2000"], dir.path());
    assert!(stdout(&o).contains("# n=2000"));
    std::fs::write(dir.path().join("bad.conf"), "n: 5\n").unwrap();
    assert_eq!(diqkd(&["keylen", "--config", "bad.conf"], dir.path()).status.code(), Some(64));
}

#[test]
fn honest_inproc_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["run", "--n", "1e5", "--ell", "4096", "--seed", "11", "--out", out];
    let o = diqkd(&args("a"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(value(&out, "certified"), Some("false"));
    assert_eq!(value(&out, "alice_consumed"), Some("256"));
    let m: u64 = value(&out, "m").unwrap().parse().unwrap();
    assert_eq!(value(&out, "leakage_bits").unwrap().parse::<u64>().unwrap(), m + 258);

    let a = dir.path().join("a");
    let ka = bits::read_bits_file(&a.join("key_alice.bin")).unwrap();
    assert_eq!(ka.len(), 4096);
    assert_eq!(ka, bits::read_bits_file(&a.join("key_bob.bin")).unwrap());
    let log = std::fs::read_to_string(a.join("transcript.log")).unwrap();
    assert!(log.starts_with("B->A ROUND_T 6\n"));
    assert!(log.contains("\n# ledger\nstatus=success\n"));

    assert_eq!(diqkd(&args("b"), dir.path()).status.code(), Some(0));
    for f in ["key_alice.bin", "key_bob.bin", "transcript.log", "ledger.txt", "k0.bin"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn injected_fault_aborts_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = diqkd(
        &["run", "--n", "2e4", "--ell", "256", "--seed", "2", "--fault", "flip-syndrome-bit:1000"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert_eq!(value(&out, "reason"), Some("EcHashMismatch"));
    assert_eq!(value(&out, "bob_consumed"), Some("64"));
    assert!(!dir.path().join("out/key_alice.bin").exists());
    let o = diqkd(&["run", "--n", "2e4", "--fault", "drop-everything"], dir.path());
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn tcp_parties_in_separate_processes() {
    let dir = tempfile::tempdir().unwrap();
    let port = free_port().to_string();
    let common = ["--n", "2e4", "--ell", "512", "--seed", "5", "--transport", "tcp", "--timeout", "60"];
    let bob_addr = format!("127.0.0.1:{port}");
    let bob = Command::new(env!("CARGO_BIN_EXE_diqkd"))
        .args(["run", "--role", "bob", "--listen", &bob_addr, "--out", "bob"])
        .args(common)
        .current_dir(dir.path())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let alice = diqkd(
        &[&["run", "--role", "alice", "--connect", &bob_addr, "--out", "alice"][..], &common[..]].concat(),
        dir.path(),
    );
    let bob = bob.wait_with_output().unwrap();
    assert_eq!(alice.status.code(), Some(0), "{}", String::from_utf8_lossy(&alice.stderr));
    assert_eq!(bob.status.code(), Some(0));
    let ka = bits::read_bits_file(&dir.path().join("alice/key_alice.bin")).unwrap();
    let kb = bits::read_bits_file(&dir.path().join("bob/key_bob.bin")).unwrap();
    assert_eq!(ka, kb);
    assert_eq!(value(&stdout(&bob), "consumed"), Some("256"));

    // Same seed in process gives the same key.
    let o = diqkd(&["run", "--n", "2e4", "--ell", "512", "--seed", "5", "--out", "inproc"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(bits::read_bits_file(&dir.path().join("inproc/key_alice.bin")).unwrap(), ka);
}

#[test]
fn transport_failure_exits_70() {
    let dir = tempfile::tempdir().unwrap();
    let o = diqkd(
        &["run", "--n", "2e4", "--transport", "tcp", "--role", "alice", "--connect", "127.0.0.1:1", "--timeout", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(70));
    let o = diqkd(&["run", "--n", "2e4", "--transport", "tcp", "--connect", "127.0.0.1:1"], dir.path());
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn ec_bench_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = diqkd(&["ec-bench", "--trials", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).lines().any(|l| l.starts_with("eta=")));

    let o = diqkd(&["ec-bench", "--n", "2e4", "--eta-grid", "0.10:0.60:0.50", "--trials", "2", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("eta=")).map(String::from).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains("successes=0"), "{}", rows[0]);
    assert!(rows[1].contains("successes=2"), "{}", rows[1]);
    assert_eq!(diqkd(&["ec-bench", "--eta-grid", "0.3:0.1:0.1"], dir.path()).status.code(), Some(64));
}

#[test]
fn extract_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let params = ExtractorParams::from_parts(64, 4, 8).unwrap();
    let seed_hex = "a5".repeat(params.s.div_ceil(8));
    let o = diqkd(
        &["extract", "--source-hex", "0123456789abcdef", "--ell", "4", "--t", "8", "--seed-hex", &seed_hex],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let source = bits::from_hex("0123456789abcdef", None).unwrap();
    let seed = bits::from_hex(&seed_hex, Some(params.s)).unwrap();
    let key = extract(&source, &seed, &params).unwrap();
    assert_eq!(value(&stdout(&o), "key_hex"), Some(bits::to_hex(&key).as_str()));
    assert_eq!(bits::read_bits_file(&dir.path().join("out/key.bin")).unwrap(), key);

    let o = diqkd(&["extract", "--source-hex", "0123", "--ell", "4", "--t", "8", "--seed-hex", "00"], dir.path());
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn hash_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = diqkd(&["hash", "--message-hex", "68656c6c6f", "--seed", "8"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let seed = HashSeed::random(&mut seeded(derive_seed(8, "hash")));
    let tag = au_hash(&seed, b"hello").unwrap();
    assert_eq!(value(&stdout(&o), "tag"), Some(format!("{:016x}", tag.0).as_str()));
    let o = diqkd(&["hash", "--message-hex", "68656c6c6f", "--seed", "8", "--pad", "ff"], dir.path());
    assert_eq!(value(&stdout(&o), "tag"), Some(format!("{:016x}", tag.0 ^ 0xff).as_str()));
}
