use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::time::Duration;

use diqkd_core::bits;
use diqkd_core::model::{DeviceModel, MEASURED_TABLE};
use diqkd_core::protocol::device::inproc_wire;
use diqkd_core::protocol::{
    run_alice, run_bob, run_protocol, serve_devices, DeviceLink, Fault, FaultyTransport, PartyOutcome, ProtocolParams,
    RunStatus, TcpTransport, TcpWire, Transcript, Transport,
};
use diqkd_core::rng::{derive_seed, seeded};
use diqkd_core::SharedKeyK0;

use super::{ratio, usage, Ctx};
use crate::config::{Count, Fraction, Resolver};
use crate::{CliError, RunArgs, EXIT_ABORT, EXIT_OK};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Party {
    Alice,
    Bob,
}

impl Party {
    fn name(self) -> &'static str {
        match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        }
    }
}

pub fn run(ctx: &Ctx, r: &mut Resolver, a: RunArgs) -> Result<u8, CliError> {
    let transport = r.get("transport", a.transport, "inproc".to_string())?;
    let role = r.optional("role", a.role)?;
    let listen = r.optional("listen", a.listen)?;
    let connect = r.optional("connect", a.connect)?;
    let k0_path = r.optional("k0", a.k0.map(|p| p.display().to_string()))?;
    let fault = r.optional("fault", a.fault)?;
    let n = r.get("n", a.n, Count(100_000))?.0 as usize;
    let gamma = r.get("gamma", a.gamma, Fraction("13/256".into()))?;
    let s = r.get("S", a.s, 2.64)?;
    let q = r.get("Q", a.q, 0.018)?;
    let eps_snd = r.get("eps-snd", a.eps_snd, 1e-10)?;
    let ell = r.optional("ell", a.ell)?;
    let device = r.get("device", a.device, format!("{s},{q}"))?;
    let timeout = Duration::from_secs(r.get("timeout", a.timeout, 120)?);
    r.print_header("run");

    let fault: Option<Fault> = fault.map(|f| f.parse()).transpose().map_err(usage)?;
    let model = match device.as_str() {
        "measured" => DeviceModel::empirical(MEASURED_TABLE, false),
        spec => spec.parse(),
    }
    .map_err(usage)?;

    let (mut params, breakdown) =
        ProtocolParams::derive(n, ratio(&gamma), s, q, eps_snd, derive_seed(ctx.seed, "code")).map_err(usage)?;
    let certified_ell = breakdown.ell as usize;
    if let Some(Count(l)) = ell {
        params = params.with_ell(l as usize, certified_ell).map_err(usage)?;
    }
    params.timeout = timeout;
    print_params(&params, certified_ell);

    let k0 = match &k0_path {
        Some(p) => SharedKeyK0::load(p.as_ref()).map_err(|e| usage(format!("k0 {p}: {e}")))?,
        None => {
            let k = SharedKeyK0::generate(params.trev_seed_bits(), &mut seeded(derive_seed(ctx.seed, "k0")));
            k.save(&ctx.artifact("k0.bin")?)?;
            k
        }
    };
    if k0.extractor_seed().len() != params.trev_seed_bits() {
        return Err(usage(format!(
            "k0 extractor seed has {} bits, parameters need {}",
            k0.extractor_seed().len(),
            params.trev_seed_bits()
        )));
    }

    match transport.as_str() {
        "inproc" => run_inproc(ctx, &params, &model, &k0, fault),
        "tcp" => {
            let party = match role.as_deref() {
                Some("alice") => Party::Alice,
                Some("bob") => Party::Bob,
                _ => return Err(usage("--transport tcp needs --role alice|bob")),
            };
            let endpoint = match (listen, connect) {
                (Some(l), None) => Endpoint::Listen(l),
                (None, Some(c)) => Endpoint::Connect(c),
                _ => return Err(usage("--transport tcp needs exactly one of --listen/--connect")),
            };
            run_tcp(ctx, &params, &model, &k0, fault, party, endpoint)
        }
        other => Err(usage(format!("unknown transport {other:?}; expected inproc or tcp"))),
    }
}

fn print_params(p: &ProtocolParams, certified_ell: usize) {
    println!("n={}", p.n);
    println!("gamma={}", p.gamma);
    println!("omega_thresh={:.9}", p.omega_thresh);
    println!("m={}", p.m);
    println!("ell={}", p.ell);
    println!("certified_ell={certified_ell}");
    println!("certified={}", p.certified);
    println!("eps_pa={:e}", p.eps_pa);
    if let Some(e) = p.extractor {
        println!("extractor_t={}", e.t);
        println!("extractor_t_plus={}", e.t_plus);
        println!("extractor_seed_bits={}", e.s);
    }
    let l = p.code.lineage;
    println!("code_base=({},{})", l.d_v, l.d_c);
    println!("code_lift={}", l.lift);
    println!("code_m={}", p.code.m());
}

fn run_inproc(
    ctx: &Ctx,
    params: &ProtocolParams,
    model: &DeviceModel,
    k0: &SharedKeyK0,
    fault: Option<Fault>,
) -> Result<u8, CliError> {
    let out = run_protocol(params, model, k0, ctx.seed, fault)?;
    let mut ledger = vec![
        ("events_omega_pe".to_string(), out.events.omega_pe.to_string()),
        ("events_omega_h".to_string(), out.events.omega_h.to_string()),
        ("events_omega_a".to_string(), out.events.omega_a.to_string()),
    ];
    let code = match &out.status {
        RunStatus::Success { k_a, k_b, .. } => {
            bits::write_bits_file(&ctx.artifact("key_alice.bin")?, k_a)?;
            bits::write_bits_file(&ctx.artifact("key_bob.bin")?, k_b)?;
            ledger.insert(0, ("status".into(), "success".into()));
            ledger.push(("keys_equal".into(), (k_a == k_b).to_string()));
            EXIT_OK
        }
        RunStatus::Abort(reason) => {
            ledger.insert(0, ("status".into(), "abort".into()));
            ledger.insert(1, ("reason".into(), reason.to_string()));
            EXIT_ABORT
        }
    };
    for (tag, party) in [("alice", &out.alice), ("bob", &out.bob)] {
        let b = party.balance();
        ledger.push((format!("{tag}_consumed"), b.consumed.to_string()));
        ledger.push((format!("{tag}_reusable"), b.reusable.to_string()));
        ledger.push((format!("{tag}_generated"), b.generated.to_string()));
        ledger.push((format!("{tag}_net"), b.net.to_string()));
        if let Some(d) = &party.detail {
            ledger.push((format!("{tag}_detail"), d.clone()));
        }
    }
    ledger.push(("leakage_bits".into(), out.transcript().leakage_bits.to_string()));
    write_artifacts(ctx, "", out.transcript(), &ledger)?;
    Ok(code)
}

enum Endpoint {
    Listen(String),
    Connect(String),
}

fn socket_addr(addr: &str) -> Result<SocketAddr, CliError> {
    addr.to_socket_addrs()
        .map_err(|e| usage(format!("address {addr}: {e}")))?
        .next()
        .ok_or_else(|| usage(format!("address {addr} does not resolve")))
}

/// The device source listens next to the classical channel, on port + 1.
fn device_addr(mut a: SocketAddr) -> Result<SocketAddr, CliError> {
    let port = a.port().checked_add(1).ok_or_else(|| usage("port 65535 leaves no room for the device link"))?;
    a.set_port(port);
    Ok(a)
}

fn transport_err(e: impl std::fmt::Display) -> CliError {
    CliError::Transport(e.to_string())
}

fn run_tcp(
    ctx: &Ctx,
    params: &ProtocolParams,
    model: &DeviceModel,
    k0: &SharedKeyK0,
    fault: Option<Fault>,
    party: Party,
    endpoint: Endpoint,
) -> Result<u8, CliError> {
    let timeout = params.timeout;
    let outcome = match endpoint {
        Endpoint::Listen(addr) => {
            let addr = socket_addr(&addr)?;
            let chan = TcpListener::bind(addr).map_err(transport_err)?;
            let dev = TcpListener::bind(device_addr(chan.local_addr().map_err(transport_err)?)?).map_err(transport_err)?;
            let (stream, _) = chan.accept().map_err(transport_err)?;
            let t = TcpTransport::from_stream(stream, timeout).map_err(transport_err)?;
            let (local, mut host_side) = inproc_wire(timeout);
            let mut dev_rng = seeded(derive_seed(ctx.seed, "device"));
            std::thread::scope(|s| {
                let server = s.spawn(move || -> Result<(), CliError> {
                    let mut remote = TcpWire::listen_on(dev, timeout).map_err(transport_err)?;
                    match party {
                        Party::Alice => serve_devices(model, params.n, &mut host_side, &mut remote, &mut dev_rng),
                        Party::Bob => serve_devices(model, params.n, &mut remote, &mut host_side, &mut dev_rng),
                    }
                    .map_err(transport_err)
                });
                let out = run_party(ctx, params, k0, t, local, fault, party);
                server.join().expect("device thread")?;
                Ok::<_, CliError>(out)
            })?
        }
        Endpoint::Connect(addr) => {
            let addr = socket_addr(&addr)?;
            let t = TcpTransport::connect(addr, timeout).map_err(transport_err)?;
            let wire = TcpWire::connect(device_addr(addr)?, timeout).map_err(transport_err)?;
            run_party(ctx, params, k0, t, wire, fault, party)
        }
    };

    let b = outcome.balance();
    let mut ledger = vec![];
    let code = match &outcome.result {
        Ok(key) => {
            bits::write_bits_file(&ctx.artifact(&format!("key_{}.bin", party.name()))?, key)?;
            ledger.push(("status".to_string(), "success".to_string()));
            EXIT_OK
        }
        Err(reason) => {
            ledger.push(("status".into(), "abort".into()));
            ledger.push(("reason".into(), reason.to_string()));
            EXIT_ABORT
        }
    };
    ledger.push(("role".into(), party.name().into()));
    ledger.push(("consumed".into(), b.consumed.to_string()));
    ledger.push(("reusable".into(), b.reusable.to_string()));
    ledger.push(("generated".into(), b.generated.to_string()));
    ledger.push(("net".into(), b.net.to_string()));
    if let Some(d) = &outcome.detail {
        ledger.push(("detail".into(), d.clone()));
    }
    ledger.push(("leakage_bits".into(), outcome.transcript.leakage_bits.to_string()));
    write_artifacts(ctx, &format!("_{}", party.name()), &outcome.transcript, &ledger)?;
    Ok(code)
}

fn run_party<W: diqkd_core::protocol::DeviceWire>(
    ctx: &Ctx,
    params: &ProtocolParams,
    k0: &SharedKeyK0,
    t: TcpTransport,
    wire: W,
    fault: Option<Fault>,
    party: Party,
) -> PartyOutcome {
    let t: Box<dyn Transport> = match fault {
        Some(f) => Box::new(FaultyTransport::new(t, f)),
        None => Box::new(t),
    };
    let mut rng = seeded(derive_seed(ctx.seed, party.name()));
    match party {
        Party::Alice => run_alice(params, k0.clone(), t, DeviceLink::new(wire), &mut rng),
        Party::Bob => run_bob(params, k0.clone(), t, DeviceLink::new(wire), &mut rng),
    }
}

/// Prints the ledger and writes `transcript{suffix}.log` (frames, then the
/// ledger block) and `ledger{suffix}.txt`.
fn write_artifacts(ctx: &Ctx, suffix: &str, transcript: &Transcript, ledger: &[(String, String)]) -> Result<(), CliError> {
    let mut log = BufWriter::new(File::create(ctx.artifact(&format!("transcript{suffix}.log"))?)?);
    transcript.write_log(&mut log)?;
    writeln!(log, "# ledger")?;
    let mut led = BufWriter::new(File::create(ctx.artifact(&format!("ledger{suffix}.txt"))?)?);
    for (k, v) in ledger {
        println!("{k}={v}");
        writeln!(log, "{k}={v}")?;
        writeln!(led, "{k}={v}")?;
    }
    log.flush()?;
    led.flush()?;
    Ok(())
}
