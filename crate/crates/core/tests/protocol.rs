//! Two-party protocol runs over in-process and loopback TCP transports.

use std::sync::OnceLock;
use std::time::Duration;

use diqkd_core::ec::{syndrome_length, DecoderPriors};
use diqkd_core::hashing::PadId;
use diqkd_core::model::{completeness_threshold, parse_ratio, DeviceModel};
use diqkd_core::protocol::device::inproc_wire;
use diqkd_core::protocol::{
    inproc_pair, run_alice, run_bob, run_protocol, serve_devices, AbortReason, DeviceLink, Fault, Frame, MsgType,
    ProtocolParams, RunStatus, TcpTransport, TcpWire, Transport,
};
use diqkd_core::rng::{derive_seed, seeded};
use diqkd_core::SharedKeyK0;

const N: usize = 20_000;
const S: f64 = 2.64;
const Q: f64 = 0.018;

fn params() -> &'static ProtocolParams {
    static P: OnceLock<ProtocolParams> = OnceLock::new();
    P.get_or_init(|| {
        let gamma = parse_ratio("13/256").unwrap();
        let g = 13.0 / 256.0;
        let w = completeness_threshold((4.0 + S) / 8.0, g, N as f64, 3.0).unwrap();
        let m = syndrome_length(N as u64, g, S, Q) as usize;
        let priors = DecoderPriors::from_model(&DeviceModel::parametric(S, Q).unwrap()).unwrap();
        ProtocolParams::new(N, gamma, w, m, 512, 1e-10, priors, 3).unwrap()
    })
}

fn k0(seed: u64) -> SharedKeyK0 {
    SharedKeyK0::generate(params().trev_seed_bits(), &mut seeded(derive_seed(seed, "k0")))
}

fn honest() -> DeviceModel {
    DeviceModel::parametric(S, Q).unwrap()
}

#[test]
fn honest_run_succeeds_with_exact_ledger() {
    let p = params();
    let out = run_protocol(p, &honest(), &k0(1), 1, None).unwrap();
    let RunStatus::Success { k_a, k_b, balance } = &out.status else { panic!("{:?}", out.status) };
    assert_eq!(k_a, k_b);
    assert_eq!(k_a.len(), p.ell);
    assert_eq!((balance.consumed, balance.generated), (256, p.ell as u64));
    assert_eq!(balance.reusable, (p.trev_seed_bits() + 1280) as u64);
    assert_eq!(out.transcript().leakage_bits, p.m as u64 + 258);
    assert_eq!(out.bob.transcript.leakage_bits, p.m as u64 + 258);
    assert!(out.events.omega_pe && out.events.omega_h && out.events.omega_a);
    assert!(!p.certified);

    let tail: Vec<MsgType> = out.transcript().entries.iter().skip(N).map(|e| e.msg_type).collect();
    use MsgType::*;
    assert_eq!(tail, [BasesX, Syndrome, HashEc, TagB, ConfirmC, TagA, FlagF, TagF]);
}

#[test]
fn runs_are_deterministic_in_the_seed() {
    let a = run_protocol(params(), &honest(), &k0(2), 2, None).unwrap();
    let b = run_protocol(params(), &honest(), &k0(2), 2, None).unwrap();
    assert_eq!(a.status, b.status);
    assert_eq!(a.transcript().entries, b.transcript().entries);
    let c = run_protocol(params(), &honest(), &k0(2), 3, None).unwrap();
    assert_ne!(a.status, c.status);
}

#[test]
fn flipped_syndrome_bit_fails_ec_validation() {
    let out = run_protocol(params(), &honest(), &k0(4), 4, Some(Fault::FlipSyndromeBit(1000))).unwrap();
    assert_eq!(out.status, RunStatus::Abort(AbortReason::EcHashMismatch));
    assert_eq!(out.alice.balance().consumed, 64);
    assert_eq!(out.bob.balance().consumed, 64);
    assert!(out.bob.k0.is_spent(PadId::Ec) && !out.bob.k0.is_spent(PadId::A));
    assert!(!out.events.omega_h);
}

#[test]
fn weak_devices_fail_bell_validation() {
    let weak = DeviceModel::parametric(2.2, Q).unwrap();
    let out = run_protocol(params(), &weak, &k0(5), 5, None).unwrap();
    assert_eq!(out.status, RunStatus::Abort(AbortReason::BellValidationFailed));
    assert!(out.events.omega_h && !out.events.omega_pe);
    assert_eq!(out.bob.balance().generated, 0);
}

#[test]
fn out_of_order_frame_is_a_channel_error() {
    let (ta, mut tb) = inproc_pair(Duration::from_secs(5));
    let (wa, _dev) = inproc_wire(Duration::from_secs(5));
    tb.send(&Frame::new(MsgType::HashEc, vec![0; 8])).unwrap();
    let out = run_alice(params(), k0(6), ta, DeviceLink::new(wa), &mut seeded(6));
    assert_eq!(out.result, Err(AbortReason::ChannelError));
    assert_eq!(out.balance().consumed, 0);
}

#[test]
fn spent_k0_is_rejected_up_front() {
    let mut k = k0(7);
    k.spend(PadId::F).unwrap();
    assert!(run_protocol(params(), &honest(), &k, 7, None).is_err());
}

#[test]
fn tcp_parties_agree_with_inproc_run() {
    let p = params();
    let seed = 8;
    let key = k0(seed);
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let dev_listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let dev_addr = dev_listener.local_addr().unwrap();
    let timeout = Duration::from_secs(60);

    let (alice, bob) = std::thread::scope(|s| {
        // Bob's side hosts the devices; Alice reaches hers over TCP.
        let bob = s.spawn(|| {
            let (stream, _) = listener.accept().unwrap();
            let t = TcpTransport::from_stream(stream, timeout).unwrap();
            let (wb, mut db) = inproc_wire(timeout);
            std::thread::scope(|s2| {
                s2.spawn(move || {
                    let mut da = TcpWire::listen_on(dev_listener, timeout).unwrap();
                    serve_devices(&honest(), p.n, &mut da, &mut db, &mut seeded(derive_seed(seed, "device"))).unwrap();
                });
                run_bob(p, key.clone(), t, DeviceLink::new(wb), &mut seeded(derive_seed(seed, "bob")))
            })
        });
        let alice = s.spawn(|| {
            let t = TcpTransport::connect(addr, timeout).unwrap();
            let wa = TcpWire::connect(dev_addr, timeout).unwrap();
            run_alice(p, key.clone(), t, DeviceLink::new(wa), &mut seeded(derive_seed(seed, "alice")))
        });
        (alice.join().unwrap(), bob.join().unwrap())
    });
    let reference = run_protocol(p, &honest(), &key, seed, None).unwrap();
    let RunStatus::Success { k_a, k_b, .. } = reference.status else { panic!() };
    assert_eq!(alice.result, Ok(k_a));
    assert_eq!(bob.result, Ok(k_b));
    assert_eq!(alice.transcript.entries, reference.alice.transcript.entries);
}
