//! Alice's and Bob's state machines.

use crate::bits;
use crate::ec;
use crate::hashing::{PadId, SharedKeyK0, Tag64};
use crate::model::{InputPolicy, Score};
use crate::rng::SimRng;
use crate::trevisan;

use super::device::{DeviceLink, DeviceWire};
use super::frame::{Direction, Frame, MsgType, Transcript};
use super::transport::Transport;
use super::{validate_bell, AbortReason, Events, PartyOutcome, ProtocolError, ProtocolParams, Role};

/// Abort with a reason and a detail message.
struct Stop(AbortReason, String);

impl From<ProtocolError> for Stop {
    fn from(e: ProtocolError) -> Self {
        Stop(AbortReason::ChannelError, e.to_string())
    }
}

struct Endpoint<T> {
    transport: T,
    transcript: Transcript,
    outgoing: Direction,
}

impl<T: Transport> Endpoint<T> {
    fn incoming(&self) -> Direction {
        match self.outgoing {
            Direction::AliceToBob => Direction::BobToAlice,
            Direction::BobToAlice => Direction::AliceToBob,
        }
    }

    fn send(&mut self, frame: Frame, bits: u64) -> Result<Frame, ProtocolError> {
        self.transport.send(&frame)?;
        self.transcript.record(self.outgoing, &frame, bits);
        Ok(frame)
    }

    /// Receives a frame that must be one of `allowed`.
    fn recv_any(&mut self, allowed: &[MsgType], bits: impl Fn(MsgType) -> u64) -> Result<Frame, ProtocolError> {
        let f = self.transport.recv()?;
        if !allowed.contains(&f.msg_type) {
            return Err(ProtocolError::Unexpected { expected: allowed[0], got: f.msg_type });
        }
        let dir = self.incoming();
        self.transcript.record(dir, &f, bits(f.msg_type));
        Ok(f)
    }

    fn recv(&mut self, t: MsgType, bits: u64) -> Result<Frame, ProtocolError> {
        self.recv_any(&[t], |_| bits)
    }
}

fn tag_bits(t: MsgType) -> u64 {
    match t {
        MsgType::ConfirmC | MsgType::FlagF => 1,
        MsgType::Abort => 8,
        _ => 64,
    }
}

fn bit_payload(f: &Frame, len: usize) -> Result<Vec<u8>, ProtocolError> {
    if f.payload.len() != len.div_ceil(8) {
        return Err(ProtocolError::Malformed(format!("{} carries {} bytes for {len} bits", f.msg_type, f.payload.len())));
    }
    bits::unpack(&f.payload, len).ok_or_else(|| ProtocolError::Malformed(format!("short {}", f.msg_type)))
}

fn flag_payload(f: &Frame) -> Result<bool, ProtocolError> {
    match f.payload.as_slice() {
        [0] => Ok(false),
        [1] => Ok(true),
        _ => Err(ProtocolError::Malformed(format!("{} is not a single 0/1 byte", f.msg_type))),
    }
}

fn tag_payload(f: &Frame) -> Result<Tag64, ProtocolError> {
    let b: [u8; 8] =
        f.payload.as_slice().try_into().map_err(|_| ProtocolError::Malformed(format!("{} is not 8 bytes", f.msg_type)))?;
    Ok(Tag64::from_bytes(b))
}

/// Canonical hashed form of a bit string: 8-byte bit count, packed bits.
fn string_message(bits_: &[u8]) -> Vec<u8> {
    let mut m = Vec::with_capacity(8 + bits_.len() / 8 + 1);
    bits::write_bits(&mut m, bits_).expect("writing to a Vec");
    m
}

fn extract(params: &ProtocolParams, k0: &SharedKeyK0, source: &[u8]) -> Result<Vec<u8>, ProtocolError> {
    match &params.extractor {
        Some(p) => Ok(trevisan::extract(source, k0.extractor_seed(), p)?),
        None => Ok(Vec::new()),
    }
}

fn finish(
    role: Role,
    r: Result<Vec<u8>, Stop>,
    k0: SharedKeyK0,
    transcript: Transcript,
    events: Events,
    decode: Option<(bool, usize)>,
) -> PartyOutcome {
    let (result, detail) = match r {
        Ok(k) => (Ok(k), None),
        Err(Stop(reason, d)) => (Err(reason), Some(d)),
    };
    PartyOutcome { role, result, detail, k0, transcript, events, decode }
}

/// Alice: answers each `ROUND_T`, then reveals bases, syndrome and hash.
pub fn run_alice<T: Transport, W: DeviceWire>(
    params: &ProtocolParams,
    mut k0: SharedKeyK0,
    transport: T,
    mut device: DeviceLink<W>,
    rng: &mut SimRng,
) -> PartyOutcome {
    let mut ep = Endpoint { transport, transcript: Transcript::default(), outgoing: Direction::AliceToBob };
    let mut events = Events::default();
    let r = alice_steps(params, &mut k0, &mut ep, &mut device, rng, &mut events);
    finish(Role::Alice, r, k0, ep.transcript, events, None)
}

fn alice_steps<T: Transport, W: DeviceWire>(
    params: &ProtocolParams,
    k0: &mut SharedKeyK0,
    ep: &mut Endpoint<T>,
    device: &mut DeviceLink<W>,
    rng: &mut SimRng,
    events: &mut Events,
) -> Result<Vec<u8>, Stop> {
    let policy = InputPolicy::new(params.gamma).map_err(|e| Stop(AbortReason::ChannelError, e.to_string()))?;
    let n = params.n;
    let mut t_history = Vec::with_capacity(6 * n);
    let (mut x, mut a) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let f = ep.recv(MsgType::RoundT, 1)?;
        let t = flag_payload(&f)?;
        t_history.extend_from_slice(&f.to_bytes());
        let xi = if t { policy.sample_x(rng) } else { 0 };
        a.push(device.measure(xi)?);
        x.push(xi);
    }

    let syndrome = params.code.encode(&a).map_err(|e| Stop(AbortReason::ChannelError, e.to_string()))?;
    let mut authed = ep.send(Frame::new(MsgType::BasesX, bits::pack(&x)), n as u64)?.to_bytes();
    authed.extend(ep.send(Frame::new(MsgType::Syndrome, bits::pack(&syndrome)), params.m as u64)?.to_bytes());
    let g_ec = k0.tag(PadId::Ec, &string_message(&a)).expect("fresh pad");
    authed.extend(ep.send(Frame::new(MsgType::HashEc, g_ec.to_bytes().to_vec()), 64)?.to_bytes());

    let f = ep.recv_any(&[MsgType::TagB, MsgType::Abort], tag_bits)?;
    if f.msg_type == MsgType::Abort {
        let reason = f.payload.first().and_then(|&c| AbortReason::from_code(c)).unwrap_or(AbortReason::ChannelError);
        return Err(Stop(reason, "Bob aborted".into()));
    }
    let c = k0.verify(PadId::B, &t_history, tag_payload(&f)?).expect("fresh pad");
    let key = extract(params, k0, &a)?;

    authed.extend(ep.send(Frame::new(MsgType::ConfirmC, vec![u8::from(c)]), 1)?.to_bytes());
    let g_a = k0.tag(PadId::A, &authed).expect("fresh pad");
    ep.send(Frame::new(MsgType::TagA, g_a.to_bytes().to_vec()), 64)?;

    let flag = ep.recv(MsgType::FlagF, 1)?;
    let g_f = tag_payload(&ep.recv(MsgType::TagF, 64)?)?;
    if !k0.verify(PadId::F, &flag.to_bytes(), g_f).expect("fresh pad") {
        return Err(Stop(AbortReason::KeyActivationFailed, "TAG_F did not verify".into()));
    }
    if !flag_payload(&flag)? {
        let why = if c { "Bob rejected TAG_A" } else { "TAG_B did not verify" };
        return Err(Stop(AbortReason::AuthFailed, why.into()));
    }
    events.omega_a = true;
    Ok(key)
}

/// Bob: chooses test rounds, reconciles, validates and authenticates.
pub fn run_bob<T: Transport, W: DeviceWire>(
    params: &ProtocolParams,
    mut k0: SharedKeyK0,
    transport: T,
    mut device: DeviceLink<W>,
    rng: &mut SimRng,
) -> PartyOutcome {
    let mut ep = Endpoint { transport, transcript: Transcript::default(), outgoing: Direction::BobToAlice };
    let mut events = Events::default();
    let mut decode = None;
    let r = bob_steps(params, &mut k0, &mut ep, &mut device, rng, &mut events, &mut decode);
    finish(Role::Bob, r, k0, ep.transcript, events, decode)
}

fn bob_steps<T: Transport, W: DeviceWire>(
    params: &ProtocolParams,
    k0: &mut SharedKeyK0,
    ep: &mut Endpoint<T>,
    device: &mut DeviceLink<W>,
    rng: &mut SimRng,
    events: &mut Events,
    decode: &mut Option<(bool, usize)>,
) -> Result<Vec<u8>, Stop> {
    let policy = InputPolicy::new(params.gamma).map_err(|e| Stop(AbortReason::ChannelError, e.to_string()))?;
    let n = params.n;
    let mut t_history = Vec::with_capacity(6 * n);
    let (mut y, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let yi = policy.sample_y(rng);
        let f = ep.send(Frame::new(MsgType::RoundT, vec![u8::from(yi != 2)]), 1)?;
        t_history.extend_from_slice(&f.to_bytes());
        b.push(device.measure(yi)?);
        y.push(yi);
    }

    let fx = ep.recv(MsgType::BasesX, n as u64)?;
    let x = bit_payload(&fx, n)?;
    let fm = ep.recv(MsgType::Syndrome, params.m as u64)?;
    let syndrome = bit_payload(&fm, params.m)?;
    let fh = ep.recv(MsgType::HashEc, 64)?;
    let g_ec = tag_payload(&fh)?;
    let mut authed = fx.to_bytes();
    authed.extend(fm.to_bytes());
    authed.extend(fh.to_bytes());

    let settings: Vec<(u8, u8)> = x.iter().copied().zip(y.iter().copied()).collect();
    let a_hat = match ec::decode(&params.code, &b, &settings, &params.priors, &syndrome, params.max_iters)
        .map_err(|e| Stop(AbortReason::ChannelError, e.to_string()))?
    {
        Ok(d) => {
            *decode = Some((true, d.iterations));
            d.a_hat
        }
        Err(f) => {
            *decode = Some((false, f.iterations));
            f.best_guess
        }
    };
    let scores: Vec<Score> = (0..n).map(|i| Score::from_round(u8::from(y[i] != 2), a_hat[i], b[i], x[i], y[i])).collect();

    // A guess off the syndrome cannot be A, so non-convergence fails EC
    // validation even if the hashes happen to agree.
    let hash_ok = k0.verify(PadId::Ec, &string_message(&a_hat), g_ec).expect("fresh pad");
    if !hash_ok || matches!(decode, Some((false, _))) {
        let why = if hash_ok { "decoder did not converge" } else { "hash of the reconciled string differs" };
        ep.send(Frame::new(MsgType::Abort, vec![AbortReason::EcHashMismatch.code()]), 8)?;
        return Err(Stop(AbortReason::EcHashMismatch, why.into()));
    }
    events.omega_h = true;
    if !validate_bell(&scores, n, params.gamma_f64(), params.omega_thresh) {
        let lost = scores.iter().filter(|&&u| u == Score::Lost).count();
        ep.send(Frame::new(MsgType::Abort, vec![AbortReason::BellValidationFailed.code()]), 8)?;
        return Err(Stop(AbortReason::BellValidationFailed, format!("{lost} lost test rounds")));
    }
    events.omega_pe = true;

    let key = extract(params, k0, &a_hat)?;
    let g_b = k0.tag(PadId::B, &t_history).expect("fresh pad");
    ep.send(Frame::new(MsgType::TagB, g_b.to_bytes().to_vec()), 64)?;

    let fc = ep.recv(MsgType::ConfirmC, 1)?;
    let c = flag_payload(&fc)?;
    authed.extend(fc.to_bytes());
    let g_a = tag_payload(&ep.recv(MsgType::TagA, 64)?)?;
    let tag_ok = k0.verify(PadId::A, &authed, g_a).expect("fresh pad");
    let f = tag_ok && c;

    let flag = ep.send(Frame::new(MsgType::FlagF, vec![u8::from(f)]), 1)?;
    let g_f = k0.tag(PadId::F, &flag.to_bytes()).expect("fresh pad");
    ep.send(Frame::new(MsgType::TagF, g_f.to_bytes().to_vec()), 64)?;
    if !f {
        let why = if c { "TAG_A did not verify" } else { "Alice rejected TAG_B" };
        return Err(Stop(AbortReason::AuthFailed, why.into()));
    }
    events.omega_a = true;
    Ok(key)
}
