//! The two-party protocol: Alice and Bob as independent state machines over
//! a framed transport, with the devices behind a separate link.
//!
//! Frame order after the `n` per-round `ROUND_T` frames (B→A):
//! `BASES_X`, `SYNDROME`, `HASH_EC` (A→B); `TAG_B` (B→A); `CONFIRM_C`,
//! `TAG_A` (A→B); `FLAG_F`, `TAG_F` (B→A). When Bob aborts on the EC hash or
//! the Bell check he sends `ABORT` with the reason instead of `TAG_B`.
//!
//! Authenticated objects are canonical frame bytes: `TAG_B` covers every
//! `ROUND_T` frame, `TAG_A` covers the `BASES_X`, `SYNDROME`, `HASH_EC` and
//! `CONFIRM_C` frames, `TAG_F` covers the `FLAG_F` frame.

pub mod device;
pub mod frame;
mod party;
pub mod transport;

use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use num_rational::Ratio;
use thiserror::Error;

use crate::ec::{self, CodeConfig, DecoderPriors, EcError, ScLdpcCode};
use crate::hashing::{K0Error, PadId, SharedKeyK0};
use crate::keylen::{self, KeyLenError, KeyLengthBreakdown};
use crate::model::{self, DeviceModel, ModelError, Score};
use crate::rng::{derive_seed, seeded};
use crate::trevisan::{ExtractorParams, TrevisanError};

pub use device::{serve_devices, DeviceLink, DeviceWire, InProcWire, TcpWire};
pub use frame::{Direction, Frame, MsgType, Transcript};
pub use party::{run_alice, run_bob};
pub use transport::{inproc_pair, Fault, FaultyTransport, InProcTransport, TcpTransport, Transport};

/// Completeness margin in standard deviations used when deriving `ω_th`.
pub const THRESHOLD_SIGMAS: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("channel failure: {0}")]
    Channel(String),
    #[error("timed out waiting for the peer")]
    Timeout,
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("expected {expected}, got {got}")]
    Unexpected { expected: MsgType, got: MsgType },
    #[error("invalid protocol parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Ec(#[from] EcError),
    #[error(transparent)]
    Extractor(#[from] TrevisanError),
    #[error(transparent)]
    K0(#[from] K0Error),
    #[error(transparent)]
    KeyLen(#[from] KeyLenError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbortReason {
    EcHashMismatch,
    BellValidationFailed,
    AuthFailed,
    KeyActivationFailed,
    ChannelError,
}

impl AbortReason {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        use AbortReason::*;
        [EcHashMismatch, BellValidationFailed, AuthFailed, KeyActivationFailed, ChannelError].get(c as usize).copied()
    }
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Events {
    /// Bell validation passed.
    pub omega_pe: bool,
    /// EC hashes matched.
    pub omega_h: bool,
    /// Authentication and key activation passed.
    pub omega_a: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalanceSheet {
    pub consumed: u64,
    pub reusable: u64,
    pub generated: u64,
    pub net: i64,
}

pub fn balance_sheet(k0: &SharedKeyK0, generated: u64) -> BalanceSheet {
    let consumed = k0.consumed_bits();
    BalanceSheet { consumed, reusable: k0.reusable_bits(), generated, net: generated as i64 - consumed as i64 }
}

/// The new shared key: `K0` without its pads, followed by the fresh key.
pub fn extended_key(k0: &SharedKeyK0, key: &[u8]) -> Vec<u8> {
    let mut out = k0.extractor_seed().to_vec();
    out.extend(k0.hash_seed().to_bits());
    out.extend_from_slice(key);
    out
}

/// Largest tolerated number of lost test rounds, `⌊nγ(1 − ω_th)⌋`.
pub fn bell_bound(n: usize, gamma: f64, omega_thresh: f64) -> u64 {
    (n as f64 * gamma * (1.0 - omega_thresh)).floor().max(0.0) as u64
}

pub fn validate_bell(scores: &[Score], n: usize, gamma: f64, omega_thresh: f64) -> bool {
    let lost = scores.iter().filter(|&&u| u == Score::Lost).count() as u64;
    lost <= bell_bound(n, gamma, omega_thresh)
}

/// Public parameters, fixed before the first round.
#[derive(Debug, Clone)]
pub struct ProtocolParams {
    pub n: usize,
    pub gamma: Ratio<u64>,
    pub omega_thresh: f64,
    /// Syndrome length.
    pub m: usize,
    /// Target key length.
    pub ell: usize,
    pub eps_pa: f64,
    /// `None` when `ell = 0`.
    pub extractor: Option<ExtractorParams>,
    pub code: Arc<ScLdpcCode>,
    pub code_seed: u64,
    pub priors: DecoderPriors,
    pub max_iters: usize,
    pub timeout: Duration,
    /// Whether `ell` is covered by the key-length formula for these
    /// parameters. Demonstration runs may set a larger `ell`.
    pub certified: bool,
}

impl ProtocolParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        gamma: Ratio<u64>,
        omega_thresh: f64,
        m: usize,
        ell: usize,
        eps_pa: f64,
        priors: DecoderPriors,
        code_seed: u64,
    ) -> Result<Self, ProtocolError> {
        if *gamma.numer() == 0 || gamma >= Ratio::from_integer(1) {
            return Err(ProtocolError::Params(format!("γ = {gamma} outside (0,1)")));
        }
        if !(omega_thresh > 0.75 && omega_thresh <= keylen::OMEGA_MAX) {
            return Err(ProtocolError::Params(format!("ω_th = {omega_thresh} outside (3/4, ω_max]")));
        }
        let code = ec::build_for_rate(n, m, &CodeConfig::default(), &mut seeded(code_seed))?;
        let extractor = if ell > 0 { Some(ExtractorParams::plan(n, ell, eps_pa)?) } else { None };
        Ok(Self {
            n,
            gamma,
            omega_thresh,
            m,
            ell,
            eps_pa,
            extractor,
            code: Arc::new(code),
            code_seed,
            priors,
            max_iters: ec::DEFAULT_MAX_ITERS,
            timeout: Duration::from_secs(120),
            certified: false,
        })
    }

    /// Derives `ω_th`, `m` and the certified `ℓ` for an expected CHSH score
    /// `s` and QBER `q` at soundness `eps_snd`.
    pub fn derive(
        n: usize,
        gamma: Ratio<u64>,
        s: f64,
        q: f64,
        eps_snd: f64,
        code_seed: u64,
    ) -> Result<(Self, KeyLengthBreakdown), ProtocolError> {
        let g = *gamma.numer() as f64 / *gamma.denom() as f64;
        let omega_thresh = model::completeness_threshold((4.0 + s) / 8.0, g, n as f64, THRESHOLD_SIGMAS)?;
        let m = ec::syndrome_length(n as u64, g, s, q) as usize;
        let (sec, b) = keylen::optimize(n as u64, g, omega_thresh, m as u64, eps_snd)?;
        let priors = DecoderPriors::from_model(&DeviceModel::parametric(s, q)?)?;
        let mut p = Self::new(n, gamma, omega_thresh, m, b.ell as usize, sec.eps_pa, priors, code_seed)?;
        p.certified = true;
        Ok((p, b))
    }

    /// Replaces the target length; the result is certified only if `ell`
    /// does not exceed `certified_ell`.
    pub fn with_ell(mut self, ell: usize, certified_ell: usize) -> Result<Self, ProtocolError> {
        self.extractor = if ell > 0 { Some(ExtractorParams::plan(self.n, ell, self.eps_pa)?) } else { None };
        self.ell = ell;
        self.certified = ell <= certified_ell;
        Ok(self)
    }

    pub fn gamma_f64(&self) -> f64 {
        *self.gamma.numer() as f64 / *self.gamma.denom() as f64
    }

    /// Extractor seed length a fresh `K0` must carry.
    pub fn trev_seed_bits(&self) -> usize {
        self.extractor.map_or(0, |e| e.s)
    }

    fn check_k0(&self, k0: &SharedKeyK0) -> Result<(), ProtocolError> {
        if PadId::ALL.iter().any(|&p| k0.is_spent(p)) {
            return Err(ProtocolError::Params("K0 has spent pads".into()));
        }
        if k0.extractor_seed().len() != self.trev_seed_bits() {
            return Err(ProtocolError::Params(format!(
                "K0 extractor seed has {} bits, parameters need {}",
                k0.extractor_seed().len(),
                self.trev_seed_bits()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
}

/// What one party ends with.
#[derive(Debug, Clone)]
pub struct PartyOutcome {
    pub role: Role,
    pub result: Result<Vec<u8>, AbortReason>,
    /// Human-readable detail for aborts.
    pub detail: Option<String>,
    /// The party's copy of `K0` after the run, pads marked spent.
    pub k0: SharedKeyK0,
    pub transcript: Transcript,
    pub events: Events,
    /// Bob only: whether BP met the syndrome, and in how many iterations.
    pub decode: Option<(bool, usize)>,
}

impl PartyOutcome {
    pub fn balance(&self) -> BalanceSheet {
        balance_sheet(&self.k0, self.result.as_ref().map_or(0, |k| k.len() as u64))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Success { k_a: Vec<u8>, k_b: Vec<u8>, balance: BalanceSheet },
    Abort(AbortReason),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub events: Events,
    pub alice: PartyOutcome,
    pub bob: PartyOutcome,
}

impl RunOutcome {
    /// Alice's view of the exchanged frames.
    pub fn transcript(&self) -> &Transcript {
        &self.alice.transcript
    }

    pub fn is_success(&self) -> bool {
        matches!(self.status, RunStatus::Success { .. })
    }
}

/// Runs both parties and the devices in-process on separate threads.
pub fn run_protocol(
    params: &ProtocolParams,
    model: &DeviceModel,
    k0: &SharedKeyK0,
    seed: u64,
    fault: Option<Fault>,
) -> Result<RunOutcome, ProtocolError> {
    params.check_k0(k0)?;
    let (ta, tb) = inproc_pair(params.timeout);
    let ta: Box<dyn Transport> = match fault {
        Some(f) => Box::new(FaultyTransport::new(ta, f)),
        None => Box::new(ta),
    };
    let (wa, mut da) = device::inproc_wire(params.timeout);
    let (wb, mut db) = device::inproc_wire(params.timeout);
    let mut dev_rng = seeded(derive_seed(seed, "device"));
    let (alice, bob) = std::thread::scope(|s| {
        s.spawn(move || serve_devices(model, params.n, &mut da, &mut db, &mut dev_rng));
        let a = s.spawn(|| {
            run_alice(params, k0.clone(), ta, DeviceLink::new(wa), &mut seeded(derive_seed(seed, "alice")))
        });
        let b = s.spawn(|| run_bob(params, k0.clone(), tb, DeviceLink::new(wb), &mut seeded(derive_seed(seed, "bob"))));
        (a.join().expect("alice thread"), b.join().expect("bob thread"))
    });
    Ok(combine(alice, bob))
}

fn combine(alice: PartyOutcome, bob: PartyOutcome) -> RunOutcome {
    let events = Events {
        omega_pe: bob.events.omega_pe,
        omega_h: bob.events.omega_h,
        omega_a: bob.events.omega_a && alice.events.omega_a,
    };
    let status = match (&alice.result, &bob.result) {
        (Ok(k_a), Ok(k_b)) => RunStatus::Success { k_a: k_a.clone(), k_b: k_b.clone(), balance: alice.balance() },
        (_, Err(r)) => RunStatus::Abort(*r),
        (Err(r), _) => RunStatus::Abort(*r),
    };
    RunOutcome { status, events, alice, bob }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_validation_boundaries() {
        assert!(validate_bell(&[Score::NotTested; 100], 100, 0.05, 0.8));
        // Binary-exact values: 10⁴ · 1/16 · 3/16 = 117.1875.
        let (n, g, w) = (10_000, 0.0625, 0.8125);
        let bound = bell_bound(n, g, w);
        assert_eq!(bound, 117);
        let mut s = vec![Score::Lost; bound as usize];
        s.resize(n, Score::Won);
        assert!(validate_bell(&s, n, g, w));
        let ceil = (n as f64 * g * (1.0 - w)).ceil() as usize;
        let mut s = vec![Score::Lost; ceil + 1];
        s.resize(n, Score::NotTested);
        assert!(!validate_bell(&s, n, g, w));
        let mut s = vec![Score::Lost; bound as usize + 1];
        s.resize(n, Score::Won);
        assert!(!validate_bell(&s, n, g, w));
    }

    #[test]
    fn abort_codes_round_trip() {
        for c in 0..5 {
            assert_eq!(AbortReason::from_code(c).unwrap().code(), c);
        }
        assert!(AbortReason::from_code(5).is_none());
    }

    #[test]
    fn balance_counts_spent_pads() {
        let mut k0 = SharedKeyK0::generate(10, &mut seeded(1));
        assert_eq!(balance_sheet(&k0, 0).consumed, 0);
        k0.spend(PadId::Ec).unwrap();
        let b = balance_sheet(&k0, 100);
        assert_eq!((b.consumed, b.reusable, b.net), (64, 1290, 36));
        assert_eq!(extended_key(&k0, &[1, 0]).len(), 10 + 1280 + 2);
    }
}
