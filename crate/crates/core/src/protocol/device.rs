//! Simulated measurement devices.
//!
//! A third party holds the shared state: each round it takes Alice's and
//! Bob's settings and answers with jointly sampled outcomes. The link is
//! separate from the classical channel between the parties.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use crate::model::DeviceModel;
use crate::rng::SimRng;

use super::ProtocolError;

/// One byte each way per round.
pub trait DeviceWire: Send {
    fn put(&mut self, v: u8) -> Result<(), ProtocolError>;
    fn get(&mut self) -> Result<u8, ProtocolError>;
}

pub struct InProcWire {
    tx: Sender<u8>,
    rx: Receiver<u8>,
    timeout: Duration,
}

pub fn inproc_wire(timeout: Duration) -> (InProcWire, InProcWire) {
    let (a_tx, b_rx) = mpsc::channel();
    let (b_tx, a_rx) = mpsc::channel();
    (InProcWire { tx: a_tx, rx: a_rx, timeout }, InProcWire { tx: b_tx, rx: b_rx, timeout })
}

impl DeviceWire for InProcWire {
    fn put(&mut self, v: u8) -> Result<(), ProtocolError> {
        self.tx.send(v).map_err(|_| ProtocolError::Channel("device link closed".into()))
    }

    fn get(&mut self) -> Result<u8, ProtocolError> {
        match self.rx.recv_timeout(self.timeout) {
            Ok(v) => Ok(v),
            Err(RecvTimeoutError::Timeout) => Err(ProtocolError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(ProtocolError::Channel("device link closed".into())),
        }
    }
}

pub struct TcpWire(TcpStream);

impl TcpWire {
    pub fn listen(addr: impl ToSocketAddrs, timeout: Duration) -> Result<Self, ProtocolError> {
        Self::listen_on(TcpListener::bind(addr)?, timeout)
    }

    /// Accepts one connection on an already bound listener.
    pub fn listen_on(listener: TcpListener, timeout: Duration) -> Result<Self, ProtocolError> {
        let (s, _) = listener.accept()?;
        Self::from_stream(s, timeout)
    }

    pub fn connect(addr: impl ToSocketAddrs + Clone, timeout: Duration) -> Result<Self, ProtocolError> {
        Self::from_stream(super::transport::connect_retry(addr, timeout)?, timeout)
    }

    fn from_stream(s: TcpStream, timeout: Duration) -> Result<Self, ProtocolError> {
        s.set_nodelay(true)?;
        s.set_read_timeout(Some(timeout))?;
        Ok(Self(s))
    }
}

impl DeviceWire for TcpWire {
    fn put(&mut self, v: u8) -> Result<(), ProtocolError> {
        Ok(self.0.write_all(&[v])?)
    }

    fn get(&mut self) -> Result<u8, ProtocolError> {
        let mut b = [0u8];
        self.0.read_exact(&mut b)?;
        Ok(b[0])
    }
}

/// A party's handle on its device.
pub struct DeviceLink<W> {
    wire: W,
}

impl<W: DeviceWire> DeviceLink<W> {
    pub fn new(wire: W) -> Self {
        Self { wire }
    }

    /// Measures with the given setting and returns the outcome bit.
    pub fn measure(&mut self, setting: u8) -> Result<u8, ProtocolError> {
        self.wire.put(setting)?;
        self.wire.get()
    }
}

/// Runs the shared source for `n` rounds.
pub fn serve_devices<A: DeviceWire, B: DeviceWire>(
    model: &DeviceModel,
    n: usize,
    alice: &mut A,
    bob: &mut B,
    rng: &mut SimRng,
) -> Result<(), ProtocolError> {
    for _ in 0..n {
        let x = alice.get()?;
        let y = bob.get()?;
        let (a, b) = model
            .sample_outcomes(x, y, rng)
            .map_err(|e| ProtocolError::Channel(format!("device rejected settings ({x},{y}): {e}")))?;
        alice.put(a)?;
        bob.put(b)?;
    }
    Ok(())
}
