//! Reliable ordered duplex channels between the parties.

use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use super::frame::{Frame, MsgType};
use super::ProtocolError;

pub trait Transport: Send {
    fn send(&mut self, frame: &Frame) -> Result<(), ProtocolError>;
    fn recv(&mut self) -> Result<Frame, ProtocolError>;
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&mut self, frame: &Frame) -> Result<(), ProtocolError> {
        (**self).send(frame)
    }

    fn recv(&mut self) -> Result<Frame, ProtocolError> {
        (**self).recv()
    }
}

/// In-process endpoint; frames travel as wire bytes.
pub struct InProcTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    timeout: Duration,
}

pub fn inproc_pair(timeout: Duration) -> (InProcTransport, InProcTransport) {
    let (a_tx, b_rx) = mpsc::channel();
    let (b_tx, a_rx) = mpsc::channel();
    (InProcTransport { tx: a_tx, rx: a_rx, timeout }, InProcTransport { tx: b_tx, rx: b_rx, timeout })
}

impl Transport for InProcTransport {
    fn send(&mut self, frame: &Frame) -> Result<(), ProtocolError> {
        self.tx.send(frame.to_bytes()).map_err(|_| ProtocolError::Channel("peer hung up".into()))
    }

    fn recv(&mut self) -> Result<Frame, ProtocolError> {
        match self.rx.recv_timeout(self.timeout) {
            Ok(b) => Frame::from_bytes(&b),
            Err(RecvTimeoutError::Timeout) => Err(ProtocolError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(ProtocolError::Channel("peer hung up".into())),
        }
    }
}

/// Framed TCP; every frame is flushed on send.
pub struct TcpTransport {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpTransport {
    pub fn from_stream(stream: TcpStream, timeout: Duration) -> Result<Self, ProtocolError> {
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(timeout))?;
        Ok(Self { reader: BufReader::new(stream.try_clone()?), writer: BufWriter::new(stream) })
    }

    /// Waits for one peer on `addr`.
    pub fn listen(addr: impl ToSocketAddrs, timeout: Duration) -> Result<Self, ProtocolError> {
        let (stream, _) = TcpListener::bind(addr)?.accept()?;
        Self::from_stream(stream, timeout)
    }

    /// Connects, retrying until `timeout` so the peers may start in any order.
    pub fn connect(addr: impl ToSocketAddrs + Clone, timeout: Duration) -> Result<Self, ProtocolError> {
        Self::from_stream(connect_retry(addr, timeout)?, timeout)
    }
}

pub(super) fn connect_retry(addr: impl ToSocketAddrs + Clone, timeout: Duration) -> Result<TcpStream, ProtocolError> {
    let start = std::time::Instant::now();
    loop {
        match TcpStream::connect(addr.clone()) {
            Ok(s) => return Ok(s),
            Err(e) if start.elapsed() >= timeout => return Err(e.into()),
            Err(_) => std::thread::sleep(Duration::from_millis(50)),
        }
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, frame: &Frame) -> Result<(), ProtocolError> {
        frame.write_to(&mut self.writer)?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv(&mut self) -> Result<Frame, ProtocolError> {
        Frame::read_from(&mut self.reader)
    }
}

/// Classical fault injected on outgoing frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flips bit `i` of the syndrome payload.
    FlipSyndromeBit(usize),
}

impl FromStr for Fault {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ProtocolError::Params(format!("unknown fault spec {s:?}; expected flip-syndrome-bit:<i>"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "flip-syndrome-bit" => Ok(Fault::FlipSyndromeBit(arg.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

pub struct FaultyTransport<T> {
    inner: T,
    fault: Fault,
}

impl<T: Transport> FaultyTransport<T> {
    pub fn new(inner: T, fault: Fault) -> Self {
        Self { inner, fault }
    }
}

impl<T: Transport> Transport for FaultyTransport<T> {
    fn send(&mut self, frame: &Frame) -> Result<(), ProtocolError> {
        match self.fault {
            Fault::FlipSyndromeBit(i) if frame.msg_type == MsgType::Syndrome && i / 8 < frame.payload.len() => {
                let mut f = frame.clone();
                f.payload[i / 8] ^= 1 << (i % 8);
                self.inner.send(&f)
            }
            _ => self.inner.send(frame),
        }
    }

    fn recv(&mut self) -> Result<Frame, ProtocolError> {
        self.inner.recv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inproc_round_trip_and_hangup() {
        let (mut a, mut b) = inproc_pair(Duration::from_secs(1));
        a.send(&Frame::new(MsgType::TagA, vec![9; 8])).unwrap();
        assert_eq!(b.recv().unwrap().payload, vec![9; 8]);
        drop(a);
        assert!(matches!(b.recv(), Err(ProtocolError::Channel(_))));
    }

    #[test]
    fn tcp_round_trip() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let h = std::thread::spawn(move || {
            let (s, _) = listener.accept().unwrap();
            let mut t = TcpTransport::from_stream(s, Duration::from_secs(5)).unwrap();
            let f = t.recv().unwrap();
            t.send(&f).unwrap();
        });
        let mut c = TcpTransport::connect(addr, Duration::from_secs(5)).unwrap();
        let f = Frame::new(MsgType::Syndrome, vec![1, 2, 3, 4]);
        c.send(&f).unwrap();
        assert_eq!(c.recv().unwrap(), f);
        h.join().unwrap();
    }

    #[test]
    fn fault_flips_exactly_one_syndrome_bit() {
        let (a, mut b) = inproc_pair(Duration::from_secs(1));
        let mut a = FaultyTransport::new(a, "flip-syndrome-bit:9".parse().unwrap());
        a.send(&Frame::new(MsgType::HashEc, vec![0; 2])).unwrap();
        a.send(&Frame::new(MsgType::Syndrome, vec![0; 2])).unwrap();
        assert_eq!(b.recv().unwrap().payload, vec![0, 0]);
        assert_eq!(b.recv().unwrap().payload, vec![0, 2]);
        assert!("flip:3".parse::<Fault>().is_err());
    }
}
