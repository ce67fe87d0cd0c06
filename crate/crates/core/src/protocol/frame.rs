//! Wire frames and the transcript.
//!
//! Wire format: 4-byte big-endian payload length, 1-byte type, payload.

use std::fmt;
use std::io::{Read, Write};

use super::ProtocolError;

/// Payloads above this are rejected before allocation.
pub const MAX_PAYLOAD: usize = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MsgType {
    RoundT = 1,
    BasesX = 2,
    Syndrome = 3,
    HashEc = 4,
    TagB = 5,
    ConfirmC = 6,
    TagA = 7,
    FlagF = 8,
    TagF = 9,
    /// Bob's notice that he aborted at step 7 or 8; carries the reason.
    Abort = 0x7f,
}

impl MsgType {
    pub fn from_u8(v: u8) -> Option<Self> {
        use MsgType::*;
        Some(match v {
            1 => RoundT,
            2 => BasesX,
            3 => Syndrome,
            4 => HashEc,
            5 => TagB,
            6 => ConfirmC,
            7 => TagA,
            8 => FlagF,
            9 => TagF,
            0x7f => Abort,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        use MsgType::*;
        match self {
            RoundT => "ROUND_T",
            BasesX => "BASES_X",
            Syndrome => "SYNDROME",
            HashEc => "HASH_EC",
            TagB => "TAG_B",
            ConfirmC => "CONFIRM_C",
            TagA => "TAG_A",
            FlagF => "FLAG_F",
            TagF => "TAG_F",
            Abort => "ABORT",
        }
    }

    /// Whether the frame's content counts towards the post-measurement
    /// leakage (`X` and `T` are conditioned on separately).
    pub fn leaks(self) -> bool {
        use MsgType::*;
        matches!(self, Syndrome | HashEc | TagB | ConfirmC | TagA | FlagF | TagF)
    }
}

impl fmt::Display for MsgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub msg_type: MsgType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(msg_type: MsgType, payload: Vec<u8>) -> Self {
        Self { msg_type, payload }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.push(self.msg_type as u8);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = buf;
        let f = Self::read_from(&mut r)?;
        if !r.is_empty() {
            return Err(ProtocolError::Malformed("trailing bytes after frame".into()));
        }
        Ok(f)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, ProtocolError> {
        let mut head = [0u8; 5];
        r.read_exact(&mut head)?;
        let len = u32::from_be_bytes(head[..4].try_into().unwrap()) as usize;
        if len > MAX_PAYLOAD {
            return Err(ProtocolError::Malformed(format!("payload of {len} bytes")));
        }
        let msg_type =
            MsgType::from_u8(head[4]).ok_or_else(|| ProtocolError::Malformed(format!("unknown type {}", head[4])))?;
        let mut payload = vec![0u8; len];
        r.read_exact(&mut payload)?;
        Ok(Self { msg_type, payload })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AliceToBob => "A->B",
            Direction::BobToAlice => "B->A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub dir: Direction,
    pub msg_type: MsgType,
    /// Size on the wire.
    pub bytes: usize,
    /// Information content of the payload in bits.
    pub bits: u64,
}

/// Frames as seen by one party, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
    pub leakage_bits: u64,
}

impl Transcript {
    pub fn record(&mut self, dir: Direction, frame: &Frame, bits: u64) {
        if frame.msg_type.leaks() {
            self.leakage_bits += bits;
        }
        self.entries.push(TranscriptEntry { dir, msg_type: frame.msg_type, bytes: frame.payload.len() + 5, bits });
    }

    /// One line per frame: `dir type bytes`.
    pub fn write_log<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.entries {
            writeln!(w, "{} {} {}", e.dir, e.msg_type, e.bytes)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip() {
        let f = Frame::new(MsgType::Syndrome, vec![1, 2, 3]);
        let b = f.to_bytes();
        assert_eq!(&b[..5], &[0, 0, 0, 3, 3]);
        assert_eq!(Frame::from_bytes(&b).unwrap(), f);
        assert!(Frame::from_bytes(&b[..6]).is_err());
        assert!(Frame::from_bytes(&[0, 0, 0, 0, 42]).is_err());
    }

    #[test]
    fn only_post_measurement_frames_leak() {
        let mut t = Transcript::default();
        t.record(Direction::BobToAlice, &Frame::new(MsgType::RoundT, vec![1]), 1);
        t.record(Direction::AliceToBob, &Frame::new(MsgType::BasesX, vec![0; 4]), 32);
        t.record(Direction::AliceToBob, &Frame::new(MsgType::HashEc, vec![0; 8]), 64);
        assert_eq!(t.leakage_bits, 64);
        let mut log = Vec::new();
        t.write_log(&mut log).unwrap();
        assert_eq!(String::from_utf8(log).unwrap().lines().nth(2), Some("A->B HASH_EC 13"));
    }
}
