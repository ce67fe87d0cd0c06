//! The pre-shared key `K0` and its pad ledger.
//!
//! File layout: magic `DQK0`, version byte, then six segments in the order
//! `s_trev, s_vhash, d_ec, d_a, d_b, d_f`, each an 8-byte big-endian bit
//! count followed by the packed bits.

use std::io::{Read, Write};

use rand::Rng;
use thiserror::Error;

use super::{verify_tag, wc_tag, HashError, HashSeed, Tag64, SEED_BITS};
use crate::bits;

const MAGIC: &[u8; 4] = b"DQK0";
const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum K0Error {
    #[error("one-time pad {0:?} already spent")]
    PadReused(PadId),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error("malformed K0 file: {0}")]
    Format(String),
    #[error("refusing to store a key with spent pads")]
    SpentPads,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The four 64-bit one-time pads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadId {
    Ec,
    A,
    B,
    F,
}

impl PadId {
    pub const ALL: [PadId; 4] = [PadId::Ec, PadId::A, PadId::B, PadId::F];

    fn index(self) -> usize {
        self as usize
    }
}

/// Pre-shared key. Each party holds its own copy; pads are spent on use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedKeyK0 {
    s_trev: Vec<u8>,
    s_vhash: HashSeed,
    pads: [u64; 4],
    spent: [bool; 4],
}

impl SharedKeyK0 {
    pub fn new(s_trev: Vec<u8>, s_vhash: HashSeed, pads: [u64; 4]) -> Self {
        Self { s_trev, s_vhash, pads, spent: [false; 4] }
    }

    /// Fresh key with an extractor seed of `trev_bits` bits.
    pub fn generate<R: Rng + ?Sized>(trev_bits: usize, rng: &mut R) -> Self {
        let s_trev = (0..trev_bits).map(|_| rng.random_range(0..2u8)).collect();
        let s_vhash = HashSeed::random(rng);
        let pads = [rng.random(), rng.random(), rng.random(), rng.random()];
        Self::new(s_trev, s_vhash, pads)
    }

    pub fn extractor_seed(&self) -> &[u8] {
        &self.s_trev
    }

    pub fn hash_seed(&self) -> &HashSeed {
        &self.s_vhash
    }

    pub fn is_spent(&self, pad: PadId) -> bool {
        self.spent[pad.index()]
    }

    /// Takes a pad out of the key; a second call is a hard error.
    pub fn spend(&mut self, pad: PadId) -> Result<u64, K0Error> {
        let i = pad.index();
        if self.spent[i] {
            return Err(K0Error::PadReused(pad));
        }
        self.spent[i] = true;
        Ok(self.pads[i])
    }

    /// Tags `message` with the given pad, spending it.
    pub fn tag(&mut self, pad: PadId, message: &[u8]) -> Result<Tag64, K0Error> {
        let k = self.spend(pad)?;
        Ok(wc_tag(&self.s_vhash, k, message)?)
    }

    /// Verifies a tag with the given pad, spending it.
    pub fn verify(&mut self, pad: PadId, message: &[u8], tag: Tag64) -> Result<bool, K0Error> {
        let k = self.spend(pad)?;
        Ok(verify_tag(&self.s_vhash, k, message, tag))
    }

    pub fn consumed_bits(&self) -> u64 {
        64 * self.spent.iter().filter(|&&s| s).count() as u64
    }

    pub fn reusable_bits(&self) -> u64 {
        (self.s_trev.len() + SEED_BITS) as u64
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), K0Error> {
        if self.spent.iter().any(|&s| s) {
            return Err(K0Error::SpentPads);
        }
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        bits::write_bits(&mut w, &self.s_trev)?;
        bits::write_bits(&mut w, &self.s_vhash.to_bits())?;
        for p in self.pads {
            let pad_bits = bits::unpack(&p.to_le_bytes(), 64).expect("8 bytes");
            bits::write_bits(&mut w, &pad_bits)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, K0Error> {
        let mut head = [0u8; 5];
        r.read_exact(&mut head)?;
        if &head[..4] != MAGIC {
            return Err(K0Error::Format("bad magic".into()));
        }
        if head[4] != VERSION {
            return Err(K0Error::Format(format!("unsupported version {}", head[4])));
        }
        let s_trev = bits::read_bits(&mut r)?;
        let s_vhash = HashSeed::from_bits(&bits::read_bits(&mut r)?)?;
        let mut pads = [0u64; 4];
        for p in &mut pads {
            let b = bits::read_bits(&mut r)?;
            if b.len() != 64 {
                return Err(K0Error::Format(format!("pad of {} bits", b.len())));
            }
            *p = u64::from_le_bytes(bits::pack(&b).try_into().expect("64 bits"));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(K0Error::Format("trailing bytes".into()));
        }
        Ok(Self::new(s_trev, s_vhash, pads))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), K0Error> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, K0Error> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
