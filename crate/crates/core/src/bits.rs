//! Bit strings and their packed encodings.
//!
//! Internally bits are kept one per byte (`0` or `1`), which keeps the decoder
//! and the protocol bookkeeping simple. On the wire and on disk they are packed
//! LSB-first: bit `i` lives in byte `i / 8` at position `i % 8`.
//!
//! Key and seed files carry an 8-byte big-endian bit count followed by the
//! packed bytes.

use std::io::{self, Read, Write};
use std::path::Path;

/// Packs a slice of 0/1 bytes LSB-first.
pub fn pack(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (i % 8);
    }
    out
}

/// Unpacks `len` bits from LSB-first bytes.
///
/// Returns `None` when `bytes` is too short to hold `len` bits.
pub fn unpack(bytes: &[u8], len: usize) -> Option<Vec<u8>> {
    if bytes.len() * 8 < len {
        return None;
    }
    Some((0..len).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect())
}

/// XOR of two equal-length bit strings.
pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len(), "xor of unequal lengths");
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Parses a hex string into 0/1 bits, LSB-first within each byte.
pub fn from_hex(hex: &str, len: Option<usize>) -> Option<Vec<u8>> {
    let hex = hex.trim();
    if hex.len() % 2 != 0 {
        return None;
    }
    let bytes: Option<Vec<u8>> = (0..hex.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&hex[i..i + 2], 16).ok())
        .collect();
    let bytes = bytes?;
    unpack(&bytes, len.unwrap_or(bytes.len() * 8))
}

/// Hex encoding of the packed form.
pub fn to_hex(bits: &[u8]) -> String {
    pack(bits).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes a bit string with its 8-byte bit-count header.
pub fn write_bits<W: Write>(mut w: W, bits: &[u8]) -> io::Result<()> {
    w.write_all(&(bits.len() as u64).to_be_bytes())?;
    w.write_all(&pack(bits))
}

/// Reads a bit string written by [`write_bits`].
pub fn read_bits<R: Read>(mut r: R) -> io::Result<Vec<u8>> {
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let len = usize::try_from(u64::from_be_bytes(header))
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "bit count overflows usize"))?;
    let mut body = vec![0u8; len.div_ceil(8)];
    r.read_exact(&mut body)?;
    unpack(&body, len).ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "short body"))
}

pub fn write_bits_file(path: &Path, bits: &[u8]) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    write_bits(&mut w, bits)?;
    w.flush()
}

pub fn read_bits_file(path: &Path) -> io::Result<Vec<u8>> {
    let f = std::fs::File::open(path)?;
    read_bits(io::BufReader::new(f))
}
