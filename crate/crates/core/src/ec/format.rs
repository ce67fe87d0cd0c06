//! Binary code files.
//!
//! Layout: magic `SCLD`, version byte, then varints `n`, `m`, the seven
//! lineage fields, each row as `degree, first column, deltas...`, and finally
//! the shuffle: tag `0` + 8-byte big-endian seed, or tag `1` + `n` varints.

use std::io::{Read, Write};

use super::code::shuffle_from_seed;
use super::{EcError, Lineage, ScLdpcCode};

const MAGIC: &[u8; 4] = b"SCLD";
const VERSION: u8 = 1;

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn byte(&mut self) -> Result<u8, EcError> {
        let b = *self.buf.get(self.pos).ok_or_else(|| EcError::Format("truncated".into()))?;
        self.pos += 1;
        Ok(b)
    }

    fn varint(&mut self) -> Result<u64, EcError> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            v |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(EcError::Format("varint too long".into()))
    }

    fn u32(&mut self) -> Result<u32, EcError> {
        u32::try_from(self.varint()?).map_err(|_| EcError::Format("field exceeds u32".into()))
    }
}

impl ScLdpcCode {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 2 * self.num_edges());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        put_varint(&mut out, self.n as u64);
        put_varint(&mut out, self.m() as u64);
        let l = &self.lineage;
        for f in [l.d_v, l.d_c, l.coupling, l.width, l.lift, l.removed_vars, l.merged_checks] {
            put_varint(&mut out, u64::from(f));
        }
        for r in 0..self.m() {
            let row = self.row(r);
            put_varint(&mut out, row.len() as u64);
            let mut prev = 0u32;
            for (k, &c) in row.iter().enumerate() {
                put_varint(&mut out, u64::from(if k == 0 { c } else { c - prev }));
                prev = c;
            }
        }
        match self.shuffle_seed {
            Some(seed) => {
                out.push(0);
                out.extend_from_slice(&seed.to_be_bytes());
            }
            None => {
                out.push(1);
                for &s in &self.shuffle {
                    put_varint(&mut out, u64::from(s));
                }
            }
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, EcError> {
        if buf.len() < 5 || &buf[..4] != MAGIC {
            return Err(EcError::Format("bad magic".into()));
        }
        if buf[4] != VERSION {
            return Err(EcError::Format(format!("unsupported version {}", buf[4])));
        }
        let mut cur = Cursor { buf, pos: 5 };
        let n = cur.varint()? as usize;
        let m = cur.varint()? as usize;
        let mut f = [0u32; 7];
        for x in &mut f {
            *x = cur.u32()?;
        }
        let lineage = Lineage {
            d_v: f[0],
            d_c: f[1],
            coupling: f[2],
            width: f[3],
            lift: f[4],
            removed_vars: f[5],
            merged_checks: f[6],
        };
        if m > buf.len() {
            return Err(EcError::Format("row count exceeds file size".into()));
        }
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let deg = cur.varint()? as usize;
            if deg > n {
                return Err(EcError::Format("row degree exceeds n".into()));
            }
            let mut row = Vec::with_capacity(deg);
            let mut prev = 0u32;
            for k in 0..deg {
                let d = cur.u32()?;
                let c = if k == 0 { d } else { prev.checked_add(d).ok_or_else(|| EcError::Format("overflow".into()))? };
                row.push(c);
                prev = c;
            }
            rows.push(row);
        }
        let (shuffle, seed) = match cur.byte()? {
            0 => {
                let bytes: [u8; 8] = buf
                    .get(cur.pos..cur.pos + 8)
                    .and_then(|s| s.try_into().ok())
                    .ok_or_else(|| EcError::Format("truncated seed".into()))?;
                cur.pos += 8;
                let seed = u64::from_be_bytes(bytes);
                (shuffle_from_seed(n, seed), Some(seed))
            }
            1 => ((0..n).map(|_| cur.u32()).collect::<Result<Vec<_>, _>>()?, None),
            t => return Err(EcError::Format(format!("unknown shuffle tag {t}"))),
        };
        if cur.pos != buf.len() {
            return Err(EcError::Format("trailing bytes".into()));
        }
        Self::assemble(n, &rows, lineage, shuffle, seed).map_err(|e| EcError::Format(e.to_string()))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, EcError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf).map_err(|e| EcError::Format(e.to_string()))?;
        Self::from_bytes(&buf)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_for_rate, CodeConfig};
    use crate::rng::seeded;

    use super::*;

    #[test]
    fn round_trip_seeded_and_explicit_shuffle() {
        let code = build_for_rate(3000, 1100, &CodeConfig::default(), &mut seeded(2)).unwrap();
        let back = ScLdpcCode::from_bytes(&code.to_bytes()).unwrap();
        assert_eq!(back, code);
        let mut p: Vec<u32> = (0..3000).rev().collect();
        p.swap(0, 5);
        let custom = code.with_shuffle(p).unwrap();
        assert_eq!(ScLdpcCode::from_bytes(&custom.to_bytes()).unwrap(), custom);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let code = build_for_rate(1000, 400, &CodeConfig::default(), &mut seeded(2)).unwrap();
        let bytes = code.to_bytes();
        assert!(ScLdpcCode::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(ScLdpcCode::from_bytes(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(ScLdpcCode::from_bytes(&extra).is_err());
    }
}
