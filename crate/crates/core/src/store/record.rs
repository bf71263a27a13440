//! Binary record framing shared by the embedded data file, the wire
//! protocol and snapshots.
//!
//! ```text
//! record   = hash[16] meta_len:u16 meta payload_len:u64 payload crc:u32
//! meta     = n_qubits:u32 interior:u32 kind:u8 flags:u8 [shots:u64]
//!            created_at_ms:i64 tag_len:u8 tag
//! ```
//!
//! Integers are big-endian. The hash is stored as its 16 ASCII hex digits.
//! The CRC-32 covers every byte of the record before it. Compact payloads
//! are one little-endian `f64`.

use crate::identity::{CacheKey, PayloadKind, HASH_LEN};

use super::{CacheEntry, Payload, StoreError};

const FLAG_SHOTS: u8 = 1;

/// Fixed bytes of a record around its tag and payload (no shots).
pub const RECORD_OVERHEAD: usize = HASH_LEN + 2 + (4 + 4 + 1 + 1 + 8 + 1) + 8 + 4;

pub fn encode_metadata(e: &CacheEntry) -> Vec<u8> {
    let tag = e.backend_tag.as_bytes();
    let mut m = Vec::with_capacity(27 + tag.len());
    m.extend_from_slice(&e.key.n_qubits.to_be_bytes());
    m.extend_from_slice(&e.key.interior_spiders.to_be_bytes());
    m.push(e.key.payload_kind.code());
    match e.shots {
        Some(s) => {
            m.push(FLAG_SHOTS);
            m.extend_from_slice(&s.to_be_bytes());
        }
        None => m.push(0),
    }
    m.extend_from_slice(&e.created_at_ms.to_be_bytes());
    m.push(tag.len() as u8);
    m.extend_from_slice(tag);
    m
}

pub fn encode_payload(p: &Payload) -> Vec<u8> {
    match p {
        Payload::Full(bytes) => bytes.clone(),
        Payload::Compact(x) => x.to_le_bytes().to_vec(),
    }
}

/// Appends the framed record for `e` to `out`.
pub fn encode_into(e: &CacheEntry, out: &mut Vec<u8>) {
    let start = out.len();
    let meta = encode_metadata(e);
    out.extend_from_slice(e.key.hash.as_bytes());
    out.extend_from_slice(&(meta.len() as u16).to_be_bytes());
    out.extend_from_slice(&meta);
    match &e.payload {
        Payload::Full(bytes) => {
            out.extend_from_slice(&(bytes.len() as u64).to_be_bytes());
            out.extend_from_slice(bytes);
        }
        Payload::Compact(x) => {
            out.extend_from_slice(&8u64.to_be_bytes());
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out[start..]);
    out.extend_from_slice(&crc.to_be_bytes());
}

pub fn encode(e: &CacheEntry) -> Vec<u8> {
    let mut out = Vec::new();
    encode_into(e, &mut out);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.buf.len())
            .ok_or(StoreError::Truncated)?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], StoreError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, StoreError> {
        Ok(self.take(1)?[0])
    }
}

fn corrupt(msg: impl Into<String>) -> StoreError {
    StoreError::Corrupt(msg.into())
}

/// Length of the record at the front of `buf` after checking its CRC, without
/// decoding the fields.
pub fn frame_len(buf: &[u8]) -> Result<usize, StoreError> {
    let mut r = Reader { buf, pos: 0 };
    r.take(HASH_LEN)?;
    let meta_len = u16::from_be_bytes(r.array()?) as usize;
    r.take(meta_len)?;
    let payload_len = u64::from_be_bytes(r.array()?);
    r.take(usize::try_from(payload_len).map_err(|_| StoreError::Truncated)?)?;
    let body = r.pos;
    let crc = u32::from_be_bytes(r.array()?);
    if crc32fast::hash(&buf[..body]) != crc {
        return Err(StoreError::Checksum);
    }
    Ok(r.pos)
}

/// Decodes the record at the front of `buf`; returns it and its length.
pub fn decode(buf: &[u8]) -> Result<(CacheEntry, usize), StoreError> {
    let len = frame_len(buf)?;
    let mut r = Reader {
        buf: &buf[..len],
        pos: 0,
    };
    let hash = std::str::from_utf8(r.take(HASH_LEN)?)
        .map_err(|_| corrupt("hash is not ASCII"))?
        .to_string();
    let meta_len = u16::from_be_bytes(r.array()?) as usize;
    let meta_end = r.pos + meta_len;
    let n_qubits = u32::from_be_bytes(r.array()?);
    let interior_spiders = u32::from_be_bytes(r.array()?);
    let kind_code = r.u8()?;
    let payload_kind = PayloadKind::from_code(kind_code)
        .ok_or_else(|| corrupt(format!("payload kind {kind_code}")))?;
    let flags = r.u8()?;
    let shots = if flags & FLAG_SHOTS != 0 {
        Some(u64::from_be_bytes(r.array()?))
    } else {
        None
    };
    let created_at_ms = i64::from_be_bytes(r.array()?);
    let tag_len = r.u8()? as usize;
    let backend_tag =
        String::from_utf8(r.take(tag_len)?.to_vec()).map_err(|_| corrupt("tag is not UTF-8"))?;
    if r.pos != meta_end {
        return Err(corrupt("metadata length disagrees with its fields"));
    }
    let payload_len = u64::from_be_bytes(r.array()?) as usize;
    let bytes = r.take(payload_len)?;
    let payload = match payload_kind {
        PayloadKind::Full => Payload::Full(bytes.to_vec()),
        PayloadKind::Compact => {
            let arr: [u8; 8] = bytes
                .try_into()
                .map_err(|_| corrupt("compact payload is not 8 bytes"))?;
            Payload::Compact(f64::from_le_bytes(arr))
        }
    };
    let key = CacheKey {
        hash,
        n_qubits,
        interior_spiders,
        payload_kind,
    };
    let entry = CacheEntry {
        key,
        payload,
        backend_tag,
        shots,
        created_at_ms,
    };
    entry.validate()?;
    Ok((entry, len))
}

/// Key part of a record (hash and payload kind) read without a CRC check.
pub fn peek_id(buf: &[u8]) -> Result<(String, PayloadKind), StoreError> {
    let mut r = Reader { buf, pos: 0 };
    let hash =
        String::from_utf8(r.take(HASH_LEN)?.to_vec()).map_err(|_| corrupt("hash is not ASCII"))?;
    r.take(2 + 8)?;
    let kind = PayloadKind::from_code(r.u8()?).ok_or_else(|| corrupt("payload kind"))?;
    Ok((hash, kind))
}
