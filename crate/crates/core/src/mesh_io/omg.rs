//! The OMG1 container: a 16-byte little-endian header followed by the raw
//! channel grid.
//!
//! ```text
//! 0..4    magic "OMG1"
//! 4..8    u32 resolution R
//! 8..12   u32 channel count (12)
//! 12..16  reserved, zero
//! 16..    R*R*12 f32, row-major, channel-interleaved
//! ```

use std::fs;
use std::path::Path;

use super::omage::{ObjectImage, CHANNELS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"OMG1";
pub const HEADER_LEN: usize = 16;

/// Total file size in bytes for an omage of resolution `r`.
pub fn omg_file_size(r: usize) -> usize {
    HEADER_LEN + r * r * CHANNELS * 4
}

pub fn encode_omage(img: &ObjectImage) -> Vec<u8> {
    let r = img.resolution();
    let mut out = Vec::with_capacity(omg_file_size(r));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(r as u32).to_le_bytes());
    out.extend_from_slice(&(CHANNELS as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_omage(bytes: &[u8]) -> Result<ObjectImage> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let r = word(4) as usize;
    let channels = word(8) as usize;
    if channels != CHANNELS {
        return Err(Error::Format(format!(
            "expected 12 channels, found {channels}"
        )));
    }
    if word(12) != 0 {
        return Err(Error::Format("reserved header word is not zero".into()));
    }
    let expected = r
        .checked_mul(r)
        .and_then(|n| n.checked_mul(CHANNELS * 4))
        .ok_or_else(|| Error::Format(format!("resolution {r} overflows")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "resolution {r} needs {expected} payload bytes, found {}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(ObjectImage::from_raw(r, data))
}

pub fn write_omage(img: &ObjectImage, path: &Path) -> Result<()> {
    fs::write(path, encode_omage(img)).map_err(|e| Error::io(path, e))
}

pub fn read_omage(path: &Path) -> Result<ObjectImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_omage(&bytes)
}
