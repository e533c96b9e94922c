//! The `.tsz` container.
//!
//! ```text
//! "TSZ1" | version u8 | rank u8 | dims rank*u64 | xi f64 | eps f64 | m u8
//!        | orig_min f32 | orig_max f32 | backend u8 | payload_len u64 | payload
//! ```
//!
//! All integers and floats are little-endian. The payload, once passed back
//! through the back-end, holds the Huffman section for the codes followed by
//! a `u64` count of exact values and the values as `f32`.

use std::io::{Read, Write};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;

use super::huffman::huffman_decode_from;
use super::{huffman_encode, CodecError, QuantizationConfig, Reader};
use crate::field::{Dims, ValueRange};

pub const MAGIC: [u8; 4] = *b"TSZ1";
pub const VERSION: u8 = 1;

/// Lossless stage applied to the whole payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    None,
    Deflate,
}

impl Backend {
    pub fn id(self) -> u8 {
        match self {
            Backend::None => 0,
            Backend::Deflate => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Self, CodecError> {
        match id {
            0 => Ok(Backend::None),
            1 => Ok(Backend::Deflate),
            other => Err(CodecError::UnknownBackend(other)),
        }
    }

    pub fn compress(self, data: &[u8]) -> Vec<u8> {
        match self {
            Backend::None => data.to_vec(),
            Backend::Deflate => {
                let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
                enc.write_all(data).expect("writing to memory");
                enc.finish().expect("writing to memory")
            }
        }
    }

    pub fn decompress(self, data: &[u8]) -> Result<Vec<u8>, CodecError> {
        match self {
            Backend::None => Ok(data.to_vec()),
            Backend::Deflate => {
                let mut out = Vec::new();
                DeflateDecoder::new(data).read_to_end(&mut out).map_err(CodecError::Backend)?;
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedStream {
    pub dims: Dims,
    pub xi: f64,
    pub eps: f64,
    pub m: u8,
    /// Range used to map decoded values back from the normalized scale.
    pub original_range: ValueRange,
    pub backend: Backend,
    /// Back-end compressed payload.
    pub payload: Vec<u8>,
}

impl CompressedStream {
    pub(crate) fn pack(
        dims: Dims,
        cfg: QuantizationConfig,
        eps: f64,
        range: ValueRange,
        codes: &[u32],
        exact: &[f32],
        backend: Backend,
    ) -> Self {
        let mut raw = huffman_encode(codes, cfg.m);
        raw.extend_from_slice(&(exact.len() as u64).to_le_bytes());
        for x in exact {
            raw.extend_from_slice(&x.to_le_bytes());
        }
        Self {
            dims,
            xi: cfg.xi,
            eps,
            m: cfg.m,
            original_range: ValueRange {
                min: range.min as f32 as f64,
                max: range.max as f32 as f64,
            },
            backend,
            payload: backend.compress(&raw),
        }
    }

    pub fn config(&self) -> QuantizationConfig {
        QuantizationConfig { xi: self.xi, m: self.m }
    }

    /// Codes and exact values held in the payload.
    pub fn unpack(&self) -> Result<(Vec<u32>, Vec<f32>), CodecError> {
        let raw = self.backend.decompress(&self.payload)?;
        let mut r = Reader::new(&raw);
        let codes = huffman_decode_from(&mut r, self.m)?;
        let count = r.u64("exact value count")?;
        if count > (r.remaining() / 4) as u64 {
            return Err(CodecError::Truncated("exact values"));
        }
        let exact = (0..count).map(|_| r.f32("exact values")).collect::<Result<Vec<_>, _>>()?;
        if r.remaining() != 0 {
            return Err(CodecError::TrailingBytes(r.remaining()));
        }
        Ok((codes, exact))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.dims.rank() as u8);
        for &e in self.dims.extents() {
            out.extend_from_slice(&(e as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.xi.to_le_bytes());
        out.extend_from_slice(&self.eps.to_le_bytes());
        out.push(self.m);
        out.extend_from_slice(&(self.original_range.min as f32).to_le_bytes());
        out.extend_from_slice(&(self.original_range.max as f32).to_le_bytes());
        out.push(self.backend.id());
        out.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let magic: [u8; 4] = r.bytes(4, "magic")?.try_into().unwrap();
        if magic != MAGIC {
            return Err(CodecError::BadMagic(magic));
        }
        let version = r.u8("version")?;
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        let rank = r.u8("rank")? as usize;
        if rank != 2 && rank != 3 {
            return Err(CodecError::Header(format!("rank {rank}")));
        }
        let mut extents = Vec::with_capacity(rank);
        for _ in 0..rank {
            let e = r.u64("dims")?;
            extents.push(usize::try_from(e).map_err(|_| CodecError::Header(format!("extent {e}")))?);
        }
        let total = extents.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e));
        if total.is_none() {
            return Err(CodecError::Header(format!("grid {extents:?} too large")));
        }
        let dims = Dims::new(&extents).map_err(|e| CodecError::Header(e.to_string()))?;
        let xi = r.f64("xi")?;
        let eps = r.f64("eps")?;
        let m = r.u8("m")?;
        let config = QuantizationConfig { xi, m };
        config.validate().map_err(|e| CodecError::Header(e.to_string()))?;
        let min = r.f32("original range")? as f64;
        let max = r.f32("original range")? as f64;
        let backend = Backend::from_id(r.u8("backend")?)?;
        let len = r.u64("payload length")?;
        if len > r.remaining() as u64 {
            return Err(CodecError::Truncated("payload"));
        }
        let payload = r.bytes(len as usize, "payload")?.to_vec();
        if r.remaining() != 0 {
            return Err(CodecError::TrailingBytes(r.remaining()));
        }
        Ok(Self {
            dims,
            xi,
            eps,
            m,
            original_range: ValueRange { min, max },
            backend,
            payload,
        })
    }

    /// Serialized size in bytes.
    pub fn byte_len(&self) -> usize {
        4 + 1 + 1 + 8 * self.dims.rank() + 8 + 8 + 1 + 4 + 4 + 1 + 8 + self.payload.len()
    }
}
