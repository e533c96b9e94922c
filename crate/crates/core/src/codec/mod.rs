//! Lorenzo prediction, bound-aware quantization and the `.tsz` container.

mod huffman;
mod stream;

use thiserror::Error;

use crate::bounds::BoundsField;
use crate::field::{Dims, FieldError, ScalarField, ValueRange, VertexId};

pub use huffman::{huffman_decode, huffman_encode};
pub use stream::{Backend, CompressedStream, MAGIC, VERSION};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite value at vertex {0}")]
    NonFinite(VertexId),
    #[error("bounds cover {bounds} vertices but the field has {field}")]
    BoundsMismatch { bounds: usize, field: usize },
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported stream version {0}")]
    UnsupportedVersion(u8),
    #[error("invalid header: {0}")]
    Header(String),
    #[error("truncated stream while reading {0}")]
    Truncated(&'static str),
    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("inconsistent Huffman table: {0}")]
    HuffmanTable(String),
    #[error("unknown back-end id {0}")]
    UnknownBackend(u8),
    #[error("back-end failure: {0}")]
    Backend(#[source] std::io::Error),
    #[error("payload inconsistent: {0}")]
    Payload(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Quantizer settings: error bound `xi` (also the spacing between
/// candidates) and code width `m` in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationConfig {
    pub xi: f64,
    pub m: u8,
}

impl QuantizationConfig {
    pub const DEFAULT_M: u8 = 16;
    pub const MAX_M: u8 = 24;

    pub fn new(xi: f64) -> Self {
        Self { xi, m: Self::DEFAULT_M }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(CodecError::Config(format!("error bound must be positive, got {}", self.xi)));
        }
        if !(2..=Self::MAX_M).contains(&self.m) {
            return Err(CodecError::Config(format!("code width must be in 2..={}, got {}", Self::MAX_M, self.m)));
        }
        Ok(())
    }

    fn half(&self) -> i64 {
        1 << (self.m - 1)
    }
}

/// Reconstruction for offset `j` from prediction `p`, at storage precision.
#[inline]
fn candidate(p: f64, j: i64, xi: f64) -> f64 {
    ((p + j as f64 * xi) as f32) as f64
}

/// Inclusion-exclusion prediction from the already decoded corner
/// neighbors of `v`; neighbors outside the grid count as zero.
pub fn lorenzo_predict(dims: Dims, decoded: &[f64], v: VertexId) -> f64 {
    let c = dims.coords(v);
    let rank = dims.rank();
    let mut p = 0.0;
    for mask in 1u32..(1 << rank) {
        let mut q = c;
        let mut inside = true;
        for (axis, qa) in q.iter_mut().enumerate().take(rank) {
            if mask >> axis & 1 == 1 {
                if *qa == 0 {
                    inside = false;
                    break;
                }
                *qa -= 1;
            }
        }
        if inside {
            let term = decoded[dims.index(q)];
            if mask.count_ones() % 2 == 1 {
                p += term;
            } else {
                p -= term;
            }
        }
    }
    p
}

/// Codes, exact values and the reconstruction they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub codes: Vec<u32>,
    pub exact: Vec<f32>,
    pub decoded: Vec<f64>,
}

impl Quantized {
    pub fn unpredictable(&self) -> usize {
        self.exact.len()
    }
}

/// Picks a code per vertex in row-major order. A candidate is accepted when
/// it is within `xi` of the value and lies strictly inside the vertex's
/// bounds, or equals the value exactly; otherwise the vertex is stored
/// exactly under code 0.
pub fn quantize(field: &ScalarField, bounds: &BoundsField, cfg: QuantizationConfig) -> Result<Quantized, CodecError> {
    cfg.validate()?;
    if bounds.len() != field.len() {
        return Err(CodecError::BoundsMismatch {
            bounds: bounds.len(),
            field: field.len(),
        });
    }
    if let Some(v) = field.values().iter().position(|x| !x.is_finite()) {
        return Err(CodecError::NonFinite(v));
    }
    let dims = field.dims();
    let (xi, half) = (cfg.xi, cfg.half());
    let n = field.len();
    let mut codes = Vec::with_capacity(n);
    let mut exact = Vec::new();
    let mut decoded = vec![0.0; n];
    for v in 0..n {
        let f = field.value(v);
        let (l, u) = bounds.get(v);
        let p = lorenzo_predict(dims, &decoded, v);
        let accept = |cand: f64| (cand - f).abs() <= xi && ((l < cand && cand < u) || cand == f);
        let t = (f - p) / xi;
        let mut chosen = None;
        if t.abs() < half as f64 {
            let lo = t.floor() as i64;
            let (a, b) = (candidate(p, lo, xi), candidate(p, lo + 1, xi));
            let order = if (a - f).abs() <= (b - f).abs() { [(lo, a), (lo + 1, b)] } else { [(lo + 1, b), (lo, a)] };
            chosen = order
                .into_iter()
                .find(|&(j, cand)| j > -half && j < half && accept(cand));
        }
        match chosen {
            Some((j, cand)) => {
                codes.push((j + half) as u32);
                decoded[v] = cand;
            }
            None => {
                codes.push(0);
                exact.push(f as f32);
                decoded[v] = f as f32 as f64;
            }
        }
    }
    Ok(Quantized { codes, exact, decoded })
}

/// Inverse of [`quantize`]; needs no bounds.
pub fn reconstruct(dims: Dims, codes: &[u32], exact: &[f32], cfg: QuantizationConfig) -> Result<Vec<f64>, CodecError> {
    let n = dims.len();
    if codes.len() != n {
        return Err(CodecError::Payload(format!("{} codes for {} vertices", codes.len(), n)));
    }
    let zeros = codes.iter().filter(|&&c| c == 0).count();
    if zeros != exact.len() {
        return Err(CodecError::Payload(format!("{zeros} unpredictable codes but {} exact values", exact.len())));
    }
    let half = cfg.half();
    let mut exact = exact.iter();
    let mut decoded = vec![0.0; n];
    for v in 0..n {
        decoded[v] = match codes[v] {
            0 => *exact.next().unwrap() as f64,
            c => candidate(lorenzo_predict(dims, &decoded, v), c as i64 - half, cfg.xi),
        };
    }
    Ok(decoded)
}

/// Quantizes and packs a field. The stream records the field's original
/// range (identity when the field was never normalized) and `eps = 0`.
pub fn encode_field(field: &ScalarField, bounds: &BoundsField, cfg: QuantizationConfig) -> Result<CompressedStream, CodecError> {
    let q = quantize(field, bounds, cfg)?;
    let range = field.original_range().unwrap_or(ValueRange { min: 0.0, max: 1.0 });
    Ok(CompressedStream::pack(field.dims(), cfg, 0.0, range, &q.codes, &q.exact, Backend::Deflate))
}

/// Decodes a stream back to the normalized scale.
pub fn decode_field(stream: &CompressedStream) -> Result<ScalarField, CodecError> {
    let (codes, exact) = stream.unpack()?;
    let values = reconstruct(stream.dims, &codes, &exact, stream.config())?;
    Ok(ScalarField::from_normalized(stream.dims, values, stream.original_range)?)
}

/// Little-endian cursor over a byte slice.
pub(crate) struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub(crate) fn bytes(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CodecError> {
        if self.remaining() < n {
            return Err(CodecError::Truncated(what));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], CodecError> {
        Ok(self.bytes(N, what)?.try_into().unwrap())
    }

    pub(crate) fn u8(&mut self, what: &'static str) -> Result<u8, CodecError> {
        Ok(self.array::<1>(what)?[0])
    }

    pub(crate) fn u32(&mut self, what: &'static str) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.array(what)?))
    }

    pub(crate) fn u64(&mut self, what: &'static str) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.array(what)?))
    }

    pub(crate) fn f32(&mut self, what: &'static str) -> Result<f32, CodecError> {
        Ok(f32::from_le_bytes(self.array(what)?))
    }

    pub(crate) fn f64(&mut self, what: &'static str) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.array(what)?))
    }
}
