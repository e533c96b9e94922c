//! Regular-grid scalar fields: storage, normalization, neighborhoods, raw I/O
//! and synthetic Gaussian-mixture generation.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Flat row-major index of a grid vertex.
pub type VertexId = usize;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("rank must be 2 or 3, got {0}")]
    Rank(usize),
    #[error("grid extents must be positive, got {0:?}")]
    Extent(Vec<usize>),
    #[error("expected {expected} samples for dims {dims:?}, got {actual}")]
    Length {
        dims: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("raw file {path}: expected {expected} bytes, found {actual}")]
    RawSize {
        path: String,
        expected: u64,
        actual: u64,
    },
    #[error("field dims {0:?} and {1:?} differ")]
    DimsMismatch(Vec<usize>, Vec<usize>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Extents of a 2D or 3D grid. Unused trailing axes have extent 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    rank: usize,
    extents: [usize; 3],
}

impl Dims {
    pub fn new(extents: &[usize]) -> Result<Self, FieldError> {
        if extents.len() != 2 && extents.len() != 3 {
            return Err(FieldError::Rank(extents.len()));
        }
        if extents.contains(&0) {
            return Err(FieldError::Extent(extents.to_vec()));
        }
        let mut e = [1; 3];
        e[..extents.len()].copy_from_slice(extents);
        Ok(Self {
            rank: extents.len(),
            extents: e,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.rank]
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of `v`; the third entry is 0 for 2D grids.
    #[inline]
    pub fn coords(&self, v: VertexId) -> [usize; 3] {
        let [_, n1, n2] = self.extents;
        [v / (n1 * n2), (v / n2) % n1, v % n2]
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> VertexId {
        let [_, n1, n2] = self.extents;
        (c[0] * n1 + c[1]) * n2 + c[2]
    }

    /// Offsets `{0,1}^rank \ {0}` and their negations: the edges of the
    /// Freudenthal triangulation whose diagonals point toward increasing
    /// coordinates.
    pub fn freudenthal_offsets(&self) -> Vec<[isize; 3]> {
        let mut out = Vec::new();
        for bits in 1..(1usize << self.rank) {
            let mut o = [0isize; 3];
            for (axis, slot) in o.iter_mut().enumerate().take(self.rank) {
                *slot = ((bits >> (self.rank - 1 - axis)) & 1) as isize;
            }
            out.push(o);
            out.push([-o[0], -o[1], -o[2]]);
        }
        out
    }

    #[inline]
    pub fn offset(&self, v: VertexId, o: [isize; 3]) -> Option<VertexId> {
        let c = self.coords(v);
        let mut n = [0usize; 3];
        for axis in 0..3 {
            let x = c[axis] as isize + o[axis];
            if x < 0 || x >= self.extents[axis] as isize {
                return None;
            }
            n[axis] = x as usize;
        }
        Some(self.index(n))
    }

    /// Neighbors of `v` in the Freudenthal triangulation, sorted by id.
    pub fn simplicial_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .freudenthal_offsets()
            .into_iter()
            .filter_map(|o| self.offset(v, o))
            .collect();
        out.sort_unstable();
        out
    }

    /// All vertices within Chebyshev distance `k` of `v` (including `v`),
    /// sorted by id.
    pub fn k_layer_neighborhood(&self, v: VertexId, k: usize) -> Vec<VertexId> {
        let c = self.coords(v);
        let lo = |a: usize| c[a].saturating_sub(k);
        let hi = |a: usize| (c[a] + k).min(self.extents[a] - 1);
        let mut out = Vec::new();
        for i in lo(0)..=hi(0) {
            for j in lo(1)..=hi(1) {
                for l in lo(2)..=hi(2) {
                    out.push(self.index([i, j, l]));
                }
            }
        }
        out
    }

    /// Chebyshev dilation of a vertex mask by `k` layers.
    pub fn dilate(&self, mask: &[bool], k: usize) -> Vec<bool> {
        let mut cur = mask.to_vec();
        if k == 0 {
            return cur;
        }
        for axis in 0..self.rank {
            let n = self.extents[axis];
            let stride: usize = self.extents[axis + 1..].iter().product();
            let mut next = vec![false; cur.len()];
            for start in 0..cur.len() {
                if (start / stride) % n != 0 {
                    continue;
                }
                // running count of set cells in the window [x-k, x+k]
                let at = |x: usize| start + x * stride;
                let mut count = 0usize;
                for x in 0..k.min(n - 1) + 1 {
                    count += cur[at(x)] as usize;
                }
                for x in 0..n {
                    next[at(x)] = count > 0;
                    if x + k + 1 < n {
                        count += cur[at(x + k + 1)] as usize;
                    }
                    if x >= k {
                        count -= cur[at(x - k)] as usize;
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

/// Affine range of the field before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub min: f64,
    pub max: f64,
}

impl ValueRange {
    pub fn is_degenerate(&self) -> bool {
        !(self.max > self.min)
    }
}

/// A scalar field sampled on a regular grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    dims: Dims,
    values: Vec<f64>,
    normalized: bool,
    original_range: Option<ValueRange>,
}

impl ScalarField {
    pub fn new(dims: Dims, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != dims.len() {
            return Err(FieldError::Length {
                dims: dims.extents().to_vec(),
                expected: dims.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            dims,
            values,
            normalized: false,
            original_range: None,
        })
    }

    /// Wraps values that are already on the normalized scale.
    pub fn from_normalized(
        dims: Dims,
        values: Vec<f64>,
        original_range: ValueRange,
    ) -> Result<Self, FieldError> {
        let mut f = Self::new(dims, values)?;
        f.normalized = true;
        f.original_range = Some(original_range);
        Ok(f)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.rank()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, v: VertexId) -> f64 {
        self.values[v]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn original_range(&self) -> Option<ValueRange> {
        self.original_range
    }

    pub fn range(&self) -> ValueRange {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &x in &self.values {
            min = min.min(x);
            max = max.max(x);
        }
        ValueRange { min, max }
    }

    /// `true` iff `a` precedes `b` in the tie-broken order on (value, id).
    #[inline]
    pub fn lower(&self, a: VertexId, b: VertexId) -> bool {
        let (fa, fb) = (self.values[a], self.values[b]);
        fa < fb || (fa == fb && a < b)
    }

    /// Vertex ids sorted ascending by (value, id).
    pub fn sorted_vertices(&self) -> Vec<VertexId> {
        let mut order: Vec<VertexId> = (0..self.len()).collect();
        order.sort_unstable_by(|&a, &b| self.values[a].total_cmp(&self.values[b]).then(a.cmp(&b)));
        order
    }

    /// Maps values affinely onto `[0, 1]`, rounding each result to 32-bit
    /// precision so the normalized samples are exactly storable. Constant
    /// fields map to all zeros.
    pub fn normalize(&self) -> ScalarField {
        let range = self.range();
        let values = if range.is_degenerate() {
            log::warn!("constant field (value {}), normalizing to zeros", range.min);
            vec![0.0; self.len()]
        } else {
            let span = range.max - range.min;
            self.values
                .iter()
                .map(|&x| (((x - range.min) / span) as f32) as f64)
                .collect()
        };
        ScalarField {
            dims: self.dims,
            values,
            normalized: true,
            original_range: Some(range),
        }
    }

    /// Inverse of [`normalize`](Self::normalize) given the recorded range.
    pub fn denormalize(&self, range: ValueRange) -> ScalarField {
        let span = range.max - range.min;
        let values = if range.is_degenerate() {
            vec![range.min; self.len()]
        } else {
            self.values.iter().map(|&x| range.min + x * span).collect()
        };
        ScalarField {
            dims: self.dims,
            values,
            normalized: false,
            original_range: None,
        }
    }

    pub fn k_layer_neighborhood(&self, v: VertexId, k: usize) -> Vec<VertexId> {
        self.dims.k_layer_neighborhood(v, k)
    }

    pub fn simplicial_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.dims.simplicial_neighbors(v)
    }

    /// Reads headerless little-endian `f32` samples in row-major order.
    pub fn load_raw(path: impl AsRef<Path>, dims: Dims) -> Result<Self, FieldError> {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        let expected = 4 * dims.len() as u64;
        if bytes.len() as u64 != expected {
            return Err(FieldError::RawSize {
                path: path.display().to_string(),
                expected,
                actual: bytes.len() as u64,
            });
        }
        let values = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        Self::new(dims, values)
    }

    pub fn to_raw_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 * self.len());
        for &x in &self.values {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
        out
    }

    pub fn save_raw(&self, path: impl AsRef<Path>) -> Result<(), FieldError> {
        fs::write(path, self.to_raw_bytes())?;
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64, FieldError> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<(), FieldError> {
        if self.dims != other.dims {
            return Err(FieldError::DimsMismatch(
                self.dims.extents().to_vec(),
                other.dims.extents().to_vec(),
            ));
        }
        Ok(())
    }
}

/// One isotropic Gaussian bump. `center` is in grid coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub center: Vec<f64>,
    pub amplitude: f64,
    pub spread: f64,
}

/// Draws `count` components with centers inside the grid, signed amplitudes
/// and spreads between 8% and 22% of the largest extent.
pub fn random_components(dims: Dims, count: usize, seed: u64) -> Vec<GaussianComponent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let largest = *dims.extents().iter().max().unwrap() as f64;
    (0..count)
        .map(|_| {
            let center = dims
                .extents()
                .iter()
                .map(|&n| rng.gen_range(0.1..0.9) * (n - 1) as f64)
                .collect();
            let magnitude = rng.gen_range(0.3..1.0);
            let amplitude = if rng.gen_bool(0.7) { magnitude } else { -magnitude };
            let spread = rng.gen_range(0.08..0.22) * largest;
            GaussianComponent {
                center,
                amplitude,
                spread,
            }
        })
        .collect()
}

/// Samples a sum of Gaussians at every grid vertex and normalizes the result.
pub fn generate_gaussian_mixture(dims: Dims, components: &[GaussianComponent]) -> ScalarField {
    let values = (0..dims.len())
        .map(|v| {
            let c = dims.coords(v);
            components
                .iter()
                .map(|g| {
                    let d2: f64 = g
                        .center
                        .iter()
                        .enumerate()
                        .map(|(axis, &x)| (c[axis] as f64 - x).powi(2))
                        .sum();
                    g.amplitude * (-d2 / (2.0 * g.spread * g.spread)).exp()
                })
                .sum()
        })
        .collect();
    ScalarField::new(dims, values)
        .expect("length matches dims")
        .normalize()
}

/// Random mixture of 3 to 6 components, fully determined by `seed`.
pub fn synthetic_field(dims: Dims, seed: u64) -> ScalarField {
    let count = 3 + (ChaCha8Rng::seed_from_u64(seed ^ 0x5eed).gen_range(0..4));
    generate_gaussian_mixture(dims, &random_components(dims, count, seed))
}
