//! Per-vertex admissible ranges for decoded values.

use thiserror::Error;

use crate::field::{ScalarField, VertexId};
use crate::topology::{ContourTree, Segment};
use crate::validate::FalseCase;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("tree covers {tree} vertices but the field has {field}")]
    SizeMismatch { tree: usize, field: usize },
    #[error("vertex {0} has no arc or node assignment")]
    Unassigned(VertexId),
}

/// Lower and upper admissible decoded value for every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsField {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundsField {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn get(&self, v: VertexId) -> (f64, f64) {
        (self.lower[v], self.upper[v])
    }

    /// Whether every value of `field` lies inside its range.
    pub fn contains(&self, field: &ScalarField) -> bool {
        field.len() == self.len()
            && field
                .values()
                .iter()
                .enumerate()
                .all(|(v, &x)| self.lower[v] <= x && x <= self.upper[v])
    }

    /// Number of vertices whose range differs from `other`.
    pub fn count_changed(&self, other: &BoundsField) -> usize {
        (0..self.len())
            .filter(|&v| self.lower[v] != other.lower[v] || self.upper[v] != other.upper[v])
            .count()
    }

    /// Narrows the range of `v`; never widens it.
    fn tighten(&mut self, v: VertexId, lo: f64, hi: f64) -> bool {
        let (l, u) = (self.lower[v].max(lo), self.upper[v].min(hi));
        let changed = l != self.lower[v] || u != self.upper[v];
        self.lower[v] = l;
        self.upper[v] = u;
        changed
    }
}

/// Every regular vertex takes the value range of its arc; critical vertices
/// are pinned to their value.
pub fn initialize_bounds(field: &ScalarField, tree: &ContourTree) -> Result<BoundsField, BoundsError> {
    let n = field.len();
    if tree.segmentation().len() != n {
        return Err(BoundsError::SizeMismatch {
            tree: tree.segmentation().len(),
            field: n,
        });
    }
    let mut lower = vec![f64::NAN; n];
    let mut upper = vec![f64::NAN; n];
    for (v, seg) in tree.segmentation().iter().enumerate() {
        let (lo, hi) = match *seg {
            Segment::Node(_) => (field.value(v), field.value(v)),
            Segment::Arc(a) if a < tree.arcs().len() => {
                let (hi, lo) = tree.arc_vertices(a);
                (field.value(lo), field.value(hi))
            }
            Segment::Arc(_) => return Err(BoundsError::Unassigned(v)),
        };
        lower[v] = lo;
        upper[v] = hi;
    }
    Ok(BoundsField { lower, upper })
}

/// Buckets of a region split by value rank, lowest first.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonePartition {
    pub buckets: Vec<Vec<VertexId>>,
    /// (min f, max f) per bucket.
    pub ranges: Vec<(f64, f64)>,
}

/// Sorts the region by (value, vertex) and cuts it into `parts` contiguous
/// buckets whose sizes differ by at most one, larger buckets first. Empty
/// buckets are dropped, so `parts` above the region size yields singletons.
pub fn partition_monotone(field: &ScalarField, region: &[VertexId], parts: usize) -> MonotonePartition {
    let mut sorted = region.to_vec();
    sorted.sort_unstable_by(|&a, &b| field.values()[a].total_cmp(&field.values()[b]).then(a.cmp(&b)));
    sorted.dedup();
    let parts = parts.max(1);
    let (base, extra) = (sorted.len() / parts, sorted.len() % parts);
    let mut buckets = Vec::with_capacity(parts);
    let mut ranges = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        if size == 0 {
            break;
        }
        let bucket = sorted[start..start + size].to_vec();
        ranges.push((field.value(bucket[0]), field.value(bucket[size - 1])));
        buckets.push(bucket);
        start += size;
    }
    MonotonePartition { buckets, ranges }
}

fn tighten_region(bounds: &mut BoundsField, field: &ScalarField, tree: &ContourTree, region: &[VertexId], k: usize) -> usize {
    let partition = partition_monotone(field, region, k + 1);
    let mut changed = 0;
    for (bucket, &(lo, hi)) in partition.buckets.iter().zip(&partition.ranges) {
        for &v in bucket {
            if !tree.is_critical(v) && bounds.tighten(v, lo, hi) {
                changed += 1;
            }
        }
    }
    changed
}

/// Tightens bounds around a spurious branch: the `k`-layer neighborhood of
/// its saddle joined with its pre-image in the decoded tree, cut into `k + 1`
/// buckets. `tree` is the simplified tree of the original field, whose
/// critical vertices stay pinned. Returns the number of vertices whose range
/// changed.
pub fn refine_for_false_positive(
    bounds: &mut BoundsField,
    field: &ScalarField,
    tree: &ContourTree,
    fp: &FalseCase,
    k: usize,
) -> usize {
    let mut region = field.k_layer_neighborhood(fp.saddle, k);
    region.extend_from_slice(&fp.region);
    tighten_region(bounds, field, tree, &region, k)
}

/// Tightens bounds around a missing or mistyped branch: its pre-image in the
/// original tree dilated by `k` layers, cut into `k + 1` buckets.
pub fn refine_for_false_negative_or_type(
    bounds: &mut BoundsField,
    field: &ScalarField,
    tree: &ContourTree,
    fc: &FalseCase,
    k: usize,
) -> usize {
    let mut mask = vec![false; field.len()];
    for &v in &fc.region {
        mask[v] = true;
    }
    let region: Vec<VertexId> = field
        .dims()
        .dilate(&mask, k)
        .iter()
        .enumerate()
        .filter_map(|(v, &inside)| inside.then_some(v))
        .collect();
    tighten_region(bounds, field, tree, &region, k)
}
