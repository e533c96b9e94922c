//! Signal-quality and persistence-diagram distances.

use std::collections::VecDeque;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::field::{FieldError, ScalarField};
use crate::topology::PersistenceDiagram;
use crate::validate::FalseCaseReport;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("byte counts must be positive (original {original}, compressed {compressed})")]
    ZeroSize { original: u64, compressed: u64 },
}

pub fn mse(f: &ScalarField, g: &ScalarField) -> Result<f64, MetricsError> {
    f.check_same_grid(g)?;
    let sum: f64 = f.values().iter().zip(g.values()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / f.len() as f64)
}

/// `20 log10(max f / sqrt(mse))`, with the peak taken from `f`. Identical
/// fields give `+inf`.
pub fn psnr(f: &ScalarField, g: &ScalarField) -> Result<f64, MetricsError> {
    let e = mse(f, g)?;
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (f.range().max / e.sqrt()).log10())
}

pub fn compression_ratio(original_bytes: u64, compressed_bytes: u64) -> Result<f64, MetricsError> {
    if original_bytes == 0 || compressed_bytes == 0 {
        return Err(MetricsError::ZeroSize {
            original: original_bytes,
            compressed: compressed_bytes,
        });
    }
    Ok(original_bytes as f64 / compressed_bytes as f64)
}

type Point = (f64, f64);

fn linf(a: Point, b: Point) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// L-infinity distance to the diagonal.
fn half_persistence(a: Point) -> f64 {
    (a.1 - a.0).abs() / 2.0
}

fn off_diagonal(d: &PersistenceDiagram) -> Vec<Point> {
    d.pairs.iter().copied().filter(|p| p.0 != p.1).collect()
}

/// Maximum bipartite matching size by Hopcroft-Karp.
fn max_matching(adj: &[Vec<usize>], right: usize) -> usize {
    const FREE: usize = usize::MAX;
    let left = adj.len();
    let mut match_l = vec![FREE; left];
    let mut match_r = vec![FREE; right];
    let mut dist = vec![0usize; left];
    let mut size = 0;
    loop {
        let mut queue = VecDeque::new();
        for u in 0..left {
            if match_l[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut reachable_free = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_r[v] {
                    FREE => reachable_free = true,
                    w if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !reachable_free {
            return size;
        }
        fn augment(u: usize, adj: &[Vec<usize>], ml: &mut [usize], mr: &mut [usize], dist: &mut [usize]) -> bool {
            for &v in &adj[u] {
                let w = mr[v];
                if w == usize::MAX || (dist[w] == dist[u] + 1 && augment(w, adj, ml, mr, dist)) {
                    ml[u] = v;
                    mr[v] = u;
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..left {
            if match_l[u] == FREE && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                size += 1;
            }
        }
    }
}

/// Whether every point farther than `delta` from the diagonal in `a` can be
/// matched into `b` within `delta`.
fn heavy_side_matchable(a: &[Point], b: &[Point], delta: f64) -> bool {
    let heavy: Vec<Point> = a.iter().copied().filter(|&p| half_persistence(p) > delta).collect();
    let adj: Vec<Vec<usize>> = heavy
        .iter()
        .map(|&p| (0..b.len()).filter(|&j| linf(p, b[j]) <= delta).collect())
        .collect();
    adj.iter().all(|e| !e.is_empty()) && max_matching(&adj, b.len()) == heavy.len()
}

/// A matching within `delta` exists iff the heavy points of each side can
/// be covered separately; the two coverings then combine into one.
fn feasible(a: &[Point], b: &[Point], delta: f64) -> bool {
    heavy_side_matchable(a, b, delta) && heavy_side_matchable(b, a, delta)
}

/// Bottleneck distance under the L-infinity ground metric, where any point
/// may instead be matched to its diagonal projection. Exact: the result is
/// always one of the candidate pair or diagonal distances.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    let (a, b) = (off_diagonal(d1), off_diagonal(d2));
    let diag_max = a.iter().chain(&b).map(|&p| half_persistence(p)).fold(0.0, f64::max);
    if diag_max == 0.0 {
        return 0.0;
    }
    // bisect to a narrow bracket, then test the candidates inside it
    let (mut lo, mut hi) = (0.0, diag_max);
    if feasible(&a, &b, 0.0) {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(&a, &b, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut candidates: Vec<f64> = a
        .iter()
        .chain(&b)
        .map(|&p| half_persistence(p))
        .chain(a.iter().flat_map(|&p| b.iter().map(move |&q| linf(p, q))))
        .filter(|&c| c > lo && c <= hi)
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    candidates
        .into_iter()
        .find(|&c| feasible(&a, &b, c))
        .unwrap_or(hi)
}

/// Minimum-cost perfect assignment on a square matrix (shortest augmenting
/// path form of the Hungarian method). Returns the total cost.
fn assignment_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

/// q-Wasserstein distance under the L-infinity ground metric with diagonal
/// projections, solved exactly as an assignment problem.
pub fn wasserstein_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram, q: f64) -> f64 {
    let (a, b) = (off_diagonal(d1), off_diagonal(d2));
    let (n, m) = (a.len(), b.len());
    if n + m == 0 {
        return 0.0;
    }
    let all_to_diagonal: f64 = a.iter().chain(&b).map(|&p| half_persistence(p).powf(q)).sum();
    let forbidden = 2.0 * all_to_diagonal + 1.0;
    let size = n + m;
    let mut cost = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in 0..size {
            cost[i][j] = match (i < n, j < m) {
                (true, true) => linf(a[i], b[j]).powf(q),
                (true, false) if j - m == i => half_persistence(a[i]).powf(q),
                (false, true) if i - n == j => half_persistence(b[j]).powf(q),
                (false, false) => 0.0,
                _ => forbidden,
            };
        }
    }
    assignment_cost(&cost).max(0.0).powf(1.0 / q)
}

fn finite_or_string<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// One evaluated (original, decoded) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(serialize_with = "finite_or_string")]
    pub psnr: f64,
    pub mse: f64,
    pub compression_ratio: f64,
    pub bottleneck: f64,
    pub wasserstein2: f64,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub false_types: usize,
}

impl MetricsReport {
    pub fn new(
        f: &ScalarField,
        g: &ScalarField,
        ratio: f64,
        d1: &PersistenceDiagram,
        d2: &PersistenceDiagram,
        report: &FalseCaseReport,
    ) -> Result<Self, MetricsError> {
        let (fp, fn_, ft) = report.counts();
        Ok(Self {
            psnr: psnr(f, g)?,
            mse: mse(f, g)?,
            compression_ratio: ratio,
            bottleneck: bottleneck_distance(d1, d2),
            wasserstein2: wasserstein_distance(d1, d2, 2.0),
            false_positives: fp,
            false_negatives: fn_,
            false_types: ft,
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
