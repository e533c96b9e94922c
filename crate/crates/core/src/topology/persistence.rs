//! 0-dimensional persistence diagrams via union-find sweeps (elder rule).

use serde::{Deserialize, Serialize};

use crate::field::{ScalarField, VertexId};
use crate::union_find::UnionFind;

/// Multiset of `(birth, death)` pairs with `death >= birth`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub pairs: Vec<(f64, f64)>,
}

impl PersistenceDiagram {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs in lexicographic order, for multiset comparison.
    pub fn sorted(&self) -> Vec<(f64, f64)> {
        let mut p = self.pairs.clone();
        p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        p
    }
}

/// Which sweeps contribute pairs besides the essential class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sweeps {
    pub sublevel: bool,
    pub superlevel: bool,
}

impl Default for Sweeps {
    fn default() -> Self {
        Self {
            sublevel: true,
            superlevel: true,
        }
    }
}

/// Sublevel and superlevel 0-dimensional pairs plus the essential class
/// `(global min, global max)`.
pub fn persistence_diagram_0d(field: &ScalarField) -> PersistenceDiagram {
    persistence_diagram_0d_with(field, Sweeps::default())
}

pub fn persistence_diagram_0d_with(field: &ScalarField, sweeps: Sweeps) -> PersistenceDiagram {
    let order = field.sorted_vertices();
    let mut pairs = Vec::new();
    if sweeps.sublevel {
        sweep(field, &order, |birth, death| pairs.push((birth, death)));
    }
    if sweeps.superlevel {
        let descending: Vec<VertexId> = order.iter().rev().copied().collect();
        sweep(field, &descending, |birth, death| pairs.push((death, birth)));
    }
    if let (Some(&lo), Some(&hi)) = (order.first(), order.last()) {
        pairs.push((field.value(lo), field.value(hi)));
    }
    PersistenceDiagram { pairs }
}

/// Elder-rule sweep in the given vertex order; reports `(birth, death)`
/// values of every component that gets merged into an older one.
fn sweep(field: &ScalarField, order: &[VertexId], mut emit: impl FnMut(f64, f64)) {
    let dims = field.dims();
    let offsets = dims.freudenthal_offsets();
    let n = field.len();
    let mut position = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut uf = UnionFind::new(n);
    // birth vertex of each root; older = earlier in the sweep
    let mut birth = vec![usize::MAX; n];
    let mut roots = Vec::with_capacity(offsets.len());
    for &v in order {
        roots.clear();
        for &o in &offsets {
            if let Some(u) = dims.offset(v, o) {
                if position[u] < position[v] {
                    let r = uf.find(u);
                    if !roots.contains(&r) {
                        roots.push(r);
                    }
                }
            }
        }
        if roots.is_empty() {
            birth[v] = v;
            continue;
        }
        let elder = *roots
            .iter()
            .min_by_key(|&&r| position[birth[r]])
            .expect("non-empty");
        let oldest = birth[elder];
        for &r in &roots {
            if r != elder {
                emit(field.value(birth[r]), field.value(v));
            }
        }
        let mut root = uf.union(v, elder);
        for &r in &roots {
            root = uf.union(root, r);
        }
        birth[root] = oldest;
    }
}
