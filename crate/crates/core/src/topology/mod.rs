//! Contour trees of piecewise-linear scalar fields on Freudenthal-triangulated
//! grids, their persistence simplification and branch decomposition, and
//! 0-dimensional persistence diagrams.
//!
//! All comparisons between samples use the tie-broken order on
//! `(value, vertex id)`, so every input behaves like a Morse function.

mod build;
mod persistence;
mod simplify;

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::field::{Dims, VertexId};

pub use build::build_contour_tree;
pub use persistence::{persistence_diagram_0d, persistence_diagram_0d_with, PersistenceDiagram, Sweeps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Minimum,
    Maximum,
    Saddle,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Minimum => "min",
            NodeKind::Maximum => "max",
            NodeKind::Saddle => "saddle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub vertex: VertexId,
    pub scalar: f64,
    pub kind: NodeKind,
}

/// Arc between two node indices; `upper` is higher in the tie-broken order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub upper: usize,
    pub lower: usize,
}

/// Where a grid vertex lands in the tree: on a node (critical vertex) or in
/// the interior of an arc (regular vertex).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    Node(usize),
    Arc(usize),
}

/// An extremum paired with the saddle where it dies under the elder rule.
/// The root branch (global minimum to global maximum) is listed once from
/// each end, with the opposite extremum in the `saddle` slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub extremum: VertexId,
    pub extremum_kind: NodeKind,
    pub saddle: VertexId,
    pub persistence: f64,
    /// Grid vertices on the tree path from the extremum to the saddle,
    /// excluding the saddle.
    pub region: Vec<VertexId>,
    pub is_root: bool,
}

/// A contour tree with its per-vertex segmentation.
///
/// Nodes are sorted by vertex id and arcs by `(upper vertex, lower vertex)`,
/// so two trees describing the same structure compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourTree {
    dims: Dims,
    values: Vec<f64>,
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    segmentation: Vec<Segment>,
    threshold: f64,
}

impl ContourTree {
    /// Assembles a tree from unordered parts, canonicalizing node and arc
    /// order. `arcs` are pairs of node positions in `nodes` and `regions[i]`
    /// lists the regular vertices of arc `i`.
    pub(crate) fn assemble(
        dims: Dims,
        values: Vec<f64>,
        nodes: Vec<Node>,
        arcs: Vec<(usize, usize)>,
        regions: Vec<Vec<VertexId>>,
        threshold: f64,
    ) -> Self {
        let mut node_order: Vec<usize> = (0..nodes.len()).collect();
        node_order.sort_unstable_by_key(|&i| nodes[i].vertex);
        let mut remap = vec![0usize; nodes.len()];
        for (new, &old) in node_order.iter().enumerate() {
            remap[old] = new;
        }
        let sorted_nodes: Vec<Node> = node_order.iter().map(|&i| nodes[i]).collect();

        let mut arc_order: Vec<usize> = (0..arcs.len()).collect();
        arc_order.sort_unstable_by_key(|&i| (sorted_nodes[remap[arcs[i].0]].vertex, sorted_nodes[remap[arcs[i].1]].vertex));

        let mut segmentation = vec![Segment::Node(usize::MAX); dims.len()];
        for (i, n) in sorted_nodes.iter().enumerate() {
            segmentation[n.vertex] = Segment::Node(i);
        }
        let mut sorted_arcs = Vec::with_capacity(arcs.len());
        for (new, &old) in arc_order.iter().enumerate() {
            let (u, l) = arcs[old];
            sorted_arcs.push(Arc {
                upper: remap[u],
                lower: remap[l],
            });
            for &v in &regions[old] {
                segmentation[v] = Segment::Arc(new);
            }
        }
        Self {
            dims,
            values,
            nodes: sorted_nodes,
            arcs: sorted_arcs,
            segmentation,
            threshold,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Sample values of the field the tree was built from.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn segmentation(&self) -> &[Segment] {
        &self.segmentation
    }

    pub fn segment_of(&self, v: VertexId) -> Segment {
        self.segmentation[v]
    }

    /// Persistence threshold the tree was simplified with (0 when built).
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn node_index(&self, v: VertexId) -> Option<usize> {
        match self.segmentation[v] {
            Segment::Node(i) => Some(i),
            Segment::Arc(_) => None,
        }
    }

    pub fn is_critical(&self, v: VertexId) -> bool {
        matches!(self.segmentation[v], Segment::Node(_))
    }

    pub fn critical_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes.iter().map(|n| n.vertex)
    }

    /// Arc endpoints as grid vertices, `(upper, lower)`.
    pub fn arc_vertices(&self, arc: usize) -> (VertexId, VertexId) {
        let a = self.arcs[arc];
        (self.nodes[a.upper].vertex, self.nodes[a.lower].vertex)
    }

    /// Regular vertices per arc; the inverse of the segmentation map.
    pub fn segmentation_regions(&self) -> Vec<Vec<VertexId>> {
        let mut regions = vec![Vec::new(); self.arcs.len()];
        for (v, s) in self.segmentation.iter().enumerate() {
            if let Segment::Arc(a) = *s {
                regions[a].push(v);
            }
        }
        regions
    }

    /// Removes every extremum–saddle pair of persistence at most `epsilon`.
    /// The global extrema always survive.
    pub fn simplify(&self, epsilon: f64) -> ContourTree {
        simplify::simplify(self, epsilon)
    }

    /// Elder-rule pairs of the tree by increasing persistence, then the root
    /// branch.
    pub fn branch_decomposition(&self) -> Vec<Branch> {
        simplify::branch_decomposition(self)
    }

    /// Debug export: `node <vertex> <scalar> <kind>` lines followed by
    /// `arc <upperIdx> <lowerIdx>` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = writeln!(out, "node {} {} {}", n.vertex, n.scalar, n.kind);
        }
        for a in &self.arcs {
            let _ = writeln!(out, "arc {} {}", a.upper, a.lower);
        }
        out
    }
}
