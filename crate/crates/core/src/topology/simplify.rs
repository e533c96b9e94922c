//! Persistence simplification and branch decomposition of contour trees.
//!
//! Every non-global extremum is paired with a saddle by the elder rule on the
//! tree: sweeping nodes from the top, a maximum dies at the node where its
//! component first meets the component of a higher maximum (minima likewise
//! from the bottom). Simplification repeatedly takes the pairs of persistence
//! at most ε and collapses the extremum's component beyond the saddle into
//! the saddle. Everything hanging off that component is re-attached to the
//! saddle and vertices left without an arc go to the nearest arc spanning
//! their value. Degree-2 nodes left behind are contracted.

use std::collections::HashMap;

use super::{Branch, ContourTree, Node, NodeKind, Segment};
use crate::field::VertexId;
use crate::union_find::UnionFind;

#[derive(Debug, Clone)]
struct WorkNode {
    vertex: VertexId,
    scalar: f64,
    up: Vec<usize>,
    down: Vec<usize>,
    alive: bool,
}

#[derive(Debug, Clone)]
struct WorkArc {
    upper: usize,
    lower: usize,
    vertices: Vec<VertexId>,
    alive: bool,
}

#[derive(Debug, Clone, Copy)]
struct Pair {
    extremum: usize,
    saddle: usize,
    is_max: bool,
    persistence: f64,
}

/// Component of a pair's extremum beyond its saddle.
struct Component {
    nodes: Vec<usize>,
    /// Arcs with both ends in the component.
    inner: Vec<usize>,
    /// Arcs leaving the component, including the one into the saddle.
    boundary: Vec<usize>,
}

struct WorkTree {
    nodes: Vec<WorkNode>,
    arcs: Vec<WorkArc>,
    values: Vec<f64>,
    /// Visit marks for [`component`](Self::component), keyed by query.
    stamp: Vec<u32>,
    query: u32,
    /// Round in which a node was last modified.
    touched: Vec<u32>,
    round: u32,
}

impl WorkTree {
    fn new(tree: &ContourTree) -> Self {
        let mut nodes: Vec<WorkNode> = tree
            .nodes
            .iter()
            .map(|n| WorkNode {
                vertex: n.vertex,
                scalar: n.scalar,
                up: Vec::new(),
                down: Vec::new(),
                alive: true,
            })
            .collect();
        let mut arcs: Vec<WorkArc> = tree
            .arcs
            .iter()
            .map(|a| WorkArc {
                upper: a.upper,
                lower: a.lower,
                vertices: Vec::new(),
                alive: true,
            })
            .collect();
        for (i, a) in tree.arcs.iter().enumerate() {
            nodes[a.lower].up.push(i);
            nodes[a.upper].down.push(i);
        }
        for (v, s) in tree.segmentation.iter().enumerate() {
            if let Segment::Arc(a) = *s {
                arcs[a].vertices.push(v);
            }
        }
        let n = nodes.len();
        Self {
            nodes,
            arcs,
            values: tree.values.clone(),
            stamp: vec![0; n],
            query: 0,
            touched: vec![0; n],
            round: 0,
        }
    }

    fn below(&self, a: usize, b: usize) -> bool {
        let (x, y) = (&self.nodes[a], &self.nodes[b]);
        x.scalar < y.scalar || (x.scalar == y.scalar && x.vertex < y.vertex)
    }

    fn other_end(&self, arc: usize, node: usize) -> usize {
        let a = &self.arcs[arc];
        if a.upper == node {
            a.lower
        } else {
            a.upper
        }
    }

    fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = &self.nodes[node];
        n.up.iter().chain(&n.down).map(move |&a| (a, self.other_end(a, node)))
    }

    /// Alive nodes in ascending tie-broken order.
    fn sorted_nodes(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.nodes[i].alive).collect();
        order.sort_unstable_by(|&a, &b| {
            let (x, y) = (&self.nodes[a], &self.nodes[b]);
            x.scalar.total_cmp(&y.scalar).then(x.vertex.cmp(&y.vertex))
        });
        order
    }

    /// Elder-rule pairs of both sweeps, by increasing persistence then
    /// extremum vertex. The global extrema stay unpaired.
    fn elder_pairs(&self) -> Vec<Pair> {
        let ascending = self.sorted_nodes();
        let mut pairs = Vec::new();
        for is_max in [true, false] {
            let order: Vec<usize> = if is_max { ascending.iter().rev().copied().collect() } else { ascending.clone() };
            let mut position = vec![usize::MAX; self.nodes.len()];
            for (i, &v) in order.iter().enumerate() {
                position[v] = i;
            }
            let mut uf = UnionFind::new(self.nodes.len());
            let mut birth = vec![usize::MAX; self.nodes.len()];
            let mut roots = Vec::new();
            for &v in &order {
                roots.clear();
                let earlier = if is_max { &self.nodes[v].up } else { &self.nodes[v].down };
                for &a in earlier {
                    let r = uf.find(self.other_end(a, v));
                    if !roots.contains(&r) {
                        roots.push(r);
                    }
                }
                let Some(&elder) = roots.iter().min_by_key(|&&r| position[birth[r]]) else {
                    birth[v] = v;
                    continue;
                };
                let oldest = birth[elder];
                for &r in roots.iter().filter(|&&r| r != elder) {
                    pairs.push(Pair {
                        extremum: birth[r],
                        saddle: v,
                        is_max,
                        persistence: (self.nodes[birth[r]].scalar - self.nodes[v].scalar).abs(),
                    });
                }
                let mut root = uf.union(v, elder);
                for &r in &roots {
                    root = uf.union(root, r);
                }
                birth[root] = oldest;
            }
        }
        pairs.sort_by(|a, b| {
            a.persistence
                .total_cmp(&b.persistence)
                .then(self.nodes[a.extremum].vertex.cmp(&self.nodes[b.extremum].vertex))
        });
        pairs
    }

    /// Whether `x` lies strictly on the extremum's side of the pair's saddle.
    fn beyond(&self, p: Pair, x: usize) -> bool {
        if p.is_max {
            self.below(p.saddle, x)
        } else {
            self.below(x, p.saddle)
        }
    }

    /// Nodes reachable from the extremum without reaching the saddle's level.
    /// Returns `None` if the component meets a node modified this round.
    fn component(&mut self, p: Pair) -> Option<Component> {
        self.query += 1;
        let (q, round) = (self.query, self.round);
        let mut comp = Component {
            nodes: Vec::new(),
            inner: Vec::new(),
            boundary: Vec::new(),
        };
        let mut stack = vec![p.extremum];
        self.stamp[p.extremum] = q;
        while let Some(x) = stack.pop() {
            if self.touched[x] == round {
                return None;
            }
            comp.nodes.push(x);
            for (a, y) in self.neighbors(x).collect::<Vec<_>>() {
                if !self.beyond(p, y) {
                    if self.touched[y] == round {
                        return None;
                    }
                    comp.boundary.push(a);
                } else if self.stamp[y] != q {
                    self.stamp[y] = q;
                    comp.inner.push(a);
                    stack.push(y);
                }
            }
        }
        Some(comp)
    }

    /// Collapses the pair's component into its saddle.
    fn collapse(&mut self, p: Pair, comp: Component) {
        let s = p.saddle;
        let (sv, sx) = (self.nodes[s].vertex, self.nodes[s].scalar);
        let round = self.round;
        let mut orphans = Vec::new();
        for &x in &comp.nodes {
            self.nodes[x].alive = false;
            self.touched[x] = round;
            orphans.push(self.nodes[x].vertex);
        }
        for &a in &comp.inner {
            self.arcs[a].alive = false;
            orphans.append(&mut self.arcs[a].vertices);
        }
        let beyond = |v: VertexId, x: f64| {
            if p.is_max {
                x > sx || (x == sx && v > sv)
            } else {
                x < sx || (x == sx && v < sv)
            }
        };
        for &a in &comp.boundary {
            let inside = if p.is_max { self.arcs[a].upper } else { self.arcs[a].lower };
            let outside = self.other_end(a, inside);
            self.touched[outside] = round;
            if outside == s {
                self.arcs[a].alive = false;
                orphans.append(&mut self.arcs[a].vertices);
                let list = if p.is_max { &mut self.nodes[s].up } else { &mut self.nodes[s].down };
                list.retain(|&b| b != a);
                continue;
            }
            let values = &self.values;
            let (keep, lost): (Vec<VertexId>, Vec<VertexId>) =
                self.arcs[a].vertices.iter().partition(|&&v| !beyond(v, values[v]));
            self.arcs[a].vertices = keep;
            orphans.extend(lost);
            if p.is_max {
                self.arcs[a].upper = s;
                self.nodes[s].down.push(a);
            } else {
                self.arcs[a].lower = s;
                self.nodes[s].up.push(a);
            }
        }
        for &x in &comp.nodes {
            self.nodes[x].up.clear();
            self.nodes[x].down.clear();
        }
        let seeds = match self.contract(s) {
            Some(merged) => vec![merged],
            None => {
                let n = &self.nodes[s];
                n.up.iter().chain(&n.down).copied().collect()
            }
        };
        self.redistribute(&orphans, seeds);
    }

    /// Contracts `node` if it has one arc on each side; returns the merged arc.
    fn contract(&mut self, node: usize) -> Option<usize> {
        let (upper_arc, lower_arc) = match (self.nodes[node].up.as_slice(), self.nodes[node].down.as_slice()) {
            ([u], [d]) => (*u, *d),
            _ => return None,
        };
        let bottom = self.arcs[lower_arc].lower;
        let mut moved = std::mem::take(&mut self.arcs[lower_arc].vertices);
        moved.push(self.nodes[node].vertex);
        self.arcs[upper_arc].vertices.append(&mut moved);
        self.arcs[upper_arc].lower = bottom;
        self.arcs[lower_arc].alive = false;
        for slot in self.nodes[bottom].up.iter_mut() {
            if *slot == lower_arc {
                *slot = upper_arc;
            }
        }
        self.nodes[node].alive = false;
        self.nodes[node].up.clear();
        self.nodes[node].down.clear();
        Some(upper_arc)
    }

    /// Assigns each orphaned vertex to the nearest surviving arc (breadth
    /// first from `seeds`) whose value range contains it.
    fn redistribute(&mut self, orphans: &[VertexId], seeds: Vec<usize>) {
        let mut visited = vec![false; self.arcs.len()];
        let mut order = Vec::new();
        for a in seeds {
            if !visited[a] {
                visited[a] = true;
                order.push(a);
            }
        }
        let mut expanded = 0;
        for &v in orphans {
            let x = self.values[v];
            let contains = |arcs: &[WorkArc], nodes: &[WorkNode], a: usize| {
                nodes[arcs[a].lower].scalar <= x && x <= nodes[arcs[a].upper].scalar
            };
            let mut found = order.iter().copied().find(|&a| contains(&self.arcs, &self.nodes, a));
            while found.is_none() && expanded < order.len() {
                let a = order[expanded];
                expanded += 1;
                let start = order.len();
                for end in [self.arcs[a].lower, self.arcs[a].upper] {
                    let n = &self.nodes[end];
                    for &b in n.down.iter().chain(&n.up) {
                        if !visited[b] {
                            visited[b] = true;
                            order.push(b);
                        }
                    }
                }
                found = order[start..].iter().copied().find(|&b| contains(&self.arcs, &self.nodes, b));
            }
            let target = found.expect("surviving arcs cover the full value range");
            self.arcs[target].vertices.push(v);
        }
    }

    /// Grid vertices on the tree path from `from` to `to`, excluding `to`,
    /// searching only through nodes accepted by `within`.
    fn path_region(&self, from: usize, to: usize, within: impl Fn(usize) -> bool) -> Vec<VertexId> {
        let mut parent = HashMap::from([(from, usize::MAX)]);
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            if x == to {
                break;
            }
            for (a, y) in self.neighbors(x) {
                if (y == to || within(y)) && !parent.contains_key(&y) {
                    parent.insert(y, a);
                    stack.push(y);
                }
            }
        }
        let mut region = Vec::new();
        let mut x = to;
        while x != from {
            let a = parent[&x];
            region.extend_from_slice(&self.arcs[a].vertices);
            x = self.other_end(a, x);
            region.push(self.nodes[x].vertex);
        }
        region
    }

    fn into_tree(self, source: &ContourTree, threshold: f64) -> ContourTree {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, n) in self.nodes.iter().enumerate().filter(|(_, n)| n.alive) {
            remap[i] = nodes.len();
            let kind = match (n.up.is_empty(), n.down.is_empty()) {
                (true, false) => NodeKind::Maximum,
                (false, true) => NodeKind::Minimum,
                (false, false) => NodeKind::Saddle,
                (true, true) => source.nodes[i].kind,
            };
            nodes.push(Node {
                vertex: n.vertex,
                scalar: n.scalar,
                kind,
            });
        }
        let mut arcs = Vec::new();
        let mut regions = Vec::new();
        for a in self.arcs.into_iter().filter(|a| a.alive) {
            arcs.push((remap[a.upper], remap[a.lower]));
            regions.push(a.vertices);
        }
        ContourTree::assemble(source.dims, source.values.clone(), nodes, arcs, regions, threshold)
    }
}

pub(super) fn simplify(tree: &ContourTree, epsilon: f64) -> ContourTree {
    if !(epsilon > 0.0) {
        let mut out = tree.clone();
        out.threshold = epsilon.max(0.0);
        return out;
    }
    let mut work = WorkTree::new(tree);
    loop {
        let pairs: Vec<Pair> = work.elder_pairs().into_iter().take_while(|p| p.persistence <= epsilon).collect();
        if pairs.is_empty() {
            break;
        }
        // pairs whose surroundings change are left for the next round
        work.round += 1;
        for p in pairs {
            if let Some(comp) = work.component(p) {
                work.collapse(p, comp);
            }
        }
    }
    work.into_tree(tree, epsilon)
}

pub(super) fn branch_decomposition(tree: &ContourTree) -> Vec<Branch> {
    let work = WorkTree::new(tree);
    let mut out: Vec<Branch> = work
        .elder_pairs()
        .into_iter()
        .map(|p| Branch {
            extremum: work.nodes[p.extremum].vertex,
            extremum_kind: if p.is_max { NodeKind::Maximum } else { NodeKind::Minimum },
            saddle: work.nodes[p.saddle].vertex,
            persistence: p.persistence,
            region: work.path_region(p.extremum, p.saddle, |x| work.beyond(p, x)),
            is_root: false,
        })
        .collect();
    let order = work.sorted_nodes();
    match (order.first(), order.last()) {
        (Some(&bottom), Some(&top)) if bottom != top => {
            let persistence = work.nodes[top].scalar - work.nodes[bottom].scalar;
            for (end, other, kind) in [(top, bottom, NodeKind::Maximum), (bottom, top, NodeKind::Minimum)] {
                out.push(Branch {
                    extremum: work.nodes[end].vertex,
                    extremum_kind: kind,
                    saddle: work.nodes[other].vertex,
                    persistence,
                    region: work.path_region(end, other, |_| true),
                    is_root: true,
                });
            }
        }
        (Some(&n), _) => {
            // single-vertex grid
            out.push(Branch {
                extremum: work.nodes[n].vertex,
                extremum_kind: NodeKind::Minimum,
                saddle: work.nodes[n].vertex,
                persistence: 0.0,
                region: vec![work.nodes[n].vertex],
                is_root: true,
            });
        }
        _ => {}
    }
    out
}
