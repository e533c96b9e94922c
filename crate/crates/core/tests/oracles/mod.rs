//! Brute-force reference implementations, deliberately independent of the
//! library's algorithms. Shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use toposz::field::{Dims, ScalarField, VertexId};
use toposz::topology::{ContourTree, NodeKind, Segment};

/// Tree in vertex terms: nodes as (vertex, kind), arcs as (upper, lower)
/// vertex pairs, segmentation as the arc (or node) each vertex maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexTree {
    pub nodes: BTreeSet<(VertexId, NodeKind)>,
    pub arcs: BTreeSet<(VertexId, VertexId)>,
    pub segmentation: Vec<(VertexId, VertexId)>,
}

impl VertexTree {
    pub fn from_tree(t: &ContourTree) -> Self {
        let nodes = t.nodes().iter().map(|n| (n.vertex, n.kind)).collect();
        let arcs = (0..t.arcs().len()).map(|a| t.arc_vertices(a)).collect();
        let segmentation = t
            .segmentation()
            .iter()
            .map(|s| match *s {
                Segment::Node(i) => (t.nodes()[i].vertex, t.nodes()[i].vertex),
                Segment::Arc(a) => t.arc_vertices(a),
            })
            .collect();
        Self {
            nodes,
            arcs,
            segmentation,
        }
    }
}

fn ranks(field: &ScalarField) -> Vec<usize> {
    let n = field.len();
    let mut rank = vec![0; n];
    for v in 0..n {
        rank[v] = (0..n).filter(|&u| field.lower(u, v)).count();
    }
    rank
}

/// Top-dimensional simplices of the Freudenthal triangulation: one per
/// permutation of the non-degenerate axes in every grid cell.
pub fn freudenthal_simplices(dims: Dims) -> Vec<Vec<VertexId>> {
    let ext = dims.extents().to_vec();
    let active: Vec<usize> = (0..ext.len()).filter(|&a| ext[a] > 1).collect();
    let mut perms = Vec::new();
    permutations(&active, &mut Vec::new(), &mut perms);
    let mut out = Vec::new();
    for v in 0..dims.len() {
        let c = dims.coords(v);
        if active.iter().any(|&a| c[a] + 1 >= ext[a]) {
            continue;
        }
        for p in &perms {
            let mut cur = c;
            let mut simplex = vec![dims.index(cur)];
            for &axis in p {
                cur[axis] += 1;
                simplex.push(dims.index(cur));
            }
            out.push(simplex);
        }
    }
    out
}

fn permutations(items: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == items.len() {
        out.push(prefix.clone());
        return;
    }
    for &x in items {
        if !prefix.contains(&x) {
            prefix.push(x);
            permutations(items, prefix, out);
            prefix.pop();
        }
    }
}

/// Contour tree by sweeping every level between consecutive vertex ranks,
/// labeling level-set components through shared simplices, and following
/// each component from the vertex where it appears to the one where it
/// vanishes.
pub fn level_sweep_tree(field: &ScalarField) -> VertexTree {
    let n = field.len();
    let rank = ranks(field);
    let mut by_rank = vec![0; n];
    for v in 0..n {
        by_rank[rank[v]] = v;
    }
    let simplices = freudenthal_simplices(field.dims());
    let mut edges = BTreeSet::new();
    for s in &simplices {
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                edges.insert((s[i].min(s[j]), s[i].max(s[j])));
            }
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    let edge_id: BTreeMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

    // class id -> (lower vertex, upper vertex)
    let mut class_lower: Vec<VertexId> = Vec::new();
    let mut class_upper: Vec<Option<VertexId>> = Vec::new();
    // class of each crossing edge at the previous level
    let mut prev_class: BTreeMap<usize, usize> = BTreeMap::new();

    for level in 0..n.saturating_sub(1) {
        let passed = by_rank[level];
        let crosses = |e: &(usize, usize)| {
            let (a, b) = (rank[e.0].min(rank[e.1]), rank[e.0].max(rank[e.1]));
            a <= level && level < b
        };
        let crossing: Vec<usize> = (0..edges.len()).filter(|&i| crosses(&edges[i])).collect();
        // connected components of crossing edges sharing a simplex
        let mut label: BTreeMap<usize, usize> = crossing.iter().map(|&e| (e, e)).collect();
        fn root(label: &mut BTreeMap<usize, usize>, mut x: usize) -> usize {
            while label[&x] != x {
                x = label[&x];
            }
            x
        }
        for s in &simplices {
            let mut inside = Vec::new();
            for i in 0..s.len() {
                for j in i + 1..s.len() {
                    let e = edge_id[&(s[i].min(s[j]), s[i].max(s[j]))];
                    if label.contains_key(&e) {
                        inside.push(e);
                    }
                }
            }
            for w in inside.windows(2) {
                let (a, b) = (root(&mut label, w[0]), root(&mut label, w[1]));
                if a != b {
                    label.insert(a.max(b), a.min(b));
                }
            }
        }
        let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &e in &crossing {
            let r = root(&mut label, e);
            components.entry(r).or_default().push(e);
        }

        // components from the level below that touched `passed` end there
        let ended: BTreeSet<usize> = prev_class
            .iter()
            .filter(|(&e, _)| edges[e].0 == passed || edges[e].1 == passed)
            .map(|(_, &c)| c)
            .collect();
        for &c in &ended {
            class_upper[c] = Some(passed);
        }

        let mut next_class = BTreeMap::new();
        for members in components.values() {
            let touches = members.iter().any(|&e| edges[e].0 == passed || edges[e].1 == passed);
            let class = if touches {
                class_lower.push(passed);
                class_upper.push(None);
                class_lower.len() - 1
            } else {
                prev_class[&members[0]]
            };
            for &e in members {
                next_class.insert(e, class);
            }
        }
        prev_class = next_class;
    }
    let top = by_rank[n - 1];
    for c in prev_class.values() {
        class_upper[*c] = Some(top);
    }

    let mut up: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut down: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, &lo) in class_lower.iter().enumerate() {
        let hi = class_upper[c].expect("every contour class ends");
        up[lo].push(hi);
        down[hi].push(lo);
    }
    let regular = |v: usize| up[v].len() == 1 && down[v].len() == 1;
    let mut nodes = BTreeSet::new();
    let mut arcs = BTreeSet::new();
    let mut segmentation = vec![(usize::MAX, usize::MAX); n];
    for v in 0..n {
        if regular(v) {
            continue;
        }
        let kind = if down[v].is_empty() {
            NodeKind::Minimum
        } else if up[v].is_empty() {
            NodeKind::Maximum
        } else {
            NodeKind::Saddle
        };
        nodes.insert((v, kind));
        segmentation[v] = (v, v);
        for &start in &up[v] {
            let mut path = Vec::new();
            let mut cur = start;
            while regular(cur) {
                path.push(cur);
                cur = up[cur][0];
            }
            arcs.insert((cur, v));
            for p in path {
                segmentation[p] = (cur, v);
            }
        }
    }
    VertexTree {
        nodes,
        arcs,
        segmentation,
    }
}

fn components_of(dims: Dims, members: &[bool]) -> Vec<Vec<VertexId>> {
    let mut seen = vec![false; members.len()];
    let mut out = Vec::new();
    for start in 0..members.len() {
        if !members[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for u in dims.simplicial_neighbors(v) {
                if members[u] && !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// 0-dimensional diagram by recomputing all sublevel (then superlevel)
/// components from scratch at every threshold.
pub fn brute_diagram(field: &ScalarField, superlevel: bool) -> Vec<(f64, f64)> {
    let n = field.len();
    let rank = ranks(field);
    let mut order = vec![0; n];
    for v in 0..n {
        order[rank[v]] = v;
    }
    let mut pairs = Vec::new();
    for descending in [false, true] {
        if descending && !superlevel {
            continue;
        }
        let seq: Vec<VertexId> = if descending { order.iter().rev().copied().collect() } else { order.clone() };
        let pos = |v: VertexId| seq.iter().position(|&x| x == v).unwrap();
        let mut alive: BTreeSet<VertexId> = BTreeSet::new();
        for i in 0..n {
            let mut members = vec![false; n];
            for &v in &seq[..=i] {
                members[v] = true;
            }
            let now: BTreeSet<VertexId> = components_of(field.dims(), &members)
                .iter()
                .map(|c| *c.iter().min_by_key(|&&v| pos(v)).unwrap())
                .collect();
            for &old in alive.difference(&now) {
                let (b, d) = (field.value(old), field.value(seq[i]));
                pairs.push(if descending { (d, b) } else { (b, d) });
            }
            alive = now;
        }
    }
    pairs.push((field.value(order[0]), field.value(order[n - 1])));
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diag(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Enumerates every partial matching; `combine` folds per-pair costs.
fn all_matchings(a: &[(f64, f64)], b: &[(f64, f64)], combine: &dyn Fn(f64, f64) -> f64) -> f64 {
    fn rec(
        i: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
        used: &mut Vec<bool>,
        acc: f64,
        combine: &dyn Fn(f64, f64) -> f64,
        best: &mut f64,
    ) {
        if i == a.len() {
            let mut total = acc;
            for (j, &q) in b.iter().enumerate() {
                if !used[j] {
                    total = combine(total, to_diag(q));
                }
            }
            *best = best.min(total);
            return;
        }
        rec(i + 1, a, b, used, combine(acc, to_diag(a[i])), combine, best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                rec(i + 1, a, b, used, combine(acc, linf(a[i], b[j])), combine, best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, a, b, &mut vec![false; b.len()], 0.0, combine, &mut best);
    best
}

pub fn brute_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    all_matchings(a, b, &|x, y| x.max(y))
}

pub fn brute_wasserstein2(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    all_matchings(a, b, &|x, y| x + y * y).sqrt()
}

/// Strict local extrema under the tie-broken order, by direct neighbor scan.
pub fn local_extrema(field: &ScalarField) -> Vec<(VertexId, NodeKind)> {
    (0..field.len())
        .filter_map(|v| {
            let nb = field.simplicial_neighbors(v);
            if nb.iter().all(|&u| field.lower(u, v)) {
                Some((v, NodeKind::Maximum))
            } else if nb.iter().all(|&u| field.lower(v, u)) {
                Some((v, NodeKind::Minimum))
            } else {
                None
            }
        })
        .collect()
}
