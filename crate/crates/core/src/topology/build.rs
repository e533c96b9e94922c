//! Join/split tree sweeps and their merge into the augmented contour tree.

use std::collections::VecDeque;

use super::{ContourTree, Node, NodeKind};
use crate::field::{ScalarField, VertexId};
use crate::union_find::UnionFind;

const NONE: usize = usize::MAX;

/// Builds the contour tree of `field` and contracts regular vertices into
/// arc segments.
pub fn build_contour_tree(field: &ScalarField) -> ContourTree {
    let dims = field.dims();
    let n = field.len();
    let order = field.sorted_vertices();
    let mut rank = vec![0usize; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let offsets = dims.freudenthal_offsets();
    let neighbors = |v: VertexId| offsets.iter().filter_map(move |&o| dims.offset(v, o));

    // Join tree: superlevel sweep, every vertex has at most one lower neighbor.
    let mut join_down = vec![NONE; n];
    let mut join_up: Vec<Vec<usize>> = vec![Vec::new(); n];
    {
        let mut uf = UnionFind::new(n);
        let mut lowest = vec![NONE; n];
        for &v in order.iter().rev() {
            lowest[v] = v;
            for u in neighbors(v) {
                if rank[u] < rank[v] {
                    continue;
                }
                let (ru, rv) = (uf.find(u), uf.find(v));
                if ru == rv {
                    continue;
                }
                let low = lowest[ru];
                join_down[low] = v;
                join_up[v].push(low);
                let root = uf.union(ru, rv);
                lowest[root] = v;
            }
        }
    }

    // Split tree: sublevel sweep, every vertex has at most one upper neighbor.
    let mut split_up = vec![NONE; n];
    let mut split_down: Vec<Vec<usize>> = vec![Vec::new(); n];
    {
        let mut uf = UnionFind::new(n);
        let mut highest = vec![NONE; n];
        for &v in &order {
            highest[v] = v;
            for u in neighbors(v) {
                if rank[u] > rank[v] {
                    continue;
                }
                let (ru, rv) = (uf.find(u), uf.find(v));
                if ru == rv {
                    continue;
                }
                let high = highest[ru];
                split_up[high] = v;
                split_down[v].push(high);
                let root = uf.union(ru, rv);
                highest[root] = v;
            }
        }
    }

    // Merge: peel leaves off both trees until a single vertex remains.
    let mut ct_up: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ct_down: Vec<Vec<usize>> = vec![Vec::new(); n];
    let is_leaf = |v: usize, ju: &[Vec<usize>], sd: &[Vec<usize>]| ju[v].len() + sd[v].len() == 1;
    let mut queue: VecDeque<usize> = order
        .iter()
        .copied()
        .filter(|&v| is_leaf(v, &join_up, &split_down))
        .collect();
    let mut queued = vec![false; n];
    for &v in &queue {
        queued[v] = true;
    }
    let mut remaining = n;
    while remaining > 1 {
        let x = queue.pop_front().expect("merge queue drained before tree completed");
        remaining -= 1;
        let y;
        if join_up[x].is_empty() {
            y = join_down[x];
            ct_up[y].push(x);
            ct_down[x].push(y);
        } else {
            y = split_up[x];
            ct_up[x].push(y);
            ct_down[y].push(x);
        }
        splice(x, &mut join_up, &mut join_down);
        splice(x, &mut split_down, &mut split_up);
        if !queued[y] && is_leaf(y, &join_up, &split_down) {
            queued[y] = true;
            queue.push_back(y);
        }
    }

    contract(field, &order, &ct_up, &ct_down)
}

/// Removes `x` from a tree where every vertex has at most one `single`
/// neighbor and any number of `multi` neighbors. `x` itself has at most one
/// `multi` neighbor, which gets reconnected to `x`'s `single` neighbor.
fn splice(x: usize, multi: &mut [Vec<usize>], single: &mut [usize]) {
    let s = single[x];
    match multi[x].as_slice() {
        [] => {
            if s != NONE {
                multi[s].retain(|&w| w != x);
            }
        }
        [w] => {
            let w = *w;
            single[w] = s;
            if s != NONE {
                for slot in multi[s].iter_mut() {
                    if *slot == x {
                        *slot = w;
                    }
                }
            }
        }
        _ => unreachable!("spliced vertex has several neighbors on its multi side"),
    }
    multi[x].clear();
    single[x] = NONE;
}

fn contract(field: &ScalarField, order: &[VertexId], up: &[Vec<usize>], down: &[Vec<usize>]) -> ContourTree {
    let n = field.len();
    let regular = |v: usize| up[v].len() == 1 && down[v].len() == 1;
    let mut node_of = vec![NONE; n];
    let mut nodes = Vec::new();
    for &v in order {
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
        node_of[v] = nodes.len();
        nodes.push(Node {
            vertex: v,
            scalar: field.value(v),
            kind,
        });
    }

    let mut arcs = Vec::new();
    let mut regions = Vec::new();
    for node in &nodes {
        for &start in &up[node.vertex] {
            let mut region = Vec::new();
            let mut cur = start;
            while regular(cur) {
                region.push(cur);
                cur = up[cur][0];
            }
            arcs.push((node_of[cur], node_of[node.vertex]));
            regions.push(region);
        }
    }
    ContourTree::assemble(field.dims(), field.values().to_vec(), nodes, arcs, regions, 0.0)
}
