//! Directed weak and strong coloring numbers.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycle_rank::{cycle_rank, validate_cr_decomposition, CycleRankDecomposition, CycleRankError};
use crate::graph::{bit, bits, scc_idx, Digraph, MaskGraph, VertexId};

pub const DEFAULT_CAP: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Radius {
    Finite(usize),
    Infinite,
}

impl Radius {
    fn steps(self, n: usize) -> usize {
        match self {
            Radius::Finite(k) => k.min(n),
            Radius::Infinite => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReachMode {
    Weak,
    Strong,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("ordering is not a permutation of the vertex set")]
    BadOrdering,
    #[error("{n} vertices exceed the brute-force cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error(transparent)]
    CycleRank(#[from] CycleRankError),
    #[error("invalid decomposition")]
    InvalidDecomposition,
}

/// A linear order on the vertices, least first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinearOrdering(pub Vec<VertexId>);

impl LinearOrdering {
    /// Position of every vertex of `g`, by vertex index.
    fn positions(&self, g: &Digraph) -> Result<Vec<usize>, ColoringError> {
        if self.0.len() != g.n() {
            return Err(ColoringError::BadOrdering);
        }
        let mut pos = vec![usize::MAX; g.n()];
        for (p, v) in self.0.iter().enumerate() {
            let i = g.index_of(v).ok_or(ColoringError::BadOrdering)?;
            if pos[i] != usize::MAX {
                return Err(ColoringError::BadOrdering);
            }
            pos[i] = p;
        }
        Ok(pos)
    }
}

/// Vertices reachable from `from` in at most `steps` edges inside `within`.
fn bounded_reach(g: &Digraph, from: usize, within: &[bool], steps: usize) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    seen[from] = true;
    let mut frontier = vec![from];
    for _ in 0..steps {
        let mut next = Vec::new();
        for &x in &frontier {
            for &y in g.out_idx(x) {
                if within[y] && !seen[y] {
                    seen[y] = true;
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}

fn reach_idx(g: &Digraph, pos: &[usize], v: usize, k: Radius, mode: ReachMode) -> Vec<usize> {
    let steps = k.steps(g.n());
    let mut out = Vec::new();
    match mode {
        ReachMode::Weak => {
            for w in 0..g.n() {
                if pos[w] > pos[v] {
                    continue;
                }
                let within: Vec<bool> = pos.iter().map(|&p| p >= pos[w]).collect();
                if bounded_reach(g, v, &within, steps)[w] {
                    out.push(w);
                }
            }
        }
        ReachMode::Strong => {
            let within: Vec<bool> = pos.iter().map(|&p| p > pos[v]).collect();
            let mut dist = vec![usize::MAX; g.n()];
            dist[v] = 0;
            let mut frontier = vec![v];
            let mut hit = vec![false; g.n()];
            hit[v] = true;
            for d in 0..steps {
                let mut next = Vec::new();
                for &x in &frontier {
                    for &y in g.out_idx(x) {
                        if pos[y] < pos[v] {
                            hit[y] = true;
                        } else if within[y] && dist[y] == usize::MAX {
                            dist[y] = d + 1;
                            next.push(y);
                        }
                    }
                }
                frontier = next;
            }
            out.extend((0..g.n()).filter(|&w| hit[w]));
        }
    }
    out
}

/// Weak or strong `k`-reachability set of `v` under `l`; always contains `v`.
pub fn reach_set(
    g: &Digraph,
    l: &LinearOrdering,
    v: &VertexId,
    k: Radius,
    mode: ReachMode,
) -> Result<BTreeSet<VertexId>, ColoringError> {
    let pos = l.positions(g)?;
    let i = g.index_of(v).ok_or(ColoringError::BadOrdering)?;
    Ok(reach_idx(g, &pos, i, k, mode).into_iter().map(|w| g.id(w).clone()).collect())
}

/// Largest reachability set over all vertices under `l`.
pub fn coloring_number(g: &Digraph, l: &LinearOrdering, k: Radius, mode: ReachMode) -> Result<usize, ColoringError> {
    let pos = l.positions(g)?;
    Ok((0..g.n()).map(|v| reach_idx(g, &pos, v, k, mode).len()).max().unwrap_or(0))
}

struct Search<'a> {
    g: &'a MaskGraph,
    steps: usize,
    mode: ReachMode,
    best: usize,
    best_order: Vec<usize>,
    prefix: Vec<usize>,
}

impl Search<'_> {
    fn forward(&self, v: usize, within: u128) -> u128 {
        let mut seen = bit(v);
        let mut frontier = seen;
        for _ in 0..self.steps {
            let mut next = 0;
            for x in bits(frontier) {
                next |= self.g.out[x];
            }
            next &= within & !seen;
            if next == 0 {
                break;
            }
            seen |= next;
            frontier = next;
        }
        seen
    }

    /// Size of the reachability set of `v` placed right after the prefix.
    fn count(&self, v: usize, unplaced: u128) -> usize {
        match self.mode {
            ReachMode::Weak => {
                let mut c = 1;
                let mut later = unplaced;
                for &w in self.prefix.iter().rev() {
                    later |= bit(w);
                    if self.forward(v, later) & bit(w) != 0 {
                        c += 1;
                    }
                }
                c
            }
            ReachMode::Strong => {
                let inner = self.forward(v, unplaced & !bit(v));
                let mut frontier_hits = 0u128;
                // Endpoints one step past a vertex at distance < steps.
                let mut layer = bit(v);
                let mut seen = bit(v);
                for _ in 0..self.steps {
                    let mut next = 0;
                    for x in bits(layer) {
                        next |= self.g.out[x];
                    }
                    let placed: u128 = self.prefix.iter().fold(0, |m, &w| m | bit(w));
                    frontier_hits |= next & placed;
                    next &= inner & !seen;
                    if next == 0 {
                        break;
                    }
                    seen |= next;
                    layer = next;
                }
                1 + frontier_hits.count_ones() as usize
            }
        }
    }

    fn run(&mut self, unplaced: u128, worst: usize) {
        if unplaced == 0 {
            if worst < self.best {
                self.best = worst;
                self.best_order = self.prefix.clone();
            }
            return;
        }
        for v in bits(unplaced) {
            let rest = unplaced & !bit(v);
            let c = self.count(v, rest);
            let w = worst.max(c);
            if w >= self.best {
                continue;
            }
            self.prefix.push(v);
            self.run(rest, w);
            self.prefix.pop();
        }
    }
}

/// Exact coloring number by exhaustive search over orderings (with pruning).
/// Refuses inputs with more than `cap` vertices.
pub fn coloring_number_exact(
    g: &Digraph,
    k: Radius,
    mode: ReachMode,
    cap: usize,
) -> Result<(usize, LinearOrdering), ColoringError> {
    if g.n() > cap || g.n() > 128 {
        return Err(ColoringError::TooLarge { n: g.n(), cap });
    }
    let mg = g.mask_graph().expect("small graph");
    let start = LinearOrdering(g.vertices().to_vec());
    let seed = coloring_number(g, &start, k, mode)?;
    let mut s = Search {
        g: &mg,
        steps: k.steps(g.n()),
        mode,
        best: seed,
        best_order: (0..g.n()).collect(),
        prefix: Vec::new(),
    };
    s.run(mg.full(), 0);
    let order = LinearOrdering(s.best_order.iter().map(|&i| g.id(i).clone()).collect());
    Ok((s.best, order))
}

/// Weak infinite coloring number, equal to cycle rank plus one (0 for the empty digraph).
pub fn wcol_inf(g: &Digraph) -> Result<usize, ColoringError> {
    if g.n() == 0 {
        return Ok(0);
    }
    Ok(cycle_rank(g)?.rank + 1)
}

/// Orders sibling subtrees along the acyclic digraph of edges between them,
/// emitting each root before its own subtree.
fn order_siblings(
    g: &Digraph,
    roots: &[VertexId],
    t: &CycleRankDecomposition,
    children: &BTreeMap<VertexId, Vec<VertexId>>,
    out: &mut Vec<VertexId>,
) {
    let blocks: Vec<BTreeSet<VertexId>> = roots.iter().map(|r| t.subtree(r)).collect();
    let mut owner = BTreeMap::new();
    for (bi, b) in blocks.iter().enumerate() {
        for v in b {
            owner.insert(v.clone(), bi);
        }
    }
    let mut succ = vec![BTreeSet::new(); roots.len()];
    let mut indeg = vec![0; roots.len()];
    for (a, b) in g.edges() {
        if let (Some(&x), Some(&y)) = (owner.get(&a), owner.get(&b)) {
            if x != y && succ[x].insert(y) {
                indeg[y] += 1;
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<(VertexId, usize)>> = (0..roots.len())
        .filter(|&i| indeg[i] == 0)
        .map(|i| Reverse((roots[i].clone(), i)))
        .collect();
    while let Some(Reverse((r, i))) = ready.pop() {
        out.push(r.clone());
        if let Some(cs) = children.get(&r) {
            order_siblings(g, cs, t, children, out);
        }
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(Reverse((roots[j].clone(), j)));
            }
        }
    }
}

/// Ordering whose weak infinite coloring number is at most the height of `t`.
pub fn ordering_from_decomposition(
    g: &Digraph,
    t: &CycleRankDecomposition,
) -> Result<LinearOrdering, ColoringError> {
    if !validate_cr_decomposition(g, t).valid {
        return Err(ColoringError::InvalidDecomposition);
    }
    let children = t.children();
    let mut out = Vec::new();
    order_siblings(g, &t.roots, t, &children, &mut out);
    Ok(LinearOrdering(out))
}

/// Decomposition whose height is at most the weak infinite coloring number of `l`.
pub fn decomposition_from_ordering(
    g: &Digraph,
    l: &LinearOrdering,
) -> Result<CycleRankDecomposition, ColoringError> {
    let pos = l.positions(g)?;
    let mut roots = Vec::new();
    let mut parent = BTreeMap::new();
    let mut stack: Vec<(Vec<usize>, Option<usize>)> =
        scc_idx(g, None).into_iter().rev().map(|c| (c, None)).collect();
    while let Some((comp, par)) = stack.pop() {
        let root = *comp.iter().min_by_key(|&&v| pos[v]).unwrap();
        match par {
            None => roots.push(g.id(root).clone()),
            Some(p) => {
                parent.insert(g.id(root).clone(), g.id(p).clone());
            }
        }
        let mut alive = vec![false; g.n()];
        for &v in &comp {
            alive[v] = v != root;
        }
        for c in scc_idx(g, Some(&alive)).into_iter().rev() {
            stack.push((c, Some(root)));
        }
    }
    Ok(CycleRankDecomposition { roots, parent })
}
