//! Exact cycle rank with decomposition certificates.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{bit, bits, butterfly_contract, scc_idx, Digraph, MaskGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycleRankError {
    #[error("strongly connected component with {0} vertices exceeds the 128-vertex solver limit")]
    TooLarge(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Rooted forest over the vertex set. Roots carry no parent entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRankDecomposition {
    pub roots: Vec<VertexId>,
    pub parent: BTreeMap<VertexId, VertexId>,
}

impl CycleRankDecomposition {
    pub fn vertices(&self) -> BTreeSet<VertexId> {
        self.roots.iter().chain(self.parent.keys()).cloned().collect()
    }

    pub fn children(&self) -> BTreeMap<VertexId, Vec<VertexId>> {
        let mut ch: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for (c, p) in &self.parent {
            ch.entry(p.clone()).or_default().push(c.clone());
        }
        ch
    }

    /// Ancestors of `v` from its parent up to the root.
    pub fn ancestors(&self, v: &VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(p) = self.parent.get(cur) {
            if out.contains(p) || out.len() > self.parent.len() {
                break;
            }
            out.push(p.clone());
            cur = p;
        }
        out
    }

    /// Vertices of the subtree rooted at `v`, including `v`.
    pub fn subtree(&self, v: &VertexId) -> BTreeSet<VertexId> {
        let ch = self.children();
        let mut out = BTreeSet::new();
        let mut stack = vec![v.clone()];
        while let Some(x) = stack.pop() {
            if out.insert(x.clone()) {
                if let Some(cs) = ch.get(&x) {
                    stack.extend(cs.iter().cloned());
                }
            }
        }
        out
    }

    /// Maximum number of vertices on a root-to-leaf path.
    pub fn height(&self) -> usize {
        self.vertices().iter().map(|v| self.ancestors(v).len() + 1).max().unwrap_or(0)
    }

    fn is_ancestor(&self, a: &VertexId, b: &VertexId) -> bool {
        self.ancestors(b).contains(a)
    }

    fn remove_subtree(&mut self, v: &VertexId) {
        for x in self.subtree(v) {
            self.parent.remove(&x);
            self.roots.retain(|r| *r != x);
        }
    }

    fn rename(&mut self, from: &VertexId, to: &VertexId) {
        for r in self.roots.iter_mut() {
            if r == from {
                *r = to.clone();
            }
        }
        if let Some(p) = self.parent.remove(from) {
            self.parent.insert(to.clone(), p);
        }
        for p in self.parent.values_mut() {
            if p == from {
                *p = to.clone();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrViolation {
    UnknownVertex(VertexId),
    MissingVertex(VertexId),
    ParentCycle(VertexId),
    /// The tree rooted at `root` does not span exactly one strong component.
    TreeNotComponent { root: VertexId },
    /// The subtree at `child` is not a strong component of the parent's subtree minus the parent.
    ChildNotComponent { node: VertexId, child: VertexId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrValidation {
    pub valid: bool,
    pub height: usize,
    pub witness: Option<CrViolation>,
}

impl CrValidation {
    fn fail(w: CrViolation) -> Self {
        CrValidation { valid: false, height: 0, witness: Some(w) }
    }
}

pub fn validate_cr_decomposition(g: &Digraph, t: &CycleRankDecomposition) -> CrValidation {
    let verts = t.vertices();
    for v in &verts {
        if !g.contains_vertex(v) {
            return CrValidation::fail(CrViolation::UnknownVertex(v.clone()));
        }
    }
    for p in t.parent.values() {
        if !verts.contains(p) {
            return CrValidation::fail(CrViolation::UnknownVertex(p.clone()));
        }
    }
    for v in g.vertices() {
        if !verts.contains(v) {
            return CrValidation::fail(CrViolation::MissingVertex(v.clone()));
        }
    }
    let root_set: BTreeSet<&VertexId> = t.roots.iter().collect();
    if root_set.len() != t.roots.len() {
        return CrValidation::fail(CrViolation::ParentCycle(t.roots[0].clone()));
    }
    for r in &t.roots {
        if t.parent.contains_key(r) {
            return CrValidation::fail(CrViolation::ParentCycle(r.clone()));
        }
    }
    // Every vertex must reach a root without revisiting.
    for v in &verts {
        let mut seen = BTreeSet::new();
        let mut cur = v.clone();
        loop {
            if !seen.insert(cur.clone()) {
                return CrValidation::fail(CrViolation::ParentCycle(v.clone()));
            }
            match t.parent.get(&cur) {
                Some(p) => cur = p.clone(),
                None => break,
            }
        }
        if !root_set.contains(&cur) {
            return CrValidation::fail(CrViolation::ParentCycle(v.clone()));
        }
    }
    let comps = scc_idx(g, None);
    let mut comp_of = vec![0; g.n()];
    for (ci, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = ci;
        }
    }
    let mut used = BTreeSet::new();
    for r in &t.roots {
        let sub = t.subtree(r);
        let ci = comp_of[g.index_of(r).unwrap()];
        let expect: BTreeSet<VertexId> = comps[ci].iter().map(|&i| g.id(i).clone()).collect();
        if sub != expect || !used.insert(ci) {
            return CrValidation::fail(CrViolation::TreeNotComponent { root: r.clone() });
        }
    }
    let children = t.children();
    for (node, cs) in &children {
        let mut alive = vec![false; g.n()];
        for v in t.subtree(node) {
            alive[g.index_of(&v).unwrap()] = true;
        }
        alive[g.index_of(node).unwrap()] = false;
        let sub_comps = scc_idx(g, Some(&alive));
        for c in cs {
            let ci = g.index_of(c).unwrap();
            let comp = sub_comps.iter().find(|k| k.contains(&ci)).unwrap();
            let expect: BTreeSet<VertexId> = comp.iter().map(|&i| g.id(i).clone()).collect();
            if t.subtree(c) != expect {
                return CrValidation::fail(CrViolation::ChildNotComponent {
                    node: node.clone(),
                    child: c.clone(),
                });
            }
        }
    }
    CrValidation { valid: true, height: t.height(), witness: None }
}

/// Branch-and-bound solver over vertex-subset bitmasks of one strong component.
struct Solver<'a> {
    g: &'a MaskGraph,
    exact: HashMap<u128, (u32, usize)>,
    lower: HashMap<u128, u32>,
}

impl<'a> Solver<'a> {
    /// Cycle rank of a strongly connected `s` if it is below `limit`.
    fn strong(&mut self, s: u128, limit: u32) -> Option<u32> {
        if s.count_ones() == 1 {
            return (limit > 0).then_some(0);
        }
        if let Some(&(r, _)) = self.exact.get(&s) {
            return (r < limit).then_some(r);
        }
        if limit <= 1 {
            let lb = self.lower.entry(s).or_insert(0);
            *lb = (*lb).max(1);
            return None;
        }
        if self.lower.get(&s).is_some_and(|&lb| lb >= limit) {
            return None;
        }
        let mut cur = limit;
        let mut best: Option<(u32, usize)> = None;
        for v in bits(s) {
            if let Some(r) = self.general(s & !bit(v), cur - 1) {
                cur = r + 1;
                best = Some((r + 1, v));
                if cur == 1 {
                    break;
                }
            }
        }
        match best {
            Some((r, v)) => {
                self.exact.insert(s, (r, v));
                Some(r)
            }
            None => {
                let lb = self.lower.entry(s).or_insert(0);
                *lb = (*lb).max(limit);
                None
            }
        }
    }

    fn general(&mut self, s: u128, limit: u32) -> Option<u32> {
        if limit == 0 {
            return None;
        }
        let mut comps = self.g.sccs(s);
        comps.sort_by_key(|c| std::cmp::Reverse(c.count_ones()));
        let mut worst = 0;
        for c in comps {
            worst = worst.max(self.strong(c, limit)?);
        }
        Some(worst)
    }

    /// Attaches the optimal decomposition of strongly connected `s` below `parent`.
    fn build(&self, s: u128, parent: Option<usize>, out: &mut Vec<(usize, Option<usize>)>) {
        let root = if s.count_ones() == 1 {
            s.trailing_zeros() as usize
        } else {
            self.exact[&s].1
        };
        out.push((root, parent));
        for c in self.g.sccs(s & !bit(root)) {
            self.build(c, Some(root), out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRank {
    pub rank: usize,
    pub decomposition: CycleRankDecomposition,
}

/// Exact cycle rank and an optimal decomposition. Vertices are explored in
/// ascending order and ties go to the smallest vertex, so the certificate is
/// deterministic.
pub fn cycle_rank(g: &Digraph) -> Result<CycleRank, CycleRankError> {
    let mut roots = Vec::new();
    let mut parent = BTreeMap::new();
    let mut rank = 0;
    for comp in scc_idx(g, None) {
        if comp.len() > 128 {
            return Err(CycleRankError::TooLarge(comp.len()));
        }
        let mut keep = vec![false; g.n()];
        for &v in &comp {
            keep[v] = true;
        }
        let sub = g.induced_by_flags(&keep);
        let mg = sub.mask_graph().expect("component fits in a mask");
        let mut solver = Solver { g: &mg, exact: HashMap::new(), lower: HashMap::new() };
        let r = solver.strong(mg.full(), u32::MAX).expect("unbounded search succeeds");
        rank = rank.max(r as usize);
        let mut nodes = Vec::new();
        solver.build(mg.full(), None, &mut nodes);
        for (v, p) in nodes {
            let id = sub.id(v).clone();
            match p {
                None => roots.push(id),
                Some(p) => {
                    parent.insert(id, sub.id(p).clone());
                }
            }
        }
    }
    Ok(CycleRank { rank, decomposition: CycleRankDecomposition { roots, parent } })
}

/// Turns a decomposition of `g` into one of `g / (u, v)` with no greater height.
/// The merged vertex keeps the name `u`.
pub fn contract_cr_decomposition(
    g: &Digraph,
    t: &CycleRankDecomposition,
    u: &VertexId,
    v: &VertexId,
) -> Result<CycleRankDecomposition, CycleRankError> {
    let contracted = butterfly_contract(g, u, v)
        .map_err(|e| CycleRankError::PreconditionViolated(e.to_string()))?;
    let check = validate_cr_decomposition(g, t);
    if !check.valid {
        return Err(CycleRankError::PreconditionViolated(format!(
            "input decomposition is invalid: {:?}",
            check.witness
        )));
    }
    let mut out = t.clone();
    if t.is_ancestor(v, u) || t.is_ancestor(u, v) {
        let (top, low) = if t.is_ancestor(v, u) { (v, u) } else { (u, v) };
        let mut a = low.clone();
        while t.parent.get(&a) != Some(top) {
            a = t.parent[&a].clone();
        }
        let block = t.subtree(&a);
        out.remove_subtree(&a);
        let rest: BTreeSet<VertexId> = block.iter().filter(|x| *x != low).cloned().collect();
        let part = g.induced(rest.iter());
        let sub = cycle_rank(&part)?;
        for r in &sub.decomposition.roots {
            out.parent.insert(r.clone(), top.clone());
        }
        out.parent.extend(sub.decomposition.parent);
        if top == v {
            out.rename(v, u);
        }
    } else if g.in_degree(v) == Some(1) {
        out.remove_subtree(v);
    } else {
        out.remove_subtree(u);
        out.rename(v, u);
    }
    debug_assert!(validate_cr_decomposition(&contracted, &out).valid);
    Ok(out)
}
