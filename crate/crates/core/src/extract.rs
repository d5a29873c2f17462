//! Explicit minor constructions: grids, relaxed ladders and chains, mixed
//! chains and relaxed tree chains. Each construction returns a model that
//! `validate_model` can check on its own.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::chains::{boundary, validate_structure, MixedChain, RelaxedChain, RelaxedLadder, StructureDescriptor};
use crate::families::{cycle_chain, cylindrical_grid, grid_vertex, ladder, relaxed_tree_chain, tree_chain, RecipeTrace, TreeChainRecipe};
use crate::graph::{butterfly_contract, is_butterfly_contractible, Digraph, Edge, Path, TwoTerminalDigraph, VertexId};
use crate::minor::{validate_model, BranchSet, ButterflyMinorModel, MinorError};
use crate::search::{find_model, subgraph_monomorphism, SearchOutcome, DEFAULT_BUDGET};

fn pre(msg: impl Into<String>) -> MinorError {
    MinorError::PreconditionViolated(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "edge")]
pub enum MinorStep {
    DeleteVertex(VertexId),
    DeleteEdge(Edge),
    Contract(Edge),
}

/// Applies deletions and butterfly contractions to a host while keeping, for
/// every current vertex, the branch set of host vertices it stands for and,
/// for every current edge, one host edge realizing it.
#[derive(Debug, Clone)]
pub struct MinorBuilder {
    host: Digraph,
    cur: Digraph,
    branches: BTreeMap<VertexId, BranchSet>,
    reps: BTreeMap<Edge, Edge>,
    alias: BTreeMap<VertexId, VertexId>,
    script: Vec<MinorStep>,
}

impl MinorBuilder {
    pub fn new(host: &Digraph) -> Self {
        MinorBuilder {
            host: host.clone(),
            cur: host.clone(),
            branches: host.vertices().iter().map(|v| (v.clone(), BranchSet::singleton(v.clone()))).collect(),
            reps: host.edges().into_iter().map(|e| (e.clone(), e)).collect(),
            alias: host.vertices().iter().map(|v| (v.clone(), v.clone())).collect(),
            script: Vec::new(),
        }
    }

    pub fn current(&self) -> &Digraph {
        &self.cur
    }

    pub fn script(&self) -> &[MinorStep] {
        &self.script
    }

    /// Current vertex standing for host vertex `v`, if it still exists.
    pub fn alias(&self, v: &VertexId) -> Option<VertexId> {
        self.alias.get(v).filter(|c| self.cur.contains_vertex(c)).cloned()
    }

    fn alias_of(&self, v: &VertexId) -> Result<VertexId, MinorError> {
        self.alias(v).ok_or_else(|| pre(format!("vertex {v} no longer exists")))
    }

    pub fn delete_vertex(&mut self, v: &VertexId) {
        if !self.cur.contains_vertex(v) {
            return;
        }
        self.cur = self.cur.remove_vertices([v]);
        self.branches.remove(v);
        self.reps.retain(|(a, b), _| a != v && b != v);
        self.script.push(MinorStep::DeleteVertex(v.clone()));
    }

    pub fn delete_edge(&mut self, e: &Edge) {
        if !self.cur.has_edge(&e.0, &e.1) {
            return;
        }
        self.cur = self.cur.remove_edges([e]);
        self.reps.remove(e);
        self.script.push(MinorStep::DeleteEdge(e.clone()));
    }

    /// Deletes every current edge and vertex outside `keep` (current names).
    pub fn restrict_to(&mut self, keep: &Digraph) {
        for e in self.cur.edges() {
            if !keep.has_edge(&e.0, &e.1) {
                self.delete_edge(&e);
            }
        }
        for v in self.cur.vertices().to_vec() {
            if !keep.contains_vertex(&v) {
                self.delete_vertex(&v);
            }
        }
    }

    /// Butterfly-contracts the current edge `(u, v)`; the merged vertex is `u`.
    pub fn contract(&mut self, u: &VertexId, v: &VertexId) -> Result<(), MinorError> {
        if !is_butterfly_contractible(&self.cur, u, v) {
            return Err(pre(format!("({u}, {v}) is not butterfly contractible")));
        }
        let (a, b) = self.reps[&(u.clone(), v.clone())].clone();
        let bu = self.branches.remove(u).expect("branch of u");
        let bv = self.branches.remove(v).expect("branch of v");
        let merged = if self.cur.out_degree(u) == Some(1) {
            // Only the tree path from the root of u to `a` is still needed on the out side.
            let path = out_tree_path(&bu, &a);
            let mut in_part = bu.in_part.clone();
            in_part.extend(path.iter().cloned());
            in_part.extend(bv.in_part.iter().cloned());
            let mut edges: BTreeSet<Edge> = in_tree_edges(&bu).into_iter().chain(bv.edges.iter().cloned()).collect();
            edges.extend(path.windows(2).map(|w| (w[0].clone(), w[1].clone())));
            edges.insert((a.clone(), b.clone()));
            BranchSet { root: bv.root.clone(), in_part, out_part: bv.out_part.clone(), edges }
        } else {
            let path = in_tree_path(&bv, &b);
            let mut out_part = bu.out_part.clone();
            out_part.extend(path.iter().cloned());
            out_part.extend(bv.out_part.iter().cloned());
            let mut edges: BTreeSet<Edge> = bu.edges.iter().cloned().chain(out_tree_edges(&bv)).collect();
            edges.extend(path.windows(2).map(|w| (w[0].clone(), w[1].clone())));
            edges.insert((a.clone(), b.clone()));
            BranchSet { root: bu.root.clone(), in_part: bu.in_part.clone(), out_part, edges }
        };
        let mut reps = BTreeMap::new();
        for ((x, y), r) in std::mem::take(&mut self.reps) {
            let x = if x == *v { u.clone() } else { x };
            let y = if y == *v { u.clone() } else { y };
            if x != y {
                reps.entry((x, y)).or_insert(r);
            }
        }
        self.reps = reps;
        self.cur = butterfly_contract(&self.cur, u, v).map_err(|e| pre(e.to_string()))?;
        self.branches.insert(u.clone(), merged);
        for c in self.alias.values_mut() {
            if c == v {
                *c = u.clone();
            }
        }
        self.script.push(MinorStep::Contract((u.clone(), v.clone())));
        Ok(())
    }

    /// Contracts the current edge between the images of host vertices `a`, `b`.
    pub fn contract_host(&mut self, a: &VertexId, b: &VertexId) -> Result<(), MinorError> {
        let (u, v) = (self.alias_of(a)?, self.alias_of(b)?);
        self.contract(&u, &v)
    }

    /// Contracts a host path into its first vertex.
    pub fn collapse_path(&mut self, p: &[VertexId]) -> Result<(), MinorError> {
        for x in p.iter().skip(1) {
            self.contract_host(&p[0], x)?;
        }
        Ok(())
    }

    /// Contracts all but the last edge of a host path, leaving one edge from
    /// its first vertex to its last.
    pub fn shorten_path(&mut self, p: &[VertexId]) -> Result<(), MinorError> {
        if p.len() > 2 {
            self.collapse_path(&p[..p.len() - 1])?;
        }
        Ok(())
    }

    /// The model of `pattern` given a map from pattern vertices to current
    /// vertices under which every pattern edge is a current edge.
    pub fn finish(&self, pattern: &Digraph, map: &BTreeMap<VertexId, VertexId>) -> Result<ButterflyMinorModel, MinorError> {
        let mut mu = ButterflyMinorModel::default();
        for v in pattern.vertices() {
            let c = map.get(v).ok_or_else(|| pre(format!("pattern vertex {v} is unmapped")))?;
            let b = self.branches.get(c).ok_or_else(|| pre(format!("{c} is not a current vertex")))?;
            mu.vertex_map.insert(v.clone(), b.clone());
        }
        for (x, y) in pattern.edges() {
            let e = (map[&x].clone(), map[&y].clone());
            let r = self.reps.get(&e).ok_or_else(|| pre(format!("({}, {}) is not a current edge", e.0, e.1)))?;
            mu.edge_map.insert((x, y), r.clone());
        }
        Ok(mu)
    }

    pub fn host(&self) -> &Digraph {
        &self.host
    }
}

fn out_tree_edges(b: &BranchSet) -> Vec<Edge> {
    let inside = |v: &VertexId| *v == b.root || b.out_part.contains(v);
    b.edges.iter().filter(|(x, y)| inside(x) && inside(y)).cloned().collect()
}

fn in_tree_edges(b: &BranchSet) -> Vec<Edge> {
    let inside = |v: &VertexId| *v == b.root || b.in_part.contains(v);
    b.edges.iter().filter(|(x, y)| inside(x) && inside(y)).cloned().collect()
}

/// Tree path from the root to `a` inside the out-arborescence.
fn out_tree_path(b: &BranchSet, a: &VertexId) -> Vec<VertexId> {
    let parent: BTreeMap<VertexId, VertexId> = out_tree_edges(b).into_iter().map(|(x, y)| (y, x)).collect();
    let mut path = vec![a.clone()];
    let mut cur = a.clone();
    while cur != b.root {
        cur = parent[&cur].clone();
        path.push(cur.clone());
    }
    path.reverse();
    path
}

/// Tree path from `z` to the root inside the in-arborescence.
fn in_tree_path(b: &BranchSet, z: &VertexId) -> Vec<VertexId> {
    let next: BTreeMap<VertexId, VertexId> = in_tree_edges(b).into_iter().collect();
    let mut path = vec![z.clone()];
    let mut cur = z.clone();
    while cur != b.root {
        cur = next[&cur].clone();
        path.push(cur.clone());
    }
    path
}

/// Host, pattern, model and the deletion/contraction script that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub host: Digraph,
    pub pattern: Digraph,
    pub model: ButterflyMinorModel,
    pub script: Vec<MinorStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridTarget {
    Chain,
    Ladder,
}

fn checked(host: Digraph, pattern: Digraph, model: ButterflyMinorModel, script: Vec<MinorStep>) -> Result<Extraction, MinorError> {
    let r = validate_model(&pattern, &host, &model);
    if let Some(w) = r.witness {
        return Err(pre(format!("construction produced an invalid model: {w:?}")));
    }
    Ok(Extraction { host, pattern, model, script })
}

/// Contracts, until none is left, every current edge that is butterfly
/// contractible and not listed in `keep` (host edges) or `keep_current`.
fn contract_until_stuck(b: &mut MinorBuilder, keep: &BTreeSet<Edge>) -> Result<(), MinorError> {
    loop {
        let protected: BTreeSet<Edge> = keep
            .iter()
            .filter_map(|(x, y)| Some((b.alias(x)?, b.alias(y)?)))
            .collect();
        let next = b
            .current()
            .edges()
            .into_iter()
            .find(|e| {
                !protected.contains(e)
                    && !protected.contains(&(e.1.clone(), e.0.clone()))
                    && is_butterfly_contractible(b.current(), &e.0, &e.1)
            });
        match next {
            Some((u, v)) => b.contract(&u, &v)?,
            None => return Ok(()),
        }
    }
}

/// Finishes a construction on the (small) current digraph: embeds the
/// pattern directly when possible, otherwise finds a model by search, deletes
/// everything outside its image and contracts its branch sets to points.
fn finish_by_search(b: &mut MinorBuilder, pattern: &Digraph) -> Result<ButterflyMinorModel, MinorError> {
    if let Ok(Some(map)) = subgraph_monomorphism(pattern, b.current(), 1_000_000) {
        return b.finish(pattern, &map);
    }
    let mu = match find_model(pattern, b.current(), DEFAULT_BUDGET) {
        SearchOutcome::Found(mu) => mu,
        other => return Err(pre(format!("pattern search on the contracted digraph: {}", other.label()))),
    };
    let image = mu.image();
    b.restrict_to(&image);
    for br in mu.vertex_map.values() {
        for (x, y) in &br.edges {
            b.contract_host(x, y)?;
        }
    }
    let map = mu
        .vertex_map
        .iter()
        .map(|(v, br)| Ok((v.clone(), b.alias_of(&br.root)?)))
        .collect::<Result<BTreeMap<_, _>, MinorError>>()?;
    b.finish(pattern, &map)
}

/// A cycle chain of order `k + 1` in the grid of order `k`, or a ladder of
/// order `k` in the grid of order `2k`.
pub fn extract_from_grid(k: usize, target: GridTarget) -> Result<Extraction, MinorError> {
    if k == 0 {
        return Err(pre("k must be at least 1"));
    }
    match target {
        GridTarget::Chain => chain_from_grid(k),
        GridTarget::Ladder => ladder_from_grid(k),
    }
}

fn v(i: usize, j: usize) -> VertexId {
    grid_vertex(i, j)
}

fn chain_from_grid(k: usize) -> Result<Extraction, MinorError> {
    let host = cylindrical_grid(k).map_err(|e| pre(e.to_string()))?;
    let pattern = cycle_chain(k + 1).map_err(|e| pre(e.to_string()))?.graph;
    let mut b = MinorBuilder::new(&host);
    if k == 1 {
        let map = BTreeMap::from([("v1".into(), v(1, 1)), ("v2".into(), v(1, 2))]);
        let model = b.finish(&pattern, &map)?;
        return checked(host, pattern, model, vec![]);
    }
    let ring = |i: usize| -> Vec<Edge> { (1..=2 * k).map(|j| (v(i, j), v(i, j % (2 * k) + 1))).collect() };
    let mut keep_edges: BTreeSet<Edge> = (1..=k).flat_map(ring).collect();
    let mut spokes: Vec<Edge> = Vec::new();
    let mut first: Vec<Edge> = Vec::new();
    let mut protect: BTreeSet<Edge> = BTreeSet::new();
    if k == 2 {
        keep_edges.remove(&(v(2, 2), v(2, 3)));
        spokes.extend([(v(2, 2), v(1, 2)), (v(1, 3), v(2, 3))]);
        first.push((v(1, 2), v(1, 3)));
        protect.extend([(v(1, 1), v(1, 2)), (v(2, 1), v(2, 2))]);
    } else {
        for i in 1..=k {
            if i % 2 == 0 {
                keep_edges.remove(&(v(i, 2), v(i, 3)));
            } else if i != 1 {
                keep_edges.remove(&(v(i, 4), v(i, 5)));
            }
            protect.extend([(v(i, 1), v(i, 2)), (v(i, 3), v(i, 4))]);
        }
        for i in 1..k {
            if i % 2 == 1 {
                spokes.extend([(v(i + 1, 2), v(i, 2)), (v(i, 3), v(i + 1, 3))]);
                first.push((v(i, 2), v(i, 3)));
            } else {
                spokes.extend([(v(i + 1, 4), v(i, 4)), (v(i, 5), v(i + 1, 5))]);
                first.push((v(i, 4), v(i, 5)));
            }
        }
    }
    protect.extend(spokes.iter().cloned());
    keep_edges.extend(spokes);
    let keep = Digraph::new(host.vertices().to_vec(), keep_edges.into_iter().collect::<Vec<_>>())
        .map_err(|e| pre(e.to_string()))?;
    b.restrict_to(&keep);
    for (x, y) in &first {
        b.contract_host(x, y)?;
    }
    contract_until_stuck(&mut b, &protect)?;
    let model = finish_by_search(&mut b, &pattern)?;
    let script = b.script().to_vec();
    checked(host, pattern, model, script)
}

fn ladder_from_grid(k: usize) -> Result<Extraction, MinorError> {
    let n = 2 * k;
    let cols = 4 * k;
    let host = cylindrical_grid(n).map_err(|e| pre(e.to_string()))?;
    let pattern = ladder(k).map_err(|e| pre(e.to_string()))?;
    let mut b = MinorBuilder::new(&host);
    // Spokes survive only in the first and last column; odd rings keep only
    // their closing edge, even rings lose it.
    let mut drop: Vec<Edge> = Vec::new();
    for i in 1..n {
        for j in 2..cols {
            drop.push((v(i, j), v(i + 1, j)));
            drop.push((v(i + 1, j), v(i, j)));
        }
    }
    for i in 1..=n {
        if i % 2 == 1 {
            drop.extend((1..cols).map(|j| (v(i, j), v(i, j + 1))));
        } else {
            drop.push((v(i, cols), v(i, 1)));
        }
    }
    for e in &drop {
        b.delete_edge(e);
    }
    for i in (1..=n).step_by(2) {
        for j in 2..cols {
            b.delete_vertex(&v(i, j));
        }
    }
    for i in (2..=n).step_by(2) {
        for j in 2..cols {
            b.contract_host(&v(i, 1), &v(i, j))?;
        }
    }
    for i in (1..n).step_by(2) {
        b.contract_host(&v(i, 1), &v(i + 1, 1))?;
        b.contract_host(&v(i + 1, cols), &v(i, cols))?;
    }
    let mut map = BTreeMap::new();
    for m in 1..=k {
        map.insert(VertexId::from(format!("p{m}")), b.alias_of(&v(2 * m - 1, 1))?);
        map.insert(VertexId::from(format!("q{}", k + 1 - m)), b.alias_of(&v(2 * m, cols))?);
    }
    let model = b.finish(&pattern, &map)?;
    let script = b.script().to_vec();
    checked(host, pattern, model, script)
}

fn require(desc: StructureDescriptor) -> Result<Digraph, MinorError> {
    let host = desc.subgraph();
    let r = validate_structure(&host, &desc);
    match r.witness {
        None => Ok(host),
        Some(w) => Err(pre(format!("invalid descriptor: {} at {:?}", w.clause, w.vertices))),
    }
}

fn subpath(p: &Path, a: &VertexId, z: &VertexId) -> Result<Vec<VertexId>, MinorError> {
    p.subpath(a, z)
        .map(|s| s.vertices().to_vec())
        .ok_or_else(|| pre(format!("{z} does not follow {a} on the path")))
}

/// A ladder of order `k` inside a relaxed ladder of order at least `4k`.
pub fn ladder_from_relaxed_ladder(desc: &RelaxedLadder, k: usize) -> Result<Extraction, MinorError> {
    if k == 0 || desc.order() < 4 * k {
        return Err(pre(format!("need k >= 1 and order >= {}, got order {}", 4 * k, desc.order())));
    }
    let host = require(StructureDescriptor::RelaxedLadder(desc.clone()))?;
    let pattern = ladder(k).map_err(|e| pre(e.to_string()))?;
    let ys: Vec<&Path> = (1..=k).map(|i| &desc.y_rungs[4 * i - 4]).collect();
    let xs: Vec<&Path> = (1..=k).map(|i| &desc.x_rungs[4 * i - 2]).collect();
    let mut keep: Vec<&Path> = vec![&desc.p_path, &desc.q_path];
    keep.extend(ys.iter().copied());
    keep.extend(xs.iter().copied());
    let mut vs = BTreeSet::new();
    let mut es = Vec::new();
    for p in keep {
        vs.extend(p.vertices().iter().cloned());
        es.extend(p.edge_list());
    }
    let kept = Digraph::new(vs, es).map_err(|e| pre(e.to_string()))?;
    let mut b = MinorBuilder::new(&host);
    b.restrict_to(&kept);
    for i in 0..k {
        b.collapse_path(&subpath(&desc.p_path, ys[i].head(), xs[i].tail())?)?;
        b.collapse_path(&subpath(&desc.q_path, xs[i].head(), ys[i].tail())?)?;
    }
    for i in 0..k {
        b.shorten_path(xs[i].vertices())?;
        b.shorten_path(ys[i].vertices())?;
        if i + 1 < k {
            b.shorten_path(&subpath(&desc.p_path, xs[i].tail(), ys[i + 1].head())?)?;
            b.shorten_path(&subpath(&desc.q_path, ys[i + 1].tail(), xs[i].head())?)?;
        }
    }
    let mut map = BTreeMap::new();
    for i in 1..=k {
        map.insert(VertexId::from(format!("p{i}")), b.alias_of(ys[i - 1].head())?);
        map.insert(VertexId::from(format!("q{}", k + 1 - i)), b.alias_of(xs[i - 1].head())?);
    }
    let model = b.finish(&pattern, &map)?;
    let script = b.script().to_vec();
    checked(host, pattern, model, script)
}

/// A cycle chain whose order is the length of the relaxed chain.
pub fn cycle_chain_from_relaxed_chain(desc: &RelaxedChain) -> Result<Extraction, MinorError> {
    let k = desc.length();
    if k == 0 {
        return Err(pre("chain length must be at least 1"));
    }
    let host = require(StructureDescriptor::RelaxedChain(desc.clone()))?;
    let pattern = cycle_chain(k).map_err(|e| pre(e.to_string()))?.graph;
    let mut b = MinorBuilder::new(&host);
    for r in &desc.r_paths {
        b.collapse_path(r.vertices())?;
    }
    for i in 2..=k {
        b.shorten_path(desc.p_paths[i - 1].vertices())?;
        b.shorten_path(desc.q_paths[i - 1].vertices())?;
    }
    let mut map = BTreeMap::new();
    for i in 1..=k {
        map.insert(VertexId::from(format!("v{i}")), b.alias_of(&desc.p_junctions[i])?);
    }
    let keep = pattern.vertex_set();
    let model = b.finish(&pattern, &map)?;
    let model = model.restrict(&pattern);
    debug_assert_eq!(model.vertex_map.keys().cloned().collect::<BTreeSet<_>>(), keep);
    let script = b.script().to_vec();
    checked(host, pattern, model, script)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MixedOutcome {
    CycleChain(Extraction),
    Ladder(Extraction),
}

impl MixedOutcome {
    pub fn extraction(&self) -> &Extraction {
        match self {
            MixedOutcome::CycleChain(e) | MixedOutcome::Ladder(e) => e,
        }
    }
}

/// A cycle chain or a ladder of order `k` in a mixed chain of weight at
/// least `4k² + k − 1`.
pub fn chain_or_ladder_from_mixed_chain(desc: &MixedChain, k: usize) -> Result<MixedOutcome, MinorError> {
    if k == 0 {
        return Err(pre("k must be at least 1"));
    }
    let host = require(StructureDescriptor::MixedChain(desc.clone()))?;
    let need = 4 * k * k + k - 1;
    if desc.compute_weight() < need {
        return Err(pre(format!("weight {} is below {need}", desc.compute_weight())));
    }
    if desc.length() >= k {
        let chain = boundary(desc).map_err(|e| pre(e.to_string()))?;
        let full = cycle_chain_from_relaxed_chain(&chain)?;
        let pattern = cycle_chain(k).map_err(|e| pre(e.to_string()))?.graph;
        let model = full.model.restrict(&pattern);
        let out = checked(host, pattern, model, full.script)?;
        return Ok(MixedOutcome::CycleChain(out));
    }
    let l = desc
        .ladders
        .iter()
        .find(|l| l.order() >= 4 * k)
        .ok_or_else(|| pre("no ladder of order 4k although the weight bound holds"))?;
    let inner = ladder_from_relaxed_ladder(l, k)?;
    let out = checked(host, inner.pattern, inner.model, inner.script)?;
    Ok(MixedOutcome::Ladder(out))
}

/// Tree chain model together with the relaxed tree chain it lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeChainExtraction {
    pub host: TwoTerminalDigraph,
    pub pattern: TwoTerminalDigraph,
    pub model: ButterflyMinorModel,
}

impl TreeChainExtraction {
    /// The host terminals sit on the out side of the image of the pattern's
    /// source and on the in side of the image of its sink.
    pub fn terminals_placed(&self) -> bool {
        let bs = &self.model.vertex_map[&self.pattern.s];
        let bt = &self.model.vertex_map[&self.pattern.t];
        bs.tails().any(|x| *x == self.host.s) && bt.heads().any(|y| *y == self.host.t)
    }
}

fn bfs_path(g: &Digraph, from: &VertexId, to: &VertexId, allowed: &BTreeSet<VertexId>) -> Option<Vec<VertexId>> {
    let mut prev: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut queue = VecDeque::from([from.clone()]);
    let mut seen = BTreeSet::from([from.clone()]);
    while let Some(x) = queue.pop_front() {
        if x == *to {
            let mut path = vec![x.clone()];
            let mut c = x;
            while let Some(p) = prev.get(&c) {
                path.push(p.clone());
                c = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        for y in g.out_neighbors(&x) {
            if allowed.contains(&y) && seen.insert(y.clone()) {
                prev.insert(y.clone(), x.clone());
                queue.push_back(y);
            }
        }
    }
    None
}

fn relabel_copy(mu: ButterflyMinorModel, digit: char) -> ButterflyMinorModel {
    let f = |v: &VertexId| VertexId::from(format!("c{digit}{}", &v.as_str()[1..]));
    ButterflyMinorModel {
        vertex_map: mu.vertex_map.into_iter().map(|(v, b)| (f(&v), b)).collect(),
        edge_map: mu.edge_map.into_iter().map(|((x, y), e)| ((f(&x), f(&y)), e)).collect(),
    }
}

fn tc_label(first: char, rest: char, len: usize) -> VertexId {
    let mut s = String::from("c");
    s.push(first);
    s.extend(std::iter::repeat(rest).take(len));
    VertexId::from(s)
}

fn tc_rec(g: &Digraph, trace: &RecipeTrace, addr: &str, k: usize) -> Result<ButterflyMinorModel, MinorError> {
    let node = |a: &str| trace.nodes.get(a).ok_or_else(|| pre(format!("recipe has no node {a:?}")));
    let here = node(addr)?;
    let mut mu = ButterflyMinorModel::default();
    if k == 1 {
        let x1 = node(&format!("{addr}1"))?.s.clone();
        let x2 = node(&format!("{addr}2"))?.s.clone();
        let (c1, c2) = (VertexId::from("c1"), VertexId::from("c2"));
        mu.vertex_map.insert(c1.clone(), BranchSet::singleton(x1.clone()));
        if here.a == 1 {
            mu.vertex_map.insert(c2.clone(), BranchSet::singleton(x2.clone()));
            mu.edge_map.insert((c1.clone(), c2.clone()), (x1.clone(), x2.clone()));
            mu.edge_map.insert((c2, c1), (x2, x1));
        } else {
            // The path from the sink leaf back through the glue chain to its first vertex.
            let mut path = vec![x2.clone()];
            path.extend(here.glue.iter().rev().cloned());
            let root = here.glue[0].clone();
            let mut bt = BranchSet::singleton(root.clone());
            bt.in_part = path[..path.len() - 1].iter().cloned().collect();
            bt.edges = path.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
            mu.vertex_map.insert(c2.clone(), bt);
            mu.edge_map.insert((c1.clone(), c2.clone()), (x1.clone(), root.clone()));
            mu.edge_map.insert((c2, c1), (root, x1));
        }
        return Ok(mu);
    }
    let sub = |s: &str| format!("{addr}{s}");
    let h: Vec<&crate::families::RecipeNode> =
        ["11", "12", "21", "22"].iter().map(|s| node(&sub(s))).collect::<Result<_, _>>()?;
    let mu1 = relabel_copy(tc_rec(g, trace, &sub("11"), k - 1)?, '1');
    let mu2 = relabel_copy(tc_rec(g, trace, &sub("12"), k - 1)?, '2');
    mu.vertex_map.extend(mu1.vertex_map);
    mu.vertex_map.extend(mu2.vertex_map);
    mu.edge_map.extend(mu1.edge_map);
    mu.edge_map.extend(mu2.edge_map);
    let (x1, y1) = (&h[0].s, &h[0].t);
    let (x2, y2) = (&h[1].s, &h[1].t);
    let y4 = &h[3].t;
    let blocked: BTreeSet<&VertexId> = h[0].vertices.iter().chain(&h[1].vertices).collect();
    let free: BTreeSet<VertexId> = here.vertices.iter().filter(|v| !blocked.contains(v)).cloned().collect();

    let mut allowed_p = free.clone();
    allowed_p.insert(y2.clone());
    let p = bfs_path(g, y4, y2, &allowed_p).ok_or_else(|| pre("no path from the right sink to the left sink"))?;
    let mut allowed_q = free;
    allowed_q.extend([x2.clone(), y1.clone()]);
    let q = bfs_path(g, x2, y1, &allowed_q).ok_or_else(|| pre("no path closing the second copy"))?;

    let depth = k - 1;
    let t = tc_label('2', '2', depth);
    let bt = mu.vertex_map.get_mut(&t).expect("sink image");
    bt.in_part.extend(p[..p.len() - 1].iter().cloned());
    bt.edges.extend(p.windows(2).map(|w| (w[0].clone(), w[1].clone())));

    let s2 = tc_label('2', '1', depth);
    let bs = mu.vertex_map.get_mut(&s2).expect("source image of the second copy");
    bs.out_part.extend(q[1..q.len() - 1].iter().cloned());
    bs.edges.extend(q[..q.len() - 1].windows(2).map(|w| (w[0].clone(), w[1].clone())));

    let s1 = tc_label('1', '1', depth);
    let t1 = tc_label('1', '2', depth);
    let cross_head = if here.a == 1 { y4.clone() } else { here.glue[0].clone() };
    mu.edge_map.insert((s1, t.clone()), (x1.clone(), cross_head));
    mu.edge_map.insert((s2, t1), (q[q.len() - 2].clone(), y1.clone()));
    Ok(mu)
}

/// A tree chain of order `k` inside the relaxed tree chain of a recipe of
/// depth `2k − 1`.
pub fn tc_from_relaxed_tree_chain(recipe: &TreeChainRecipe, k: usize) -> Result<TreeChainExtraction, MinorError> {
    if k == 0 || recipe.depth != 2 * k - 1 {
        return Err(pre(format!("need k >= 1 and recipe depth {}, got {}", 2 * k.max(1) - 1, recipe.depth)));
    }
    let (host, trace) = relaxed_tree_chain(recipe).map_err(|e| pre(e.to_string()))?;
    let pattern = tree_chain(k).map_err(|e| pre(e.to_string()))?;
    let model = tc_rec(&host.graph, &trace, "", k)?;
    let out = TreeChainExtraction { host, pattern, model };
    if let Some(w) = validate_model(&out.pattern.graph, &out.host.graph, &out.model).witness {
        return Err(pre(format!("construction produced an invalid model: {w:?}")));
    }
    if !out.terminals_placed() {
        return Err(pre("terminal placement property failed"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_one_is_cycle_chain() {
        let e = extract_from_grid(1, GridTarget::Chain).unwrap();
        assert!(e.script.is_empty());
        assert_eq!(e.host.m(), 2);
    }

    #[test]
    fn grid_chains() {
        for k in 1..=5 {
            let e = extract_from_grid(k, GridTarget::Chain).unwrap();
            assert!(validate_model(&e.pattern, &e.host, &e.model).valid, "k={k}");
        }
    }

    #[test]
    fn grid_ladders() {
        for k in 1..=3 {
            let e = extract_from_grid(k, GridTarget::Ladder).unwrap();
            assert!(validate_model(&e.pattern, &e.host, &e.model).valid, "k={k}");
        }
    }

    #[test]
    fn tree_chain_base_cases() {
        let e = tc_from_relaxed_tree_chain(&TreeChainRecipe::uniform(1, 1), 1).unwrap();
        assert!(e.model.vertex_map.values().all(|b| b.vertices().len() == 1));
        let e = tc_from_relaxed_tree_chain(&TreeChainRecipe::uniform(1, 3), 1).unwrap();
        let bt = &e.model.vertex_map[&VertexId::from("c2")];
        assert_eq!(bt.vertices().len(), 3);
        assert_eq!(bt.root, VertexId::from("g_1"));
    }

    #[test]
    fn tree_chain_depth_three() {
        let r = TreeChainRecipe::new(3, vec![2, 1, 3, 1, 2, 1, 1]).unwrap();
        let e = tc_from_relaxed_tree_chain(&r, 2).unwrap();
        assert!(e.terminals_placed());
        assert!(tc_from_relaxed_tree_chain(&r, 1).is_err());
    }

    #[test]
    fn builder_rejects_bad_contraction() {
        let g = Digraph::from_edges([("a", "b"), ("a", "c"), ("c", "b"), ("b", "a")]).unwrap();
        let mut b = MinorBuilder::new(&g);
        assert!(b.contract(&"c".into(), &"b".into()).is_ok());
        let mut b2 = MinorBuilder::new(&Digraph::from_edges([("a", "b"), ("a", "c"), ("d", "b"), ("b", "d")]).unwrap());
        assert!(b2.contract(&"a".into(), &"b".into()).is_err());
    }
}
