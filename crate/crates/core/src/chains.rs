//! Relaxed ladders, relaxed chains, mixed chains and mixed extensions as
//! explicit path systems inside a host digraph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{arborescence, butterfly_contract, Digraph, Direction, Edge, Path, VertexId};
use crate::laced::{common_components, is_laced};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

fn pre(msg: impl Into<String>) -> ChainError {
    ChainError::PreconditionViolated(msg.into())
}

pub type EndpointPair = (VertexId, VertexId);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxedLadder {
    pub left: EndpointPair,
    pub right: EndpointPair,
    /// Boundary path from `p` to `p'`.
    pub p_path: Path,
    /// Boundary path from `q'` to `q`.
    pub q_path: Path,
    pub p_segments: Vec<Path>,
    pub q_segments: Vec<Path>,
    pub x_rungs: Vec<Path>,
    pub y_rungs: Vec<Path>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxedChain {
    pub p_paths: Vec<Path>,
    pub q_paths: Vec<Path>,
    pub r_paths: Vec<Path>,
    pub p_junctions: Vec<VertexId>,
    pub q_junctions: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedChain {
    pub ladders: Vec<RelaxedLadder>,
    pub r_paths: Vec<Path>,
    pub p_junctions: Vec<VertexId>,
    pub q_junctions: Vec<VertexId>,
    pub weight: usize,
}

/// Left endpoints `(p, q)`, right endpoints `(y, x)`; `a` runs from `p` to `x`
/// and `b` from `y` to `q`. The four-path form also carries `c` and `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedExtension {
    pub left: EndpointPair,
    pub right: EndpointPair,
    pub a: Path,
    pub b: Path,
    pub c: Option<Path>,
    pub d: Option<Path>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum StructureDescriptor {
    RelaxedLadder(RelaxedLadder),
    RelaxedChain(RelaxedChain),
    MixedChain(MixedChain),
    MixedExtension(MixedExtension),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureWitness {
    pub clause: String,
    pub vertices: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub valid: bool,
    pub measure: usize,
    pub witness: Option<StructureWitness>,
}

type Check = Result<(), StructureWitness>;

fn fail(clause: impl Into<String>, vertices: &[&VertexId]) -> Check {
    Err(StructureWitness { clause: clause.into(), vertices: vertices.iter().map(|v| (*v).clone()).collect() })
}

fn in_host(host: &Digraph, p: &Path, name: &str) -> Check {
    for v in p.vertices() {
        if !host.contains_vertex(v) {
            return fail(format!("{name} is not a path of the host"), &[v]);
        }
    }
    for (a, b) in p.edges() {
        if !host.has_edge(a, b) {
            return fail(format!("{name} is not a path of the host"), &[a, b]);
        }
    }
    Ok(())
}

fn ends(p: &Path, tail: &VertexId, head: &VertexId, name: &str) -> Check {
    if p.tail() != tail || p.head() != head {
        return fail(format!("{name} must run from {tail} to {head}"), &[p.tail(), p.head()]);
    }
    Ok(())
}

/// No internal vertex of either path lies on the other.
fn internally_disjoint(a: &Path, b: &Path, names: (&str, &str)) -> Check {
    for v in a.internal() {
        if b.contains(v) {
            return fail(format!("{} and {} are not internally disjoint", names.0, names.1), &[v]);
        }
    }
    for v in b.internal() {
        if a.contains(v) {
            return fail(format!("{} and {} are not internally disjoint", names.0, names.1), &[v]);
        }
    }
    Ok(())
}

fn endpoint_sets_disjoint(l: &EndpointPair, r: &EndpointPair) -> Check {
    for v in [&l.0, &l.1] {
        if *v == r.0 || *v == r.1 {
            return fail("{p,q} ∩ {p',q'} = ∅ violated", &[v]);
        }
    }
    Ok(())
}

/// Index range of `sub` inside `p`, if it is a subpath.
fn subpath_range(p: &Path, sub: &Path) -> Option<(usize, usize)> {
    let i = p.position(sub.tail())?;
    let j = i + sub.len();
    (j < p.vertices().len() && p.vertices()[i..=j] == *sub.vertices()).then_some((i, j))
}

fn ordered_segments(path: &Path, segs: &[Path], name: &str) -> Check {
    let mut last_end: Option<usize> = None;
    for (i, s) in segs.iter().enumerate() {
        let Some((a, b)) = subpath_range(path, s) else {
            return fail(format!("{name}_{} is not a subpath", i + 1), &[s.tail()]);
        };
        if a == b {
            return fail(format!("{name}_{} has length 0", i + 1), &[s.tail()]);
        }
        if last_end.is_some_and(|e| a < e) {
            return fail(format!("{name}_{} overlaps or precedes {name}_{}", i + 1, i), &[s.tail()]);
        }
        last_end = Some(b);
    }
    Ok(())
}

fn union_digraph<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Digraph {
    let mut vs = BTreeSet::new();
    let mut es: Vec<Edge> = Vec::new();
    for p in paths {
        vs.extend(p.vertices().iter().cloned());
        es.extend(p.edge_list());
    }
    Digraph::new(vs, es).expect("paths are loop-free")
}

impl RelaxedLadder {
    pub fn order(&self) -> usize {
        self.x_rungs.len()
    }

    pub fn paths(&self) -> Vec<&Path> {
        let mut v = vec![&self.p_path, &self.q_path];
        v.extend(self.x_rungs.iter());
        v.extend(self.y_rungs.iter());
        v
    }

    pub fn subgraph(&self) -> Digraph {
        union_digraph(self.paths())
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.paths().into_iter().flat_map(|p| p.vertices().iter().cloned()).collect()
    }

    /// The same ladder read from the other side: boundary paths swap roles
    /// and rungs are renumbered from the far end.
    pub fn reversed(&self) -> RelaxedLadder {
        let k = self.order();
        RelaxedLadder {
            left: (self.right.1.clone(), self.right.0.clone()),
            right: (self.left.1.clone(), self.left.0.clone()),
            p_path: self.q_path.clone(),
            q_path: self.p_path.clone(),
            p_segments: self.q_segments.clone(),
            q_segments: self.p_segments.clone(),
            x_rungs: (0..k).map(|i| self.y_rungs[k - 1 - i].clone()).collect(),
            y_rungs: (0..k).map(|i| self.x_rungs[k - 1 - i].clone()).collect(),
        }
    }

    /// Order-0 ladder made of two boundary paths.
    pub fn plain(p_path: Path, q_path: Path) -> RelaxedLadder {
        RelaxedLadder {
            left: (p_path.tail().clone(), q_path.head().clone()),
            right: (p_path.head().clone(), q_path.tail().clone()),
            p_path,
            q_path,
            p_segments: vec![],
            q_segments: vec![],
            x_rungs: vec![],
            y_rungs: vec![],
        }
    }

    /// Prepends `p_prefix` to the P side and appends `q_suffix` to the Q side.
    fn extend_left(&self, p_prefix: &Path, q_suffix: &Path) -> Result<RelaxedLadder, ChainError> {
        let mut out = self.clone();
        out.p_path = p_prefix.concat(&self.p_path).map_err(|e| pre(e.to_string()))?;
        out.q_path = self.q_path.concat(q_suffix).map_err(|e| pre(e.to_string()))?;
        out.left = (p_prefix.tail().clone(), q_suffix.head().clone());
        Ok(out)
    }

    /// Appends `p_suffix` to the P side and prepends `q_prefix` to the Q side.
    fn extend_right(&self, p_suffix: &Path, q_prefix: &Path) -> Result<RelaxedLadder, ChainError> {
        let mut out = self.clone();
        out.p_path = self.p_path.concat(p_suffix).map_err(|e| pre(e.to_string()))?;
        out.q_path = q_prefix.concat(&self.q_path).map_err(|e| pre(e.to_string()))?;
        out.right = (p_suffix.head().clone(), q_prefix.tail().clone());
        Ok(out)
    }

    fn check(&self, host: &Digraph) -> Check {
        let k = self.order();
        if self.p_segments.len() != k || self.q_segments.len() != k || self.y_rungs.len() != k {
            return fail("sequence lengths disagree", &[]);
        }
        let (p, q) = (&self.left.0, &self.left.1);
        let (p2, q2) = (&self.right.0, &self.right.1);
        endpoint_sets_disjoint(&self.left, &self.right)?;
        in_host(host, &self.p_path, "P")?;
        in_host(host, &self.q_path, "Q")?;
        ends(&self.p_path, p, p2, "P")?;
        ends(&self.q_path, q2, q, "Q")?;
        internally_disjoint(&self.p_path, &self.q_path, ("P", "Q"))?;
        ordered_segments(&self.p_path, &self.p_segments, "P")?;
        ordered_segments(&self.q_path, &self.q_segments, "Q")?;
        let on_p = |v: &VertexId| self.p_path.contains(v);
        let on_q = |v: &VertexId| self.q_path.contains(v);
        for i in 0..k {
            let allowed = |v: &VertexId| self.p_segments[i].contains(v) || self.q_segments[k - 1 - i].contains(v);
            for (rung, name, from_p) in [(&self.x_rungs[i], "X", true), (&self.y_rungs[i], "Y", false)] {
                let label = format!("{name}_{}", i + 1);
                in_host(host, rung, &label)?;
                let (t, h) = (rung.tail(), rung.head());
                let ok_ends = if from_p { on_p(t) && on_q(h) } else { on_q(t) && on_p(h) };
                if !ok_ends {
                    return fail(format!("{label} does not join the boundary paths"), &[t, h]);
                }
                for v in rung.internal() {
                    if on_p(v) || on_q(v) {
                        return fail(format!("{label} has an internal vertex on P ∪ Q"), &[v]);
                    }
                }
                if !allowed(t) || !allowed(h) {
                    return fail(format!("{label} endpoints outside P_{} ∪ Q_{}", i + 1, k - i), &[t, h]);
                }
            }
            if !is_laced(&self.x_rungs[i], &self.y_rungs[i]) {
                return fail(format!("X_{0} and Y_{0} are not laced", i + 1), &[]);
            }
        }
        let interior = |i: usize| -> BTreeSet<&VertexId> {
            self.x_rungs[i]
                .vertices()
                .iter()
                .chain(self.y_rungs[i].vertices())
                .filter(|v| !on_p(v) && !on_q(v))
                .collect()
        };
        for i in 0..k {
            let a = interior(i);
            for j in i + 1..k {
                if let Some(v) = interior(j).intersection(&a).next() {
                    return fail(format!("rungs {} and {} share an interior vertex", i + 1, j + 1), &[v]);
                }
            }
        }
        if k >= 1 {
            if self.x_rungs[0].contains(p) {
                return fail("p ∉ V(X₁) violated", &[p]);
            }
            if self.y_rungs[0].contains(q) {
                return fail("q ∉ V(Y₁) violated", &[q]);
            }
            if self.x_rungs[k - 1].contains(p2) {
                return fail("p' ∉ V(X_k) violated", &[p2]);
            }
            if self.y_rungs[k - 1].contains(q2) {
                return fail("q' ∉ V(Y_k) violated", &[q2]);
            }
        }
        Ok(())
    }
}

fn junctions_distinct(ps: &[VertexId], qs: &[VertexId]) -> Check {
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            for v in [&ps[i], &qs[i]] {
                if *v == ps[j] || *v == qs[j] {
                    return fail(format!("junction pairs {i} and {j} intersect"), &[v]);
                }
            }
        }
    }
    Ok(())
}

/// Expected (tail, head) of the `i`-th P, Q and R path (1-based).
fn p_ends(ps: &[VertexId], i: usize) -> (&VertexId, &VertexId) {
    if i % 2 == 1 {
        (&ps[i - 1], &ps[i])
    } else {
        (&ps[i], &ps[i - 1])
    }
}

fn q_ends(qs: &[VertexId], i: usize) -> (&VertexId, &VertexId) {
    if i % 2 == 1 {
        (&qs[i], &qs[i - 1])
    } else {
        (&qs[i - 1], &qs[i])
    }
}

fn r_ends<'a>(ps: &'a [VertexId], qs: &'a [VertexId], i: usize) -> (&'a VertexId, &'a VertexId) {
    if i % 2 == 1 {
        (&ps[i], &qs[i])
    } else {
        (&qs[i], &ps[i])
    }
}

fn chain_right(ps: &[VertexId], qs: &[VertexId]) -> EndpointPair {
    let k = ps.len() - 2;
    if k % 2 == 1 {
        (ps[k + 1].clone(), qs[k + 1].clone())
    } else {
        (qs[k + 1].clone(), ps[k + 1].clone())
    }
}

impl RelaxedChain {
    pub fn length(&self) -> usize {
        self.r_paths.len()
    }

    pub fn left(&self) -> EndpointPair {
        (self.p_junctions[0].clone(), self.q_junctions[0].clone())
    }

    pub fn right(&self) -> EndpointPair {
        chain_right(&self.p_junctions, &self.q_junctions)
    }

    pub fn paths(&self) -> Vec<&Path> {
        self.p_paths.iter().chain(&self.q_paths).chain(&self.r_paths).collect()
    }

    pub fn subgraph(&self) -> Digraph {
        union_digraph(self.paths())
    }

    fn check(&self, host: &Digraph) -> Check {
        let k = self.length();
        if self.p_paths.len() != k + 1
            || self.q_paths.len() != k + 1
            || self.p_junctions.len() != k + 2
            || self.q_junctions.len() != k + 2
        {
            return fail("sequence lengths disagree", &[]);
        }
        let (ps, qs) = (&self.p_junctions, &self.q_junctions);
        junctions_distinct(ps, qs)?;
        let mut named: Vec<(String, &Path)> = Vec::new();
        for i in 1..=k + 1 {
            let (t, h) = p_ends(ps, i);
            ends(&self.p_paths[i - 1], t, h, &format!("P_{i}"))?;
            let (t, h) = q_ends(qs, i);
            ends(&self.q_paths[i - 1], t, h, &format!("Q_{i}"))?;
            named.push((format!("P_{i}"), &self.p_paths[i - 1]));
            named.push((format!("Q_{i}"), &self.q_paths[i - 1]));
        }
        for i in 1..=k {
            let (t, h) = r_ends(ps, qs, i);
            ends(&self.r_paths[i - 1], t, h, &format!("R_{i}"))?;
            named.push((format!("R_{i}"), &self.r_paths[i - 1]));
        }
        for (name, p) in &named {
            in_host(host, p, name)?;
        }
        for a in 0..named.len() {
            for b in a + 1..named.len() {
                internally_disjoint(named[a].1, named[b].1, (&named[a].0, &named[b].0))?;
            }
        }
        Ok(())
    }
}

impl MixedChain {
    pub fn length(&self) -> usize {
        self.r_paths.len()
    }

    pub fn compute_weight(&self) -> usize {
        self.length() + self.ladders.iter().map(RelaxedLadder::order).sum::<usize>()
    }

    pub fn new(
        ladders: Vec<RelaxedLadder>,
        r_paths: Vec<Path>,
        p_junctions: Vec<VertexId>,
        q_junctions: Vec<VertexId>,
    ) -> MixedChain {
        let mut m = MixedChain { ladders, r_paths, p_junctions, q_junctions, weight: 0 };
        m.weight = m.compute_weight();
        m
    }

    /// A mixed chain whose ladders all have order 0.
    pub fn from_relaxed_chain(c: &RelaxedChain) -> MixedChain {
        let ladders = (0..=c.length())
            .map(|i| RelaxedLadder::plain(c.p_paths[i].clone(), c.q_paths[i].clone()))
            .collect();
        MixedChain::new(ladders, c.r_paths.clone(), c.p_junctions.clone(), c.q_junctions.clone())
    }

    pub fn left(&self) -> EndpointPair {
        (self.p_junctions[0].clone(), self.q_junctions[0].clone())
    }

    pub fn right(&self) -> EndpointPair {
        chain_right(&self.p_junctions, &self.q_junctions)
    }

    pub fn paths(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = self.ladders.iter().flat_map(|l| l.paths()).collect();
        v.extend(self.r_paths.iter());
        v
    }

    pub fn subgraph(&self) -> Digraph {
        union_digraph(self.paths())
    }

    fn check(&self, host: &Digraph) -> Check {
        let k = self.length();
        if self.ladders.len() != k + 1 || self.p_junctions.len() != k + 2 || self.q_junctions.len() != k + 2 {
            return fail("sequence lengths disagree", &[]);
        }
        if self.weight != self.compute_weight() {
            return fail("cached weight differs from recomputation", &[]);
        }
        let (ps, qs) = (&self.p_junctions, &self.q_junctions);
        junctions_distinct(ps, qs)?;
        for (i0, h) in self.ladders.iter().enumerate() {
            let i = i0 + 1;
            let prev = (ps[i - 1].clone(), qs[i - 1].clone());
            let cur = (ps[i].clone(), qs[i].clone());
            let (l, r) = if i % 2 == 1 { (prev, cur) } else { (cur, prev) };
            if h.left != l || h.right != r {
                return fail(format!("H_{i} has the wrong endpoints"), &[&h.left.0, &h.right.0]);
            }
            h.check(host).map_err(|w| StructureWitness { clause: format!("H_{i}: {}", w.clause), vertices: w.vertices })?;
        }
        for i in 1..=k {
            let (t, hd) = r_ends(ps, qs, i);
            let r = &self.r_paths[i - 1];
            ends(r, t, hd, &format!("R_{i}"))?;
            in_host(host, r, &format!("R_{i}"))?;
        }
        let sets: Vec<BTreeSet<VertexId>> = self.ladders.iter().map(RelaxedLadder::vertex_set).collect();
        let pair = |i: usize| BTreeSet::from([ps[i].clone(), qs[i].clone()]);
        for i in 0..=k {
            for j in i + 1..=k {
                let inter: BTreeSet<VertexId> = sets[i].intersection(&sets[j]).cloned().collect();
                let expect = if j == i + 1 { pair(i + 1) } else { BTreeSet::new() };
                if inter != expect {
                    return fail(format!("V(H_{}) ∩ V(H_{}) is wrong", i + 1, j + 1), &inter.iter().collect::<Vec<_>>());
                }
            }
            for j in 1..=k {
                let rs: BTreeSet<VertexId> = self.r_paths[j - 1].vertices().iter().cloned().collect();
                let inter: BTreeSet<VertexId> = sets[i].intersection(&rs).cloned().collect();
                let hi = i + 1;
                let expect = if hi == j {
                    pair(hi)
                } else if hi == j + 1 {
                    pair(hi - 1)
                } else {
                    BTreeSet::new()
                };
                if inter != expect {
                    return fail(format!("V(H_{hi}) ∩ V(R_{j}) is wrong"), &inter.iter().collect::<Vec<_>>());
                }
            }
        }
        for a in 0..k {
            for b in a + 1..k {
                internally_disjoint(&self.r_paths[a], &self.r_paths[b], (&format!("R_{}", a + 1), &format!("R_{}", b + 1)))?;
            }
        }
        Ok(())
    }
}

impl MixedExtension {
    pub fn paths(&self) -> Vec<&Path> {
        [Some(&self.a), Some(&self.b), self.c.as_ref(), self.d.as_ref()].into_iter().flatten().collect()
    }

    pub fn subgraph(&self) -> Digraph {
        union_digraph(self.paths())
    }

    fn check(&self, host: &Digraph) -> Check {
        let (p, q) = (&self.left.0, &self.left.1);
        let (y, x) = (&self.right.0, &self.right.1);
        endpoint_sets_disjoint(&self.left, &self.right)?;
        in_host(host, &self.a, "A")?;
        in_host(host, &self.b, "B")?;
        ends(&self.a, p, x, "A")?;
        ends(&self.b, y, q, "B")?;
        match (&self.c, &self.d) {
            (None, None) => {
                if !is_laced(&self.a, &self.b) {
                    return fail("A and B are not laced", &[]);
                }
                let meets = self.a.vertices().iter().any(|v| self.b.contains(v) && v != p && v != q);
                if !meets {
                    return fail("A and B do not intersect outside {p, q}", &[]);
                }
            }
            (Some(c), Some(d)) => {
                for v in &self.a.vertices()[1..] {
                    if self.b.contains(v) && v != q {
                        return fail("A - {p} and B - {q} intersect", &[v]);
                    }
                }
                in_host(host, c, "C")?;
                in_host(host, d, "D")?;
                for (path, name, from_a) in [(c, "C", true), (d, "D", false)] {
                    if path.contains(p) || path.contains(q) {
                        return fail(format!("{name} meets {{p, q}}"), &[p, q]);
                    }
                    let (src, dst) = if from_a { (&self.a, &self.b) } else { (&self.b, &self.a) };
                    if !src.contains(path.tail()) || !dst.contains(path.head()) {
                        return fail(format!("{name} has the wrong ends"), &[path.tail(), path.head()]);
                    }
                    for v in path.internal() {
                        if self.a.contains(v) || self.b.contains(v) {
                            return fail(format!("{name} has an internal vertex on A ∪ B"), &[v]);
                        }
                    }
                }
                if !is_laced(c, d) {
                    return fail("C and D are not laced", &[]);
                }
            }
            _ => return fail("C and D must be given together", &[]),
        }
        Ok(())
    }
}

impl StructureDescriptor {
    pub fn subgraph(&self) -> Digraph {
        match self {
            StructureDescriptor::RelaxedLadder(d) => d.subgraph(),
            StructureDescriptor::RelaxedChain(d) => d.subgraph(),
            StructureDescriptor::MixedChain(d) => d.subgraph(),
            StructureDescriptor::MixedExtension(d) => d.subgraph(),
        }
    }
}

/// Checks every defining condition of the variant inside `host`. The measure
/// is the order of a ladder, the length of a chain, the weight of a mixed
/// chain and 0 for an extension.
pub fn validate_structure(host: &Digraph, desc: &StructureDescriptor) -> StructureReport {
    let (res, measure) = match desc {
        StructureDescriptor::RelaxedLadder(d) => (d.check(host), d.order()),
        StructureDescriptor::RelaxedChain(d) => (d.check(host), d.length()),
        StructureDescriptor::MixedChain(d) => (d.check(host), d.compute_weight()),
        StructureDescriptor::MixedExtension(d) => (d.check(host), 0),
    };
    match res {
        Ok(()) => StructureReport { valid: true, measure, witness: None },
        Err(w) => StructureReport { valid: false, measure, witness: Some(w) },
    }
}

fn require_valid(host: &Digraph, desc: StructureDescriptor) -> Result<(), ChainError> {
    let r = validate_structure(host, &desc);
    match r.witness {
        None => Ok(()),
        Some(w) => Err(pre(format!("{} at {:?}", w.clause, w.vertices))),
    }
}

/// The relaxed chain left after removing rung interiors.
pub fn boundary(h: &MixedChain) -> Result<RelaxedChain, ChainError> {
    require_valid(&h.subgraph(), StructureDescriptor::MixedChain(h.clone()))?;
    Ok(RelaxedChain {
        p_paths: h.ladders.iter().map(|l| l.p_path.clone()).collect(),
        q_paths: h.ladders.iter().map(|l| l.q_path.clone()).collect(),
        r_paths: h.r_paths.clone(),
        p_junctions: h.p_junctions.clone(),
        q_junctions: h.q_junctions.clone(),
    })
}

/// Relaxed chain spanned by a `(v1, w2)`-path `p` and a `(v2, w1)`-path `q`
/// that are laced; left endpoints `(v1, w1)`, right endpoints `(v2, w2)`.
pub fn relaxed_chain_from_laced(p: &Path, q: &Path) -> Result<RelaxedChain, ChainError> {
    let (v1, w2) = (p.tail(), p.head());
    let (v2, w1) = (q.tail(), q.head());
    if [v1, w1].iter().any(|x| *x == v2 || *x == w2) {
        return Err(pre("{v1, w1} ∩ {v2, w2} must be empty"));
    }
    if !is_laced(p, q) {
        return Err(pre("paths are not laced"));
    }
    let special = [v1, v2, w1, w2];
    // Components of (P ∩ Q) minus the four ends, as index ranges along P.
    let mut comps: Vec<(usize, usize)> = Vec::new();
    for (s, e) in common_components(p, q) {
        let mut run: Option<usize> = None;
        for i in s..=e {
            let bad = special.contains(&&p.vertices()[i]);
            match (bad, run) {
                (false, None) => run = Some(i),
                (true, Some(r)) => {
                    comps.push((r, i - 1));
                    run = None;
                }
                _ => {}
            }
        }
        if let Some(r) = run {
            comps.push((r, e));
        }
    }
    let k = comps.len();
    let pv = p.vertices();
    let qpos = |v: &VertexId| q.position(v).expect("common vertex");
    let first: Vec<&VertexId> = comps.iter().map(|&(s, _)| &pv[s]).collect();
    let last: Vec<&VertexId> = comps.iter().map(|&(_, e)| &pv[e]).collect();
    let mut ps = vec![v1.clone()];
    let mut qs = vec![w1.clone()];
    let mut r_paths = Vec::new();
    for i in 1..=k {
        let (a, b) = (first[i - 1], last[i - 1]);
        let seg = p.subpath(a, b).expect("component is a subpath");
        if i % 2 == 1 {
            ps.push(a.clone());
            qs.push(b.clone());
        } else {
            qs.push(a.clone());
            ps.push(b.clone());
        }
        r_paths.push(seg);
    }
    let q_seg = |from: &VertexId, to: &VertexId| q.slice(qpos(from), qpos(to));
    let mut p_paths = vec![p.subpath(v1, if k == 0 { w2 } else { first[0] }).unwrap()];
    let mut q_paths = vec![q_seg(if k == 0 { v2 } else { last[0] }, w1)];
    for i in 1..=k {
        // Between component i and i+1 (or the far ends).
        let p_piece = if i < k { p.subpath(last[i - 1], first[i]).unwrap() } else { p.subpath(last[k - 1], w2).unwrap() };
        let q_piece = if i < k { q_seg(last[i], first[i - 1]) } else { q_seg(v2, first[k - 1]) };
        // Index i+1 is odd when i is even.
        if i % 2 == 0 {
            p_paths.push(p_piece);
            q_paths.push(q_piece);
        } else {
            p_paths.push(q_piece);
            q_paths.push(p_piece);
        }
    }
    if k % 2 == 1 {
        ps.push(v2.clone());
        qs.push(w2.clone());
    } else {
        ps.push(w2.clone());
        qs.push(v2.clone());
    }
    let chain = RelaxedChain { p_paths, q_paths, r_paths, p_junctions: ps, q_junctions: qs };
    let host = p.to_digraph().union(&q.to_digraph());
    require_valid(&host, StructureDescriptor::RelaxedChain(chain.clone()))?;
    Ok(chain)
}

/// Prepends a mixed extension whose right endpoints are `(q', p')` to a mixed
/// chain with left endpoints `(p', q')`.
pub fn extend_mixed_chain(w: &MixedExtension, h: &MixedChain) -> Result<MixedChain, ChainError> {
    let wg = w.subgraph();
    let hg = h.subgraph();
    require_valid(&wg, StructureDescriptor::MixedExtension(w.clone()))?;
    require_valid(&hg, StructureDescriptor::MixedChain(h.clone()))?;
    let (p1, q1) = h.left();
    if w.right != (q1.clone(), p1.clone()) {
        return Err(pre("right endpoints of the extension must be (q', p') of the chain"));
    }
    let shared: BTreeSet<VertexId> = wg.vertex_set().intersection(&hg.vertex_set()).cloned().collect();
    if shared != BTreeSet::from([p1.clone(), q1.clone()]) {
        return Err(pre("V(W) ∩ V(H) must be exactly {p', q'}"));
    }
    let out = match (&w.c, &w.d) {
        (Some(c), Some(d)) => {
            let first = &h.ladders[0];
            let mut l = first.extend_left(&w.a, &w.b)?;
            l.p_segments.insert(0, w.a.clone());
            l.q_segments.push(w.b.clone());
            l.x_rungs.insert(0, c.clone());
            l.y_rungs.insert(0, d.clone());
            let mut ladders = h.ladders.clone();
            ladders[0] = l;
            let mut ps = h.p_junctions.clone();
            let mut qs = h.q_junctions.clone();
            ps[0] = w.left.0.clone();
            qs[0] = w.left.1.clone();
            MixedChain::new(ladders, h.r_paths.clone(), ps, qs)
        }
        _ => {
            let wc = relaxed_chain_from_laced(&w.a, &w.b)?;
            prepend_chain(&wc, h)?
        }
    };
    let host = wg.union(&hg);
    require_valid(&host, StructureDescriptor::MixedChain(out.clone()))?;
    if out.weight <= h.weight {
        return Err(pre("extension did not increase the weight"));
    }
    Ok(out)
}

/// Glues a relaxed chain whose right endpoints are `(q', p')` in front of a
/// mixed chain with left endpoints `(p', q')`.
fn prepend_chain(wc: &RelaxedChain, h: &MixedChain) -> Result<MixedChain, ChainError> {
    let j = wc.length();
    let mut ladders: Vec<RelaxedLadder> =
        (0..j).map(|i| RelaxedLadder::plain(wc.p_paths[i].clone(), wc.q_paths[i].clone())).collect();
    let mut ps: Vec<VertexId> = wc.p_junctions[..=j].to_vec();
    let mut qs: Vec<VertexId> = wc.q_junctions[..=j].to_vec();
    let swap = j % 2 == 1;
    let (lp, lq) = (&wc.p_paths[j], &wc.q_paths[j]);
    for (i, l) in h.ladders.iter().enumerate() {
        let l = if swap { l.reversed() } else { l.clone() };
        let l = if i == 0 {
            if swap {
                l.extend_right(lp, lq)?
            } else {
                l.extend_left(lp, lq)?
            }
        } else {
            l
        };
        ladders.push(l);
    }
    for i in 1..h.p_junctions.len() {
        let (a, b) = (h.p_junctions[i].clone(), h.q_junctions[i].clone());
        if swap {
            ps.push(b);
            qs.push(a);
        } else {
            ps.push(a);
            qs.push(b);
        }
    }
    let mut r_paths = wc.r_paths.clone();
    r_paths.extend(h.r_paths.iter().cloned());
    Ok(MixedChain::new(ladders, r_paths, ps, qs))
}

fn contract_in_path(p: &Path, x: &VertexId, y: &VertexId) -> Result<Path, ChainError> {
    let mut v: Vec<VertexId> = Vec::with_capacity(p.vertices().len());
    for z in p.vertices() {
        let z = if z == y { x } else { z };
        if v.last() != Some(z) {
            v.push(z.clone());
        }
    }
    Path::new(v).map_err(|_| pre("contraction folds a path onto itself"))
}

fn rename(v: &VertexId, x: &VertexId, y: &VertexId) -> VertexId {
    if v == y {
        x.clone()
    } else {
        v.clone()
    }
}

/// Contracts an edge of `Outarb(H, p)`, `Inarb(H, q)`, `Outarb(H, p')` or
/// `Inarb(H, q')` (the side's endpoints distinct) and returns the induced
/// descriptor of `H / e`; the merged vertex keeps the tail's name.
pub fn contract_arbor_edge(h: &MixedChain, e: &Edge) -> Result<(Digraph, MixedChain), ChainError> {
    let hg = h.subgraph();
    require_valid(&hg, StructureDescriptor::MixedChain(h.clone()))?;
    let (p, q) = h.left();
    let (p2, q2) = h.right();
    let mut allowed = false;
    for (a, b) in [(&p, &q), (&p2, &q2)] {
        if a == b {
            continue;
        }
        let out = arborescence(&hg, a, Direction::Out).expect("endpoint in H");
        let inn = arborescence(&hg, b, Direction::In).expect("endpoint in H");
        if out.has_edge(&e.0, &e.1) || inn.has_edge(&e.0, &e.1) {
            allowed = true;
        }
    }
    if !allowed {
        return Err(pre("edge is not in an endpoint arborescence of a side with distinct endpoints"));
    }
    let (x, y) = (&e.0, &e.1);
    let g2 = butterfly_contract(&hg, x, y).map_err(|err| pre(err.to_string()))?;
    let map_path = |pp: &Path| contract_in_path(pp, x, y);
    let map_vec = |v: &[Path]| v.iter().map(map_path).collect::<Result<Vec<_>, _>>();
    let mut ladders = Vec::new();
    for l in &h.ladders {
        ladders.push(RelaxedLadder {
            left: (rename(&l.left.0, x, y), rename(&l.left.1, x, y)),
            right: (rename(&l.right.0, x, y), rename(&l.right.1, x, y)),
            p_path: map_path(&l.p_path)?,
            q_path: map_path(&l.q_path)?,
            p_segments: map_vec(&l.p_segments)?,
            q_segments: map_vec(&l.q_segments)?,
            x_rungs: map_vec(&l.x_rungs)?,
            y_rungs: map_vec(&l.y_rungs)?,
        });
    }
    let out = MixedChain::new(
        ladders,
        map_vec(&h.r_paths)?,
        h.p_junctions.iter().map(|v| rename(v, x, y)).collect(),
        h.q_junctions.iter().map(|v| rename(v, x, y)).collect(),
    );
    require_valid(&g2, StructureDescriptor::MixedChain(out.clone()))?;
    if out.subgraph() != g2 {
        return Err(pre("contracted descriptor does not span the contracted chain"));
    }
    Ok((g2, out))
}
