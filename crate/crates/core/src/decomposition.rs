//! Chain decompositions with their cleanliness predicates, directed tree
//! decompositions with guards, and the packing/covering procedure.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{validate_structure, MixedChain, StructureDescriptor};
use crate::cycle_rank::{cycle_rank, CycleRankError};
use crate::graph::{arborescence, bit, bits, scc_idx, Digraph, Direction, MaskGraph, VertexId};
use crate::search::subgraph_monomorphism;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    CycleRank(#[from] CycleRankError),
}

fn pre(msg: impl Into<String>) -> DecompositionError {
    DecompositionError::PreconditionViolated(msg.into())
}

// ---------------------------------------------------------------------------
// Chain decompositions
// ---------------------------------------------------------------------------

/// One node of a chain decomposition. Internal nodes carry their two
/// children (left first) and the mixed chain linking them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainNode {
    pub graph: Digraph,
    pub children: Option<[usize; 2]>,
    pub link: Option<MixedChain>,
}

impl ChainNode {
    pub fn leaf(graph: Digraph) -> Self {
        ChainNode { graph, children: None, link: None }
    }
}

/// Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDecomposition {
    pub nodes: Vec<ChainNode>,
    pub weight_vector: Vec<usize>,
    pub full_height: usize,
}

impl ChainDecomposition {
    /// Builds a decomposition and fills in the cached measures.
    pub fn new(nodes: Vec<ChainNode>) -> Self {
        let mut cd = ChainDecomposition { nodes, weight_vector: vec![], full_height: 0 };
        cd.weight_vector = cd.compute_weight_vector();
        cd.full_height = cd.compute_full_height();
        cd
    }

    pub fn root_graph(&self) -> &Digraph {
        &self.nodes[0].graph
    }

    pub fn is_internal(&self, d: usize) -> bool {
        self.nodes.get(d).is_some_and(|n| n.children.is_some())
    }

    fn weight(&self, d: usize) -> usize {
        self.nodes[d].link.as_ref().map_or(0, MixedChain::compute_weight)
    }

    /// Nodes in breadth-first order, left child before right child.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        let mut seen = vec![false; self.nodes.len()];
        while let Some(d) = queue.pop_front() {
            if d >= self.nodes.len() || std::mem::replace(&mut seen[d], true) {
                continue;
            }
            order.push(d);
            if let Some(c) = self.nodes[d].children {
                queue.extend(c);
            }
        }
        order
    }

    pub fn compute_weight_vector(&self) -> Vec<usize> {
        self.bfs_order().into_iter().map(|d| self.weight(d)).collect()
    }

    /// One more than the smallest depth of a leaf.
    pub fn compute_full_height(&self) -> usize {
        let mut queue = VecDeque::from([(0usize, 0usize)]);
        while let Some((d, depth)) = queue.pop_front() {
            match self.nodes.get(d).and_then(|n| n.children) {
                Some([a, b]) if depth < self.nodes.len() => {
                    queue.push_back((a, depth + 1));
                    queue.push_back((b, depth + 1));
                }
                _ => return depth + 1,
            }
        }
        0
    }

    fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        for (d, n) in self.nodes.iter().enumerate() {
            if let Some(c) = n.children {
                for x in c {
                    if x < parent.len() {
                        parent[x] = Some(d);
                    }
                }
            }
        }
        parent
    }

    fn is_proper_descendant(&self, d: usize, e: usize) -> bool {
        let parent = self.parents();
        let mut cur = parent.get(e).copied().flatten();
        while let Some(c) = cur {
            if c == d {
                return true;
            }
            cur = parent[c];
        }
        false
    }

    fn descendants(&self, d: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.nodes[d].children.map(|c| c.to_vec()).unwrap_or_default();
        while let Some(x) = stack.pop() {
            out.push(x);
            if let Some(c) = self.nodes[x].children {
                stack.extend(c);
            }
        }
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainViolation {
    pub node: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub valid: bool,
    pub weight_vector: Vec<usize>,
    pub full_height: usize,
    pub witness: Option<ChainViolation>,
}

fn check_chain(cd: &ChainDecomposition) -> Result<(), ChainViolation> {
    let bad = |node: usize, reason: String| Err(ChainViolation { node, reason });
    let n = cd.nodes.len();
    if n == 0 {
        return bad(0, "no nodes".into());
    }
    let mut indeg = vec![0usize; n];
    for (d, node) in cd.nodes.iter().enumerate() {
        match (&node.children, &node.link) {
            (Some(c), Some(_)) => {
                for &x in c {
                    if x >= n || x == 0 {
                        return bad(d, format!("child {x} is not a valid node"));
                    }
                    indeg[x] += 1;
                }
                if c[0] == c[1] {
                    return bad(d, "both children are the same node".into());
                }
            }
            (None, None) => {}
            _ => return bad(d, "children and link must be given together".into()),
        }
    }
    if let Some(x) = (1..n).find(|&x| indeg[x] != 1) {
        return bad(x, "node does not have exactly one parent".into());
    }
    if cd.bfs_order().len() != n {
        return bad(0, "tree does not reach every node".into());
    }
    for (d, node) in cd.nodes.iter().enumerate() {
        let Some([c1, c2]) = node.children else {
            if node.graph.n() == 0 || !node.graph.is_strongly_connected() {
                return bad(d, "leaf digraph is not strongly connected".into());
            }
            continue;
        };
        let h = node.link.as_ref().expect("checked above");
        let hg = h.subgraph();
        let r = validate_structure(&hg, &StructureDescriptor::MixedChain(h.clone()));
        if let Some(w) = r.witness {
            return bad(d, format!("link is not a mixed chain: {}", w.clause));
        }
        let (g1, g2) = (&cd.nodes[c1].graph, &cd.nodes[c2].graph);
        let (p, q) = h.left();
        let (p2, q2) = h.right();
        let v1 = g1.vertex_set();
        let v2 = g2.vertex_set();
        let vh = hg.vertex_set();
        if v1.intersection(&v2).next().is_some() {
            return bad(d, "child digraphs intersect".into());
        }
        if v1.intersection(&vh).cloned().collect::<BTreeSet<_>>() != BTreeSet::from([p.clone(), q.clone()]) {
            return bad(d, "link meets the left child outside its left endpoints".into());
        }
        if v2.intersection(&vh).cloned().collect::<BTreeSet<_>>() != BTreeSet::from([p2.clone(), q2.clone()]) {
            return bad(d, "link meets the right child outside its right endpoints".into());
        }
        if g1.union(g2).union(&hg) != node.graph {
            return bad(d, "digraph is not the union of its children and link".into());
        }
    }
    if cd.weight_vector != cd.compute_weight_vector() {
        return bad(0, "cached weight vector differs from recomputation".into());
    }
    if cd.full_height != cd.compute_full_height() {
        return bad(0, "cached full height differs from recomputation".into());
    }
    Ok(())
}

pub fn validate_chain_decomposition(cd: &ChainDecomposition) -> ChainReport {
    let res = check_chain(cd);
    let structural = res.is_ok() || cd.bfs_order().len() == cd.nodes.len();
    ChainReport {
        valid: res.is_ok(),
        weight_vector: if structural { cd.compute_weight_vector() } else { vec![] },
        full_height: if structural { cd.compute_full_height() } else { 0 },
        witness: res.err(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointType {
    Left,
    Right,
    Central,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointRecord {
    pub out_vertex: Option<VertexId>,
    pub in_vertex: Option<VertexId>,
    pub out_type: Option<EndpointType>,
    pub in_type: Option<EndpointType>,
    pub crossing: bool,
}

/// The simple decomposition of an internal node, with the link's
/// arborescences precomputed.
struct Link<'a> {
    g1: &'a Digraph,
    g2: &'a Digraph,
    out1: Digraph,
    out2: Digraph,
    in1: Digraph,
    in2: Digraph,
}

impl<'a> Link<'a> {
    fn of(cd: &'a ChainDecomposition, d: usize) -> Option<Link<'a>> {
        let node = &cd.nodes[d];
        let [c1, c2] = node.children?;
        let h = node.link.as_ref()?;
        let hg = h.subgraph();
        let (p, q) = h.left();
        let (p2, q2) = h.right();
        let arb = |v: &VertexId, dir| arborescence(&hg, v, dir).expect("endpoint of the link");
        Some(Link {
            g1: &cd.nodes[c1].graph,
            g2: &cd.nodes[c2].graph,
            out1: arb(&p, Direction::Out),
            out2: arb(&p2, Direction::Out),
            in1: arb(&q, Direction::In),
            in2: arb(&q2, Direction::In),
        })
    }

    fn out_type(&self, x: &VertexId) -> EndpointType {
        if self.g1.contains_vertex(x) || self.out1.contains_vertex(x) {
            EndpointType::Left
        } else if self.g2.contains_vertex(x) || self.out2.contains_vertex(x) {
            EndpointType::Right
        } else {
            EndpointType::Central
        }
    }

    fn in_type(&self, y: &VertexId) -> EndpointType {
        if self.g1.contains_vertex(y) || self.in1.contains_vertex(y) {
            EndpointType::Left
        } else if self.g2.contains_vertex(y) || self.in2.contains_vertex(y) {
            EndpointType::Right
        } else {
            EndpointType::Central
        }
    }

    fn crossing(&self, x: &VertexId, y: &VertexId) -> bool {
        let (ot, it) = (self.out_type(x), self.in_type(y));
        let (g_out, arb_out, g_in, arb_in) = match (ot, it) {
            (EndpointType::Left, EndpointType::Right) => (self.g1, &self.out1, self.g2, &self.in2),
            (EndpointType::Right, EndpointType::Left) => (self.g2, &self.out2, self.g1, &self.in1),
            _ => return false,
        };
        let a = if g_out.contains_vertex(x) { BTreeSet::from([x.clone()]) } else { tree_path_to(arb_out, x, true) };
        let b = if g_in.contains_vertex(y) { BTreeSet::from([y.clone()]) } else { tree_path_to(arb_in, y, false) };
        a.intersection(&b).next().is_some()
    }
}

/// Vertices on the path between the root of an arborescence and `x`.
fn tree_path_to(arb: &Digraph, x: &VertexId, outward: bool) -> BTreeSet<VertexId> {
    let mut out = BTreeSet::from([x.clone()]);
    let mut cur = x.clone();
    loop {
        let next = if outward { arb.in_neighbors(&cur) } else { arb.out_neighbors(&cur) };
        match next.first() {
            Some(n) if out.insert(n.clone()) => cur = n.clone(),
            _ => return out,
        }
    }
}

fn endpoint_in(cd: &ChainDecomposition, d: usize, e: usize, outward: bool) -> Option<VertexId> {
    let h = cd.nodes[d].link.as_ref()?;
    let (p, q) = h.left();
    let (p2, q2) = h.right();
    let cands = if outward { [p, p2] } else { [q, q2] };
    cands.into_iter().find(|v| cd.nodes[e].graph.contains_vertex(v))
}

fn record(cd: &ChainDecomposition, d: usize, e: usize) -> EndpointRecord {
    let out_vertex = endpoint_in(cd, d, e, true);
    let in_vertex = endpoint_in(cd, d, e, false);
    let link = Link::of(cd, e);
    let out_type = link.as_ref().zip(out_vertex.as_ref()).map(|(l, x)| l.out_type(x));
    let in_type = link.as_ref().zip(in_vertex.as_ref()).map(|(l, y)| l.in_type(y));
    let crossing = match (&link, &out_vertex, &in_vertex) {
        (Some(l), Some(x), Some(y)) => l.crossing(x, y),
        _ => false,
    };
    EndpointRecord { out_vertex, in_vertex, out_type, in_type, crossing }
}

/// Where the endpoints of the link at `d` sit inside the node `e`, a proper
/// descendant of `d`. Types are `None` when `e` is a leaf.
pub fn classify_endpoint(cd: &ChainDecomposition, d: usize, e: usize) -> Result<EndpointRecord, DecompositionError> {
    if !cd.is_internal(d) {
        return Err(pre(format!("node {d} is not internal")));
    }
    if e >= cd.nodes.len() || !cd.is_proper_descendant(d, e) {
        return Err(pre(format!("node {e} is not a proper descendant of {d}")));
    }
    Ok(record(cd, d, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum Cleanliness {
    NotRinsed { node: usize, descendant: usize },
    RinsedNotClean { node: usize, child: usize },
    CleanNotSpotless { triple: [usize; 3] },
    Spotless,
}

fn acts_upon(r: &EndpointRecord) -> bool {
    r.out_vertex.is_some()
        && r.in_vertex.is_some()
        && (r.out_type == Some(EndpointType::Central) || r.in_type == Some(EndpointType::Central) || r.crossing)
}

fn crossing_pair(cd: &ChainDecomposition, e: usize, x: &Option<VertexId>, y: &Option<VertexId>) -> bool {
    match (Link::of(cd, e), x, y) {
        (Some(l), Some(x), Some(y)) => l.crossing(x, y),
        _ => false,
    }
}

fn spotless_triple(cd: &ChainDecomposition, d1: usize, d2: usize, d3: usize, parent_of_d3: bool) -> bool {
    let r13 = record(cd, d1, d3);
    let r23 = record(cd, d2, d3);
    if r13.in_vertex.is_some() {
        if r23.in_vertex.is_none() || r13.in_type != r23.in_type {
            return false;
        }
        if parent_of_d3 && crossing_pair(cd, d3, &r23.out_vertex, &r13.in_vertex) {
            return false;
        }
    }
    if r13.out_vertex.is_some() {
        if r23.out_vertex.is_none() || r13.out_type != r23.out_type {
            return false;
        }
        if parent_of_d3 && crossing_pair(cd, d3, &r13.out_vertex, &r23.in_vertex) {
            return false;
        }
    }
    true
}

/// The strongest of rinsed, clean and spotless that holds, with the first
/// witness against the next level.
pub fn cleanliness(cd: &ChainDecomposition) -> Cleanliness {
    let internal: Vec<usize> = (0..cd.nodes.len()).filter(|&d| cd.is_internal(d)).collect();
    let desc: BTreeMap<usize, Vec<usize>> =
        internal.iter().map(|&d| (d, cd.descendants(d).into_iter().filter(|&e| cd.is_internal(e)).collect())).collect();
    for &d in &internal {
        for &e in &desc[&d] {
            if acts_upon(&record(cd, d, e)) {
                return Cleanliness::NotRinsed { node: d, descendant: e };
            }
        }
    }
    for &d in &internal {
        for c in cd.nodes[d].children.expect("internal") {
            if !cd.is_internal(c) {
                continue;
            }
            let r = record(cd, d, c);
            if r.out_type == r.in_type {
                return Cleanliness::RinsedNotClean { node: d, child: c };
            }
        }
    }
    for &d1 in &internal {
        for &d2 in &desc[&d1] {
            let children = cd.nodes[d2].children.expect("internal");
            for &d3 in &desc[&d2] {
                if !spotless_triple(cd, d1, d2, d3, children.contains(&d3)) {
                    return Cleanliness::CleanNotSpotless { triple: [d1, d2, d3] };
                }
            }
        }
    }
    Cleanliness::Spotless
}

// ---------------------------------------------------------------------------
// Directed tree decompositions
// ---------------------------------------------------------------------------

/// Whether every directed cycle of `g` meeting both `y` and its complement
/// contains a vertex of `x`. A crossing cycle exists exactly when some edge
/// inside a strong component of `g − x` crosses the boundary of `y`.
pub fn strongly_guards(g: &Digraph, x: &BTreeSet<VertexId>, y: &BTreeSet<VertexId>) -> bool {
    let alive: Vec<bool> = g.vertices().iter().map(|v| !x.contains(v)).collect();
    let mut comp = vec![usize::MAX; g.n()];
    for (i, c) in scc_idx(g, Some(&alive)).into_iter().enumerate() {
        for v in c {
            comp[v] = i;
        }
    }
    let in_y: Vec<bool> = g.vertices().iter().map(|v| y.contains(v)).collect();
    !g.edge_indices()
        .any(|(a, b)| alive[a] && alive[b] && comp[a] == comp[b] && in_y[a] != in_y[b])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedTreeDecomposition {
    pub root: String,
    /// Parent of every non-root node.
    pub parent: BTreeMap<String, String>,
    pub bags: BTreeMap<String, BTreeSet<VertexId>>,
    /// Guard of the arc entering each non-root node.
    pub guards: BTreeMap<String, BTreeSet<VertexId>>,
}

impl DirectedTreeDecomposition {
    pub fn single_bag(g: &Digraph) -> Self {
        DirectedTreeDecomposition {
            root: "t0".into(),
            parent: BTreeMap::new(),
            bags: BTreeMap::from([("t0".into(), g.vertex_set())]),
            guards: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> BTreeSet<&String> {
        self.bags.keys().chain(self.parent.keys()).chain(std::iter::once(&self.root)).collect()
    }

    pub fn children(&self, t: &str) -> Vec<&String> {
        self.parent.iter().filter(|(_, p)| p.as_str() == t).map(|(c, _)| c).collect()
    }

    /// Nodes of the subtree rooted at `t`, children before parents.
    pub fn post_order(&self, t: &str) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.children(t) {
            out.extend(self.post_order(c));
        }
        out.push(t.to_string());
        out
    }

    /// Union of the bags in the subtree rooted at `t`.
    pub fn below(&self, t: &str) -> BTreeSet<VertexId> {
        self.post_order(t).iter().flat_map(|s| self.bags.get(s).cloned().unwrap_or_default()).collect()
    }

    /// The bag of `t` together with the guards of all arcs at `t`.
    pub fn gamma(&self, t: &str) -> BTreeSet<VertexId> {
        let mut s = self.bags.get(t).cloned().unwrap_or_default();
        if let Some(g) = self.guards.get(t) {
            s.extend(g.iter().cloned());
        }
        for c in self.children(t) {
            if let Some(g) = self.guards.get(c) {
                s.extend(g.iter().cloned());
            }
        }
        s
    }

    pub fn width(&self) -> usize {
        self.nodes().iter().map(|t| self.gamma(t).len()).max().unwrap_or(1).saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DtdViolation {
    NotATree { node: String },
    EmptyBag { node: String },
    UnknownVertex { node: String, vertex: VertexId },
    BagsOverlap { vertex: VertexId },
    Uncovered { vertex: VertexId },
    GuardFails { node: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtdReport {
    pub valid: bool,
    pub width: usize,
    pub witness: Option<DtdViolation>,
}

fn check_dtd(g: &Digraph, d: &DirectedTreeDecomposition) -> Result<(), DtdViolation> {
    use DtdViolation::*;
    if d.parent.contains_key(&d.root) {
        return Err(NotATree { node: d.root.clone() });
    }
    let nodes = d.nodes();
    for t in &nodes {
        let mut seen = BTreeSet::new();
        let mut cur: &String = t;
        while let Some(p) = d.parent.get(cur) {
            if !seen.insert(cur) {
                return Err(NotATree { node: (*t).clone() });
            }
            cur = p;
        }
        if *cur != d.root {
            return Err(NotATree { node: (*t).clone() });
        }
    }
    for t in d.guards.keys() {
        if !d.parent.contains_key(t) {
            return Err(NotATree { node: t.clone() });
        }
    }
    let mut owner: BTreeSet<&VertexId> = BTreeSet::new();
    for t in &nodes {
        let bag = d.bags.get(*t);
        if bag.map_or(true, BTreeSet::is_empty) {
            return Err(EmptyBag { node: (*t).clone() });
        }
        for v in bag.into_iter().flatten().chain(d.guards.get(*t).into_iter().flatten()) {
            if !g.contains_vertex(v) {
                return Err(UnknownVertex { node: (*t).clone(), vertex: v.clone() });
            }
        }
        for v in bag.into_iter().flatten() {
            if !owner.insert(v) {
                return Err(BagsOverlap { vertex: v.clone() });
            }
        }
    }
    if let Some(v) = g.vertices().iter().find(|v| !owner.contains(v)) {
        return Err(Uncovered { vertex: v.clone() });
    }
    for t in d.parent.keys() {
        let guard = d.guards.get(t).cloned().unwrap_or_default();
        if !strongly_guards(g, &guard, &d.below(t)) {
            return Err(GuardFails { node: t.clone() });
        }
    }
    Ok(())
}

pub fn validate_dtd(g: &Digraph, d: &DirectedTreeDecomposition) -> DtdReport {
    let res = check_dtd(g, d);
    DtdReport { valid: res.is_ok(), width: d.width(), witness: res.err() }
}

/// Singleton bags arranged along an optimal cycle rank decomposition, each
/// arc guarded by the ancestors of its head. Separate trees hang below the
/// first root with empty guards.
pub fn dtd_from_cycle_rank(g: &Digraph) -> Result<DirectedTreeDecomposition, DecompositionError> {
    if g.n() == 0 {
        return Err(pre("the digraph has no vertices"));
    }
    let cr = cycle_rank(g)?;
    let t = &cr.decomposition;
    let name = |v: &VertexId| v.as_str().to_string();
    let root = name(&t.roots[0]);
    let mut parent = BTreeMap::new();
    let mut guards = BTreeMap::new();
    for r in &t.roots[1..] {
        parent.insert(name(r), root.clone());
        guards.insert(name(r), BTreeSet::new());
    }
    for (c, p) in &t.parent {
        parent.insert(name(c), name(p));
        guards.insert(name(c), t.ancestors(c).into_iter().collect());
    }
    let bags = g.vertices().iter().map(|v| (name(v), BTreeSet::from([v.clone()]))).collect();
    Ok(DirectedTreeDecomposition { root, parent, bags, guards })
}

/// Decomposition with singleton bags found by trying every rooted tree on
/// the vertex set. Each arc gets either a smallest guard drawn from the
/// proper ancestors of its head or a globally smallest guard, whichever
/// policy gives the tree the smaller width. Limited to seven vertices.
pub fn brute_force_dtd(g: &Digraph) -> Result<DirectedTreeDecomposition, DecompositionError> {
    let n = g.n();
    if n == 0 || n > 7 {
        return Err(pre(format!("brute force needs 1 to 7 vertices, got {n}")));
    }
    let mg = MaskGraph::new(g).expect("small digraph");
    let full = mg.full();
    // Strong components of G − X for every X, as lists of masks.
    let comps: Vec<Vec<u128>> = (0..=full).map(|x| mg.sccs(full & !x)).collect();
    let guards_ok = |x: u128, y: u128| {
        comps[x as usize].iter().all(|&c| {
            bits(c).all(|a| mg.out[a] & c & if y & bit(a) != 0 { !y } else { y } == 0)
        })
    };
    let mut by_size: Vec<u128> = (0..=full).collect();
    by_size.sort_by_key(|x| x.count_ones());
    let min_guard: Vec<u128> =
        (0..=full).map(|y| *by_size.iter().find(|&&x| guards_ok(x, y)).expect("full set guards")).collect();
    let mut within: HashMap<(u128, u128), u128> = HashMap::new();
    let mut min_guard_within = |y: u128, a: u128| {
        *within.entry((y, a)).or_insert_with(|| {
            by_size.iter().copied().find(|&x| x & !a == 0 && guards_ok(x, y)).unwrap_or(min_guard[y as usize])
        })
    };

    let width_of = |parent: &[usize], root: usize, guard: &[u128]| {
        let mut gamma: Vec<u128> = (0..n).map(bit).collect();
        for v in (0..n).filter(|&v| v != root) {
            gamma[v] |= guard[v];
            gamma[parent[v]] |= guard[v];
        }
        gamma.iter().map(|m| m.count_ones() as usize).max().unwrap_or(1) - 1
    };

    let mut best: Option<(usize, usize, Vec<usize>, Vec<u128>)> = None;
    let total = n.pow(n as u32);
    let mut parent = vec![0usize; n];
    for code in 0..total {
        let mut c = code;
        for p in parent.iter_mut() {
            *p = c % n;
            c /= n;
        }
        // Exactly one vertex is its own parent: the root.
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v] == v).collect();
        if roots.len() != 1 {
            continue;
        }
        let root = roots[0];
        let mut below = vec![0u128; n];
        let mut above = vec![0u128; n];
        let mut ok = true;
        for v in 0..n {
            let mut cur = v;
            let mut steps = 0;
            loop {
                below[cur] |= bit(v);
                if cur != v {
                    above[v] |= bit(cur);
                }
                if cur == root {
                    break;
                }
                cur = parent[cur];
                steps += 1;
                if steps > n {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
        }
        if !ok {
            continue;
        }
        let global: Vec<u128> = (0..n).map(|v| min_guard[below[v] as usize]).collect();
        let local: Vec<u128> = (0..n).map(|v| min_guard_within(below[v], above[v])).collect();
        let (wg, wl) = (width_of(&parent, root, &global), width_of(&parent, root, &local));
        let (width, guard) = if wl <= wg { (wl, local) } else { (wg, global) };
        if best.as_ref().map_or(true, |b| width < b.0) {
            best = Some((width, root, parent.clone(), guard));
            if width == 0 {
                break;
            }
        }
    }
    let (_, root, parent, guard) = best.expect("some tree exists");
    let name = |i: usize| g.id(i).as_str().to_string();
    let ids = |m: u128| bits(m).map(|i| g.id(i).clone()).collect::<BTreeSet<_>>();
    Ok(DirectedTreeDecomposition {
        root: name(root),
        parent: (0..n).filter(|&v| v != root).map(|v| (name(v), name(parent[v]))).collect(),
        bags: (0..n).map(|v| (name(v), BTreeSet::from([g.id(v).clone()]))).collect(),
        guards: (0..n).filter(|&v| v != root).map(|v| (name(v), ids(guard[v]))).collect(),
    })
}

// ---------------------------------------------------------------------------
// Packing or covering
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PackingOrCover {
    Packing(Vec<Digraph>),
    Cover(BTreeSet<VertexId>),
}

/// Either `k` vertex-disjoint members found by `member_check`, or a set of at
/// most `(k − 1)(w + 1)` vertices whose removal leaves no member, where `w`
/// is the width of `dtd`. `member_check` returns a member inside the given
/// digraph when there is one.
pub fn erdos_posa(
    g: &Digraph,
    dtd: &DirectedTreeDecomposition,
    member_check: &dyn Fn(&Digraph) -> Option<Digraph>,
    k: usize,
) -> Result<PackingOrCover, DecompositionError> {
    if k == 0 {
        return Err(pre("k must be at least 1"));
    }
    if g.n() > 0 {
        if let Some(w) = validate_dtd(g, dtd).witness {
            return Err(pre(format!("invalid decomposition: {w:?}")));
        }
    }
    let mut alive = g.vertex_set();
    let mut packing = Vec::new();
    let mut cover = BTreeSet::new();
    let order = if g.n() > 0 { dtd.post_order(&dtd.root) } else { vec![] };
    let below: BTreeMap<&String, BTreeSet<VertexId>> = order.iter().map(|t| (t, dtd.below(t))).collect();
    let mut remaining = k;
    loop {
        let current = g.induced(&alive);
        let Some(found) = member_check(&current) else {
            return Ok(PackingOrCover::Cover(cover));
        };
        if remaining == 1 {
            packing.push(found);
            return Ok(PackingOrCover::Packing(packing));
        }
        let (t, witness) = order
            .iter()
            .find_map(|t| {
                let sub: BTreeSet<VertexId> = below[t].intersection(&alive).cloned().collect();
                member_check(&g.induced(&sub)).map(|w| (t, w))
            })
            .expect("the root subtree contains a member");
        packing.push(witness);
        let gamma: BTreeSet<VertexId> = dtd.gamma(t).intersection(&alive).cloned().collect();
        for v in below[t].iter().chain(&gamma) {
            alive.remove(v);
        }
        cover.extend(gamma);
        remaining -= 1;
    }
}

/// A shortest directed cycle, as a member check for the family of cycles.
pub fn cycle_member(g: &Digraph) -> Option<Digraph> {
    let mut best: Option<Vec<usize>> = None;
    for s in 0..g.n() {
        let mut prev = vec![usize::MAX; g.n()];
        let mut queue = VecDeque::from([s]);
        let mut seen = vec![false; g.n()];
        seen[s] = true;
        'bfs: while let Some(x) = queue.pop_front() {
            for &y in g.out_idx(x) {
                if y == s {
                    let mut cyc = vec![x];
                    let mut c = x;
                    while c != s {
                        c = prev[c];
                        cyc.push(c);
                    }
                    if best.as_ref().map_or(true, |b| cyc.len() < b.len()) {
                        best = Some(cyc);
                    }
                    break 'bfs;
                }
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
    }
    let cyc = best?;
    let vs: Vec<VertexId> = cyc.iter().rev().map(|&i| g.id(i).clone()).collect();
    let es: Vec<(VertexId, VertexId)> =
        (0..vs.len()).map(|i| (vs[i].clone(), vs[(i + 1) % vs.len()].clone())).collect();
    Some(Digraph::new(vs, es).expect("cycle"))
}

/// A copy of `pattern` as a subdigraph, as a member check for the family of
/// digraphs isomorphic to a fixed pattern.
pub fn pattern_member(pattern: &Digraph, g: &Digraph) -> Option<Digraph> {
    let map = subgraph_monomorphism(pattern, g, u64::MAX).ok()??;
    let es: Vec<(VertexId, VertexId)> =
        pattern.edges().into_iter().map(|(a, b)| (map[&a].clone(), map[&b].clone())).collect();
    Some(Digraph::new(map.values().cloned().collect::<Vec<_>>(), es).expect("image of a simple digraph"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(es: &[(&str, &str)]) -> Digraph {
        Digraph::from_edges(es.iter().copied()).unwrap()
    }

    fn set(vs: &[&str]) -> BTreeSet<VertexId> {
        vs.iter().map(|v| VertexId::from(*v)).collect()
    }

    #[test]
    fn guards_basic() {
        let two = g(&[("u", "v"), ("v", "u")]);
        assert!(!strongly_guards(&two, &set(&[]), &set(&["u"])));
        assert!(strongly_guards(&two, &two.vertex_set(), &set(&["u"])));
        assert!(strongly_guards(&two, &set(&["v"]), &set(&["u"])));
    }

    #[test]
    fn single_bag_width() {
        let tri = g(&[("a", "b"), ("b", "c"), ("c", "a")]);
        let r = validate_dtd(&tri, &DirectedTreeDecomposition::single_bag(&tri));
        assert!(r.valid);
        assert_eq!(r.width, 2);
    }

    #[test]
    fn emptied_guard_invalid() {
        let two = g(&[("a", "b"), ("b", "a")]);
        let mut d = dtd_from_cycle_rank(&two).unwrap();
        assert!(validate_dtd(&two, &d).valid);
        for gd in d.guards.values_mut() {
            gd.clear();
        }
        assert!(matches!(validate_dtd(&two, &d).witness, Some(DtdViolation::GuardFails { .. })));
    }

    #[test]
    fn brute_force_no_worse_than_rank() {
        let tri = g(&[("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("d", "c")]);
        let b = brute_force_dtd(&tri).unwrap();
        let c = dtd_from_cycle_rank(&tri).unwrap();
        assert!(validate_dtd(&tri, &b).valid);
        assert!(b.width() <= c.width());
    }

    #[test]
    fn single_leaf_chain() {
        let cd = ChainDecomposition::new(vec![ChainNode::leaf(g(&[("a", "b"), ("b", "a")]))]);
        let r = validate_chain_decomposition(&cd);
        assert!(r.valid);
        assert_eq!((r.weight_vector, r.full_height), (vec![0], 1));
        assert_eq!(cleanliness(&cd), Cleanliness::Spotless);
    }

    #[test]
    fn acyclic_cover_empty() {
        let dag = g(&[("a", "b"), ("b", "c")]);
        let d = DirectedTreeDecomposition {
            root: "a".into(),
            parent: [("b".into(), "a".into()), ("c".into(), "b".into())].into(),
            bags: [("a".into(), set(&["a"])), ("b".into(), set(&["b"])), ("c".into(), set(&["c"]))].into(),
            guards: BTreeMap::new(),
        };
        assert_eq!(erdos_posa(&dag, &d, &cycle_member, 2).unwrap(), PackingOrCover::Cover(BTreeSet::new()));
    }
}
