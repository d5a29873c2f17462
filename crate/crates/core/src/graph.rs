//! Finite simple digraphs with ordered vertex identifiers.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Opaque vertex label. Ordered naturally: digit runs compare as numbers,
/// so `v2 < v10`. Ties fall back to plain string order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexId(Arc<str>);

impl VertexId {
    pub fn new(s: impl AsRef<str>) -> Self {
        VertexId(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].is_ascii_digit() && b[j].is_ascii_digit() {
            let si = i;
            while i < a.len() && a[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            let da = trim_zeros(&a[si..i]);
            let db = trim_zeros(&b[sj..j]);
            let ord = da.len().cmp(&db.len()).then_with(|| da.cmp(db));
            if ord != Ordering::Equal {
                return ord;
            }
        } else {
            let ord = a[i].cmp(&b[j]);
            if ord != Ordering::Equal {
                return ord;
            }
            i += 1;
            j += 1;
        }
    }
    (a.len() - i).cmp(&(b.len() - j))
}

fn trim_zeros(d: &[u8]) -> &[u8] {
    let k = d.iter().take_while(|&&c| c == b'0').count();
    &d[k..]
}

impl Ord for VertexId {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for VertexId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId::new(s)
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(Arc::from(s))
    }
}

impl From<&String> for VertexId {
    fn from(s: &String) -> Self {
        VertexId::new(s)
    }
}

impl From<&VertexId> for VertexId {
    fn from(v: &VertexId) -> Self {
        v.clone()
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(VertexId::from(s))
    }
}

pub type Edge = (VertexId, VertexId);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at {0}")]
    SelfLoop(VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("missing edge ({0}, {1})")]
    MissingEdge(VertexId, VertexId),
    #[error("edge ({tail}, {head}) is not butterfly contractible: out-degree of tail {out_degree}, in-degree of head {in_degree}")]
    NotContractible {
        tail: VertexId,
        head: VertexId,
        out_degree: usize,
        in_degree: usize,
    },
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

/// A finite simple digraph. Vertices are kept sorted by [`VertexId`] order and
/// adjacency lists are sorted by vertex index, so two digraphs with equal vertex
/// and edge sets compare equal.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Digraph {
    ids: Vec<VertexId>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Digraph")
            .field("vertices", &self.ids)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Digraph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a digraph from a vertex list and an edge list. Every edge endpoint
    /// must be listed. Duplicate vertices and edges collapse.
    pub fn new<VI, V, EI, A, B>(vertices: VI, edges: EI) -> Result<Self, GraphError>
    where
        VI: IntoIterator<Item = V>,
        V: Into<VertexId>,
        EI: IntoIterator<Item = (A, B)>,
        A: Into<VertexId>,
        B: Into<VertexId>,
    {
        let vs: BTreeSet<VertexId> = vertices.into_iter().map(Into::into).collect();
        let ids: Vec<VertexId> = vs.into_iter().collect();
        let mut pairs = Vec::new();
        for (a, b) in edges {
            let (a, b) = (a.into(), b.into());
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let ia = ids.binary_search(&a).map_err(|_| GraphError::UnknownVertex(a.clone()))?;
            let ib = ids.binary_search(&b).map_err(|_| GraphError::UnknownVertex(b.clone()))?;
            pairs.push((ia, ib));
        }
        Ok(Self::from_index_parts(ids, pairs))
    }

    /// Builds a digraph whose vertex set is the set of edge endpoints.
    pub fn from_edges<EI, A, B>(edges: EI) -> Result<Self, GraphError>
    where
        EI: IntoIterator<Item = (A, B)>,
        A: Into<VertexId>,
        B: Into<VertexId>,
    {
        let es: Vec<Edge> = edges.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let vs: Vec<VertexId> = es.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        Self::new(vs, es)
    }

    /// `ids` must be sorted and duplicate-free; pairs index into it.
    pub(crate) fn from_index_parts(
        ids: Vec<VertexId>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let n = ids.len();
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for (a, b) in pairs {
            debug_assert!(a != b);
            out[a].push(b);
            inn[b].push(a);
        }
        let mut edge_count = 0;
        for l in out.iter_mut().chain(inn.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        for l in &out {
            edge_count += l.len();
        }
        Digraph { ids, out, inn, edge_count }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn m(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.ids.iter().cloned().collect()
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.ids.binary_search(v).ok()
    }

    pub fn id(&self, i: usize) -> &VertexId {
        &self.ids[i]
    }

    pub fn contains_vertex(&self, v: &VertexId) -> bool {
        self.index_of(v).is_some()
    }

    pub fn out_idx(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn in_idx(&self, i: usize) -> &[usize] {
        &self.inn[i]
    }

    pub fn has_edge_idx(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    pub fn has_edge(&self, a: &VertexId, b: &VertexId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.has_edge_idx(i, j),
            _ => false,
        }
    }

    pub fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(a, l)| l.iter().map(move |&b| (a, b)))
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.edge_indices().map(|(a, b)| (self.ids[a].clone(), self.ids[b].clone())).collect()
    }

    pub fn out_neighbors(&self, v: &VertexId) -> Vec<VertexId> {
        self.index_of(v)
            .map(|i| self.out[i].iter().map(|&j| self.ids[j].clone()).collect())
            .unwrap_or_default()
    }

    pub fn in_neighbors(&self, v: &VertexId) -> Vec<VertexId> {
        self.index_of(v)
            .map(|i| self.inn[i].iter().map(|&j| self.ids[j].clone()).collect())
            .unwrap_or_default()
    }

    /// Out-degree, or `None` for an unknown vertex.
    pub fn out_degree(&self, v: &VertexId) -> Option<usize> {
        self.index_of(v).map(|i| self.out[i].len())
    }

    pub fn in_degree(&self, v: &VertexId) -> Option<usize> {
        self.index_of(v).map(|i| self.inn[i].len())
    }

    /// Subgraph induced by the vertices whose flag is set.
    pub fn induced_by_flags(&self, keep: &[bool]) -> Digraph {
        let mut map = vec![usize::MAX; self.n()];
        let mut ids = Vec::new();
        for i in 0..self.n() {
            if keep[i] {
                map[i] = ids.len();
                ids.push(self.ids[i].clone());
            }
        }
        let pairs: Vec<_> = self
            .edge_indices()
            .filter(|&(a, b)| keep[a] && keep[b])
            .map(|(a, b)| (map[a], map[b]))
            .collect();
        Digraph::from_index_parts(ids, pairs)
    }

    /// Subgraph induced by the given vertices; unknown vertices are ignored.
    pub fn induced<'a>(&self, vs: impl IntoIterator<Item = &'a VertexId>) -> Digraph {
        let mut keep = vec![false; self.n()];
        for v in vs {
            if let Some(i) = self.index_of(v) {
                keep[i] = true;
            }
        }
        self.induced_by_flags(&keep)
    }

    pub fn remove_vertices<'a>(&self, vs: impl IntoIterator<Item = &'a VertexId>) -> Digraph {
        let mut keep = vec![true; self.n()];
        for v in vs {
            if let Some(i) = self.index_of(v) {
                keep[i] = false;
            }
        }
        self.induced_by_flags(&keep)
    }

    /// Removes the listed edges; absent edges are ignored.
    pub fn remove_edges<'a>(&self, es: impl IntoIterator<Item = &'a Edge>) -> Digraph {
        let drop: BTreeSet<(usize, usize)> = es
            .into_iter()
            .filter_map(|(a, b)| Some((self.index_of(a)?, self.index_of(b)?)))
            .collect();
        let pairs: Vec<_> = self.edge_indices().filter(|e| !drop.contains(e)).collect();
        Digraph::from_index_parts(self.ids.clone(), pairs)
    }

    /// Spanning subgraph keeping only the listed edges (which must exist).
    pub fn with_edges<'a>(&self, es: impl IntoIterator<Item = &'a Edge>) -> Result<Digraph, GraphError> {
        let mut pairs = Vec::new();
        for (a, b) in es {
            match (self.index_of(a), self.index_of(b)) {
                (Some(i), Some(j)) if self.has_edge_idx(i, j) => pairs.push((i, j)),
                _ => return Err(GraphError::MissingEdge(a.clone(), b.clone())),
            }
        }
        Ok(Digraph::from_index_parts(self.ids.clone(), pairs))
    }

    pub fn add_edges<'a>(&self, es: impl IntoIterator<Item = &'a Edge>) -> Result<Digraph, GraphError> {
        let mut all = self.edges();
        all.extend(es.into_iter().cloned());
        Digraph::new(self.ids.iter().cloned(), all)
    }

    pub fn union(&self, other: &Digraph) -> Digraph {
        let vs: BTreeSet<VertexId> = self.ids.iter().chain(other.ids.iter()).cloned().collect();
        let mut es = self.edges();
        es.extend(other.edges());
        Digraph::new(vs, es).expect("union of loop-free digraphs")
    }

    pub fn is_subgraph_of(&self, other: &Digraph) -> bool {
        self.ids.iter().all(|v| other.contains_vertex(v))
            && self.edge_indices().all(|(a, b)| other.has_edge(&self.ids[a], &self.ids[b]))
    }

    pub fn reverse(&self) -> Digraph {
        let pairs: Vec<_> = self.edge_indices().map(|(a, b)| (b, a)).collect();
        Digraph::from_index_parts(self.ids.clone(), pairs)
    }

    /// Renames every vertex through `f`; fails if two vertices collide.
    pub fn relabel(&self, f: impl Fn(&VertexId) -> VertexId) -> Result<Digraph, GraphError> {
        let names: Vec<VertexId> = self.ids.iter().map(&f).collect();
        let distinct: BTreeSet<&VertexId> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(GraphError::InvalidPath("relabelling is not injective".into()));
        }
        let es: Vec<Edge> =
            self.edge_indices().map(|(a, b)| (names[a].clone(), names[b].clone())).collect();
        Digraph::new(names, es)
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.n() > 0 && scc_idx(self, None).len() == 1
    }

    pub fn is_acyclic(&self) -> bool {
        scc_idx(self, None).iter().all(|c| c.len() == 1)
    }

    pub(crate) fn mask_graph(&self) -> Option<MaskGraph> {
        MaskGraph::new(self)
    }
}

impl Serialize for Digraph {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DigraphRepr { vertices: self.ids.clone(), edges: self.edges() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Digraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = DigraphRepr::deserialize(d)?;
        Digraph::new(r.vertices, r.edges).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct DigraphRepr {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
}

/// Strongly connected components of the vertices flagged alive, as index
/// lists. Components come in topological order (sources first) and each list
/// is sorted.
pub(crate) fn scc_idx(g: &Digraph, alive: Option<&[bool]>) -> Vec<Vec<usize>> {
    struct St<'a> {
        g: &'a Digraph,
        alive: Option<&'a [bool]>,
        index: Vec<usize>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn ok(st: &St, v: usize) -> bool {
        st.alive.map_or(true, |a| a[v])
    }
    fn visit(st: &mut St, v: usize) {
        st.index[v] = st.next;
        st.low[v] = st.next;
        st.next += 1;
        st.stack.push(v);
        st.on[v] = true;
        for k in 0..st.g.out[v].len() {
            let w = st.g.out[v][k];
            if !ok(st, w) {
                continue;
            }
            if st.index[w] == usize::MAX {
                visit(st, w);
                st.low[v] = st.low[v].min(st.low[w]);
            } else if st.on[w] {
                st.low[v] = st.low[v].min(st.index[w]);
            }
        }
        if st.low[v] == st.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().unwrap();
                st.on[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            st.out.push(comp);
        }
    }
    let n = g.n();
    let mut st = St {
        g,
        alive,
        index: vec![usize::MAX; n],
        low: vec![0; n],
        on: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if ok(&st, v) && st.index[v] == usize::MAX {
            visit(&mut st, v);
        }
    }
    st.out.reverse();
    st.out
}

/// Strongly connected components in topological order of the condensation.
pub fn scc(g: &Digraph) -> Vec<Vec<VertexId>> {
    scc_idx(g, None)
        .into_iter()
        .map(|c| c.into_iter().map(|i| g.ids[i].clone()).collect())
        .collect()
}

/// Length of a longest directed cycle, 0 for acyclic digraphs.
pub fn circumference(g: &Digraph) -> usize {
    fn dfs(g: &Digraph, start: usize, v: usize, depth: usize, on: &mut [bool], free: usize, best: &mut usize) {
        for &w in &g.out[v] {
            if w == start {
                *best = (*best).max(depth + 1);
            } else if w > start && !on[w] && depth + 1 + free > *best {
                on[w] = true;
                dfs(g, start, w, depth + 1, on, free - 1, best);
                on[w] = false;
            }
        }
    }
    let mut best = 0;
    let comps = scc_idx(g, None);
    for comp in comps.iter().filter(|c| c.len() > 1) {
        let mut alive = vec![false; g.n()];
        for &v in comp {
            alive[v] = true;
        }
        let sub = g.induced_by_flags(&alive);
        let mut on = vec![false; sub.n()];
        for s in 0..sub.n() {
            let free = sub.n() - s - 1;
            if free + 1 <= best {
                break;
            }
            on[s] = true;
            dfs(&sub, s, s, 0, &mut on, free, &mut best);
            on[s] = false;
        }
    }
    best
}

/// Whether `(u, v)` is an edge that is the only out-edge of `u` or the only
/// in-edge of `v`.
pub fn is_butterfly_contractible(g: &Digraph, u: &VertexId, v: &VertexId) -> bool {
    match (g.index_of(u), g.index_of(v)) {
        (Some(a), Some(b)) => {
            g.has_edge_idx(a, b) && (g.out[a].len() == 1 || g.inn[b].len() == 1)
        }
        _ => false,
    }
}

/// Butterfly contraction of `(u, v)`. The merged vertex keeps the name `u`;
/// parallel edges collapse and a loop arising from an edge `(v, u)` is dropped.
pub fn butterfly_contract(g: &Digraph, u: &VertexId, v: &VertexId) -> Result<Digraph, GraphError> {
    let a = g.index_of(u).ok_or_else(|| GraphError::UnknownVertex(u.clone()))?;
    let b = g.index_of(v).ok_or_else(|| GraphError::UnknownVertex(v.clone()))?;
    if !g.has_edge_idx(a, b) {
        return Err(GraphError::MissingEdge(u.clone(), v.clone()));
    }
    if g.out[a].len() != 1 && g.inn[b].len() != 1 {
        return Err(GraphError::NotContractible {
            tail: u.clone(),
            head: v.clone(),
            out_degree: g.out[a].len(),
            in_degree: g.inn[b].len(),
        });
    }
    Ok(identify(g, a, b))
}

/// Identifies vertex `b` into vertex `a`, dropping loops and parallel edges.
pub(crate) fn identify(g: &Digraph, a: usize, b: usize) -> Digraph {
    let ids: Vec<VertexId> =
        g.ids.iter().enumerate().filter(|&(i, _)| i != b).map(|(_, v)| v.clone()).collect();
    let remap = |i: usize| {
        let i = if i == b { a } else { i };
        if i > b {
            i - 1
        } else {
            i
        }
    };
    let pairs: Vec<_> = g
        .edge_indices()
        .map(|(x, y)| (remap(x), remap(y)))
        .filter(|(x, y)| x != y)
        .collect();
    Digraph::from_index_parts(ids, pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Out,
    In,
}

/// The maximal out- (or in-) arborescence rooted at `root` in which every
/// non-root vertex has in-degree (or out-degree) exactly one in `g`.
pub fn arborescence(g: &Digraph, root: &VertexId, dir: Direction) -> Result<Digraph, GraphError> {
    let r = g.index_of(root).ok_or_else(|| GraphError::UnknownVertex(root.clone()))?;
    let (fwd, back) = match dir {
        Direction::Out => (&g.out, &g.inn),
        Direction::In => (&g.inn, &g.out),
    };
    let mut keep = vec![false; g.n()];
    keep[r] = true;
    let mut pairs = Vec::new();
    let mut queue = VecDeque::from([r]);
    while let Some(x) = queue.pop_front() {
        for &y in &fwd[x] {
            if !keep[y] && back[y].len() == 1 {
                keep[y] = true;
                pairs.push(match dir {
                    Direction::Out => (x, y),
                    Direction::In => (y, x),
                });
                queue.push_back(y);
            }
        }
    }
    let mut map = vec![usize::MAX; g.n()];
    let mut ids = Vec::new();
    for i in 0..g.n() {
        if keep[i] {
            map[i] = ids.len();
            ids.push(g.ids[i].clone());
        }
    }
    Ok(Digraph::from_index_parts(ids, pairs.into_iter().map(|(x, y)| (map[x], map[y]))))
}

/// A directed path given by its vertex sequence (non-empty, no repeats).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<VertexId>", into = "Vec<VertexId>")]
pub struct Path(Vec<VertexId>);

impl TryFrom<Vec<VertexId>> for Path {
    type Error = GraphError;
    fn try_from(v: Vec<VertexId>) -> Result<Self, GraphError> {
        Path::new(v)
    }
}

impl From<Path> for Vec<VertexId> {
    fn from(p: Path) -> Self {
        p.0
    }
}

impl Path {
    pub fn new(vs: Vec<VertexId>) -> Result<Self, GraphError> {
        if vs.is_empty() {
            return Err(GraphError::InvalidPath("empty".into()));
        }
        let set: BTreeSet<&VertexId> = vs.iter().collect();
        if set.len() != vs.len() {
            return Err(GraphError::InvalidPath("repeated vertex".into()));
        }
        Ok(Path(vs))
    }

    pub fn from_strs(vs: &[&str]) -> Result<Self, GraphError> {
        Path::new(vs.iter().map(|s| VertexId::new(s)).collect())
    }

    pub fn single(v: VertexId) -> Self {
        Path(vec![v])
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn tail(&self) -> &VertexId {
        &self.0[0]
    }

    pub fn head(&self) -> &VertexId {
        &self.0[self.0.len() - 1]
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_trivial(&self) -> bool {
        self.0.len() == 1
    }

    pub fn edges(&self) -> impl Iterator<Item = (&VertexId, &VertexId)> + '_ {
        self.0.windows(2).map(|w| (&w[0], &w[1]))
    }

    pub fn edge_list(&self) -> Vec<Edge> {
        self.edges().map(|(a, b)| (a.clone(), b.clone())).collect()
    }

    pub fn position(&self, v: &VertexId) -> Option<usize> {
        self.0.iter().position(|x| x == v)
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.0.contains(v)
    }

    pub fn internal(&self) -> &[VertexId] {
        if self.0.len() <= 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    pub fn is_internal(&self, v: &VertexId) -> bool {
        self.internal().contains(v)
    }

    /// The subpath from `a` to `b`, if `a` does not come after `b`.
    pub fn subpath(&self, a: &VertexId, b: &VertexId) -> Option<Path> {
        let i = self.position(a)?;
        let j = self.position(b)?;
        (i <= j).then(|| Path(self.0[i..=j].to_vec()))
    }

    pub fn slice(&self, i: usize, j: usize) -> Path {
        Path(self.0[i..=j].to_vec())
    }

    /// Joins two paths sharing `self.head() == other.tail()`.
    pub fn concat(&self, other: &Path) -> Result<Path, GraphError> {
        if self.head() != other.tail() {
            return Err(GraphError::InvalidPath(format!(
                "cannot join at {} and {}",
                self.head(),
                other.tail()
            )));
        }
        let mut v = self.0.clone();
        v.extend(other.0[1..].iter().cloned());
        Path::new(v)
    }

    pub fn is_in(&self, g: &Digraph) -> bool {
        self.0.iter().all(|v| g.contains_vertex(v)) && self.edges().all(|(a, b)| g.has_edge(a, b))
    }

    pub fn to_digraph(&self) -> Digraph {
        Digraph::new(self.0.iter().cloned(), self.edge_list()).expect("paths have no loops")
    }
}

/// A digraph with two designated terminals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoTerminalDigraph {
    pub graph: Digraph,
    pub s: VertexId,
    pub t: VertexId,
}

impl TwoTerminalDigraph {
    pub fn new(graph: Digraph, s: VertexId, t: VertexId) -> Result<Self, GraphError> {
        for v in [&s, &t] {
            if !graph.contains_vertex(v) {
                return Err(GraphError::UnknownVertex(v.clone()));
            }
        }
        Ok(TwoTerminalDigraph { graph, s, t })
    }
}

/// Bitset view of a digraph with at most 128 vertices.
#[derive(Clone, Debug)]
pub(crate) struct MaskGraph {
    pub n: usize,
    pub out: Vec<u128>,
    pub inn: Vec<u128>,
}

pub(crate) fn bit(i: usize) -> u128 {
    1u128 << i
}

pub(crate) fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

impl MaskGraph {
    pub fn new(g: &Digraph) -> Option<MaskGraph> {
        if g.n() > 128 {
            return None;
        }
        let mut out = vec![0u128; g.n()];
        let mut inn = vec![0u128; g.n()];
        for (a, b) in g.edge_indices() {
            out[a] |= bit(b);
            inn[b] |= bit(a);
        }
        Some(MaskGraph { n: g.n(), out, inn })
    }

    pub fn full(&self) -> u128 {
        if self.n == 128 {
            u128::MAX
        } else {
            bit(self.n) - 1
        }
    }

    pub fn reach(&self, from: u128, within: u128, forward: bool) -> u128 {
        let adj = if forward { &self.out } else { &self.inn };
        let mut seen = from & within;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            for v in bits(frontier) {
                next |= adj[v];
            }
            next &= within & !seen;
            seen |= next;
            frontier = next;
        }
        seen
    }

    /// Strongly connected components of `G[within]`, lowest vertex first.
    pub fn sccs(&self, within: u128) -> Vec<u128> {
        let mut rest = within;
        let mut comps = Vec::new();
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            let c = self.reach(bit(v), rest, true) & self.reach(bit(v), rest, false);
            comps.push(c);
            rest &= !c;
        }
        comps
    }
}
