//! Butterfly-minor models: representation, validation and minimization.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{Digraph, Edge, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinorError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Image of one pattern vertex: a tree made of an in-arborescence and an
/// out-arborescence sharing the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSet {
    pub root: VertexId,
    pub in_part: BTreeSet<VertexId>,
    pub out_part: BTreeSet<VertexId>,
    #[serde(serialize_with = "ser_edges", deserialize_with = "de_edges")]
    pub edges: BTreeSet<Edge>,
}

impl BranchSet {
    pub fn singleton(v: VertexId) -> Self {
        BranchSet { root: v, in_part: BTreeSet::new(), out_part: BTreeSet::new(), edges: BTreeSet::new() }
    }

    pub fn vertices(&self) -> BTreeSet<VertexId> {
        let mut s: BTreeSet<VertexId> = self.in_part.union(&self.out_part).cloned().collect();
        s.insert(self.root.clone());
        s
    }

    /// Vertices that may carry the tail of an edge image.
    pub fn tails(&self) -> impl Iterator<Item = &VertexId> {
        std::iter::once(&self.root).chain(self.out_part.iter())
    }

    /// Vertices that may carry the head of an edge image.
    pub fn heads(&self) -> impl Iterator<Item = &VertexId> {
        std::iter::once(&self.root).chain(self.in_part.iter())
    }
}

fn ser_edges<S: Serializer>(es: &BTreeSet<Edge>, s: S) -> Result<S::Ok, S::Error> {
    es.iter().collect::<Vec<_>>().serialize(s)
}

fn de_edges<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeSet<Edge>, D::Error> {
    Ok(Vec::<Edge>::deserialize(d)?.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ButterflyMinorModel {
    pub vertex_map: BTreeMap<VertexId, BranchSet>,
    pub edge_map: BTreeMap<Edge, Edge>,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    vertex_map: BTreeMap<VertexId, BranchSet>,
    edge_map: Vec<(Edge, Edge)>,
}

impl Serialize for ButterflyMinorModel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelRepr {
            vertex_map: self.vertex_map.clone(),
            edge_map: self.edge_map.iter().map(|(a, b)| (a.clone(), b.clone())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ButterflyMinorModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = ModelRepr::deserialize(d)?;
        Ok(ButterflyMinorModel { vertex_map: r.vertex_map, edge_map: r.edge_map.into_iter().collect() })
    }
}

impl ButterflyMinorModel {
    /// Singleton images and identical edges.
    pub fn identity(g: &Digraph) -> Self {
        ButterflyMinorModel {
            vertex_map: g.vertices().iter().map(|v| (v.clone(), BranchSet::singleton(v.clone()))).collect(),
            edge_map: g.edges().into_iter().map(|e| (e.clone(), e)).collect(),
        }
    }

    /// Host vertices used by any branch set.
    pub fn image_vertices(&self) -> BTreeSet<VertexId> {
        self.vertex_map.values().flat_map(|b| b.vertices()).collect()
    }

    /// The subdigraph `μ(H)` of the host.
    pub fn image(&self) -> Digraph {
        let vs = self.image_vertices();
        let mut es: Vec<Edge> = self.vertex_map.values().flat_map(|b| b.edges.iter().cloned()).collect();
        es.extend(self.edge_map.values().cloned());
        Digraph::new(vs, es).expect("model images are loop-free")
    }

    /// Restricts the model to a sub-pattern.
    pub fn restrict(&self, pattern: &Digraph) -> ButterflyMinorModel {
        ButterflyMinorModel {
            vertex_map: self
                .vertex_map
                .iter()
                .filter(|(v, _)| pattern.contains_vertex(v))
                .map(|(v, b)| (v.clone(), b.clone()))
                .collect(),
            edge_map: self
                .edge_map
                .iter()
                .filter(|(e, _)| pattern.has_edge(&e.0, &e.1))
                .map(|(e, i)| (e.clone(), i.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelViolation {
    MissingVertexImage(VertexId),
    UnexpectedVertexImage(VertexId),
    MissingEdgeImage(Edge),
    UnexpectedEdgeImage(Edge),
    NotInHost { vertex: VertexId, host_vertex: VertexId },
    PartsOverlap { vertex: VertexId, host_vertex: VertexId },
    BranchEdgeInvalid { vertex: VertexId, edge: Edge },
    NotATree { vertex: VertexId },
    NotOutArborescence { vertex: VertexId },
    NotInArborescence { vertex: VertexId },
    ImagesOverlap { first: VertexId, second: VertexId, host_vertex: VertexId },
    EdgeImageNotInHost { edge: Edge, image: Edge },
    BadEdgeTail { edge: Edge, image: Edge },
    BadEdgeHead { edge: Edge, image: Edge },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelReport {
    pub valid: bool,
    pub witness: Option<ModelViolation>,
}

/// Whether the edges inside `part ∪ {root}` form an arborescence rooted at
/// `root`, directed away from it (`outward`) or towards it.
fn is_arborescence(root: &VertexId, part: &BTreeSet<VertexId>, edges: &BTreeSet<Edge>, outward: bool) -> bool {
    let inside = |v: &VertexId| v == root || part.contains(v);
    let es: Vec<(&VertexId, &VertexId)> = edges
        .iter()
        .filter(|(a, b)| inside(a) && inside(b))
        .map(|(a, b)| if outward { (a, b) } else { (b, a) })
        .collect();
    if es.len() != part.len() {
        return false;
    }
    let mut indeg: BTreeMap<&VertexId, usize> = BTreeMap::new();
    for (_, b) in &es {
        *indeg.entry(b).or_default() += 1;
    }
    if indeg.contains_key(root) || part.iter().any(|v| indeg.get(v) != Some(&1)) {
        return false;
    }
    let mut seen = BTreeSet::from([root]);
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        for (a, b) in &es {
            if *a == x && seen.insert(*b) {
                stack.push(b);
            }
        }
    }
    seen.len() == part.len() + 1
}

fn check_model(h: &Digraph, g: &Digraph, mu: &ButterflyMinorModel) -> Result<(), ModelViolation> {
    use ModelViolation::*;
    for v in h.vertices() {
        if !mu.vertex_map.contains_key(v) {
            return Err(MissingVertexImage(v.clone()));
        }
    }
    for v in mu.vertex_map.keys() {
        if !h.contains_vertex(v) {
            return Err(UnexpectedVertexImage(v.clone()));
        }
    }
    for e in h.edges() {
        if !mu.edge_map.contains_key(&e) {
            return Err(MissingEdgeImage(e));
        }
    }
    for e in mu.edge_map.keys() {
        if !h.has_edge(&e.0, &e.1) {
            return Err(UnexpectedEdgeImage(e.clone()));
        }
    }
    let mut owner: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for (v, b) in &mu.vertex_map {
        let verts = b.vertices();
        for x in &verts {
            if !g.contains_vertex(x) {
                return Err(NotInHost { vertex: v.clone(), host_vertex: x.clone() });
            }
        }
        if b.in_part.contains(&b.root) || b.out_part.contains(&b.root) {
            return Err(PartsOverlap { vertex: v.clone(), host_vertex: b.root.clone() });
        }
        if let Some(x) = b.in_part.intersection(&b.out_part).next() {
            return Err(PartsOverlap { vertex: v.clone(), host_vertex: x.clone() });
        }
        for e in &b.edges {
            if !verts.contains(&e.0) || !verts.contains(&e.1) || !g.has_edge(&e.0, &e.1) {
                return Err(BranchEdgeInvalid { vertex: v.clone(), edge: e.clone() });
            }
        }
        if b.edges.len() + 1 != verts.len() {
            return Err(NotATree { vertex: v.clone() });
        }
        if !is_arborescence(&b.root, &b.out_part, &b.edges, true) {
            return Err(NotOutArborescence { vertex: v.clone() });
        }
        if !is_arborescence(&b.root, &b.in_part, &b.edges, false) {
            return Err(NotInArborescence { vertex: v.clone() });
        }
        for x in verts {
            if let Some(w) = owner.insert(x.clone(), v.clone()) {
                return Err(ImagesOverlap { first: w, second: v.clone(), host_vertex: x });
            }
        }
    }
    for (e, img) in &mu.edge_map {
        if !g.has_edge(&img.0, &img.1) {
            return Err(EdgeImageNotInHost { edge: e.clone(), image: img.clone() });
        }
        let bx = &mu.vertex_map[&e.0];
        let by = &mu.vertex_map[&e.1];
        if !bx.tails().any(|t| *t == img.0) {
            return Err(BadEdgeTail { edge: e.clone(), image: img.clone() });
        }
        if !by.heads().any(|t| *t == img.1) {
            return Err(BadEdgeHead { edge: e.clone(), image: img.clone() });
        }
    }
    Ok(())
}

/// Checks that `mu` is a butterfly-minor model of `h` in `g`.
pub fn validate_model(h: &Digraph, g: &Digraph, mu: &ButterflyMinorModel) -> ModelReport {
    match check_model(h, g, mu) {
        Ok(()) => ModelReport { valid: true, witness: None },
        Err(w) => ModelReport { valid: false, witness: Some(w) },
    }
}

/// Repeatedly prunes arborescence leaves that carry no edge image and moves a
/// root that carries no image onto its only child.
pub fn minimize_model(h: &Digraph, g: &Digraph, mu: &ButterflyMinorModel) -> Result<ButterflyMinorModel, MinorError> {
    if let Err(w) = check_model(h, g, mu) {
        return Err(MinorError::PreconditionViolated(format!("model is invalid: {w:?}")));
    }
    let mut out = mu.clone();
    let mut used_tail: BTreeSet<VertexId> = BTreeSet::new();
    let mut used_head: BTreeSet<VertexId> = BTreeSet::new();
    for img in mu.edge_map.values() {
        used_tail.insert(img.0.clone());
        used_head.insert(img.1.clone());
    }
    for b in out.vertex_map.values_mut() {
        loop {
            let mut changed = false;
            let leaf_out: Option<VertexId> = b
                .out_part
                .iter()
                .find(|z| !used_tail.contains(*z) && !b.edges.iter().any(|(a, _)| a == *z))
                .cloned();
            if let Some(z) = leaf_out {
                b.out_part.remove(&z);
                b.edges.retain(|(_, y)| *y != z);
                changed = true;
            }
            let leaf_in: Option<VertexId> = b
                .in_part
                .iter()
                .find(|z| !used_head.contains(*z) && !b.edges.iter().any(|(_, y)| y == *z))
                .cloned();
            if let Some(z) = leaf_in {
                b.in_part.remove(&z);
                b.edges.retain(|(a, _)| *a != z);
                changed = true;
            }
            let r = b.root.clone();
            if !used_tail.contains(&r) && !used_head.contains(&r) {
                let outs: Vec<VertexId> = b.edges.iter().filter(|(a, _)| *a == r).map(|(_, y)| y.clone()).collect();
                let ins: Vec<VertexId> = b.edges.iter().filter(|(_, y)| *y == r).map(|(a, _)| a.clone()).collect();
                if b.in_part.is_empty() && outs.len() == 1 {
                    let c = outs[0].clone();
                    b.edges.remove(&(r.clone(), c.clone()));
                    b.out_part.remove(&c);
                    b.root = c;
                    changed = true;
                } else if b.out_part.is_empty() && ins.len() == 1 {
                    let c = ins[0].clone();
                    b.edges.remove(&(c.clone(), r.clone()));
                    b.in_part.remove(&c);
                    b.root = c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    debug_assert!(check_model(h, g, &out).is_ok());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_valid() {
        let g = Digraph::from_edges([("a", "b"), ("b", "c"), ("c", "a")]).unwrap();
        assert!(validate_model(&g, &g, &ButterflyMinorModel::identity(&g)).valid);
    }

    #[test]
    fn overlap_detected() {
        let h = Digraph::new(["x", "y"], Vec::<(&str, &str)>::new()).unwrap();
        let g = Digraph::new(["a"], Vec::<(&str, &str)>::new()).unwrap();
        let mut mu = ButterflyMinorModel::default();
        mu.vertex_map.insert("x".into(), BranchSet::singleton("a".into()));
        mu.vertex_map.insert("y".into(), BranchSet::singleton("a".into()));
        let r = validate_model(&h, &g, &mu);
        assert!(matches!(r.witness, Some(ModelViolation::ImagesOverlap { .. })));
    }

    #[test]
    fn dangling_leaf_pruned() {
        // Pattern: 2-cycle x <-> y. Host: a <-> b plus a -> c.
        let h = Digraph::from_edges([("x", "y"), ("y", "x")]).unwrap();
        let g = Digraph::from_edges([("a", "b"), ("b", "a"), ("a", "c")]).unwrap();
        let mut mu = ButterflyMinorModel::default();
        let mut bx = BranchSet::singleton("a".into());
        bx.out_part.insert("c".into());
        bx.edges.insert(("a".into(), "c".into()));
        mu.vertex_map.insert("x".into(), bx);
        mu.vertex_map.insert("y".into(), BranchSet::singleton("b".into()));
        mu.edge_map.insert(("x".into(), "y".into()), ("a".into(), "b".into()));
        mu.edge_map.insert(("y".into(), "x".into()), ("b".into(), "a".into()));
        assert!(validate_model(&h, &g, &mu).valid);
        let m = minimize_model(&h, &g, &mu).unwrap();
        assert!(validate_model(&h, &g, &m).valid);
        assert!(m.image_vertices().is_subset(&mu.image_vertices()));
        assert!(!m.image_vertices().contains(&VertexId::from("c")));
    }
}
