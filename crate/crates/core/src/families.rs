//! Generators for ladders, cycle chains, tree chains, cylindrical grids and
//! relaxed tree chains built from recipes.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{MixedChain, RelaxedChain};
use crate::decomposition::{ChainDecomposition, ChainNode};
use crate::graph::{Digraph, Edge, Path, TwoTerminalDigraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("order must be at least {min}, got {got}")]
    OrderTooSmall { min: usize, got: usize },
    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),
    #[error("generated graph exceeds the size budget of {0} vertices")]
    BudgetExceeded(usize),
}

fn vid(s: String) -> VertexId {
    VertexId::from(s)
}

fn build(vs: Vec<VertexId>, es: Vec<Edge>) -> Digraph {
    Digraph::new(vs, es).expect("generated digraphs are simple")
}

/// Ladder of order `k`: paths `p1..pk`, `q1..qk` and rungs `p_i <-> q_{k+1-i}`.
pub fn ladder(k: usize) -> Result<Digraph, FamilyError> {
    if k == 0 {
        return Err(FamilyError::OrderTooSmall { min: 1, got: 0 });
    }
    let p = |i: usize| vid(format!("p{i}"));
    let q = |i: usize| vid(format!("q{i}"));
    let mut vs = Vec::new();
    let mut es = Vec::new();
    for i in 1..=k {
        vs.push(p(i));
        vs.push(q(i));
        if i < k {
            es.push((p(i), p(i + 1)));
            es.push((q(i), q(i + 1)));
        }
        es.push((p(i), q(k + 1 - i)));
        es.push((q(k + 1 - i), p(i)));
    }
    Ok(build(vs, es))
}

/// Cycle chain of order `k`: the path `v1..vk` with every edge doubled into a
/// 2-cycle; terminals `v1` and `vk`.
pub fn cycle_chain(k: usize) -> Result<TwoTerminalDigraph, FamilyError> {
    if k == 0 {
        return Err(FamilyError::OrderTooSmall { min: 1, got: 0 });
    }
    let v = |i: usize| vid(format!("v{i}"));
    let vs: Vec<_> = (1..=k).map(v).collect();
    let es: Vec<_> = (1..k).flat_map(|i| [(v(i), v(i + 1)), (v(i + 1), v(i))]).collect();
    Ok(TwoTerminalDigraph { graph: build(vs, es), s: v(1), t: v(k) })
}

/// Tree chain of order `k` with `2^k` vertices named `c` followed by the
/// copy address, e.g. `c1211`. Terminals are `c11..1` and `c22..2`.
pub fn tree_chain(k: usize) -> Result<TwoTerminalDigraph, FamilyError> {
    if k > 20 {
        return Err(FamilyError::InvalidRecipe("tree chain order above 20".into()));
    }
    let recipe = TreeChainRecipe::uniform(k, 1);
    let (g, _) = assemble(&recipe, "c", "");
    Ok(g)
}

/// Cylindrical grid of order `k`: cycles `v{i}_1 .. v{i}_{2k}` for rows
/// `i = 1..k`; odd columns point outward (increasing row), even columns inward.
pub fn cylindrical_grid(k: usize) -> Result<Digraph, FamilyError> {
    if k == 0 {
        return Err(FamilyError::OrderTooSmall { min: 1, got: 0 });
    }
    let mut vs = Vec::new();
    let mut es = Vec::new();
    for i in 1..=k {
        for j in 1..=2 * k {
            vs.push(grid_vertex(i, j));
            let nj = if j == 2 * k { 1 } else { j + 1 };
            if nj != j {
                es.push((grid_vertex(i, j), grid_vertex(i, nj)));
            }
            if i < k {
                if j % 2 == 1 {
                    es.push((grid_vertex(i, j), grid_vertex(i + 1, j)));
                } else {
                    es.push((grid_vertex(i + 1, j), grid_vertex(i, j)));
                }
            }
        }
    }
    Ok(build(vs, es))
}

pub fn grid_vertex(row: usize, col: usize) -> VertexId {
    vid(format!("v{row}_{col}"))
}

/// Parameters of a relaxed tree chain: a complete binary tree of the given
/// depth whose internal nodes carry values `a >= 1`, stored in heap order
/// (root first, children of node `h` at `2h` and `2h + 1`, 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeChainRecipe {
    pub depth: usize,
    pub values: Vec<u32>,
}

impl TreeChainRecipe {
    pub fn new(depth: usize, values: Vec<u32>) -> Result<Self, FamilyError> {
        if depth > 20 {
            return Err(FamilyError::InvalidRecipe("depth above 20".into()));
        }
        if values.len() != (1usize << depth) - 1 {
            return Err(FamilyError::InvalidRecipe(format!(
                "depth {depth} needs {} values, got {}",
                (1usize << depth) - 1,
                values.len()
            )));
        }
        if values.iter().any(|&a| a == 0) {
            return Err(FamilyError::InvalidRecipe("values must be at least 1".into()));
        }
        Ok(TreeChainRecipe { depth, values })
    }

    pub fn uniform(depth: usize, a: u32) -> Self {
        TreeChainRecipe { depth, values: vec![a; (1usize << depth) - 1] }
    }

    pub fn random(depth: usize, max_a: u32, rng: &mut impl Rng) -> Self {
        let values = (0..(1usize << depth) - 1).map(|_| rng.gen_range(1..=max_a.max(1))).collect();
        TreeChainRecipe { depth, values }
    }

    /// Value at the internal node reached from the root by `address`
    /// (`'1'` = left, `'2'` = right).
    pub fn value_at(&self, address: &str) -> Option<u32> {
        if address.len() >= self.depth {
            return None;
        }
        let mut h = 1usize;
        for c in address.chars() {
            h = 2 * h + usize::from(c == '2');
        }
        self.values.get(h - 1).copied()
    }

    /// The sub-recipe rooted at `address`.
    pub fn subrecipe(&self, address: &str) -> TreeChainRecipe {
        let depth = self.depth - address.len();
        let mut values = Vec::with_capacity((1usize << depth) - 1);
        let mut level = vec![address.to_string()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for a in &level {
                values.push(self.value_at(a).expect("internal node"));
                next.push(format!("{a}1"));
                next.push(format!("{a}2"));
            }
            level = next;
        }
        TreeChainRecipe { depth, values }
    }
}

/// One node of a generated relaxed tree chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeNode {
    pub address: String,
    /// Recipe value; 0 marks a leaf.
    pub a: u32,
    pub s: VertexId,
    pub t: VertexId,
    /// Cycle chain vertices inserted at this node, from `v` to `w`; empty when `a <= 1`.
    pub glue: Vec<VertexId>,
    pub vertices: BTreeSet<VertexId>,
}

/// Addresses of every node of a generated relaxed tree chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeTrace {
    pub nodes: BTreeMap<String, RecipeNode>,
}

fn assemble(recipe: &TreeChainRecipe, leaf_prefix: &str, glue_prefix: &str) -> (TwoTerminalDigraph, RecipeTrace) {
    let mut es = Vec::new();
    let mut nodes = BTreeMap::new();
    fn rec(
        recipe: &TreeChainRecipe,
        addr: String,
        leaf_prefix: &str,
        glue_prefix: &str,
        es: &mut Vec<Edge>,
        nodes: &mut BTreeMap<String, RecipeNode>,
    ) -> (VertexId, VertexId, BTreeSet<VertexId>) {
        if addr.len() == recipe.depth {
            let v = vid(format!("{leaf_prefix}{addr}"));
            let vs = BTreeSet::from([v.clone()]);
            nodes.insert(
                addr.clone(),
                RecipeNode { address: addr, a: 0, s: v.clone(), t: v.clone(), glue: vec![], vertices: vs.clone() },
            );
            return (v.clone(), v, vs);
        }
        let a = recipe.value_at(&addr).expect("internal node");
        let (s1, t1, mut vs) = rec(recipe, format!("{addr}1"), leaf_prefix, glue_prefix, es, nodes);
        let (s2, t2, vs2) = rec(recipe, format!("{addr}2"), leaf_prefix, glue_prefix, es, nodes);
        vs.extend(vs2);
        let mut glue = Vec::new();
        if a == 1 {
            es.push((s1.clone(), t2.clone()));
            es.push((s2.clone(), t1.clone()));
        } else {
            glue = (1..a).map(|i| vid(format!("{glue_prefix}g{addr}_{i}"))).collect();
            for w in glue.windows(2) {
                es.push((w[0].clone(), w[1].clone()));
                es.push((w[1].clone(), w[0].clone()));
            }
            let (v, w) = (glue[0].clone(), glue[glue.len() - 1].clone());
            es.push((s1.clone(), v.clone()));
            es.push((v, t1.clone()));
            es.push((s2.clone(), w.clone()));
            es.push((w, t2.clone()));
            vs.extend(glue.iter().cloned());
        }
        nodes.insert(
            addr.clone(),
            RecipeNode { address: addr, a, s: s1.clone(), t: t2.clone(), glue, vertices: vs.clone() },
        );
        (s1, t2, vs)
    }
    let (s, t, vs) = rec(recipe, String::new(), leaf_prefix, glue_prefix, &mut es, &mut nodes);
    let g = build(vs.into_iter().collect(), es);
    (TwoTerminalDigraph { graph: g, s, t }, RecipeTrace { nodes })
}

/// Relaxed tree chain described by `recipe`. Leaves are named `f` + address,
/// glue cycle chain vertices `g` + address + `_i`.
pub fn relaxed_tree_chain(recipe: &TreeChainRecipe) -> Result<(TwoTerminalDigraph, RecipeTrace), FamilyError> {
    let recipe = TreeChainRecipe::new(recipe.depth, recipe.values.clone())?;
    Ok(assemble(&recipe, "f", ""))
}

/// How `gen_m` picks the two terminals of an internal node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TerminalPolicy {
    /// Out-terminal from the left child, in-terminal from the right child.
    #[default]
    Straight,
    /// Two distinct vertices drawn uniformly from the node's digraph.
    Random,
}

struct MBuilder<'a, R: Rng> {
    rng: &'a mut R,
    policy: TerminalPolicy,
    nodes: Vec<ChainNode>,
    budget: usize,
    used: usize,
}

impl<R: Rng> MBuilder<'_, R> {
    fn fresh(&mut self, name: String) -> Result<VertexId, FamilyError> {
        self.used += 1;
        if self.used > self.budget {
            return Err(FamilyError::BudgetExceeded(self.budget));
        }
        Ok(vid(name))
    }

    /// A path from `a` to `b` with zero or one fresh internal vertex.
    fn path(&mut self, a: &VertexId, b: &VertexId, name: String) -> Result<Path, FamilyError> {
        let mut vs = vec![a.clone()];
        if self.rng.gen_bool(0.5) {
            vs.push(self.fresh(name)?);
        }
        vs.push(b.clone());
        Ok(Path::new(vs).expect("distinct vertices"))
    }

    fn leaf(&mut self, addr: &str) -> Result<(usize, VertexId, VertexId), FamilyError> {
        let n = self.rng.gen_range(2..=4);
        let vs = (0..n).map(|i| self.fresh(format!("l{addr}_{i}"))).collect::<Result<Vec<_>, _>>()?;
        let mut es: BTreeSet<Edge> = (0..n).map(|i| (vs[i].clone(), vs[(i + 1) % n].clone())).collect();
        for _ in 0..self.rng.gen_range(0..=n) {
            let (a, b) = (self.rng.gen_range(0..n), self.rng.gen_range(0..n));
            if a != b {
                es.insert((vs[a].clone(), vs[b].clone()));
            }
        }
        let a = self.rng.gen_range(0..n);
        let b = (a + self.rng.gen_range(1..n)) % n;
        let (v, w) = (vs[a].clone(), vs[b].clone());
        self.nodes.push(ChainNode::leaf(build(vs, es.into_iter().collect())));
        Ok((self.nodes.len() - 1, v, w))
    }

    fn node(&mut self, k: usize, addr: &str) -> Result<(usize, VertexId, VertexId), FamilyError> {
        if k == 1 {
            return self.leaf(addr);
        }
        let slot = self.nodes.len();
        self.nodes.push(ChainNode::leaf(Digraph::empty()));
        let (c1, v1, w1) = self.node(k - 1, &format!("{addr}1"))?;
        let (c2, v2, w2) = self.node(k - 1, &format!("{addr}2"))?;
        let len = self.rng.gen_range(0..=2usize);
        let mut ps = vec![v1.clone()];
        let mut qs = vec![w1.clone()];
        for i in 1..=len {
            ps.push(self.fresh(format!("h{addr}_p{i}"))?);
            qs.push(self.fresh(format!("h{addr}_q{i}"))?);
        }
        if len % 2 == 1 {
            ps.push(v2.clone());
            qs.push(w2.clone());
        } else {
            ps.push(w2.clone());
            qs.push(v2.clone());
        }
        let mut chain = RelaxedChain { p_paths: vec![], q_paths: vec![], r_paths: vec![], p_junctions: ps.clone(), q_junctions: qs.clone() };
        for i in 1..=len + 1 {
            let (a, b) = if i % 2 == 1 { (&ps[i - 1], &ps[i]) } else { (&ps[i], &ps[i - 1]) };
            chain.p_paths.push(self.path(a, b, format!("h{addr}_pp{i}"))?);
            let (a, b) = if i % 2 == 1 { (&qs[i], &qs[i - 1]) } else { (&qs[i - 1], &qs[i]) };
            chain.q_paths.push(self.path(a, b, format!("h{addr}_qq{i}"))?);
        }
        for i in 1..=len {
            let (a, b) = if i % 2 == 1 { (&ps[i], &qs[i]) } else { (&qs[i], &ps[i]) };
            chain.r_paths.push(self.path(a, b, format!("h{addr}_r{i}"))?);
        }
        let link = MixedChain::from_relaxed_chain(&chain);
        let graph = self.nodes[c1].graph.union(&self.nodes[c2].graph).union(&link.subgraph());
        let (v, w) = match self.policy {
            TerminalPolicy::Straight => (v1, w2),
            TerminalPolicy::Random => {
                let n = graph.n();
                let a = self.rng.gen_range(0..n);
                let b = (a + self.rng.gen_range(1..n)) % n;
                (graph.id(a).clone(), graph.id(b).clone())
            }
        };
        self.nodes[slot] = ChainNode { graph, children: Some([c1, c2]), link: Some(link) };
        Ok((slot, v, w))
    }
}

/// A digraph with a chain decomposition of full height `k`: seeded random
/// strongly connected leaves joined pairwise by straight relaxed chains of
/// length 0 to 2. Fails when more than `size_budget` vertices are needed.
pub fn gen_m(k: usize, seed: u64, size_budget: usize) -> Result<(Digraph, ChainDecomposition), FamilyError> {
    gen_m_with_policy(k, seed, size_budget, TerminalPolicy::Straight)
}

pub fn gen_m_with_policy(
    k: usize,
    seed: u64,
    size_budget: usize,
    policy: TerminalPolicy,
) -> Result<(Digraph, ChainDecomposition), FamilyError> {
    if k == 0 {
        return Err(FamilyError::OrderTooSmall { min: 1, got: 0 });
    }
    if k > 24 {
        return Err(FamilyError::BudgetExceeded(size_budget));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = MBuilder { rng: &mut rng, policy, nodes: vec![], budget: size_budget, used: 0 };
    b.node(k, "")?;
    let cd = ChainDecomposition::new(b.nodes);
    Ok((cd.root_graph().clone(), cd))
}

/// The tree chain of order `k` with its natural chain decomposition: each
/// internal node joins its two copies by the length-0 chain made of the
/// edges `s¹ → t²` and `s² → t¹`.
pub fn tree_chain_decomposition(k: usize) -> Result<(TwoTerminalDigraph, ChainDecomposition), FamilyError> {
    let tc = tree_chain(k)?;
    let mut nodes = Vec::new();
    fn rec(tc: &Digraph, k: usize, addr: String, nodes: &mut Vec<ChainNode>) -> (usize, VertexId, VertexId) {
        let own: Vec<VertexId> =
            tc.vertices().iter().filter(|v| v.as_str()[1..].starts_with(&addr)).cloned().collect();
        let graph = tc.induced(&own);
        let slot = nodes.len();
        nodes.push(ChainNode::leaf(graph));
        if addr.len() == k {
            let v = vid(format!("c{addr}"));
            return (slot, v.clone(), v);
        }
        let (c1, s1, t1) = rec(tc, k, format!("{addr}1"), nodes);
        let (c2, s2, t2) = rec(tc, k, format!("{addr}2"), nodes);
        let chain = RelaxedChain {
            p_paths: vec![Path::new(vec![s1.clone(), t2.clone()]).expect("edge")],
            q_paths: vec![Path::new(vec![s2.clone(), t1.clone()]).expect("edge")],
            r_paths: vec![],
            p_junctions: vec![s1.clone(), t2.clone()],
            q_junctions: vec![t1, s2],
        };
        nodes[slot].children = Some([c1, c2]);
        nodes[slot].link = Some(MixedChain::from_relaxed_chain(&chain));
        (slot, s1, t2)
    }
    rec(&tc.graph, k, String::new(), &mut nodes);
    Ok((tc, ChainDecomposition::new(nodes)))
}
