//! Independent reference implementations used as test oracles. They favour
//! obviousness over speed and share no code with the library beyond the
//! `Digraph` container.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use crank::chains::{EndpointPair, MixedChain, RelaxedLadder};
use crank::graph::{butterfly_contract, is_butterfly_contractible, scc};
use crank::{Digraph, Path, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random digraph on `n` vertices `x0..`, each ordered pair an edge with probability `p`.
pub fn random_digraph(rng: &mut impl Rng, n: usize, p: f64) -> Digraph {
    let vs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut es = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(p) {
                es.push((vs[a].clone(), vs[b].clone()));
            }
        }
    }
    Digraph::new(vs, es).unwrap()
}

/// Digraph on `x0..x{n-1}` whose edges are the set bits of `mask` over the
/// ordered pairs `(a, b)`, `a != b`, in row-major order.
pub fn digraph_from_mask(n: usize, mask: u64) -> Digraph {
    let vs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut es = Vec::new();
    let mut bit = 0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                if mask >> bit & 1 == 1 {
                    es.push((vs[a].clone(), vs[b].clone()));
                }
                bit += 1;
            }
        }
    }
    Digraph::new(vs, es).unwrap()
}

/// Cycle rank straight from the recursive definition, without memoisation.
pub fn naive_cycle_rank(g: &Digraph) -> usize {
    let comps = scc(g);
    if comps.len() != 1 {
        return comps.iter().map(|c| naive_cycle_rank(&g.induced(c))).max().unwrap_or(0);
    }
    if g.n() == 1 {
        return 0;
    }
    1 + g.vertices().iter().map(|v| naive_cycle_rank(&g.remove_vertices([v]))).min().unwrap()
}

fn reachable_within(g: &Digraph, from: usize, allowed: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(x) = stack.pop() {
        for &y in g.out_idx(x) {
            if allowed[y] && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

/// Weak infinite coloring number of one ordering, given as vertex indices
/// least first: `w` counts for `v` when `w` is not after `v` and `v`
/// reaches `w` through vertices none of which precede `w`.
pub fn wcol_inf_of_order(g: &Digraph, order: &[usize]) -> usize {
    let mut pos = vec![0; g.n()];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    (0..g.n())
        .map(|v| {
            (0..g.n())
                .filter(|&w| {
                    if pos[w] > pos[v] {
                        return false;
                    }
                    let allowed: Vec<bool> = (0..g.n()).map(|u| pos[u] >= pos[w]).collect();
                    reachable_within(g, v, &allowed)[w]
                })
                .count()
        })
        .max()
        .unwrap_or(0)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum over all orderings.
pub fn brute_wcol_inf(g: &Digraph) -> usize {
    permutations(g.n()).iter().map(|o| wcol_inf_of_order(g, o)).min().unwrap_or(0)
}

/// Every simple directed cycle, as vertex index lists starting at their least vertex.
pub fn all_cycles(g: &Digraph) -> Vec<Vec<usize>> {
    fn dfs(g: &Digraph, s: usize, path: &mut Vec<usize>, on: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let x = *path.last().unwrap();
        for &y in g.out_idx(x) {
            if y == s {
                out.push(path.clone());
            } else if y > s && !on[y] {
                on[y] = true;
                path.push(y);
                dfs(g, s, path, on, out);
                path.pop();
                on[y] = false;
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..g.n() {
        let mut on = vec![false; g.n()];
        on[s] = true;
        dfs(g, s, &mut vec![s], &mut on, &mut out);
    }
    out
}

/// Whether every cycle of `g` that meets both `y` and its complement meets `x`.
pub fn guards_by_cycles(g: &Digraph, x: &BTreeSet<VertexId>, y: &BTreeSet<VertexId>) -> bool {
    all_cycles(g).iter().all(|c| {
        let ids: Vec<&VertexId> = c.iter().map(|&i| g.id(i)).collect();
        let inside = ids.iter().any(|v| y.contains(*v));
        let outside = ids.iter().any(|v| !y.contains(*v));
        !(inside && outside) || ids.iter().any(|v| x.contains(*v))
    })
}

pub fn isomorphic(a: &Digraph, b: &Digraph) -> bool {
    if a.n() != b.n() || a.m() != b.m() {
        return false;
    }
    permutations(a.n()).iter().any(|p| a.edge_indices().all(|(x, y)| b.has_edge_idx(p[x], p[y])))
}

fn key(g: &Digraph) -> (Vec<VertexId>, Vec<(VertexId, VertexId)>) {
    (g.vertices().to_vec(), g.edges())
}

/// Whether `h` is a butterfly minor of `g`, by exploring every digraph
/// reachable through vertex deletions, edge deletions and butterfly
/// contractions. Only for very small hosts.
pub fn brute_is_minor(h: &Digraph, g: &Digraph) -> bool {
    let mut seen = HashSet::new();
    let mut stack = vec![g.clone()];
    seen.insert(key(g));
    while let Some(cur) = stack.pop() {
        if cur.n() == h.n() && cur.m() == h.m() && isomorphic(h, &cur) {
            return true;
        }
        if cur.n() < h.n() || cur.m() < h.m() {
            continue;
        }
        let mut next = Vec::new();
        for v in cur.vertices() {
            next.push(cur.remove_vertices([v]));
        }
        for e in cur.edges() {
            next.push(cur.remove_edges([&e]));
            if is_butterfly_contractible(&cur, &e.0, &e.1) {
                next.push(butterfly_contract(&cur, &e.0, &e.1).unwrap());
            }
        }
        for n in next {
            if n.n() >= h.n() && n.m() >= h.m() && seen.insert(key(&n)) {
                stack.push(n);
            }
        }
    }
    false
}

/// Laced by definition: the maximal common subpaths taken along `p` appear
/// in strictly decreasing order of first position along `q`.
pub fn laced_oracle(p: &Path, q: &Path) -> bool {
    let qe: BTreeSet<_> = q.edge_list().into_iter().collect();
    let mut starts = Vec::new();
    let pv = p.vertices();
    let mut i = 0;
    while i < pv.len() {
        if q.contains(&pv[i]) {
            starts.push(q.position(&pv[i]).unwrap());
            while i + 1 < pv.len() && qe.contains(&(pv[i].clone(), pv[i + 1].clone())) {
                i += 1;
            }
        }
        i += 1;
    }
    starts.windows(2).all(|w| w[0] > w[1])
}

/// Two paths of 2 to 8 distinct vertices drawn from a shared pool of `pool`.
pub fn random_path_pair(rng: &mut impl Rng, pool: usize) -> (Path, Path) {
    let mut one = || {
        let mut ids: Vec<usize> = (0..pool).collect();
        ids.shuffle(rng);
        let len = rng.gen_range(2..=8.min(pool));
        Path::new(ids[..len].iter().map(|i| VertexId::from(format!("u{i}"))).collect()).unwrap()
    };
    (one(), one())
}

/// Hands out vertex names that were never used before.
pub struct Fresh(usize);

impl Fresh {
    pub fn new() -> Self {
        Fresh(0)
    }

    pub fn next(&mut self) -> VertexId {
        self.0 += 1;
        VertexId::from(format!("n{}", self.0))
    }

    fn many(&mut self, k: usize) -> Vec<VertexId> {
        (0..k).map(|_| self.next()).collect()
    }
}

fn path_of(vs: Vec<VertexId>) -> Path {
    Path::new(vs).unwrap()
}

/// Relaxed ladder of order `m` between the given endpoint pairs. Segments
/// have one to three edges, padding appears at random, and each rung picks
/// its ends anywhere inside its two segments.
pub fn relaxed_ladder_fixture(
    rng: &mut impl Rng,
    fresh: &mut Fresh,
    left: EndpointPair,
    right: EndpointPair,
    m: usize,
) -> RelaxedLadder {
    let segment = |rng: &mut dyn rand::RngCore, fresh: &mut Fresh| fresh.many(rng.gen_range(2..=4));
    let mut pv = vec![left.0.clone()];
    let mut p_segs = Vec::new();
    for _ in 0..m {
        if rng.gen_bool(0.3) {
            pv.push(fresh.next());
        }
        let s = segment(rng, fresh);
        pv.extend(s.iter().cloned());
        p_segs.push(s);
    }
    if rng.gen_bool(0.3) || m == 0 && rng.gen_bool(0.5) {
        pv.push(fresh.next());
    }
    pv.push(right.0.clone());
    // Along Q the segment of rung m comes first.
    let mut qv = vec![right.1.clone()];
    let mut q_segs = vec![Vec::new(); m];
    for i in (0..m).rev() {
        if rng.gen_bool(0.3) {
            qv.push(fresh.next());
        }
        let s = segment(rng, fresh);
        qv.extend(s.iter().cloned());
        q_segs[i] = s;
    }
    if rng.gen_bool(0.3) {
        qv.push(fresh.next());
    }
    qv.push(left.1.clone());
    let mut rung = |rng: &mut dyn rand::RngCore, from: &[VertexId], to: &[VertexId]| {
        let mut vs = vec![from.choose(rng).unwrap().clone()];
        vs.extend(fresh.many(rng.gen_range(0..=1)));
        vs.push(to.choose(rng).unwrap().clone());
        path_of(vs)
    };
    let x_rungs: Vec<Path> = (0..m).map(|i| rung(rng, &p_segs[i], &q_segs[i])).collect();
    let y_rungs: Vec<Path> = (0..m).map(|i| rung(rng, &q_segs[i], &p_segs[i])).collect();
    RelaxedLadder {
        left,
        right,
        p_path: path_of(pv),
        q_path: path_of(qv),
        p_segments: p_segs.into_iter().map(path_of).collect(),
        q_segments: q_segs.into_iter().rev().map(path_of).collect(),
        x_rungs,
        y_rungs,
    }
}

/// Mixed chain of the given length whose ladders have the given orders,
/// together with a host made of its paths plus a few stray edges.
pub fn mixed_chain_fixture(rng: &mut impl Rng, length: usize, orders: &[usize]) -> (Digraph, MixedChain) {
    assert_eq!(orders.len(), length + 1);
    let mut fresh = Fresh::new();
    let ps = fresh.many(length + 2);
    let qs = fresh.many(length + 2);
    let mut ladders = Vec::new();
    for i in 1..=length + 1 {
        let prev = (ps[i - 1].clone(), qs[i - 1].clone());
        let cur = (ps[i].clone(), qs[i].clone());
        let (l, r) = if i % 2 == 1 { (prev, cur) } else { (cur, prev) };
        ladders.push(relaxed_ladder_fixture(rng, &mut fresh, l, r, orders[i - 1]));
    }
    let r_paths: Vec<Path> = (1..=length)
        .map(|i| {
            let (t, h) = if i % 2 == 1 { (&ps[i], &qs[i]) } else { (&qs[i], &ps[i]) };
            let mut vs = vec![t.clone()];
            vs.extend(fresh.many(rng.gen_range(0..=2)));
            vs.push(h.clone());
            path_of(vs)
        })
        .collect();
    let h = MixedChain::new(ladders, r_paths, ps, qs);
    let base = h.subgraph();
    let mut edges = base.edges();
    for _ in 0..rng.gen_range(0..=3) {
        let a = base.vertices().choose(rng).unwrap().clone();
        let b = base.vertices().choose(rng).unwrap().clone();
        if a != b {
            edges.push((a, b));
        }
    }
    (Digraph::new(base.vertices().to_vec(), edges).unwrap(), h)
}
