//! Exact butterfly-minor search and subgraph monomorphism.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::graph::{bit, bits, circumference, Digraph, MaskGraph, VertexId};
use crate::minor::{validate_model, BranchSet, ButterflyMinorModel};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Upper bound on the number of candidate branch sets the search will hold.
const TRIPLE_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(ButterflyMinorModel),
    NotContained,
    Indeterminate,
}

impl SearchOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            SearchOutcome::Found(_) => "Found",
            SearchOutcome::NotContained => "NotContained",
            SearchOutcome::Indeterminate => "Indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Triple {
    root: usize,
    in_mask: u128,
    out_mask: u128,
    all: u128,
    /// `{root} ∪ out`, the legal tails.
    tails: u128,
    /// `{root} ∪ in`, the legal heads.
    heads: u128,
    tail_reach: u128,
    head_reach: u128,
}

/// Every vertex set containing `root` in which each vertex reaches `root`
/// (or, with `forward`, is reached from it), with at most `max_extra`
/// vertices besides the root and within `allowed`.
fn rooted_sets(mg: &MaskGraph, root: usize, forward: bool, max_extra: usize, allowed: u128) -> Vec<u128> {
    let mut out = Vec::new();
    fn rec(
        mg: &MaskGraph,
        forward: bool,
        set: u128,
        excluded: u128,
        left: usize,
        allowed: u128,
        out: &mut Vec<u128>,
    ) {
        out.push(set);
        if left == 0 {
            return;
        }
        let adj = if forward { &mg.out } else { &mg.inn };
        let mut ext = 0u128;
        for v in bits(set) {
            ext |= adj[v];
        }
        ext &= allowed & !set & !excluded;
        let mut ex = excluded;
        for v in bits(ext) {
            rec(mg, forward, set | bit(v), ex, left - 1, allowed, out);
            ex |= bit(v);
        }
    }
    rec(mg, forward, bit(root), 0, max_extra, allowed, &mut out);
    out
}

fn nbr_union(adj: &[u128], m: u128) -> u128 {
    bits(m).fold(0, |acc, v| acc | adj[v])
}

/// Sinks of `G[set]` other than the root: forced leaves of any spanning
/// out-arborescence.
fn forced_leaves(adj: &[u128], set: u128, root: usize) -> u32 {
    bits(set & !bit(root)).filter(|&v| adj[v] & set == 0).count() as u32
}

struct Search<'a> {
    pattern: &'a Digraph,
    order: Vec<usize>,
    cands: Vec<Vec<Triple>>,
    placed: Vec<Option<Triple>>,
    expansions: u64,
    budget: u64,
    host_n: usize,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, used: u128) -> Option<bool> {
        if depth == self.order.len() {
            return Some(true);
        }
        let v = self.order[depth];
        let remaining = (self.order.len() - depth - 1) as u32;
        for ti in 0..self.cands[v].len() {
            let t = self.cands[v][ti];
            if t.all & used != 0 || (used | t.all).count_ones() + remaining > self.host_n as u32 {
                continue;
            }
            let ok = self.pattern.out_idx(v).iter().all(|&w| match &self.placed[w] {
                Some(tw) => t.tail_reach & tw.heads != 0,
                None => true,
            }) && self.pattern.in_idx(v).iter().all(|&w| match &self.placed[w] {
                Some(tw) => t.head_reach & tw.tails != 0,
                None => true,
            });
            if !ok {
                continue;
            }
            self.expansions += 1;
            if self.expansions > self.budget {
                return None;
            }
            self.placed[v] = Some(t);
            match self.run(depth + 1, used | t.all) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            self.placed[v] = None;
        }
        Some(false)
    }
}

/// Pattern vertices ordered by decreasing degree, then greedily by the number
/// of edges to already-ordered vertices.
fn search_order(h: &Digraph) -> Vec<usize> {
    let deg = |v: usize| h.out_idx(v).len() + h.in_idx(v).len();
    let mut order: Vec<usize> = Vec::new();
    let mut done = vec![false; h.n()];
    while order.len() < h.n() {
        let best = (0..h.n())
            .filter(|&v| !done[v])
            .max_by_key(|&v| {
                let links = h.out_idx(v).iter().chain(h.in_idx(v)).filter(|&&w| done[w]).count();
                (links, deg(v), std::cmp::Reverse(v))
            })
            .expect("unplaced vertex");
        done[best] = true;
        order.push(best);
    }
    order
}

fn tree_edges(mg: &MaskGraph, root: usize, part: u128, forward: bool) -> Vec<(usize, usize)> {
    let adj = if forward { &mg.out } else { &mg.inn };
    let within = part | bit(root);
    let mut seen = bit(root);
    let mut queue = VecDeque::from([root]);
    let mut es = Vec::new();
    while let Some(x) = queue.pop_front() {
        for y in bits(adj[x] & within & !seen) {
            seen |= bit(y);
            es.push(if forward { (x, y) } else { (y, x) });
            queue.push_back(y);
        }
    }
    es
}

/// Decides whether `h` is a butterfly minor of `g`, spending at most `budget`
/// successful placements of pattern vertices.
pub fn find_model(h: &Digraph, g: &Digraph, budget: u64) -> SearchOutcome {
    if h.n() == 0 {
        return SearchOutcome::Found(ButterflyMinorModel::default());
    }
    if h.n() > g.n() || h.m() > g.m() {
        return SearchOutcome::NotContained;
    }
    if circumference(h) > circumference(g) {
        return SearchOutcome::NotContained;
    }
    let Some(mg) = MaskGraph::new(g) else {
        return SearchOutcome::Indeterminate;
    };
    let free = g.n() - h.n();
    let full = mg.full();

    // Rooted in-sets and out-sets per host vertex, grouped into triples.
    let mut by_root: Vec<(Vec<u128>, Vec<u128>)> = Vec::with_capacity(g.n());
    let mut total = 0usize;
    for r in 0..g.n() {
        let ins = rooted_sets(&mg, r, false, free, full);
        let outs = rooted_sets(&mg, r, true, free, full);
        total += ins.len() * outs.len();
        if total > TRIPLE_LIMIT * 4 {
            return SearchOutcome::Indeterminate;
        }
        by_root.push((ins, outs));
    }
    let mut cands: Vec<Vec<Triple>> = vec![Vec::new(); h.n()];
    let mut count = 0usize;
    for v in 0..h.n() {
        let need_in = h.in_idx(v).len();
        let need_out = h.out_idx(v).len();
        for (r, (ins, outs)) in by_root.iter().enumerate() {
            for &is in ins {
                if need_in == 0 && is != bit(r) {
                    continue;
                }
                if forced_leaves(&mg.inn, is, r) as usize > need_in.max(1) && is != bit(r) {
                    continue;
                }
                let head_reach = nbr_union(&mg.inn, is);
                if (head_reach.count_ones() as usize) < need_in {
                    continue;
                }
                for &os in outs {
                    if os & is & !bit(r) != 0 {
                        continue;
                    }
                    if (is | os).count_ones() as usize > free + 1 {
                        continue;
                    }
                    if need_out == 0 && os != bit(r) {
                        continue;
                    }
                    if forced_leaves(&mg.out, os, r) as usize > need_out.max(1) && os != bit(r) {
                        continue;
                    }
                    let tail_reach = nbr_union(&mg.out, os);
                    if (tail_reach.count_ones() as usize) < need_out {
                        continue;
                    }
                    cands[v].push(Triple {
                        root: r,
                        in_mask: is & !bit(r),
                        out_mask: os & !bit(r),
                        all: is | os,
                        tails: os,
                        heads: is,
                        tail_reach,
                        head_reach,
                    });
                    count += 1;
                    if count > TRIPLE_LIMIT {
                        return SearchOutcome::Indeterminate;
                    }
                }
            }
        }
        cands[v].sort_by_key(|t| (t.all.count_ones(), t.root));
    }

    let mut s = Search {
        pattern: h,
        order: search_order(h),
        cands,
        placed: vec![None; h.n()],
        expansions: 0,
        budget,
        host_n: g.n(),
    };
    match s.run(0, 0) {
        None => SearchOutcome::Indeterminate,
        Some(false) => SearchOutcome::NotContained,
        Some(true) => {
            let placed: Vec<Triple> = s.placed.into_iter().map(|t| t.expect("complete assignment")).collect();
            let mu = model_from_triples(h, g, &mg, &placed);
            debug_assert!(validate_model(h, g, &mu).valid);
            SearchOutcome::Found(mu)
        }
    }
}

fn model_from_triples(h: &Digraph, g: &Digraph, mg: &MaskGraph, placed: &[Triple]) -> ButterflyMinorModel {
    let mut mu = ButterflyMinorModel::default();
    for (v, t) in placed.iter().enumerate() {
        let ids = |m: u128| bits(m).map(|i| g.id(i).clone()).collect::<BTreeSet<VertexId>>();
        let mut edges = BTreeSet::new();
        for (a, b) in tree_edges(mg, t.root, t.out_mask, true).into_iter().chain(tree_edges(mg, t.root, t.in_mask, false)) {
            edges.insert((g.id(a).clone(), g.id(b).clone()));
        }
        mu.vertex_map.insert(
            h.id(v).clone(),
            BranchSet { root: g.id(t.root).clone(), in_part: ids(t.in_mask), out_part: ids(t.out_mask), edges },
        );
    }
    for (x, y) in h.edge_indices() {
        let (tx, ty) = (&placed[x], &placed[y]);
        let img = bits(tx.tails)
            .find_map(|a| bits(mg.out[a] & ty.heads).next().map(|b| (a, b)))
            .expect("adjacent placements");
        mu.edge_map.insert((h.id(x).clone(), h.id(y).clone()), (g.id(img.0).clone(), g.id(img.1).clone()));
    }
    mu
}

/// An injective map from pattern vertices to host vertices carrying every
/// pattern edge onto a host edge, if one exists within `budget` extensions.
pub fn subgraph_monomorphism(
    pattern: &Digraph,
    host: &Digraph,
    budget: u64,
) -> Result<Option<BTreeMap<VertexId, VertexId>>, ()> {
    if pattern.n() > host.n() {
        return Ok(None);
    }
    let order = search_order(pattern);
    let mut map: Vec<Option<usize>> = vec![None; pattern.n()];
    let mut used = vec![false; host.n()];
    let mut spent = 0u64;
    fn rec(
        p: &Digraph,
        g: &Digraph,
        order: &[usize],
        depth: usize,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        spent: &mut u64,
        budget: u64,
    ) -> Result<bool, ()> {
        if depth == order.len() {
            return Ok(true);
        }
        let v = order[depth];
        for x in 0..g.n() {
            if used[x] || g.out_idx(x).len() < p.out_idx(v).len() || g.in_idx(x).len() < p.in_idx(v).len() {
                continue;
            }
            let fits = p.out_idx(v).iter().all(|&w| map[w].map_or(true, |y| g.has_edge_idx(x, y)))
                && p.in_idx(v).iter().all(|&w| map[w].map_or(true, |y| g.has_edge_idx(y, x)));
            if !fits {
                continue;
            }
            *spent += 1;
            if *spent > budget {
                return Err(());
            }
            map[v] = Some(x);
            used[x] = true;
            if rec(p, g, order, depth + 1, map, used, spent, budget)? {
                return Ok(true);
            }
            map[v] = None;
            used[x] = false;
        }
        Ok(false)
    }
    if rec(pattern, host, &order, 0, &mut map, &mut used, &mut spent, budget)? {
        Ok(Some(
            map.iter()
                .enumerate()
                .map(|(v, x)| (pattern.id(v).clone(), host.id(x.expect("mapped")).clone()))
                .collect(),
        ))
    } else {
        Ok(None)
    }
}
