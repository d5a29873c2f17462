//! Acceptance suite. Runs every headline criterion at its stated tolerance
//! and time limit, printing one PASS/FAIL line per criterion. Exits non-zero
//! when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{
    all_cycles, brute_wcol_inf, digraph_from_mask, laced_oracle, mixed_chain_fixture, naive_cycle_rank,
    random_digraph, random_path_pair, rng, wcol_inf_of_order,
};
use crank::chains::StructureDescriptor;
use crank::coloring::{coloring_number, decomposition_from_ordering, ordering_from_decomposition, LinearOrdering};
use crank::coloring::{Radius, ReachMode};
use crank::cycle_rank::{cycle_rank, validate_cr_decomposition};
use crank::decomposition::{brute_force_dtd, cycle_member, erdos_posa, pattern_member, validate_dtd, PackingOrCover};
use crank::extract::{chain_or_ladder_from_mixed_chain, extract_from_grid, tc_from_relaxed_tree_chain, GridTarget};
use crank::extract::MixedOutcome;
use crank::families::{cycle_chain, cylindrical_grid, ladder, tree_chain, TreeChainRecipe};
use crank::graph::{butterfly_contract, circumference, is_butterfly_contractible};
use crank::laced::{is_laced, untangle, untangle_keep_intersection};
use crank::minor::validate_model;
use crank::search::{find_model, SearchOutcome, DEFAULT_BUDGET};
use crank::{Digraph, Path, VertexId};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rank(g: &Digraph) -> Result<usize, String> {
    let cr = cycle_rank(g).map_err(|e| e.to_string())?;
    let v = validate_cr_decomposition(g, &cr.decomposition);
    ensure!(v.valid && v.height == cr.rank + 1, "certificate rejected: {:?}", v.witness);
    Ok(cr.rank)
}

fn cycle_chain_rank() -> Outcome {
    for k in 1..=16usize {
        let r = rank(&cycle_chain(k).unwrap().graph)?;
        ensure!(r == k.ilog2() as usize, "k={k}: rank {r}, expected {}", k.ilog2());
    }
    Ok("16 orders exact".into())
}

fn ladder_rank() -> Outcome {
    let mut vals = Vec::new();
    for k in 1..=8usize {
        let g = ladder(k).unwrap();
        let r = rank(&g)?;
        ensure!(r >= k.ilog2() as usize + 1, "k={k}: rank {r} below bound");
        if k <= 5 {
            let o = naive_cycle_rank(&g);
            ensure!(r == o, "k={k}: solver {r}, oracle {o}");
        }
        vals.push(r);
    }
    Ok(format!("ranks {vals:?}"))
}

fn tree_chain_rank() -> Outcome {
    let mut vals = Vec::new();
    for k in 1..=3usize {
        let r = rank(&tree_chain(k).unwrap().graph)?;
        ensure!(r >= k, "k={k}: rank {r} below {k}");
        ensure!(k != 1 || r == 1, "order 1 has rank {r}");
        vals.push(r);
    }
    Ok(format!("ranks {vals:?}"))
}

fn wcol_equals_rank_plus_one() -> Outcome {
    for mask in 0..4096u64 {
        let g = digraph_from_mask(4, mask);
        let (w, r) = (brute_wcol_inf(&g), rank(&g)?);
        ensure!(w == r + 1, "mask {mask}: wcol {w}, rank {r}");
    }
    let mut rg = rng(101);
    for i in 0..100 {
        let p = rg.gen_range(0.2..0.6);
        let g = random_digraph(&mut rg, 1 + i % 7, p);
        let (w, r) = (brute_wcol_inf(&g), rank(&g)?);
        ensure!(w == r + 1, "{g:?}: wcol {w}, rank {r}");
    }
    Ok("4096 exhaustive + 100 random".into())
}

fn constructive_directions() -> Outcome {
    let mut rg = rng(102);
    for i in 0..100 {
        let p = rg.gen_range(0.2..0.5);
        let g = random_digraph(&mut rg, 1 + i % 8, p);
        let t = cycle_rank(&g).map_err(|e| e.to_string())?.decomposition;
        let h = validate_cr_decomposition(&g, &t).height;
        let l = ordering_from_decomposition(&g, &t).map_err(|e| e.to_string())?;
        let w = coloring_number(&g, &l, Radius::Infinite, ReachMode::Weak).map_err(|e| e.to_string())?;
        ensure!(w <= h, "ordering from decomposition: wcol {w} > height {h}");
        let idx: Vec<usize> = l.0.iter().map(|v| g.index_of(v).unwrap()).collect();
        ensure!(wcol_inf_of_order(&g, &idx) == w, "evaluation disagrees with oracle");

        let mut ids = g.vertices().to_vec();
        ids.shuffle(&mut rg);
        let l2 = LinearOrdering(ids);
        let w2 = coloring_number(&g, &l2, Radius::Infinite, ReachMode::Weak).map_err(|e| e.to_string())?;
        let t2 = decomposition_from_ordering(&g, &l2).map_err(|e| e.to_string())?;
        let v = validate_cr_decomposition(&g, &t2);
        ensure!(v.valid, "decomposition from ordering invalid: {:?}", v.witness);
        ensure!(v.height <= w2, "decomposition from ordering: height {} > wcol {w2}", v.height);
    }
    Ok("100 instances, both directions".into())
}

fn grid_extraction() -> Outcome {
    for k in 1..=5 {
        let e = extract_from_grid(k, GridTarget::Chain).map_err(|e| format!("chain k={k}: {e}"))?;
        ensure!(e.host == cylindrical_grid(k).unwrap(), "chain k={k}: host is not the grid");
        ensure!(e.pattern == cycle_chain(k + 1).unwrap().graph, "chain k={k}: wrong pattern");
        let r = validate_model(&e.pattern, &e.host, &e.model);
        ensure!(r.valid, "chain k={k}: {:?}", r.witness);
    }
    for k in 1..=3 {
        let e = extract_from_grid(k, GridTarget::Ladder).map_err(|e| format!("ladder k={k}: {e}"))?;
        ensure!(e.host == cylindrical_grid(2 * k).unwrap(), "ladder k={k}: host is not the grid");
        ensure!(e.pattern == ladder(k).unwrap(), "ladder k={k}: wrong pattern");
        let r = validate_model(&e.pattern, &e.host, &e.model);
        ensure!(r.valid, "ladder k={k}: {:?}", r.witness);
    }
    Ok("chains k=1..5, ladders k=1..3".into())
}

fn circumferences() -> Outcome {
    for k in 1..=4u32 {
        let c = circumference(&tree_chain(k as usize).unwrap().graph);
        ensure!(c == 1 << k, "tree chain k={k}: {c}");
    }
    for m in 2..=8 {
        let c = circumference(&cycle_chain(m).unwrap().graph);
        ensure!(c == 2, "cycle chain m={m}: {c}");
    }
    Ok("exact".into())
}

fn monotonicity_fuzz() -> Outcome {
    let mut rg = rng(103);
    let mut steps = 0;
    for _ in 0..200 {
        let n = rg.gen_range(2..=7);
        let p = rg.gen_range(0.2..0.5);
        let g = random_digraph(&mut rg, n, p);
        let mut prev = rank(&g)?;
        let mut h = g;
        for _ in 0..rg.gen_range(1..=3) {
            let es = h.edges();
            let contractible: Vec<_> = es.iter().filter(|(u, v)| is_butterfly_contractible(&h, u, v)).collect();
            h = match rg.gen_range(0..3) {
                0 if !contractible.is_empty() => {
                    let (u, v) = contractible.choose(&mut rg).unwrap();
                    butterfly_contract(&h, u, v).unwrap()
                }
                1 if !es.is_empty() => h.remove_edges([es.choose(&mut rg).unwrap()]),
                _ if h.n() > 1 => h.remove_vertices([h.vertices().choose(&mut rg).unwrap()]),
                _ => h,
            };
            let r = rank(&h)?;
            ensure!(r <= prev, "rank rose from {prev} to {r} on {h:?}");
            prev = r;
            steps += 1;
        }
    }
    Ok(format!("{steps} operations"))
}

fn independence() -> Outcome {
    let cases = [
        ("ladder 2 in cycle chain 6", ladder(2).unwrap(), cycle_chain(6).unwrap().graph),
        ("cycle chain 3 in ladder 4", cycle_chain(3).unwrap().graph, ladder(4).unwrap()),
        ("cycle chain 3 in tree chain 3", cycle_chain(3).unwrap().graph, tree_chain(3).unwrap().graph),
        ("tree chain 3 in ladder 4", tree_chain(3).unwrap().graph, ladder(4).unwrap()),
    ];
    for (name, h, g) in cases {
        let res = find_model(&h, &g, DEFAULT_BUDGET);
        ensure!(res == SearchOutcome::NotContained, "{name}: {}", res.label());
    }
    Ok("4 non-containments proved".into())
}

fn mixed_chain_extraction() -> Outcome {
    let mut rg = rng(104);
    let mut seen = (0, 0);
    for k in 1..=2usize {
        let need = 4 * k * k + k - 1;
        for _ in 0..25 {
            let length = rg.gen_range(0..=k + 1);
            let mut orders = vec![0; length + 1];
            for _ in 0..need.saturating_sub(length) + rg.gen_range(0..=2) {
                orders[rg.gen_range(0..=length)] += 1;
            }
            let (host, desc) = mixed_chain_fixture(&mut rg, length, &orders);
            let fixture = crank::chains::validate_structure(&host, &StructureDescriptor::MixedChain(desc.clone()));
            ensure!(fixture.valid, "fixture invalid: {:?}", fixture.witness);
            ensure!(desc.weight >= need, "fixture weight {} below {need}", desc.weight);
            let out = chain_or_ladder_from_mixed_chain(&desc, k)
                .map_err(|e| format!("k={k}, length {length}, orders {orders:?}: {e}"))?;
            let e = out.extraction();
            let expected = match out {
                MixedOutcome::CycleChain(_) => {
                    seen.0 += 1;
                    cycle_chain(k).unwrap().graph
                }
                MixedOutcome::Ladder(_) => {
                    seen.1 += 1;
                    ladder(k).unwrap()
                }
            };
            ensure!(e.pattern == expected, "k={k}: unexpected pattern");
            ensure!(e.host == desc.subgraph() || e.host == host, "k={k}: model lives outside the fixture");
            let r = validate_model(&e.pattern, &e.host, &e.model);
            ensure!(r.valid, "k={k}, orders {orders:?}: {:?}", r.witness);
        }
    }
    Ok(format!("{} cycle chains, {} ladders", seen.0, seen.1))
}

fn tree_chain_extraction() -> Outcome {
    let mut rg = rng(105);
    for k in 1..=2usize {
        for _ in 0..20 {
            let recipe = TreeChainRecipe::random(2 * k - 1, 3, &mut rg);
            let e = tc_from_relaxed_tree_chain(&recipe, k).map_err(|e| format!("k={k}, {recipe:?}: {e}"))?;
            ensure!(e.pattern.graph == tree_chain(k).unwrap().graph, "k={k}: wrong pattern");
            let r = validate_model(&e.pattern.graph, &e.host.graph, &e.model);
            ensure!(r.valid, "k={k}, {recipe:?}: {:?}", r.witness);
            ensure!(e.terminals_placed(), "k={k}: terminals misplaced");
        }
    }
    Ok("40 recipes".into())
}

/// Injective maps of the pattern into `g`, tried exhaustively.
fn contains_pattern(p: &Digraph, g: &Digraph) -> bool {
    fn go(p: &Digraph, g: &Digraph, map: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        if map.len() == p.n() {
            return p.edge_indices().all(|(a, b)| g.has_edge_idx(map[a], map[b]));
        }
        for x in 0..g.n() {
            if !used[x] {
                used[x] = true;
                map.push(x);
                if go(p, g, map, used) {
                    return true;
                }
                map.pop();
                used[x] = false;
            }
        }
        false
    }
    go(p, g, &mut Vec::new(), &mut vec![false; g.n()])
}

fn packing_or_cover() -> Outcome {
    let pattern = Digraph::from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c")]).unwrap();
    let mut rg = rng(106);
    let (mut packings, mut covers) = (0, 0);
    for i in 0..100 {
        let n = rg.gen_range(1..=7);
        let p = rg.gen_range(0.25..0.6);
        let g = random_digraph(&mut rg, n, p);
        let d = brute_force_dtd(&g).map_err(|e| e.to_string())?;
        let report = validate_dtd(&g, &d);
        ensure!(report.valid, "brute-force decomposition invalid: {:?}", report.witness);
        let w = report.width;
        let k = rg.gen_range(1..=3);
        let cycles = i % 2 == 0;
        let check = |h: &Digraph| if cycles { cycle_member(h) } else { pattern_member(&pattern, h) };
        let is_member = |h: &Digraph| if cycles { !all_cycles(h).is_empty() } else { contains_pattern(&pattern, h) };
        match erdos_posa(&g, &d, &check, k).map_err(|e| e.to_string())? {
            PackingOrCover::Packing(ws) => {
                ensure!(ws.len() == k, "packing of {} members, wanted {k}", ws.len());
                let mut used: BTreeSet<VertexId> = BTreeSet::new();
                for m in &ws {
                    ensure!(m.edges().iter().all(|(a, b)| g.has_edge(a, b)), "member is not a subgraph");
                    ensure!(is_member(m), "packed subgraph is not a family member");
                    for v in m.vertex_set() {
                        ensure!(used.insert(v.clone()), "members share {v}");
                    }
                }
                packings += 1;
            }
            PackingOrCover::Cover(c) => {
                ensure!(c.len() <= (k - 1) * (w + 1), "cover {} exceeds ({k}-1)({w}+1)", c.len());
                ensure!(!is_member(&g.remove_vertices(&c)), "cover misses a member");
                covers += 1;
            }
        }
    }
    Ok(format!("{packings} packings, {covers} covers"))
}

fn edges(p: &Path) -> BTreeSet<(VertexId, VertexId)> {
    p.edge_list().into_iter().collect()
}

fn untangle_suite() -> Outcome {
    let mut rg = rng(107);
    let mut kept = 0;
    for _ in 0..500 {
        let (p, q) = random_path_pair(&mut rg, 12);
        let union: BTreeSet<_> = edges(&p).union(&edges(&q)).cloned().collect();
        let r = untangle(&p, &q);
        ensure!(r.tail() == q.tail() && r.head() == q.head(), "ends moved: {p:?} {q:?}");
        ensure!(is_laced(&p, &r) && laced_oracle(&p, &r), "not laced: {p:?} {q:?}");
        ensure!(edges(&r).is_subset(&union), "left P ∪ Q: {p:?} {q:?}");
        let (a, d) = (p.tail(), q.head());
        let shared = |x: &VertexId| p.contains(x) && x != a && x != d;
        let hypothesis = q.vertices().iter().any(shared) && !q.is_internal(a) && !p.is_internal(d);
        match untangle_keep_intersection(&p, &q) {
            Ok(r) => {
                ensure!(hypothesis, "accepted outside its hypothesis: {p:?} {q:?}");
                ensure!(r.tail() == q.tail() && r.head() == q.head(), "ends moved: {p:?} {q:?}");
                ensure!(is_laced(&p, &r) && laced_oracle(&p, &r), "not laced: {p:?} {q:?}");
                ensure!(edges(&r).is_subset(&union), "left P ∪ Q: {p:?} {q:?}");
                ensure!(r.vertices().iter().any(shared), "lost the shared vertex: {p:?} {q:?}");
                kept += 1;
            }
            Err(e) => ensure!(!hypothesis, "hypothesis holds but failed: {e}: {p:?} {q:?}"),
        }
    }
    Ok(format!("500 pairs, {kept} with intersection kept"))
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { name: "cycle chain rank is floor(log2 k), k = 1..16", limit: secs(10), run: cycle_chain_rank },
        Criterion { name: "ladder rank bound, k = 1..8; oracle k = 1..5", limit: secs(60), run: ladder_rank },
        Criterion { name: "tree chain rank >= k, k = 1..3", limit: secs(60), run: tree_chain_rank },
        Criterion { name: "weak infinite coloring number = rank + 1", limit: secs(300), run: wcol_equals_rank_plus_one },
        Criterion { name: "ordering/decomposition constructions", limit: secs(60), run: constructive_directions },
        Criterion { name: "cycle chains and ladders from grids", limit: secs(30), run: grid_extraction },
        Criterion { name: "circumference of tree and cycle chains", limit: secs(5), run: circumferences },
        Criterion { name: "rank is monotone under minor operations", limit: secs(120), run: monotonicity_fuzz },
        Criterion { name: "independence of the three families", limit: secs(600), run: independence },
        Criterion { name: "cycle chain or ladder from mixed chains", limit: secs(60), run: mixed_chain_extraction },
        Criterion { name: "tree chains from relaxed tree chains", limit: secs(120), run: tree_chain_extraction },
        Criterion { name: "packing or bounded cover", limit: secs(300), run: packing_or_cover },
        Criterion { name: "untangling yields laced paths", limit: secs(60), run: untangle_suite },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let res = match res {
            Ok(d) if took > c.limit => Err(format!("{d}, but over the {}s limit", c.limit.as_secs())),
            r => r,
        };
        let (tag, detail) = match &res {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += res.is_err() as usize;
        println!("{tag}  {:<48} {:>8.2}s  {detail}", c.name, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
