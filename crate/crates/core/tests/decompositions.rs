mod common;

use std::collections::BTreeSet;

use common::{guards_by_cycles, random_digraph, rng};
use crank::chains::{MixedChain, RelaxedChain};
use crank::decomposition::{
    brute_force_dtd, classify_endpoint, cleanliness, cycle_member, dtd_from_cycle_rank, erdos_posa, pattern_member,
    strongly_guards, validate_chain_decomposition, validate_dtd, ChainDecomposition, ChainNode, Cleanliness,
    DirectedTreeDecomposition, EndpointType, PackingOrCover,
};
use crank::families::{gen_m, gen_m_with_policy, tree_chain_decomposition, TerminalPolicy};
use crank::{Digraph, Path, VertexId};
use rand::Rng;

fn vid(s: &str) -> VertexId {
    VertexId::from(s)
}

fn set(vs: &[&str]) -> BTreeSet<VertexId> {
    vs.iter().map(|v| vid(v)).collect()
}

fn two_cycle(a: &str, b: &str) -> Digraph {
    Digraph::from_edges([(a, b), (b, a)]).unwrap()
}

fn path(vs: &[&str]) -> Path {
    Path::from_strs(vs).unwrap()
}

/// Length-0 link between two children: `P` runs from the left out-terminal
/// to the right in-terminal, `Q` from the right out-terminal to the left
/// in-terminal.
fn join(nodes: &mut Vec<ChainNode>, slot: usize, c1: usize, c2: usize, p: &[&str], q: &[&str]) {
    let (p, q) = (path(p), path(q));
    let chain = RelaxedChain {
        p_junctions: vec![p.tail().clone(), p.head().clone()],
        q_junctions: vec![q.head().clone(), q.tail().clone()],
        p_paths: vec![p],
        q_paths: vec![q],
        r_paths: vec![],
    };
    let link = MixedChain::from_relaxed_chain(&chain);
    let graph = nodes[c1].graph.union(&nodes[c2].graph).union(&link.subgraph());
    nodes[slot] = ChainNode { graph, children: Some([c1, c2]), link: Some(link) };
}

fn placeholder() -> ChainNode {
    ChainNode::leaf(Digraph::empty())
}

/// Child link `a1 → m1 → m2 → b2`, `b1 → a2`; the parent links through `m2`
/// and `m1`, which sit on that path in crossing position.
fn crossing_fixture() -> ChainDecomposition {
    let mut nodes = vec![placeholder(), placeholder()];
    nodes.push(ChainNode::leaf(two_cycle("a1", "a2")));
    nodes.push(ChainNode::leaf(two_cycle("b1", "b2")));
    nodes.push(ChainNode::leaf(two_cycle("c1", "c2")));
    join(&mut nodes, 1, 2, 3, &["a1", "m1", "m2", "b2"], &["b1", "a2"]);
    join(&mut nodes, 0, 1, 4, &["m2", "c2"], &["c1", "m1"]);
    ChainDecomposition::new(nodes)
}

/// Both parent endpoints lie in the left grandchild.
fn same_side_fixture() -> ChainDecomposition {
    let mut nodes = vec![placeholder(), placeholder()];
    nodes.push(ChainNode::leaf(Digraph::from_edges([("a1", "a2"), ("a2", "a3"), ("a3", "a1")]).unwrap()));
    nodes.push(ChainNode::leaf(two_cycle("b1", "b2")));
    nodes.push(ChainNode::leaf(two_cycle("c1", "c2")));
    join(&mut nodes, 1, 2, 3, &["a1", "b2"], &["b1", "a2"]);
    join(&mut nodes, 0, 1, 4, &["a3", "c2"], &["c1", "a1"]);
    ChainDecomposition::new(nodes)
}

fn acts(cd: &ChainDecomposition, d: usize, e: usize) -> bool {
    let r = classify_endpoint(cd, d, e).unwrap();
    r.out_vertex.is_some()
        && r.in_vertex.is_some()
        && (r.out_type == Some(EndpointType::Central) || r.in_type == Some(EndpointType::Central) || r.crossing)
}

fn internal_pairs(cd: &ChainDecomposition) -> Vec<(usize, usize)> {
    let mut parent = vec![None; cd.nodes.len()];
    for (d, n) in cd.nodes.iter().enumerate() {
        for c in n.children.into_iter().flatten() {
            parent[c] = Some(d);
        }
    }
    let mut out = Vec::new();
    for e in 0..cd.nodes.len() {
        let mut cur = parent[e];
        while let Some(d) = cur {
            if cd.is_internal(e) {
                out.push((d, e));
            }
            cur = parent[d];
        }
    }
    out
}

#[test]
fn guards_match_cycle_enumeration() {
    let mut r = rng(31);
    for i in 0..300 {
        let n = 1 + i % 7;
        let g = random_digraph(&mut r, n, 0.35);
        let pick = |r: &mut rand_chacha::ChaCha8Rng, p: f64| -> BTreeSet<VertexId> {
            g.vertices().iter().filter(|_| r.gen_bool(p)).cloned().collect()
        };
        let x = pick(&mut r, 0.2);
        let y = pick(&mut r, 0.5);
        assert_eq!(strongly_guards(&g, &x, &y), guards_by_cycles(&g, &x, &y), "{g:?} X={x:?} Y={y:?}");
    }
    let g = two_cycle("u", "v");
    assert!(strongly_guards(&g, &g.vertex_set(), &set(&["u"])));
    assert!(!strongly_guards(&g, &BTreeSet::new(), &set(&["u"])));
}

#[test]
fn hand_built_dtd_of_two_joined_cycles() {
    let g = Digraph::from_edges([("a", "b"), ("b", "a"), ("c", "d"), ("d", "c"), ("b", "c")]).unwrap();
    let d = DirectedTreeDecomposition {
        root: "top".into(),
        parent: [("bottom".into(), "top".into())].into(),
        bags: [("top".into(), set(&["a", "b"])), ("bottom".into(), set(&["c", "d"]))].into(),
        guards: [("bottom".into(), BTreeSet::new())].into(),
    };
    let r = validate_dtd(&g, &d);
    assert!(r.valid, "{:?}", r.witness);
    assert_eq!(r.width, 1);
    let mut bad = d.clone();
    bad.bags.get_mut("top").unwrap().insert(vid("c"));
    assert!(!validate_dtd(&g, &bad).valid);
}

#[test]
fn decompositions_from_rank_and_brute_force_validate() {
    let mut r = rng(32);
    for i in 0..40 {
        let g = random_digraph(&mut r, 1 + i % 6, 0.35);
        let a = dtd_from_cycle_rank(&g).unwrap();
        let b = brute_force_dtd(&g).unwrap();
        let (ra, rb) = (validate_dtd(&g, &a), validate_dtd(&g, &b));
        assert!(ra.valid && rb.valid, "{:?} {:?}", ra.witness, rb.witness);
        assert!(rb.width <= ra.width);
    }
    assert!(brute_force_dtd(&random_digraph(&mut r, 8, 0.3)).is_err());
}

#[test]
fn packing_of_disjoint_triangles() {
    let tri = |p: &str| {
        let v = |i: usize| format!("{p}{i}");
        [(v(0), v(1)), (v(1), v(2)), (v(2), v(0))]
    };
    let g = Digraph::from_edges(tri("a").into_iter().chain(tri("b")).chain(tri("c"))).unwrap();
    let d = dtd_from_cycle_rank(&g).unwrap();
    match erdos_posa(&g, &d, &cycle_member, 3).unwrap() {
        PackingOrCover::Packing(ws) => {
            assert_eq!(ws.len(), 3);
            let all: BTreeSet<_> = ws.iter().flat_map(|w| w.vertex_set()).collect();
            assert_eq!(all.len(), 9);
        }
        other => panic!("expected a packing, got {other:?}"),
    }
}

#[test]
fn cover_of_single_triangle() {
    let g = Digraph::from_edges([("a", "b"), ("b", "c"), ("c", "a")]).unwrap();
    let d = DirectedTreeDecomposition::single_bag(&g);
    match erdos_posa(&g, &d, &cycle_member, 2).unwrap() {
        PackingOrCover::Cover(c) => {
            assert!(c.len() <= 3);
            assert!(cycle_member(&g.remove_vertices(&c)).is_none());
        }
        other => panic!("expected a cover, got {other:?}"),
    }
    let mut broken = d.clone();
    broken.bags.insert("t0".into(), set(&["a"]));
    assert!(erdos_posa(&g, &broken, &cycle_member, 2).is_err());
}

#[test]
fn pattern_family_packing_is_disjoint() {
    let pat = two_cycle("p", "q");
    let g = Digraph::from_edges([("a", "b"), ("b", "a"), ("b", "c"), ("c", "b"), ("d", "e"), ("e", "d")]).unwrap();
    let d = brute_force_dtd(&g).unwrap();
    let check = |h: &Digraph| pattern_member(&pat, h);
    match erdos_posa(&g, &d, &check, 2).unwrap() {
        PackingOrCover::Packing(ws) => {
            assert_eq!(ws.len(), 2);
            assert!(ws[0].vertex_set().is_disjoint(&ws[1].vertex_set()));
        }
        other => panic!("expected a packing, got {other:?}"),
    }
}

#[test]
fn generated_decompositions_are_spotless() {
    for k in 1..=4 {
        for seed in 0..15 {
            let (g, cd) = gen_m(k, seed, 100_000).unwrap();
            let r = validate_chain_decomposition(&cd);
            assert!(r.valid && r.full_height == k);
            assert_eq!(cd.root_graph(), &g);
            assert_eq!(cleanliness(&cd), Cleanliness::Spotless);
        }
    }
    let (_, cd) = gen_m(3, 0, 100_000).unwrap();
    let [c1, _] = cd.nodes[0].children.unwrap();
    assert_eq!(classify_endpoint(&cd, 0, c1).unwrap().out_type, Some(EndpointType::Left));
    assert!(classify_endpoint(&cd, c1, 0).is_err());
}

#[test]
fn crossing_fixture_is_not_rinsed() {
    let cd = crossing_fixture();
    let r = validate_chain_decomposition(&cd);
    assert!(r.valid, "{:?}", r.witness);
    let rec = classify_endpoint(&cd, 0, 1).unwrap();
    assert_eq!(rec.out_vertex, Some(vid("m2")));
    assert_eq!(rec.in_vertex, Some(vid("m1")));
    assert_eq!((rec.out_type, rec.in_type), (Some(EndpointType::Left), Some(EndpointType::Right)));
    assert!(rec.crossing);
    assert_eq!(cleanliness(&cd), Cleanliness::NotRinsed { node: 0, descendant: 1 });
}

#[test]
fn same_side_fixture_is_rinsed_not_clean() {
    let cd = same_side_fixture();
    assert!(validate_chain_decomposition(&cd).valid);
    let rec = classify_endpoint(&cd, 0, 1).unwrap();
    assert_eq!((rec.out_type, rec.in_type), (Some(EndpointType::Left), Some(EndpointType::Left)));
    assert_eq!(cleanliness(&cd), Cleanliness::RinsedNotClean { node: 0, child: 1 });
}

#[test]
fn link_missing_left_child_is_invalid() {
    let mut cd = crossing_fixture();
    let link = cd.nodes[0].link.as_mut().unwrap();
    link.p_junctions[0] = vid("zz");
    assert!(!validate_chain_decomposition(&cd).valid);
    let mut cd = crossing_fixture();
    cd.full_height += 1;
    assert!(!validate_chain_decomposition(&cd).valid);
}

#[test]
fn random_terminals_reach_every_level_and_agree_with_predicates() {
    let mut seen = std::collections::HashSet::new();
    let mut central = false;
    for seed in 0..200 {
        let (_, cd) = gen_m_with_policy(3, seed, 100_000, TerminalPolicy::Random).unwrap();
        assert!(validate_chain_decomposition(&cd).valid);
        let pairs = internal_pairs(&cd);
        central |= pairs.iter().any(|&(d, e)| {
            let r = classify_endpoint(&cd, d, e).unwrap();
            r.out_type == Some(EndpointType::Central) || r.in_type == Some(EndpointType::Central)
        });
        let rinsed = !pairs.iter().any(|&(d, e)| acts(&cd, d, e));
        let clean = rinsed
            && (0..cd.nodes.len()).filter(|&d| cd.is_internal(d)).all(|d| {
                cd.nodes[d].children.unwrap().iter().filter(|&&c| cd.is_internal(c)).all(|&c| {
                    let r = classify_endpoint(&cd, d, c).unwrap();
                    r.out_type != r.in_type
                })
            });
        let status = cleanliness(&cd);
        match &status {
            Cleanliness::NotRinsed { node, descendant } => {
                assert!(!rinsed);
                assert!(acts(&cd, *node, *descendant));
            }
            Cleanliness::RinsedNotClean { .. } => assert!(rinsed && !clean),
            Cleanliness::CleanNotSpotless { .. } | Cleanliness::Spotless => assert!(clean),
        }
        seen.insert(std::mem::discriminant(&status));
    }
    assert!(central, "no central endpoint produced");
    assert!(seen.len() >= 2);
}

#[test]
fn tree_chain_natural_decomposition() {
    for k in 1..=4 {
        let (tc, cd) = tree_chain_decomposition(k).unwrap();
        let r = validate_chain_decomposition(&cd);
        assert!(r.valid);
        assert_eq!(r.full_height, k + 1);
        assert_eq!(r.weight_vector, vec![0; (1 << (k + 1)) - 1]);
        assert_eq!(cd.root_graph(), &tc.graph);
    }
}
