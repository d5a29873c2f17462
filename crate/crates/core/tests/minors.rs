mod common;

use common::{brute_is_minor, random_digraph, rng};
use crank::cycle_rank::cycle_rank;
use crank::families::{cycle_chain, ladder};
use crank::graph::{butterfly_contract, is_butterfly_contractible};
use crank::minor::{minimize_model, validate_model, ButterflyMinorModel};
use crank::search::{find_model, subgraph_monomorphism, SearchOutcome, DEFAULT_BUDGET};
use crank::Digraph;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn small_patterns() -> Vec<Digraph> {
    vec![
        cycle_chain(2).unwrap().graph,
        cycle_chain(3).unwrap().graph,
        Digraph::from_edges([("a", "b"), ("b", "c"), ("c", "a")]).unwrap(),
        Digraph::from_edges([("a", "b"), ("b", "c")]).unwrap(),
        ladder(2).unwrap(),
    ]
}

#[test]
fn search_agrees_with_exhaustive_oracle() {
    let mut r = rng(21);
    let pats = small_patterns();
    let mut found = 0;
    for i in 0..120 {
        let n = 3 + i % 3;
        let g = random_digraph(&mut r, n, 0.35);
        let h = &pats[i % pats.len()];
        let oracle = brute_is_minor(h, &g);
        match find_model(h, &g, DEFAULT_BUDGET) {
            SearchOutcome::Found(mu) => {
                let v = validate_model(h, &g, &mu);
                assert!(v.valid, "{:?}", v.witness);
                assert!(oracle, "search found a model the oracle rejects: {h:?} in {g:?}");
                found += 1;
            }
            SearchOutcome::NotContained => assert!(!oracle, "missed model: {h:?} in {g:?}"),
            SearchOutcome::Indeterminate => panic!("tiny instance left undecided"),
        }
    }
    assert!(found > 10 && found < 110, "fixture mix degenerate: {found}");
}

#[test]
fn minors_of_random_operations_are_found() {
    let mut r = rng(22);
    for _ in 0..60 {
        let g = random_digraph(&mut r, 6, 0.35);
        let mut h = g.clone();
        for _ in 0..r.gen_range(1..=3) {
            let es = h.edges();
            let contractible: Vec<_> = es.iter().filter(|(u, v)| is_butterfly_contractible(&h, u, v)).collect();
            h = match r.gen_range(0..3) {
                0 if !contractible.is_empty() => {
                    let (u, v) = contractible.choose(&mut r).unwrap();
                    butterfly_contract(&h, u, v).unwrap()
                }
                1 if !es.is_empty() => h.remove_edges([es.choose(&mut r).unwrap()]),
                _ if h.n() > 1 => h.remove_vertices([h.vertices().choose(&mut r).unwrap()]),
                _ => h,
            };
        }
        match find_model(&h, &g, DEFAULT_BUDGET) {
            SearchOutcome::Found(mu) => assert!(validate_model(&h, &g, &mu).valid),
            other => panic!("{} for a minor built by operations", other.label()),
        }
    }
}

#[test]
fn monotone_under_operations() {
    let mut r = rng(23);
    for _ in 0..100 {
        let g = random_digraph(&mut r, 7, 0.3);
        let base = cycle_rank(&g).unwrap().rank;
        for (u, v) in g.edges() {
            if is_butterfly_contractible(&g, &u, &v) {
                assert!(cycle_rank(&butterfly_contract(&g, &u, &v).unwrap()).unwrap().rank <= base);
            }
            assert!(cycle_rank(&g.remove_edges([&(u, v)])).unwrap().rank <= base);
        }
    }
}

#[test]
fn monomorphism_images_are_subgraphs() {
    let mut r = rng(24);
    let h = Digraph::from_edges([("a", "b"), ("b", "a"), ("b", "c")]).unwrap();
    for _ in 0..50 {
        let g = random_digraph(&mut r, 6, 0.4);
        if let Ok(Some(m)) = subgraph_monomorphism(&h, &g, DEFAULT_BUDGET) {
            for (a, b) in h.edges() {
                assert!(g.has_edge(&m[&a], &m[&b]));
            }
            let images: std::collections::BTreeSet<_> = m.values().collect();
            assert_eq!(images.len(), h.n());
        }
    }
}

proptest! {
    #[test]
    fn minimize_keeps_models_valid(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_digraph(&mut r, 6, 0.4);
        let h = cycle_chain(2).unwrap().graph;
        if let SearchOutcome::Found(mu) = find_model(&h, &g, DEFAULT_BUDGET) {
            let m = minimize_model(&h, &g, &mu).unwrap();
            prop_assert!(validate_model(&h, &g, &m).valid);
            prop_assert!(m.image_vertices().len() <= mu.image_vertices().len());
        }
        let id = ButterflyMinorModel::identity(&g);
        prop_assert!(validate_model(&g, &g, &id).valid);
    }
}
