use crank::families::{cycle_chain, ladder, tree_chain};
use crank::search::{find_model, SearchOutcome, DEFAULT_BUDGET};

#[test]
fn cycle_chain_not_in_ladder() {
    let h = cycle_chain(3).unwrap().graph;
    let g = ladder(4).unwrap();
    assert_eq!(find_model(&h, &g, DEFAULT_BUDGET), SearchOutcome::NotContained);
}

#[test]
fn cycle_chain_not_in_tree_chain() {
    let h = cycle_chain(3).unwrap().graph;
    let g = tree_chain(3).unwrap().graph;
    assert_eq!(find_model(&h, &g, DEFAULT_BUDGET), SearchOutcome::NotContained);
}

#[test]
fn tree_chain_not_in_ladder() {
    let h = tree_chain(3).unwrap().graph;
    let g = ladder(4).unwrap();
    assert_eq!(find_model(&h, &g, DEFAULT_BUDGET), SearchOutcome::NotContained);
}

#[test]
fn ladder_not_in_cycle_chain() {
    let h = ladder(2).unwrap();
    let g = cycle_chain(6).unwrap().graph;
    assert_eq!(find_model(&h, &g, DEFAULT_BUDGET), SearchOutcome::NotContained);
}
