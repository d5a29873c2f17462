//! Laced path pairs and the untangling procedure.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Path, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LacedError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Weakly connected components of `P ∩ Q`, each given as the index range
/// `[start, end]` it occupies along `P`, listed in `P` order.
pub(crate) fn common_components(p: &Path, q: &Path) -> Vec<(usize, usize)> {
    let qs: BTreeSet<&VertexId> = q.vertices().iter().collect();
    let qe: BTreeSet<(&VertexId, &VertexId)> = q.edges().collect();
    let pv = p.vertices();
    let mut comps = Vec::new();
    let mut i = 0;
    while i < pv.len() {
        if !qs.contains(&pv[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < pv.len() && qe.contains(&(&pv[i], &pv[i + 1])) {
            i += 1;
        }
        comps.push((start, i));
        i += 1;
    }
    comps
}

/// Whether `P` and `Q` are laced: disjoint, or the components of their
/// intersection appear along `Q` in the reverse of their order along `P`.
pub fn is_laced(p: &Path, q: &Path) -> bool {
    let comps = common_components(p, q);
    let qpos: Vec<usize> = comps
        .iter()
        .map(|&(s, _)| q.position(&p.vertices()[s]).expect("common vertex"))
        .collect();
    qpos.windows(2).all(|w| w[0] > w[1])
}

/// Replaces `Q` by a path `Q'` with the same ends such that `P` and `Q'` are
/// laced and `E(Q') ⊆ E(P) ∪ E(Q)`.
pub fn untangle(p: &Path, q: &Path) -> Path {
    let pv = p.vertices();
    let qv = q.vertices();
    let mut out: Vec<VertexId> = Vec::new();
    // Active window of P is pv[..p_end]; Q is consumed from q_start.
    let mut p_end = pv.len();
    let mut q_start = 0;
    loop {
        let window: &[VertexId] = &pv[..p_end];
        let first = (q_start..qv.len()).find(|&i| window.contains(&qv[i]));
        let Some(i) = first else {
            out.extend(qv[q_start..].iter().cloned());
            break;
        };
        let j = window.iter().position(|v| *v == qv[i]).unwrap();
        let tail_window = &window[j..];
        let i2 = (i..qv.len()).rev().find(|&x| tail_window.contains(&qv[x])).unwrap();
        let j2 = window.iter().position(|v| *v == qv[i2]).unwrap();
        out.extend(qv[q_start..i].iter().cloned());
        out.extend(pv[j..j2].iter().cloned());
        q_start = i2;
        p_end = j;
    }
    Path::new(out).expect("untangled walk is a path")
}

/// Variant for intersecting paths: `P` is an `(a, b)`-path and `Q` a
/// `(c, d)`-path meeting `P` outside `{a, d}`, where `a` is not internal to
/// `Q` and `d` is not internal to `P`. The result is a `(c, d)`-path in
/// `P ∪ Q`, laced with `P`, that still meets `P` outside `{a, d}`.
pub fn untangle_keep_intersection(p: &Path, q: &Path) -> Result<Path, LacedError> {
    let (a, d) = (p.tail(), q.head());
    if !meets_outside(p, q) {
        return Err(LacedError::PreconditionViolated(
            "paths do not meet outside the tail of P and the head of Q".into(),
        ));
    }
    if q.is_internal(a) {
        return Err(LacedError::PreconditionViolated("the tail of P is internal to Q".into()));
    }
    if p.is_internal(d) {
        return Err(LacedError::PreconditionViolated("the head of Q is internal to P".into()));
    }
    let good = |r: &Path| is_laced(p, r) && meets_outside(p, r);
    if let Some(r) = Path::new(shortcut(induct(p.vertices(), q.vertices()))).ok().filter(good) {
        return Ok(r);
    }
    search_union(p, q, &good).ok_or_else(|| LacedError::PreconditionViolated("no laced path keeps the intersection".into()))
}

fn meets_outside(p: &Path, q: &Path) -> bool {
    let (a, d) = (p.tail(), q.head());
    q.vertices().iter().any(|v| p.contains(v) && v != a && v != d)
}

/// The inductive construction: follow `Q` to its first later vertex on `P`,
/// jump along `P` to the last vertex of `Q` found after it, and recurse on
/// the shorter pair.
fn induct(pv: &[VertexId], qv: &[VertexId]) -> Vec<VertexId> {
    let Some(i) = (1..qv.len()).find(|&i| pv.contains(&qv[i])) else {
        return qv.to_vec();
    };
    if qv[i] == pv[0] {
        return qv.to_vec();
    }
    let j = pv.iter().position(|v| *v == qv[i]).expect("on P");
    let i2 = (0..qv.len()).rev().find(|&x| pv[j..].contains(&qv[x])).expect("q_i qualifies");
    let j2 = pv.iter().position(|v| *v == qv[i2]).expect("on P");
    let (p_star, q_star) = (&pv[..=j], &qv[i2..]);
    let mut out: Vec<VertexId> = qv[..i].to_vec();
    out.extend(pv[j..j2].iter().cloned());
    let ends = [&pv[0], &qv[qv.len() - 1]];
    let overlap = q_star.iter().any(|v| p_star.contains(v) && !ends.contains(&v));
    if overlap && i2 > 0 {
        out.extend(induct(p_star, q_star));
    } else {
        out.extend(q_star.iter().cloned());
    }
    out
}

/// Removes closed detours so that no vertex repeats.
fn shortcut(walk: Vec<VertexId>) -> Vec<VertexId> {
    let mut out: Vec<VertexId> = Vec::with_capacity(walk.len());
    for v in walk {
        if let Some(k) = out.iter().position(|u| *u == v) {
            out.truncate(k);
        }
        out.push(v);
    }
    out
}

/// Depth-first search over `(c, d)`-paths of `P ∪ Q` for one accepted by `good`.
fn search_union(p: &Path, q: &Path, good: &dyn Fn(&Path) -> bool) -> Option<Path> {
    fn succ<'a>(p: &'a Path, q: &'a Path, v: &VertexId) -> Vec<&'a VertexId> {
        let mut out = Vec::new();
        for path in [q, p] {
            if let Some(i) = path.position(v) {
                if let Some(n) = path.vertices().get(i + 1) {
                    out.push(n);
                }
            }
        }
        out
    }
    fn dfs(p: &Path, q: &Path, walk: &mut Vec<VertexId>, good: &dyn Fn(&Path) -> bool) -> Option<Path> {
        let last = walk.last().expect("non-empty").clone();
        if last == *q.head() {
            return Path::new(walk.clone()).ok().filter(|r| good(r));
        }
        for n in succ(p, q, &last) {
            if !walk.contains(n) {
                walk.push(n.clone());
                if let Some(r) = dfs(p, q, walk, good) {
                    return Some(r);
                }
                walk.pop();
            }
        }
        None
    }
    dfs(p, q, &mut vec![q.tail().clone()], good)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(s: &str) -> Path {
        Path::from_strs(&s.split_whitespace().collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn disjoint_is_laced() {
        assert!(is_laced(&path("a b"), &path("c d")));
    }

    #[test]
    fn reversed_components_laced() {
        // P visits x then y; Q visits y then x.
        let p = path("a x b y c");
        let q = path("d y e x f");
        assert!(is_laced(&p, &q));
        let q2 = path("d x e y f");
        assert!(!is_laced(&p, &q2));
    }

    #[test]
    fn untangle_fixes_order() {
        let p = path("a x b y c");
        let q = path("d x e y f");
        let r = untangle(&p, &q);
        assert_eq!(r.tail(), q.tail());
        assert_eq!(r.head(), q.head());
        assert!(is_laced(&p, &r));
        assert_eq!(r, path("d x b y f"));
    }

    #[test]
    fn keep_intersection_checks_ends() {
        let p = path("a x b");
        let q = path("a y d");
        assert!(untangle_keep_intersection(&p, &q).is_err());
        let q = path("c y d");
        assert!(untangle_keep_intersection(&p, &q).is_err());
    }
}
