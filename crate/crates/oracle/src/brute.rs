//! Definition-level operator enumeration: all `(x, y, T)` / `(x, y, H)`
//! candidates are generated by subset enumeration and tested directly
//! against the textual validity conditions, with a plain simple-path search
//! for the blocking condition. Exponential in the neighbourhood size; meant
//! for small or sparse graphs.

use std::collections::BTreeSet;

use causal_zigzag::graph::{Cpdag, Vertex};
use causal_zigzag::ops::Operator;

fn pairwise_adjacent(g: &Cpdag, set: &[Vertex]) -> bool {
    for (i, &u) in set.iter().enumerate() {
        for &v in &set[i + 1..] {
            if !g.is_adjacent(u, v) {
                return false;
            }
        }
    }
    true
}

/// Depth-first search over simple semi-directed paths from `from` towards
/// `target`, refusing to enter `blockers`.
fn open_semi_directed_path(
    g: &Cpdag,
    from: Vertex,
    target: Vertex,
    blockers: &BTreeSet<Vertex>,
    visited: &mut Vec<bool>,
) -> bool {
    if from == target {
        return true;
    }
    visited[from] = true;
    let steps: Vec<Vertex> = g
        .undirected_of(from)
        .iter()
        .chain(g.children_of(from))
        .copied()
        .collect();
    for next in steps {
        if visited[next] || blockers.contains(&next) {
            continue;
        }
        if open_semi_directed_path(g, next, target, blockers, visited) {
            visited[from] = false;
            return true;
        }
    }
    visited[from] = false;
    false
}

pub fn insert_valid_by_definition(g: &Cpdag, x: Vertex, y: Vertex, t: &[Vertex]) -> bool {
    if g.is_adjacent(x, y) {
        return false;
    }
    // NA_x(y) directly from the definition
    let na: Vec<Vertex> = g
        .undirected_of(y)
        .iter()
        .copied()
        .filter(|&u| u != x && g.is_adjacent(u, x))
        .collect();
    let mut union: Vec<Vertex> = na.clone();
    union.extend_from_slice(t);
    if !pairwise_adjacent(g, &union) {
        return false;
    }
    let blockers: BTreeSet<Vertex> = union.into_iter().collect();
    let mut visited = vec![false; g.n()];
    !open_semi_directed_path(g, y, x, &blockers, &mut visited)
}

pub fn delete_valid_by_definition(g: &Cpdag, x: Vertex, y: Vertex, h: &[Vertex]) -> bool {
    if !(g.has_undirected(x, y) || g.has_directed(x, y)) {
        return false;
    }
    let na: Vec<Vertex> = g
        .undirected_of(y)
        .iter()
        .copied()
        .filter(|&u| u != x && g.is_adjacent(u, x))
        .collect();
    if !h.iter().all(|v| na.contains(v)) {
        return false;
    }
    let rest: Vec<Vertex> = na.into_iter().filter(|v| !h.contains(v)).collect();
    pairwise_adjacent(g, &rest)
}

fn subsets(pool: &[Vertex]) -> Vec<Vec<Vertex>> {
    assert!(pool.len() <= 20, "subset enumeration bound");
    (0..(1u32 << pool.len()))
        .map(|mask| {
            pool.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// Every locally valid operator, found by exhaustive candidate enumeration
/// against the validity definitions.
pub fn brute_force_operators(g: &Cpdag) -> BTreeSet<Operator> {
    let n = g.n();
    let mut out = BTreeSet::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            if !g.is_adjacent(x, y) {
                let pool: Vec<Vertex> = g
                    .undirected_of(y)
                    .iter()
                    .copied()
                    .filter(|&u| !g.is_adjacent(u, x))
                    .collect();
                for t in subsets(&pool) {
                    if insert_valid_by_definition(g, x, y, &t) {
                        out.insert(Operator::insert(x, y, t));
                    }
                }
            } else if g.has_undirected(x, y) || g.has_directed(x, y) {
                let na: Vec<Vertex> = g
                    .undirected_of(y)
                    .iter()
                    .copied()
                    .filter(|&u| u != x && g.is_adjacent(u, x))
                    .collect();
                for h in subsets(&na) {
                    if delete_valid_by_definition(g, x, y, &h) {
                        out.insert(Operator::delete(x, y, h));
                    }
                }
            }
        }
    }
    out
}
