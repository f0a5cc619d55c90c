//! Naive operator application: mutate a copy into a PDAG, find a consistent
//! extension by repeated sink elimination, then complete. Cubic, but fully
//! independent of the prefixed-MCS fast path.

use causal_zigzag::error::{Error, Result};
use causal_zigzag::graph::{dag_to_cpdag, Cpdag, Dag, Pdag, Vertex};
use causal_zigzag::ops::Operator;

/// Consistent extension of a PDAG by the classical sink-elimination method:
/// repeatedly pick a vertex with no outgoing directed edge whose undirected
/// neighbours are adjacent to all of its other neighbours, and orient its
/// undirected edges towards it.
pub fn consistent_extension(g: &Pdag) -> Result<Dag> {
    let n = g.n();
    let mut out = g.clone();
    let mut remaining: Vec<bool> = vec![true; n];
    let mut left = n;
    while left > 0 {
        let mut found = None;
        'search: for v in 0..n {
            if !remaining[v] {
                continue;
            }
            if g.children_of(v).iter().any(|&c| remaining[c]) {
                continue;
            }
            let adj: Vec<Vertex> = g
                .undirected_of(v)
                .iter()
                .chain(g.parents_of(v))
                .copied()
                .filter(|&u| remaining[u])
                .collect();
            for &w in g.undirected_of(v) {
                if !remaining[w] {
                    continue;
                }
                for &u in &adj {
                    if u != w && !g.is_adjacent(u, w) {
                        continue 'search;
                    }
                }
            }
            found = Some(v);
            break;
        }
        let Some(v) = found else {
            return Err(Error::DirectedCycle); // no consistent extension exists
        };
        for &w in g.undirected_of(v) {
            if remaining[w] {
                out.orient(w, v)?;
            }
        }
        remaining[v] = false;
        left -= 1;
    }
    Dag::try_new(out)
}

/// Applies a locally valid operator the classical way: perform the local
/// edge changes on a PDAG copy, extend consistently, complete. A completion
/// failure means an invalid operator slipped through.
pub fn naive_apply(g: &Cpdag, op: &Operator) -> Result<Cpdag> {
    let mut p = g.as_pdag().clone();
    match op {
        Operator::Insert { x, y, t } => {
            p.add_directed(*x, *y)?;
            for &v in t {
                p.orient(v, *y)?;
            }
        }
        Operator::Delete { x, y, h } => {
            p.remove_between(*x, *y)?;
            for &v in h {
                if p.has_undirected(*x, v) {
                    p.orient(*x, v)?;
                }
                if p.has_undirected(*y, v) {
                    p.orient(*y, v)?;
                }
            }
        }
    }
    let member = consistent_extension(&p)?;
    Ok(dag_to_cpdag(&member))
}

#[cfg(test)]
mod tests {
    use super::*;
    use causal_zigzag::ops::apply_operator;

    fn cpdag(n: usize, und: &[(usize, usize)], dir: &[(usize, usize)]) -> Cpdag {
        let mut g = Pdag::new(n);
        for &(u, v) in und {
            g.add_undirected(u, v).unwrap();
        }
        for &(u, v) in dir {
            g.add_directed(u, v).unwrap();
        }
        Cpdag::try_new(g).unwrap()
    }

    #[test]
    fn extension_of_a_cpdag_is_consistent() {
        let g = cpdag(4, &[(0, 1), (0, 2), (0, 3), (2, 3)], &[]);
        let d = consistent_extension(g.as_pdag()).unwrap();
        assert_eq!(d.skeleton(), g.skeleton());
        assert_eq!(d.v_structures(), g.v_structures());
    }

    #[test]
    fn no_extension_for_the_four_cycle() {
        let mut p = Pdag::new(4);
        for &(u, v) in &[(0, 1), (1, 2), (2, 3), (0, 3)] {
            p.add_undirected(u, v).unwrap();
        }
        assert!(consistent_extension(&p).is_err());
    }

    #[test]
    fn insert_on_empty_graph() {
        let g = Cpdag::empty(2);
        let op = Operator::insert(0, 1, vec![]);
        let n = naive_apply(&g, &op).unwrap();
        assert!(n.has_undirected(0, 1));
    }

    #[test]
    fn tail_set_insert_agrees_with_fast_path() {
        let g = cpdag(4, &[(0, 1), (0, 2), (0, 3), (2, 3)], &[]);
        let op = Operator::insert(1, 3, vec![2]);
        assert_eq!(naive_apply(&g, &op).unwrap(), apply_operator(&g, &op).unwrap());
    }
}
