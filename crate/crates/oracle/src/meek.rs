//! Pattern closure by Meek's orientation rules: an independent route to the
//! completed CPDAG of a DAG's equivalence class, used to cross-check the
//! compelled-edge labeling at sizes beyond exhaustive enumeration.

use causal_zigzag::graph::{Dag, Pdag, Vertex};

/// Orients the skeleton-plus-v-structures pattern of `dag` to a fixpoint of
/// rules R1-R3 (sufficient for patterns without background knowledge):
///
/// - R1: `a -> b`, `b - c`, `a` and `c` nonadjacent, orients `b -> c`;
/// - R2: `a -> c -> b` with `a - b`, orients `a -> b`;
/// - R3: `a - b`, `a - c`, `a - d`, `c -> b`, `d -> b` with `c`, `d`
///   nonadjacent, orients `a -> b`.
pub fn meek_closure(dag: &Dag) -> Pdag {
    let n = dag.n();
    let mut g = Pdag::new(n);
    // skeleton, undirected
    for u in 0..n {
        for &v in dag.children_of(u) {
            g.add_undirected(u, v).expect("skeleton edge");
        }
    }
    // v-structures keep their orientation
    for (x, y, z) in dag.v_structures() {
        if g.has_undirected(x, y) {
            g.orient(x, y).expect("pattern edge");
        }
        if g.has_undirected(z, y) {
            g.orient(z, y).expect("pattern edge");
        }
    }

    loop {
        let mut oriented: Option<(Vertex, Vertex)> = None;
        'scan: for b in 0..n {
            let undirected: Vec<Vertex> = g.undirected_of(b).to_vec();
            for &c in &undirected {
                // R1 with edge b - c
                if g.parents_of(b).iter().any(|&a| !g.is_adjacent(a, c)) {
                    oriented = Some((b, c));
                    break 'scan;
                }
                // R2: some a with a -> x -> c for the undirected a - c; here
                // scan pairs (b, c): b - c and a directed path b -> m -> c
                if g.children_of(b).iter().any(|&m| g.has_directed(m, c)) {
                    oriented = Some((b, c));
                    break 'scan;
                }
                // R3 centered at the undirected neighbour b of c: needs two
                // parents of c, nonadjacent, both undirected neighbours of b
                let pa_c = g.parents_of(c);
                for (i, &p) in pa_c.iter().enumerate() {
                    for &q in &pa_c[i + 1..] {
                        if !g.is_adjacent(p, q)
                            && g.has_undirected(b, p)
                            && g.has_undirected(b, q)
                        {
                            oriented = Some((b, c));
                            break 'scan;
                        }
                    }
                }
            }
        }
        match oriented {
            Some((u, v)) => g.orient(u, v).expect("undirected edge"),
            None => return g,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use causal_zigzag::graph::dag_to_cpdag;

    fn dag(n: usize, edges: &[(usize, usize)]) -> Dag {
        let mut g = Pdag::new(n);
        for &(u, v) in edges {
            g.add_directed(u, v).unwrap();
        }
        Dag::try_new(g).unwrap()
    }

    #[test]
    fn chain_and_collider() {
        let chain = dag(3, &[(0, 1), (1, 2)]);
        let c = meek_closure(&chain);
        assert!(c.has_undirected(0, 1) && c.has_undirected(1, 2));

        let collider = dag(3, &[(0, 1), (2, 1)]);
        let c = meek_closure(&collider);
        assert!(c.has_directed(0, 1) && c.has_directed(2, 1));
    }

    #[test]
    fn r1_propagation() {
        // 0 -> 1 <- 2 plus 1 - 3: R1 orients 1 -> 3
        let d = dag(4, &[(0, 1), (2, 1), (1, 3)]);
        let c = meek_closure(&d);
        assert!(c.has_directed(1, 3));
        assert_eq!(&c, dag_to_cpdag(&d).as_pdag());
    }
}
