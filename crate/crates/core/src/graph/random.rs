//! Random DAGs and CPDAGs for benchmarks and tests.

use rand::Rng;

use crate::graph::{dag_to_cpdag, Cpdag, Dag, Pdag};

/// Random DAG: a uniform random vertex order with each forward edge present
/// independently with probability `edge_prob`.
pub fn random_dag<R: Rng>(n: usize, edge_prob: f64, rng: &mut R) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut g = Pdag::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < edge_prob {
                g.add_directed(order[i], order[j]).expect("forward edge");
            }
        }
    }
    Dag::try_new(g).expect("orientation along an order is acyclic")
}

/// Random CPDAG: completion of a random DAG.
pub fn random_cpdag<R: Rng>(n: usize, edge_prob: f64, rng: &mut R) -> Cpdag {
    dag_to_cpdag(&random_dag(n, edge_prob, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_dag_is_reproducible() {
        let a = random_dag(8, 0.3, &mut ChaCha8Rng::seed_from_u64(7));
        let b = random_dag(8, 0.3, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }

    #[test]
    fn random_cpdag_is_completed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = random_cpdag(6, 0.4, &mut rng);
            assert!(Cpdag::try_new(c.as_pdag().clone()).is_ok());
        }
    }
}
