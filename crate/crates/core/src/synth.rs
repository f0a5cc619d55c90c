//! Synthetic linear-Gaussian datasets: a random DAG drives a structural
//! equation model with coefficients drawn from a fixed range and unit noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::{random::random_dag, text::default_names, Dag};
use crate::score::DataMatrix;

#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub vars: usize,
    pub samples: usize,
    /// Probability of each forward edge in the generating DAG.
    pub edge_prob: f64,
    /// Structural coefficients are drawn uniformly from this range.
    pub coeff_range: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            vars: 8,
            samples: 10_000,
            edge_prob: 0.3,
            coeff_range: (0.5, 2.0),
            seed: 0,
        }
    }
}

pub struct SyntheticData {
    pub data: DataMatrix,
    pub truth: Dag,
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Simulates the linear-Gaussian SEM `x_j = Σ_i coef_ij x_i + ε_j` along a
/// topological order of a random DAG.
pub fn linear_gaussian(spec: &SyntheticSpec) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let truth = random_dag(spec.vars, spec.edge_prob, &mut rng);
    let order = truth.topological_order().expect("DAG");
    let (lo, hi) = spec.coeff_range;
    let mut coef: Vec<Vec<(usize, f64)>> = vec![Vec::new(); spec.vars];
    for (v, weights) in coef.iter_mut().enumerate() {
        for &p in truth.parents_of(v) {
            weights.push((p, rng.random_range(lo..hi)));
        }
    }
    let mut columns = vec![vec![0.0f64; spec.samples]; spec.vars];
    #[allow(clippy::needless_range_loop)]
    for i in 0..spec.samples {
        for &v in &order {
            let mut val: f64 = standard_normal(&mut rng);
            for &(p, c) in &coef[v] {
                val += c * columns[p][i];
            }
            columns[v][i] = val;
        }
    }
    let data = DataMatrix::from_columns(default_names(spec.vars), columns)
        .expect("synthetic columns are rectangular and finite");
    SyntheticData { data, truth }
}
