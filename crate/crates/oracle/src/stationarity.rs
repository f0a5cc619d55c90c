//! Exact stationarity verification: assemble the dense generator of the
//! Zanella or zig-zag process over an enumerated class space and measure
//! `‖πQ‖∞`.

use causal_zigzag::error::{Error, Result};
use causal_zigzag::sampler::{
    zanella_rates, zigzag_rates, BalancingFunction, Direction, LiftedState, SamplerKind,
};
use causal_zigzag::score::{cpdag_log_score, ScoreCache, TargetDistribution};

use crate::catalog::MecCatalog;

pub struct GeneratorCheck {
    /// Stationary candidate distribution over the generator's states.
    pub pi: Vec<f64>,
    /// Dense generator; rows sum to zero.
    pub q: Vec<Vec<f64>>,
    pub residual: f64,
}

/// `‖πQ‖∞`.
pub fn stationarity_residual(pi: &[f64], q: &[Vec<f64>]) -> f64 {
    let k = pi.len();
    (0..k)
        .map(|j| (0..k).map(|a| pi[a] * q[a][j]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

fn class_masses(catalog: &MecCatalog, target: &TargetDistribution) -> Result<Vec<f64>> {
    let mut cache = ScoreCache::new();
    let logs: Vec<f64> = catalog
        .classes
        .iter()
        .map(|g| cpdag_log_score(g, target, &mut cache))
        .collect::<Result<_>>()?;
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / z).collect())
}

/// Generator of the Zanella process over all classes of the catalog,
/// together with the target distribution and the residual `‖πQ‖∞`.
pub fn zanella_generator(
    catalog: &MecCatalog,
    target: &TargetDistribution,
    g_fn: BalancingFunction,
) -> Result<GeneratorCheck> {
    let k = catalog.class_count();
    let pi = class_masses(catalog, target)?;
    let mut q = vec![vec![0.0; k]; k];
    let mut cache = ScoreCache::new();
    for (a, graph) in catalog.classes.iter().enumerate() {
        let table = zanella_rates(graph, target, g_fn, &mut cache)?;
        for (op, rate) in table.materialize(graph) {
            let next = causal_zigzag::ops::apply_operator(graph, &op)?;
            let b = catalog
                .class_of(&next)
                .ok_or_else(|| Error::InvalidArgument("next state outside catalog".into()))?;
            q[a][b] += rate;
        }
        let off: f64 = (0..k).filter(|&b| b != a).map(|b| q[a][b]).sum();
        q[a][a] = -off;
    }
    let residual = stationarity_residual(&pi, &q);
    Ok(GeneratorCheck { pi, q, residual })
}

fn lifted_index(class: usize, direction: Direction) -> usize {
    2 * class
        + match direction {
            Direction::Up => 0,
            Direction::Down => 1,
        }
}

/// Generator of the zig-zag process over the lifted space
/// (classes × directions) against `π̃(γ^d) = π{γ}/2`. `corrupt_turn`
/// multiplies every turn rate, serving as a negative control.
pub fn zigzag_generator(
    catalog: &MecCatalog,
    target: &TargetDistribution,
    g_fn: BalancingFunction,
    corrupt_turn: Option<f64>,
) -> Result<GeneratorCheck> {
    let k = catalog.class_count();
    let masses = class_masses(catalog, target)?;
    let pi: Vec<f64> = (0..2 * k).map(|s| masses[s / 2] / 2.0).collect();
    let mut q = vec![vec![0.0; 2 * k]; 2 * k];
    let mut cache = ScoreCache::new();
    for (a, graph) in catalog.classes.iter().enumerate() {
        for direction in [Direction::Up, Direction::Down] {
            let state = LiftedState {
                graph: graph.clone(),
                direction,
            };
            let table = zigzag_rates(&state, target, g_fn, &mut cache)?;
            let row = lifted_index(a, direction);
            for (op, rate) in table.materialize(graph) {
                let next = causal_zigzag::ops::apply_operator(graph, &op)?;
                let b = catalog
                    .class_of(&next)
                    .ok_or_else(|| Error::InvalidArgument("next state outside catalog".into()))?;
                q[row][lifted_index(b, direction)] += rate;
            }
            q[row][lifted_index(a, direction.flip())] +=
                table.turn_rate() * corrupt_turn.unwrap_or(1.0);
            let off: f64 = (0..2 * k).filter(|&b| b != row).map(|b| q[row][b]).sum();
            q[row][row] = -off;
        }
    }
    let residual = stationarity_residual(&pi, &q);
    Ok(GeneratorCheck { pi, q, residual })
}

/// Residual of the stationarity equation for the chosen sampler on the
/// catalog's state space.
pub fn exact_stationarity_check(
    kind: SamplerKind,
    catalog: &MecCatalog,
    target: &TargetDistribution,
    g_fn: BalancingFunction,
) -> Result<f64> {
    Ok(match kind {
        SamplerKind::Zanella => zanella_generator(catalog, target, g_fn)?.residual,
        SamplerKind::ZigZag => zigzag_generator(catalog, target, g_fn, None)?.residual,
    })
}
