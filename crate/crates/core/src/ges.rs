//! Two-phase greedy equivalence search over the operator layer: a forward
//! phase of score-improving Inserts, then a backward phase of
//! score-improving Deletes.

use std::sync::Arc;

use crate::error::Result;
use crate::graph::Cpdag;
use crate::ops::{apply_operator, list_operators, Operator};
use crate::score::{cpdag_log_score, operator_log_delta, DataMatrix, ScoreCache, TargetDistribution};

/// Improvements below this threshold terminate a phase, so numerically flat
/// plateaus do not loop.
const IMPROVEMENT_EPS: f64 = 1e-10;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GesPhase {
    Forward,
    Backward,
}

#[derive(Clone, Debug)]
pub struct GesStep {
    pub phase: GesPhase,
    pub op: Operator,
    pub delta: f64,
    /// State after applying `op`.
    pub graph: Cpdag,
}

#[derive(Clone, Debug)]
pub struct GesTrajectory {
    pub start: Cpdag,
    pub steps: Vec<GesStep>,
    pub final_score: f64,
}

impl GesTrajectory {
    pub fn result(&self) -> &Cpdag {
        self.steps.last().map(|s| &s.graph).unwrap_or(&self.start)
    }

    pub fn forward_states(&self) -> impl Iterator<Item = &Cpdag> {
        self.steps
            .iter()
            .filter(|s| s.phase == GesPhase::Forward)
            .map(|s| &s.graph)
    }

    pub fn backward_states(&self) -> impl Iterator<Item = &Cpdag> {
        self.steps
            .iter()
            .filter(|s| s.phase == GesPhase::Backward)
            .map(|s| &s.graph)
    }
}

/// One greedy phase: repeatedly apply the operator of the wanted kind with
/// maximal positive score delta; ties break towards the lexicographically
/// smallest operator (the listing order).
fn greedy_phase(
    graph: &mut Cpdag,
    phase: GesPhase,
    target: &TargetDistribution,
    cache: &mut ScoreCache,
    steps: &mut Vec<GesStep>,
) -> Result<()> {
    loop {
        let mut best: Option<(Operator, f64)> = None;
        for op in list_operators(graph) {
            if op.is_insert() != (phase == GesPhase::Forward) {
                continue;
            }
            let delta = operator_log_delta(graph, &op, target, cache)?;
            if delta > IMPROVEMENT_EPS && best.as_ref().is_none_or(|(_, d)| delta > *d) {
                best = Some((op, delta));
            }
        }
        let Some((op, delta)) = best else {
            return Ok(());
        };
        *graph = apply_operator(graph, &op)?;
        steps.push(GesStep {
            phase,
            op,
            delta,
            graph: graph.clone(),
        });
    }
}

/// Greedy equivalence search: forward insertions then backward deletions,
/// starting from `start` (default: the empty graph).
pub fn ges_run(
    data: Arc<DataMatrix>,
    penalty: f64,
    start: Option<Cpdag>,
    cache: &mut ScoreCache,
) -> Result<GesTrajectory> {
    let start = start.unwrap_or_else(|| Cpdag::empty(data.p()));
    let target = TargetDistribution::bic(data, penalty, 1.0);
    let mut graph = start.clone();
    let mut steps = Vec::new();
    greedy_phase(&mut graph, GesPhase::Forward, &target, cache, &mut steps)?;
    greedy_phase(&mut graph, GesPhase::Backward, &target, cache, &mut steps)?;
    let final_score = cpdag_log_score(&graph, &target, cache)?;
    Ok(GesTrajectory {
        start,
        steps,
        final_score,
    })
}
