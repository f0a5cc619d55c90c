//! The continuous-time jump-process engine: the reversible Zanella process
//! and the non-reversible lifted zig-zag process over CPDAGs.
//!
//! All rates are computed and compared in log domain; categorical draws use
//! the Gumbel-max construction over log rates, so coldness values up to the
//! GES limit do not overflow.

mod trace;

pub use trace::{
    first_hitting_time, summarize, Trace, TraceEvent, TraceEventKind, TraceHeader, TraceSummary,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Cpdag;
use crate::ops::{
    apply_operator, count_operators, list_operators, sample_from_counts, Operator, OperatorCount,
    OperatorSide,
};
use crate::score::{cpdag_log_score, operator_log_delta, ScoreCache, TargetDistribution};

/// Balancing function `g` with `g(t) = t·g(1/t)`, evaluated in log domain.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BalancingFunction {
    /// `g(t) = sqrt(t)`
    Sqrt,
    /// `g(t) = min(1, t)`
    MinOne,
    /// `g(t) = t / (1 + t)`
    Ratio,
}

impl BalancingFunction {
    /// `log g(e^u)`.
    pub fn log_eval(&self, u: f64) -> f64 {
        match self {
            BalancingFunction::Sqrt => u / 2.0,
            BalancingFunction::MinOne => u.min(0.0),
            // log(t/(1+t)) = -log1p(e^{-u}), computed on the stable side
            BalancingFunction::Ratio => {
                if u >= 0.0 {
                    -(-u).exp().ln_1p()
                } else {
                    u - u.exp().ln_1p()
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BalancingFunction::Sqrt => "sqrt",
            BalancingFunction::MinOne => "min1",
            BalancingFunction::Ratio => "ratio",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(BalancingFunction::Sqrt),
            "min1" => Ok(BalancingFunction::MinOne),
            "ratio" => Ok(BalancingFunction::Ratio),
            _ => Err(Error::InvalidArgument(format!(
                "unknown balancing function `{s}` (expected sqrt, min1 or ratio)"
            ))),
        }
    }
}

/// Direction of movement of the lifted chain: `Up` inserts edges, `Down`
/// deletes them.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Direction::Up => 1,
            Direction::Down => -1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Direction> {
        match v {
            1 => Ok(Direction::Up),
            -1 => Ok(Direction::Down),
            _ => Err(Error::InvalidArgument(format!("direction must be +1 or -1, got {v}"))),
        }
    }

    fn side(self) -> OperatorSide {
        match self {
            Direction::Up => OperatorSide::Inserts,
            Direction::Down => OperatorSide::Deletes,
        }
    }
}

/// A CPDAG together with a direction of movement.
#[derive(Clone, Debug)]
pub struct LiftedState {
    pub graph: Cpdag,
    pub direction: Direction,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SamplerKind {
    Zanella,
    ZigZag,
}

impl SamplerKind {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Zanella => "zanella",
            SamplerKind::ZigZag => "zigzag",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "zanella" => Ok(SamplerKind::Zanella),
            "zigzag" => Ok(SamplerKind::ZigZag),
            _ => Err(Error::InvalidArgument(format!(
                "unknown sampler `{s}` (expected zanella or zigzag)"
            ))),
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.filter(|v| *v > f64::NEG_INFINITY).collect();
    if vals.is_empty() {
        return f64::NEG_INFINITY;
    }
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// `ln(e^a - e^b)` for `a >= b`; `-inf` when they cancel.
fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    debug_assert!(a >= b);
    let d = (b - a).exp();
    if d >= 1.0 {
        f64::NEG_INFINITY
    } else {
        a + (-d).ln_1p()
    }
}

/// Move rates: either an explicit per-operator list (scored targets) or the
/// exact operator counts of the uniform target, where every operator carries
/// the same rate `g(1)` and sampling goes through the counting structures.
enum MoveRates {
    Listed(Vec<(Operator, f64)>),
    Uniform {
        counts: OperatorCount,
        side: OperatorSide,
        per_op_log_rate: f64,
    },
}

/// Outgoing rates of a state: move entries plus (for the lifted chain) a
/// direction-flip rate. The total rate `Λ` is their sum.
pub struct RateTable {
    moves: MoveRates,
    turn_log_rate: f64,
    move_log_total: f64,
    log_total: f64,
}

/// What the process does at a jump.
#[derive(Clone, Debug, PartialEq)]
pub enum JumpEvent {
    Move(Operator),
    Turn,
}

impl RateTable {
    pub fn log_total_rate(&self) -> f64 {
        self.log_total
    }

    /// `Λ`; may overflow to `inf` for extreme coldness, the log form is the
    /// one used internally.
    pub fn total_rate(&self) -> f64 {
        self.log_total.exp()
    }

    pub fn turn_rate(&self) -> f64 {
        self.turn_log_rate.exp()
    }

    pub fn move_rate_total(&self) -> f64 {
        self.move_log_total.exp()
    }

    /// Explicit `(operator, rate)` entries, materializing the uniform
    /// representation through the operator listing. Intended for small state
    /// spaces (generator assembly, diagnostics).
    pub fn materialize(&self, g: &Cpdag) -> Vec<(Operator, f64)> {
        match &self.moves {
            MoveRates::Listed(entries) => entries
                .iter()
                .map(|(op, lr)| (op.clone(), lr.exp()))
                .collect(),
            MoveRates::Uniform {
                side,
                per_op_log_rate,
                ..
            } => {
                let rate = per_op_log_rate.exp();
                list_operators(g)
                    .filter(|op| match side {
                        OperatorSide::All => true,
                        OperatorSide::Inserts => op.is_insert(),
                        OperatorSide::Deletes => !op.is_insert(),
                    })
                    .map(|op| (op, rate))
                    .collect()
            }
        }
    }

    fn sample_event<R: Rng + ?Sized>(&self, g: &Cpdag, rng: &mut R) -> JumpEvent {
        match &self.moves {
            MoveRates::Listed(entries) => {
                let mut best = f64::NEG_INFINITY;
                let mut pick: Option<&Operator> = None;
                for (op, lr) in entries {
                    if *lr == f64::NEG_INFINITY {
                        continue;
                    }
                    let score = lr + gumbel(rng);
                    if score > best {
                        best = score;
                        pick = Some(op);
                    }
                }
                if self.turn_log_rate > f64::NEG_INFINITY
                    && self.turn_log_rate + gumbel(rng) > best
                {
                    return JumpEvent::Turn;
                }
                JumpEvent::Move(pick.expect("positive total rate").clone())
            }
            MoveRates::Uniform { counts, side, .. } => {
                // Gumbel-max between the aggregated move group and the turn,
                // then a uniform operator within the group.
                let move_score = if self.move_log_total > f64::NEG_INFINITY {
                    self.move_log_total + gumbel(rng)
                } else {
                    f64::NEG_INFINITY
                };
                let turn_score = if self.turn_log_rate > f64::NEG_INFINITY {
                    self.turn_log_rate + gumbel(rng)
                } else {
                    f64::NEG_INFINITY
                };
                if turn_score > move_score {
                    JumpEvent::Turn
                } else {
                    let op = sample_from_counts(g, counts, *side, rng)
                        .expect("move group has positive rate");
                    JumpEvent::Move(op)
                }
            }
        }
    }
}

fn gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>().max(1e-300);
    -(-u.ln()).ln()
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>();
    -(1.0 - u).ln()
}

/// Zanella process rates: one entry per locally valid operator with rate
/// `g(π{η}/π{γ})`; no turn channel.
pub fn zanella_rates(
    g: &Cpdag,
    target: &TargetDistribution,
    g_fn: BalancingFunction,
    cache: &mut ScoreCache,
) -> Result<RateTable> {
    let table = if target.is_uniform() {
        let counts = count_operators(g);
        let per = g_fn.log_eval(0.0);
        let move_log_total = per + counts.total().to_f64().ln();
        RateTable {
            moves: MoveRates::Uniform {
                counts,
                side: OperatorSide::All,
                per_op_log_rate: per,
            },
            turn_log_rate: f64::NEG_INFINITY,
            move_log_total,
            log_total: move_log_total,
        }
    } else {
        let mut entries = Vec::new();
        for op in list_operators(g) {
            let delta = operator_log_delta(g, &op, target, cache)?;
            entries.push((op, g_fn.log_eval(delta)));
        }
        let move_log_total = log_sum_exp(entries.iter().map(|(_, lr)| *lr));
        RateTable {
            moves: MoveRates::Listed(entries),
            turn_log_rate: f64::NEG_INFINITY,
            move_log_total,
            log_total: move_log_total,
        }
    };
    // On two or more vertices some operator always exists.
    assert!(
        g.n() < 2 || table.log_total > f64::NEG_INFINITY,
        "zero total rate is impossible for n >= 2"
    );
    Ok(table)
}

/// Lifted zig-zag rates: with direction up only Insert moves (rate
/// `g(π{η}/π{γ})`), with direction down only Delete moves; the turn rate is
/// the positive part of (opposite-direction total − same-direction total).
pub fn zigzag_rates(
    state: &LiftedState,
    target: &TargetDistribution,
    g_fn: BalancingFunction,
    cache: &mut ScoreCache,
) -> Result<RateTable> {
    let g = &state.graph;
    let want_inserts = state.direction == Direction::Up;
    let (moves, same_log_total, opp_log_total) = if target.is_uniform() {
        let counts = count_operators(g);
        let per = g_fn.log_eval(0.0);
        let (same, opp) = if want_inserts {
            (&counts.insert_total, &counts.delete_total)
        } else {
            (&counts.delete_total, &counts.insert_total)
        };
        let same_log = per + same.to_f64().ln();
        let opp_log = per + opp.to_f64().ln();
        (
            MoveRates::Uniform {
                side: state.direction.side(),
                per_op_log_rate: per,
                counts,
            },
            same_log,
            opp_log,
        )
    } else {
        let mut entries = Vec::new();
        let mut opp_logs = Vec::new();
        for op in list_operators(g) {
            let delta = operator_log_delta(g, &op, target, cache)?;
            let lr = g_fn.log_eval(delta);
            if op.is_insert() == want_inserts {
                entries.push((op, lr));
            } else {
                opp_logs.push(lr);
            }
        }
        let same = log_sum_exp(entries.iter().map(|(_, lr)| *lr));
        let opp = log_sum_exp(opp_logs.into_iter());
        (MoveRates::Listed(entries), same, opp)
    };
    let turn_log_rate = if opp_log_total > same_log_total {
        log_diff_exp(opp_log_total, same_log_total)
    } else {
        f64::NEG_INFINITY
    };
    let log_total = log_sum_exp([same_log_total, turn_log_rate].into_iter());
    let table = RateTable {
        moves,
        turn_log_rate,
        move_log_total: same_log_total,
        log_total,
    };
    assert!(
        g.n() < 2 || table.log_total > f64::NEG_INFINITY,
        "a lifted state cannot be stuck when the target is strictly positive"
    );
    Ok(table)
}

// Holding times are kept strictly positive and finite even in the GES limit,
// where total rates overflow or underflow the linear f64 range.
const MIN_HOLDING: f64 = f64::MIN_POSITIVE;
const MAX_HOLDING: f64 = 1e290;

fn draw_holding<R: Rng + ?Sized>(rates: &RateTable, rng: &mut R) -> f64 {
    let e = exp1(rng);
    let h = (e.ln() - rates.log_total_rate()).exp();
    h.clamp(MIN_HOLDING, MAX_HOLDING)
}

/// Draws `(holding time, event)` without applying the event.
pub fn step_event<R: Rng + ?Sized>(
    state: &LiftedState,
    rates: &RateTable,
    rng: &mut R,
) -> (f64, JumpEvent) {
    let holding = draw_holding(rates, rng);
    let event = rates.sample_event(&state.graph, rng);
    (holding, event)
}

/// Draws a holding time and the next state: a turn flips the direction, an
/// operator event applies the operator and keeps the direction.
pub fn step<R: Rng + ?Sized>(
    state: &LiftedState,
    rates: &RateTable,
    rng: &mut R,
) -> Result<(f64, LiftedState)> {
    let (holding, event) = step_event(state, rates, rng);
    let next = match event {
        JumpEvent::Turn => LiftedState {
            graph: state.graph.clone(),
            direction: state.direction.flip(),
        },
        JumpEvent::Move(op) => LiftedState {
            graph: apply_operator(&state.graph, &op)?,
            direction: state.direction,
        },
    };
    Ok((holding, next))
}

/// One exclusive simulation state: current lifted state, target, cache and
/// seeded generator. Multiple chains run concurrently with independent
/// seeds and caches.
pub struct Chain {
    kind: SamplerKind,
    state: LiftedState,
    target: TargetDistribution,
    g_fn: BalancingFunction,
    cache: ScoreCache,
    rng: ChaCha8Rng,
    time: f64,
    jumps: u64,
    log_mass: f64,
}

/// What happened at one jump.
pub struct StepRecord {
    pub holding: f64,
    pub event: JumpEvent,
}

impl Chain {
    pub fn new(
        kind: SamplerKind,
        start: Cpdag,
        direction: Direction,
        target: TargetDistribution,
        g_fn: BalancingFunction,
        seed: u64,
    ) -> Result<Chain> {
        let mut cache = ScoreCache::new();
        let log_mass = cpdag_log_score(&start, &target, &mut cache)?;
        Ok(Chain {
            kind,
            state: LiftedState {
                graph: start,
                direction,
            },
            target,
            g_fn,
            cache,
            rng: ChaCha8Rng::seed_from_u64(seed),
            time: 0.0,
            jumps: 0,
            log_mass,
        })
    }

    pub fn state(&self) -> &LiftedState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn jumps(&self) -> u64 {
        self.jumps
    }

    /// Unnormalized log mass of the current graph, maintained across jumps.
    pub fn log_mass(&self) -> f64 {
        self.log_mass
    }

    pub fn rates(&mut self) -> Result<RateTable> {
        match self.kind {
            SamplerKind::Zanella => {
                zanella_rates(&self.state.graph, &self.target, self.g_fn, &mut self.cache)
            }
            SamplerKind::ZigZag => {
                zigzag_rates(&self.state, &self.target, self.g_fn, &mut self.cache)
            }
        }
    }

    /// Draws the next `(holding time, event)` without applying it.
    pub fn propose(&mut self) -> Result<(f64, JumpEvent)> {
        let rates = self.rates()?;
        Ok(step_event(&self.state, &rates, &mut self.rng))
    }

    /// Applies a proposed jump: advances time past the holding time and
    /// moves to the next state.
    pub fn commit(&mut self, holding: f64, event: &JumpEvent) -> Result<()> {
        let entered = self.time + holding;
        // keep jump times strictly increasing even when holding underflows
        self.time = if entered > self.time {
            entered
        } else {
            self.time.next_up()
        };
        match event {
            JumpEvent::Turn => {
                self.state.direction = self.state.direction.flip();
            }
            JumpEvent::Move(op) => {
                self.log_mass +=
                    operator_log_delta(&self.state.graph, op, &self.target, &mut self.cache)?;
                self.state.graph = apply_operator(&self.state.graph, op)?;
            }
        }
        self.jumps += 1;
        Ok(())
    }

    /// Performs one jump.
    pub fn advance(&mut self) -> Result<StepRecord> {
        let (holding, event) = self.propose()?;
        self.commit(holding, &event)?;
        Ok(StepRecord { holding, event })
    }
}

/// Stop criterion for [`run`]: a jump budget and/or a time horizon.
#[derive(Clone, Copy, Debug, Default)]
pub struct StopRule {
    pub max_jumps: Option<u64>,
    pub max_time: Option<f64>,
}

impl StopRule {
    pub fn jumps(n: u64) -> StopRule {
        StopRule {
            max_jumps: Some(n),
            max_time: None,
        }
    }

    pub fn time(t: f64) -> StopRule {
        StopRule {
            max_jumps: None,
            max_time: Some(t),
        }
    }
}

/// Simulates the jump chain from `start` until the stop criterion and
/// records every event. Deterministic given the seed.
#[allow(clippy::too_many_arguments)]
pub fn run(
    kind: SamplerKind,
    start: Cpdag,
    start_direction: Direction,
    target: TargetDistribution,
    g_fn: BalancingFunction,
    stop: StopRule,
    seed: u64,
    snapshot_stride: u64,
    names: Option<Vec<String>>,
) -> Result<Trace> {
    if stop.max_jumps.is_none() && stop.max_time.is_none() {
        return Err(Error::InvalidArgument(
            "a stop criterion (max jumps or max time) is required".into(),
        ));
    }
    let names = names.unwrap_or_else(|| crate::graph::text::default_names(start.n()));
    if names.len() != start.n() {
        return Err(Error::InvalidArgument(
            "vertex name count does not match the start graph".into(),
        ));
    }
    let header = TraceHeader {
        n: start.n(),
        kind,
        target: trace::target_label(&target).to_string(),
        g_fn,
        beta: target.beta(),
        penalty: match &target {
            TargetDistribution::Scored {
                scorer: crate::score::Scorer::Bic { penalty, .. },
                ..
            } => *penalty,
            _ => 0.0,
        },
        seed,
        stride: snapshot_stride,
        names,
    };
    let mut chain = Chain::new(kind, start, start_direction, target, g_fn, seed)?;
    let mut trace = Trace::new(header);
    trace.record(&chain, TraceEventKind::Init, None, true);

    let total_time = loop {
        if stop.max_jumps.is_some_and(|m| chain.jumps() >= m) {
            // close the last interval with the final state's own holding time
            let (holding, _) = chain.propose()?;
            break chain.time() + holding;
        }
        let (holding, event) = chain.propose()?;
        if stop.max_time.is_some_and(|t| chain.time() + holding > t) {
            // still sitting in the current state at the horizon
            break stop.max_time.expect("checked");
        }
        chain.commit(holding, &event)?;
        let (kind, op) = match &event {
            JumpEvent::Turn => (TraceEventKind::Turn, None),
            JumpEvent::Move(op) => (TraceEventKind::from_operator(op), Some(op)),
        };
        let snap = chain.jumps() % snapshot_stride.max(1) == 0;
        trace.record(&chain, kind, op, snap);
    };
    trace.total_time = total_time;
    trace.ensure_final_snapshot(&chain);
    Ok(trace)
}
