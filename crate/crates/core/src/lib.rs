//! Continuous-time Markov jump samplers over Markov equivalence classes
//! of DAGs, represented as CPDAGs.
//!
//! The crate provides:
//!
//! - [`graph`]: partially directed graphs, chain components, maximum
//!   cardinality search, consistent extensions and DAG-to-CPDAG completion;
//! - [`ops`]: the GES `Insert`/`Delete` operator layer with linear-time
//!   application and polynomial-time counting, listing and uniform sampling
//!   of locally valid operators;
//! - [`score`]: Markov-equivalent scoring (uniform and Gaussian BIC) with
//!   local-score caching and operator score deltas;
//! - [`sampler`]: the reversible Zanella process and the non-reversible
//!   lifted zig-zag process, with trace recording and summaries;
//! - [`ges`]: two-phase greedy equivalence search;
//! - [`synth`]: synthetic linear-Gaussian datasets for benchmarks and tests.

pub mod error;
pub mod ges;
pub mod graph;
pub mod ops;
pub mod sampler;
pub mod score;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{dag_to_cpdag, mcs_extension, same_mec, Cpdag, Dag, Pdag, Vertex};
pub use ops::{
    apply_operator, count_operators, delete_valid, insert_valid, inverse_operator,
    list_operators, sample_operator_uniform, Operator, OperatorCount,
};
pub use sampler::{
    first_hitting_time, run, BalancingFunction, Direction, LiftedState, RateTable, SamplerKind,
    StopRule, Trace,
};
pub use score::{cpdag_log_score, operator_log_delta, DataMatrix, ScoreCache, Scorer, TargetDistribution};
