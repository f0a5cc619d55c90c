//! Independent brute-force ground truth for the operator and sampler
//! layers: exhaustive enumeration of DAGs and their equivalence classes,
//! naive operator application through PDAG completion, definition-level
//! validity checking, and exact stationarity verification of the jump
//! processes on small state spaces.
//!
//! Everything here trades asymptotics for independence from the fast paths
//! it checks; it is compiled into tests and the CLI `verify` surface only.

mod brute;
mod catalog;
mod meek;
mod naive;
mod report;
mod stationarity;

pub use brute::{brute_force_operators, delete_valid_by_definition, insert_valid_by_definition};
pub use catalog::{enumerate_dags, enumerate_mecs, MecCatalog};
pub use meek::meek_closure;
pub use naive::{consistent_extension, naive_apply};
pub use report::verification_report;
pub use stationarity::{
    exact_stationarity_check, stationarity_residual, zanella_generator, zigzag_generator,
    GeneratorCheck,
};
