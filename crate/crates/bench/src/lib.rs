//! Synthetic benchmarks for the `keysel` tracker: scenario generation, a
//! brute-force reference tracker, the key-versus-random selection experiment
//! and random hyperparameter search.

pub mod experiment;
pub mod oracle;
pub mod scenario;
pub mod search;
pub mod suite;

pub use experiment::{mean_score, score_run, selection_experiment, SelectionRow, SelectionTable};
pub use oracle::{oracle_track, ExhaustiveSolver, ORACLE_LIMIT};
pub use scenario::{generate_scenario, Motion, ObjectSpec, ScenarioSpec};
pub use search::{search_hyperparams, SearchOutcome, SearchSpace, Trial};
