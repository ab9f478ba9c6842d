//! Placement optimizers: the genetic algorithm, exhaustive enumeration,
//! two-scheme mode selection, and the random/probabilistic baselines.

mod baseline;
mod exhaustive;
mod ga;
mod mode;

pub use baseline::{baseline_expected_objective, baseline_tradeoffs, Baseline, BaselineEstimate};
pub use exhaustive::{
    binomial, enumerate_tradeoffs, exhaustive_search, search_space, ExhaustiveConfig, ExhaustiveOutcome, SearchSpace,
    DEFAULT_BUDGET,
};
pub use ga::{
    crossover, ga_optimize, initial_population, mutate, rank_weights, repair, sus_select, GaConfig, GaOutcome,
    GaPopulation, GenerationRecord, STALL_TOL,
};
pub use mode::{mode_select, ModeChoice};

use crate::scenario::Scenario;

/// `L'`: rows that may hold cached files, `min(sum M_n, L)`.
pub fn support_rows(scenario: &Scenario) -> usize {
    scenario.total_cache().min(scenario.files())
}
