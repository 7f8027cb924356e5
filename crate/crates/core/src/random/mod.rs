//! Testers for random path/cycle clusterings: the zero-query uniformity tester,
//! cell learning by label queries and the singleton-based tester, plus the
//! Poissonized count model they read.

pub mod alg1;
pub mod counts;
pub mod learn;
pub mod singleton;

pub use alg1::{algorithm1, Alg1Config, Alg1Outcome};
pub use counts::{clustered_poisson_counts, y_statistic, ClusteredSampleCounts};
pub use learn::{learn_cells_by_binary_search, LearnedCells};
pub use singleton::{
    instance_optimal_budget, instance_optimal_identity, io_statistic_accepts, singleton_tester, SingletonOutcome,
    SingletonTesterConfig,
};
