//! Chain evaluation: convergence diagnostics, recovery scoring against a
//! known truth, posterior predictive checks, and model comparison.

mod geweke;
mod ppc;
pub(crate) mod recovery;
mod select;

pub use geweke::{geweke_z, GewekeResult};
pub use ppc::{
    extract_draw, l1_distance, mann_whitney_u, pairwise_count_statistic,
    posterior_predictive_draws, ppc_distance_samples, MannWhitney,
};
pub use recovery::{align_attributes, permutations, recovery_report, RecoveryReport};
pub use select::{beta_sparsity, comparison_row, select_model, ModelComparisonRow};
