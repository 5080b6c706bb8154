//! Parameter-expanded Metropolis-within-Gibbs estimation.
//!
//! One scan updates, in fixed order: item cutpoints jointly with latent
//! responses, coefficient inclusion flags jointly with coefficients (the
//! spike collapsed out), attribute levels jointly with latent scores (the
//! level collapsed over), attribute thresholds, the unrestricted
//! covariance with the regression coefficients, and the inclusion rate.
//! Cutpoint proposal sds adapt during burn-in only, so the recorded part
//! of the chain is a fixed-kernel Markov chain. Identified parameters are
//! recovered by rescaling at recording time.

mod output;
mod state;
mod steps;

pub use output::{ChainOutput, DrawBlock};
pub use state::ChainState;
pub use steps::{
    alpha_collapsed_ln_weights, cowles_log_ratio, delta_one_probability, omega_beta_params,
};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Burn-in adaptation window for the cutpoint proposal sds.
pub const TUNE_WINDOW: usize = 100;

/// Runs `config.chain_length` full scans, recording after `config.burnin`.
///
/// Iterations are numbered from zero in error reports. Draw order is
/// deterministic, so equal seeds and inputs give identical output.
pub fn run_chain(mut state: ChainState, rng: &mut RngStream) -> Result<ChainOutput> {
    let total = state.config.chain_length;
    let burnin = state.config.burnin;
    let mut out = ChainOutput::new(&state);
    out.reserve(total.saturating_sub(burnin));
    for iter in 0..total {
        state.in_burnin = iter < burnin;
        tag("cutpoints", iter, steps::step_cutpoints_and_ystar(&mut state, rng))?;
        tag(
            "coefficients",
            iter,
            steps::step_inclusion_and_coefficients(&mut state, rng),
        )?;
        tag("attributes", iter, steps::step_attributes(&mut state, rng))?;
        tag("thresholds", iter, steps::step_thresholds(&mut state, rng))?;
        tag(
            "covariance",
            iter,
            steps::step_covariance_and_regression(&mut state, rng),
        )?;
        tag(
            "inclusion-rate",
            iter,
            steps::step_inclusion_rate(&mut state, rng),
        )?;
        if state.in_burnin && (iter + 1) % TUNE_WINDOW == 0 {
            state.tune_cutpoint_proposals(TUNE_WINDOW);
        }
        if state.config.check_invariants {
            tag("invariants", iter, state.check_invariants())?;
        }
        if iter >= burnin {
            tag("record", iter, out.record(&state))?;
        }
    }
    out.finish(&state);
    Ok(out)
}

fn tag<T>(block: &'static str, iteration: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Numerical { .. } => e,
        other => Error::Numerical {
            block,
            iteration,
            message: other.to_string(),
        },
    })
}
