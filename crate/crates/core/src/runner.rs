//! Multi-chain fit orchestration: data-driven initialization plus one
//! sampling run per chain, with chains spread over the ambient rayon pool.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::init::init_chain_state;
use crate::rng::RngStream;
use crate::sampler::{run_chain, ChainOutput};

/// One fitted chain with whatever the initializer had to say.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub output: ChainOutput,
    pub init_warnings: Vec<String>,
}

/// Fits `chains` independent chains to the same data. Chain c draws from
/// substream c of `seed`, so the set of results is reproducible regardless
/// of thread scheduling. Optional names replace the generated item and
/// covariate labels in the outputs.
pub fn run_chains(
    config: &ModelConfig,
    y: &DMatrix<u8>,
    x: &DMatrix<f64>,
    item_names: Option<&[String]>,
    covariate_names: Option<&[String]>,
    seed: u64,
    chains: usize,
) -> Result<Vec<FitOutcome>> {
    if chains == 0 {
        return Err(Error::Usage("at least one chain is required".into()));
    }
    if let Some(names) = item_names {
        if names.len() != config.j() {
            return Err(Error::Config(format!(
                "{} item names for {} items",
                names.len(),
                config.j()
            )));
        }
    }
    if let Some(names) = covariate_names {
        if names.len() != config.d {
            return Err(Error::Config(format!(
                "{} covariate names for {} covariate columns",
                names.len(),
                config.d
            )));
        }
    }
    (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c as u64);
            let (mut state, report) = init_chain_state(config, y, x, &mut rng)?;
            if let Some(names) = item_names {
                state.item_names = names.to_vec();
            }
            if let Some(names) = covariate_names {
                state.covariate_names = names.to_vec();
            }
            let output = run_chain(state, &mut rng)?;
            Ok(FitOutcome {
                output,
                init_warnings: report.warnings,
            })
        })
        .collect()
}
