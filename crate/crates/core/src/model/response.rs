//! Cumulative probit response probabilities.

use nalgebra::DMatrix;

use super::EffectTable;
use crate::dist::normal_interval_prob;

/// P(Y_j = m) for a respondent whose design row gives linear predictor
/// `dbeta`, under cutpoints `kappa_j` (length M_j + 1, infinite ends).
pub fn item_response_prob(dbeta: f64, kappa_j: &[f64], m: usize) -> f64 {
    normal_interval_prob(kappa_j[m] - dbeta, kappa_j[m + 1] - dbeta)
}

/// Class-conditional response probability table for one item: rows are the
/// attribute profiles in enumeration order, columns the response levels.
pub fn eta_for_item(table: &EffectTable, beta_j: &[f64], kappa_j: &[f64]) -> DMatrix<f64> {
    let mj = kappa_j.len() - 1;
    let s = table.num_states();
    DMatrix::from_fn(s, mj, |c, m| {
        let dbeta: f64 = table.state_design()[c]
            .iter()
            .zip(beta_j)
            .map(|(d, b)| d * b)
            .sum();
        item_response_prob(dbeta, kappa_j, m)
    })
}
