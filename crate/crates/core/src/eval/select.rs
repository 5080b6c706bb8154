//! Model comparison across candidate attribute structures.

use serde::Serialize;

use crate::sampler::ChainOutput;

use super::ppc::MannWhitney;

/// One candidate's comparison summary: dimensions, parameter counts, the
/// predictive rank statistic, and posterior coefficient sparsity.
#[derive(Debug, Clone, Serialize)]
pub struct ModelComparisonRow {
    pub label: String,
    pub k: usize,
    pub l: usize,
    /// Number of attribute profiles L^K.
    pub classes: usize,
    /// Measurement parameters: J coefficients per effect plus the free
    /// cutpoints, J*H + sum_j (M_j - 2).
    pub measurement_params: usize,
    /// Structural parameters: regression loadings, free thresholds, and
    /// correlations, D*K + (L-2)*K + K(K-1)/2.
    pub structural_params: usize,
    /// Mann-Whitney U of observed-vs-replicate against replicate-pair
    /// discrepancies.
    pub u: f64,
    /// Its normal score; candidates are ranked by this, ascending.
    pub z: f64,
    /// Fraction of coefficient columns whose central 95% posterior
    /// interval covers zero.
    pub beta_sparsity: f64,
}

/// Builds a comparison row from a fitted chain and its predictive
/// discrepancy comparison.
pub fn comparison_row(label: impl Into<String>, out: &ChainOutput, mw: MannWhitney) -> ModelComparisonRow {
    let cfg = &out.config;
    let j = cfg.j();
    let h = if j == 0 { 0 } else { out.beta.cols() / j };
    let free_cuts: usize = cfg.m.iter().map(|m| m - 2).sum();
    ModelComparisonRow {
        label: label.into(),
        k: cfg.k,
        l: cfg.l,
        classes: cfg.l.pow(cfg.k as u32),
        measurement_params: j * h + free_cuts,
        structural_params: cfg.d * cfg.k + (cfg.l - 2) * cfg.k + cfg.k * (cfg.k - 1) / 2,
        u: mw.u,
        z: mw.z,
        beta_sparsity: beta_sparsity(out),
    }
}

/// Fraction of coefficient columns whose empirical 2.5% and 97.5%
/// order statistics bracket zero.
pub fn beta_sparsity(out: &ChainOutput) -> f64 {
    let cols = out.beta.cols();
    let rows = out.beta.rows();
    if cols == 0 || rows == 0 {
        return f64::NAN;
    }
    let mut covered = 0usize;
    let mut buf = Vec::with_capacity(rows);
    for c in 0..cols {
        buf.clear();
        buf.extend((0..rows).map(|r| out.beta.value(r, c)));
        buf.sort_by(f64::total_cmp);
        let lo = buf[(0.025 * (rows - 1) as f64).floor() as usize];
        let hi = buf[(0.975 * (rows - 1) as f64).ceil() as usize];
        if lo <= 0.0 && 0.0 <= hi {
            covered += 1;
        }
    }
    covered as f64 / cols as f64
}

/// Ranks candidates by predictive score, best (smallest z) first. NaN
/// scores sort last.
pub fn select_model(mut rows: Vec<ModelComparisonRow>) -> Vec<ModelComparisonRow> {
    rows.sort_by(|a, b| a.z.total_cmp(&b.z));
    rows
}
