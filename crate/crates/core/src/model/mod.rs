//! Model structure: attribute profiles, the cumulative-coding design
//! expansion, the monotonicity cone, response probabilities, and the map
//! from expanded sampling coordinates back to identified parameters.

mod effects;
mod response;
mod transform;

pub use effects::EffectTable;
pub use response::{eta_for_item, item_response_prob};
pub use transform::{transform_to_original, OriginalParams};

use nalgebra::DMatrix;

/// Measurement-side parameters: coefficients, inclusion indicators, and
/// item cutpoints. `kappa[j]` has `M_j + 1` entries: -inf, 0, the free
/// interior cutpoints, +inf.
#[derive(Debug, Clone)]
pub struct ItemParams {
    pub beta: DMatrix<f64>,
    pub delta: DMatrix<u8>,
    pub kappa: Vec<Vec<f64>>,
}

/// Structural-side parameters in identified coordinates. `gamma[k]` has
/// `L + 1` entries: -inf, 0, the free interior thresholds, +inf.
#[derive(Debug, Clone)]
pub struct StructuralParams {
    pub lambda: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub gamma: Vec<Vec<f64>>,
}

/// Index of the half-open bin (cuts[m], cuts[m+1]] containing `x`.
/// `cuts` must be strictly increasing with cuts[0] = -inf and a +inf end.
pub fn bin_of(x: f64, cuts: &[f64]) -> usize {
    let mut m = 0;
    while m + 2 < cuts.len() && x > cuts[m + 1] {
        m += 1;
    }
    m
}

/// Builds a full cutpoint vector [-inf, 0, interior..., +inf] from the free
/// interior part.
pub fn cuts_from_interior(interior: &[f64]) -> Vec<f64> {
    let mut cuts = Vec::with_capacity(interior.len() + 3);
    cuts.push(f64::NEG_INFINITY);
    cuts.push(0.0);
    cuts.extend_from_slice(interior);
    cuts.push(f64::INFINITY);
    cuts
}

/// Strict interior ordering check for a full cutpoint vector.
pub fn cuts_strictly_increasing(cuts: &[f64]) -> bool {
    cuts.windows(2).all(|w| w[0] < w[1])
}
