//! Map from expanded sampling coordinates to identified parameters.
//!
//! The sampler works with an unrestricted covariance Sigma and scaled
//! thresholds/coefficients/latent scores. Identification divides each
//! attribute's coordinates by the square root of its Sigma diagonal:
//! R = V^{-1/2} Sigma V^{-1/2}, lambda = lambda~ V^{-1/2},
//! gamma_k = gamma~_k / sqrt(v_k), alpha* = alpha~* V^{-1/2}.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OriginalParams {
    pub r: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub alpha_star: DMatrix<f64>,
}

pub fn transform_to_original(
    sigma: &DMatrix<f64>,
    lambda_t: &DMatrix<f64>,
    gamma_t: &[Vec<f64>],
    alpha_star_t: &DMatrix<f64>,
) -> Result<OriginalParams> {
    let k = sigma.nrows();
    if sigma.ncols() != k || lambda_t.ncols() != k || alpha_star_t.ncols() != k || gamma_t.len() != k
    {
        return Err(Error::Domain(format!(
            "transform dimension mismatch: sigma {}x{}, lambda {}x{}, alpha {}x{}, gamma len {}",
            sigma.nrows(),
            sigma.ncols(),
            lambda_t.nrows(),
            lambda_t.ncols(),
            alpha_star_t.nrows(),
            alpha_star_t.ncols(),
            gamma_t.len()
        )));
    }
    let mut root_v = vec![0.0; k];
    for i in 0..k {
        let v = sigma[(i, i)];
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!(
                "sigma diagonal entry {i} is not positive: {v}"
            )));
        }
        root_v[i] = v.sqrt();
    }
    let mut r = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            r[(i, j)] = if i == j {
                1.0
            } else {
                sigma[(i, j)] / (root_v[i] * root_v[j])
            };
        }
    }
    let mut lambda = lambda_t.clone();
    for j in 0..k {
        for i in 0..lambda.nrows() {
            lambda[(i, j)] /= root_v[j];
        }
    }
    let gamma = gamma_t
        .iter()
        .enumerate()
        .map(|(kk, row)| row.iter().map(|g| g / root_v[kk]).collect())
        .collect();
    let mut alpha_star = alpha_star_t.clone();
    for j in 0..k {
        for i in 0..alpha_star.nrows() {
            alpha_star[(i, j)] /= root_v[j];
        }
    }
    Ok(OriginalParams {
        r,
        lambda,
        gamma,
        alpha_star,
    })
}
