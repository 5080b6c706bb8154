//! Data-driven starting values.
//!
//! Attribute profiles start from a nonnegative matrix factorization of the
//! response matrix followed by per-column one-dimensional clustering;
//! coefficients and regression weights start from minimum-norm least
//! squares; cut vectors, covariance, and inclusion values start at fixed
//! defaults; latent variables are drawn from their truncated conditionals
//! so every support invariant holds from iteration zero.

use nalgebra::DMatrix;
use rand::Rng;

use crate::config::ModelConfig;
use crate::dist::sample_truncated_normal;
use crate::error::Result;
use crate::model::{cuts_from_interior, EffectTable, ItemParams};
use crate::rng::RngStream;
use crate::sampler::ChainState;

/// Warnings accumulated while building the starting state.
#[derive(Debug, Clone, Default)]
pub struct InitReport {
    pub warnings: Vec<String>,
}

/// One nonnegative factorization Y ~ W H with multiplicative updates.
#[derive(Debug, Clone)]
pub struct NmfFit {
    /// Row scores, N x K.
    pub w: DMatrix<f64>,
    /// Column loadings, K x J.
    pub h: DMatrix<f64>,
    /// Squared Frobenius objective after each update; non-increasing.
    pub objective: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Multiplicative-update factorization of a nonnegative matrix. Factors
/// start uniform on (0, 1) scaled by sqrt(mean(Y)/K) so the initial
/// product matches the data's scale. An all-zero input short-circuits to
/// zero factors with a warning.
pub fn nmf(y: &DMatrix<f64>, k: usize, iters: usize, rng: &mut RngStream) -> NmfFit {
    let (n, j) = y.shape();
    let total: f64 = y.iter().sum();
    if total <= 0.0 || n == 0 || j == 0 {
        return NmfFit {
            w: DMatrix::zeros(n, k),
            h: DMatrix::zeros(k, j),
            objective: Vec::new(),
            warnings: vec!["factorization input has no positive entries".into()],
        };
    }
    let scale = (total / (n * j) as f64 / k as f64).sqrt();
    let mut w = DMatrix::from_fn(n, k, |_, _| rng.random::<f64>() * scale);
    let mut h = DMatrix::from_fn(k, j, |_, _| rng.random::<f64>() * scale);
    let eps = 1e-9;
    let mut objective = Vec::with_capacity(iters);
    for _ in 0..iters {
        // H <- H o (W'Y) / (W'W H), then W <- W o (Y H') / (W H H').
        let wty = w.transpose() * y;
        let wtwh = w.transpose() * &w * &h;
        for r in 0..k {
            for c in 0..j {
                h[(r, c)] *= wty[(r, c)] / (wtwh[(r, c)] + eps);
            }
        }
        let yht = y * h.transpose();
        let whht = &w * (&h * h.transpose());
        for r in 0..n {
            for c in 0..k {
                w[(r, c)] *= yht[(r, c)] / (whht[(r, c)] + eps);
            }
        }
        objective.push((y - &w * &h).norm_squared());
    }
    NmfFit {
        w,
        h,
        objective,
        warnings: Vec::new(),
    }
}

/// One-dimensional k-means with quantile seeding and ascending relabeling.
#[derive(Debug, Clone)]
pub struct KmeansFit {
    /// Cluster label per value, ordered by ascending center.
    pub labels: Vec<usize>,
    /// Ascending cluster centers; may be fewer than requested after
    /// merging duplicates.
    pub centers: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Lloyd iterations on scalars. Seeds sit at the (2i+1)/(2L) quantiles;
/// empty clusters keep their center; duplicate centers are merged with a
/// warning, so the label range can be narrower than requested.
pub fn kmeans_1d(values: &[f64], clusters: usize) -> KmeansFit {
    assert!(clusters >= 1, "need at least one cluster");
    let mut warnings = Vec::new();
    if values.is_empty() {
        return KmeansFit {
            labels: Vec::new(),
            centers: vec![0.0; 1],
            warnings: vec!["clustering input is empty".into()],
        };
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut centers: Vec<f64> = (0..clusters)
        .map(|i| {
            let q = (2 * i + 1) as f64 / (2 * clusters) as f64;
            sorted[((q * (sorted.len() - 1) as f64).round()) as usize]
        })
        .collect();
    let mut labels = vec![0usize; values.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (i, &v) in values.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, &ctr) in centers.iter().enumerate() {
                let d = (v - ctr).abs();
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut sums = vec![0.0; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (i, &v) in values.iter().enumerate() {
            sums[labels[i]] += v;
            counts[labels[i]] += 1;
        }
        for c in 0..centers.len() {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        if !changed {
            break;
        }
    }
    // Ascending relabel; merge centers that collapsed onto each other.
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| centers[a].partial_cmp(&centers[b]).unwrap());
    let mut kept: Vec<f64> = Vec::new();
    let mut remap = vec![0usize; centers.len()];
    for &c in &order {
        match kept.last() {
            Some(&last) if centers[c] <= last => {
                remap[c] = kept.len() - 1;
            }
            _ => {
                remap[c] = kept.len();
                kept.push(centers[c]);
            }
        }
    }
    if kept.len() < clusters {
        warnings.push(format!(
            "clustering produced {} distinct centers out of {clusters} requested",
            kept.len()
        ));
    }
    let labels = labels.into_iter().map(|l| remap[l]).collect();
    KmeansFit {
        labels,
        centers: kept,
        warnings,
    }
}

/// Starting attribute levels: factorization scores clustered per column.
/// Falls back to all-zero levels, with a warning, when the responses carry
/// no signal.
pub fn init_alpha(
    y: &DMatrix<u8>,
    k: usize,
    l: usize,
    rng: &mut RngStream,
) -> (DMatrix<u8>, Vec<String>) {
    let n = y.nrows();
    let mut warnings = Vec::new();
    let yf = y.map(|v| v as f64);
    let fit = nmf(&yf, k, 200, rng);
    warnings.extend(fit.warnings.iter().cloned());
    if !fit.warnings.is_empty() {
        return (DMatrix::zeros(n, k), warnings);
    }
    let mut alpha = DMatrix::zeros(n, k);
    for kk in 0..k {
        let col: Vec<f64> = (0..n).map(|i| fit.w[(i, kk)]).collect();
        let km = kmeans_1d(&col, l);
        for w in km.warnings {
            warnings.push(format!("attribute {kk}: {w}"));
        }
        for i in 0..n {
            alpha[(i, kk)] = km.labels[i] as u8;
        }
    }
    (alpha, warnings)
}

/// Starting coefficients: per-item minimum-norm least squares of the
/// latent-scale response levels on the design rows, with negative
/// non-intercept entries clipped to zero so the start is monotone. The
/// intercept is exempt from the clip unless `clip_intercept` is set.
pub fn init_beta(
    table: &EffectTable,
    alpha: &DMatrix<u8>,
    y: &DMatrix<u8>,
    clip_intercept: bool,
) -> DMatrix<f64> {
    let n = y.nrows();
    let j = y.ncols();
    let h = table.h();
    let mut design = DMatrix::zeros(n, h);
    let mut profile = vec![0u8; table.k()];
    for i in 0..n {
        for k in 0..table.k() {
            profile[k] = alpha[(i, k)];
        }
        let row = &table.state_design()[table.state_index(&profile)];
        for hh in 0..h {
            design[(i, hh)] = row[hh];
        }
    }
    let svd = design.svd(true, true);
    let mut beta = DMatrix::zeros(h, j);
    for jj in 0..j {
        let y_col = DMatrix::from_fn(n, 1, |i, _| y[(i, jj)] as f64);
        let sol = svd
            .solve(&y_col, 1e-10)
            .expect("svd computed with both factors");
        for hh in 0..h {
            let v = sol[(hh, 0)];
            beta[(hh, jj)] = if v < 0.0 && (hh > 0 || clip_intercept) {
                0.0
            } else {
                v
            };
        }
    }
    beta
}

/// Starting regression weights: minimum-norm least squares of the levels
/// on the covariates.
pub fn init_lambda(x: &DMatrix<f64>, alpha: &DMatrix<u8>) -> DMatrix<f64> {
    let alpha_f = alpha.map(|v| v as f64);
    let svd = x.clone().svd(true, true);
    svd.solve(&alpha_f, 1e-10)
        .expect("svd computed with both factors")
}

/// Default interior cutpoints 0.5, 1.0, ... for an item with `m` levels.
pub fn default_kappa(m: usize) -> Vec<f64> {
    let interior: Vec<f64> = (2..m).map(|mm| 0.5 * (mm - 1) as f64).collect();
    cuts_from_interior(&interior)
}

/// Default interior thresholds 0.75, 1.5, ... for `l` attribute levels.
pub fn default_gamma(l: usize) -> Vec<f64> {
    let interior: Vec<f64> = (2..l).map(|ll| 0.75 * (ll - 1) as f64).collect();
    cuts_from_interior(&interior)
}

/// Builds a complete, invariant-satisfying starting state from data.
pub fn init_chain_state(
    config: &ModelConfig,
    y: &DMatrix<u8>,
    x: &DMatrix<f64>,
    rng: &mut RngStream,
) -> Result<(ChainState, InitReport)> {
    config.validate()?;
    let table = EffectTable::new(config.k, config.l, config.order)?;
    let mut report = InitReport::default();
    let (alpha, warns) = init_alpha(y, config.k, config.l, rng);
    report.warnings.extend(warns);
    let beta = init_beta(&table, &alpha, y, config.clip_intercept_at_init);
    let delta = DMatrix::from_element(table.h(), config.j(), 1u8);
    let kappa: Vec<Vec<f64>> = config.m.iter().map(|&m| default_kappa(m)).collect();
    let items = ItemParams { beta, delta, kappa };
    let lambda_t = init_lambda(x, &alpha);
    let gamma_t: Vec<Vec<f64>> = (0..config.k).map(|_| default_gamma(config.l)).collect();
    let sigma = DMatrix::identity(config.k, config.k);
    let x_lambda = x * &lambda_t;
    let mut ystar = DMatrix::zeros(config.n, config.j());
    for j in 0..config.j() {
        let cuts = &items.kappa[j];
        for i in 0..config.n {
            let mut profile = vec![0u8; config.k];
            for k in 0..config.k {
                profile[k] = alpha[(i, k)];
            }
            let e: f64 = table.state_design()[table.state_index(&profile)]
                .iter()
                .zip(items.beta.column(j).iter())
                .map(|(d, b)| d * b)
                .sum();
            let yi = y[(i, j)] as usize;
            ystar[(i, j)] = sample_truncated_normal(rng, e, 1.0, cuts[yi], cuts[yi + 1])?;
        }
    }
    let mut alpha_star_t = DMatrix::zeros(config.n, config.k);
    for k in 0..config.k {
        let cuts = &gamma_t[k];
        for i in 0..config.n {
            let a = alpha[(i, k)] as usize;
            alpha_star_t[(i, k)] =
                sample_truncated_normal(rng, x_lambda[(i, k)], 1.0, cuts[a], cuts[a + 1])?;
        }
    }
    let state = ChainState::new(
        config.clone(),
        y.clone(),
        x.clone(),
        items,
        ystar,
        alpha,
        alpha_star_t,
        gamma_t,
        lambda_t,
        sigma,
        0.5,
    )?;
    Ok((state, report))
}
