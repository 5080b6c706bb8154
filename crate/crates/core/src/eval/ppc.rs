//! Posterior predictive checking: pairwise response-count statistics,
//! replicate datasets drawn from recorded posterior draws, and the
//! rank-based comparison of observed-vs-replicate discrepancies.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{cuts_from_interior, ItemParams, StructuralParams};
use crate::rng::RngStream;
use crate::sampler::ChainOutput;
use crate::sim::{gen_alpha, gen_responses, TruthSet};

/// Joint response counts over all ordered item pairs (j1 < j2), flattened
/// pair-major and level-lexicographic within a pair. The length is
/// ((sum M)^2 - sum M^2) / 2 and the entries sum to N * J(J-1)/2.
pub fn pairwise_count_statistic(y: &DMatrix<u8>, m: &[usize]) -> Vec<f64> {
    let n = y.nrows();
    let j = m.len();
    assert_eq!(y.ncols(), j, "response columns must match the level vector");
    let total: usize = (0..j).flat_map(|a| ((a + 1)..j).map(move |b| m[a] * m[b]))
        .sum();
    let mut counts = vec![0.0; total];
    let mut base = 0usize;
    for j1 in 0..j {
        for j2 in (j1 + 1)..j {
            for i in 0..n {
                let cell = y[(i, j1)] as usize * m[j2] + y[(i, j2)] as usize;
                counts[base + cell] += 1.0;
            }
            base += m[j1] * m[j2];
        }
    }
    counts
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "L1 distance needs equal lengths");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Identified parameters of one recorded draw, reassembled from the flat
/// column layouts into the same shape the simulator consumes.
pub fn extract_draw(out: &ChainOutput, row: usize) -> TruthSet {
    let cfg = &out.config;
    let h = if cfg.j() == 0 {
        0
    } else {
        out.beta.cols() / cfg.j()
    };
    let beta_row = out.beta.row(row);
    let delta_row = out.delta.row(row);
    let beta = DMatrix::from_fn(h, cfg.j(), |hh, j| beta_row[j * h + hh]);
    let delta = DMatrix::from_fn(h, cfg.j(), |hh, j| delta_row[j * h + hh] as u8);
    let kappa_row = out.kappa.row(row);
    let mut kappa = Vec::with_capacity(cfg.j());
    let mut off = 0usize;
    for &mj in &cfg.m {
        kappa.push(cuts_from_interior(&kappa_row[off..off + (mj - 2)]));
        off += mj - 2;
    }
    let lambda_row = out.lambda.row(row);
    let lambda = DMatrix::from_fn(cfg.d, cfg.k, |d, k| lambda_row[d * cfg.k + k]);
    let r_row = out.r.row(row);
    let mut r = DMatrix::identity(cfg.k, cfg.k);
    let mut p = 0usize;
    for i in 0..cfg.k {
        for j2 in (i + 1)..cfg.k {
            r[(i, j2)] = r_row[p];
            r[(j2, i)] = r_row[p];
            p += 1;
        }
    }
    let gamma_row = out.gamma.row(row);
    let gamma = (0..cfg.k)
        .map(|k| cuts_from_interior(&gamma_row[k * (cfg.l - 2)..(k + 1) * (cfg.l - 2)]))
        .collect();
    TruthSet {
        items: ItemParams { beta, delta, kappa },
        structural: StructuralParams { lambda, r, gamma },
    }
}

/// Replicate datasets from `count` recorded draws: evenly spaced through
/// the chain when enough draws exist, otherwise sampled with replacement
/// (reported as a warning). Each replicate redraws latent scores from the
/// draw's structural side and responses from its measurement side, against
/// the supplied covariates.
pub fn posterior_predictive_draws(
    out: &ChainOutput,
    x: &DMatrix<f64>,
    count: usize,
    rng: &mut RngStream,
) -> Result<(Vec<DMatrix<u8>>, Vec<String>)> {
    let table = crate::model::EffectTable::new(out.config.k, out.config.l, out.config.order)?;
    let draws = out.draws();
    if draws == 0 {
        return Err(Error::Usage(
            "posterior predictive draws need at least one recorded draw".into(),
        ));
    }
    if x.ncols() != out.config.d {
        return Err(Error::Config(format!(
            "covariate matrix has {} columns, fit used {}",
            x.ncols(),
            out.config.d
        )));
    }
    let mut warnings = Vec::new();
    let indices: Vec<usize> = if count <= draws {
        // Evenly spaced including both endpoints; spacing >= 1 keeps the
        // rounded indices distinct.
        (0..count)
            .map(|t| {
                if count == 1 {
                    draws / 2
                } else {
                    ((t as f64) * (draws - 1) as f64 / (count - 1) as f64).round() as usize
                }
            })
            .collect()
    } else {
        warnings.push(format!(
            "requested {count} predictive datasets from {draws} recorded draws; \
             sampling draw indices with replacement"
        ));
        (0..count).map(|_| (rng.random::<f64>() * draws as f64) as usize).collect()
    };
    let mut reps = Vec::with_capacity(count);
    for s in indices {
        let params = extract_draw(out, s);
        let (alpha, _) = gen_alpha(x, &params, rng)?;
        reps.push(gen_responses(&table, &params, &alpha, rng));
    }
    Ok((reps, warnings))
}

/// Discrepancy samples for the predictive comparison: the distance from
/// the observed statistic to each replicate, and the distances between
/// `pairs` randomly chosen distinct replicate pairs.
pub fn ppc_distance_samples(
    observed: &[f64],
    reps: &[Vec<f64>],
    pairs: usize,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if reps.len() < 2 {
        return Err(Error::Usage(format!(
            "replicate-pair distances need at least 2 replicates, got {}",
            reps.len()
        )));
    }
    let obs_rep: Vec<f64> = reps.iter().map(|r| l1_distance(observed, r)).collect();
    let mut rep_rep = Vec::with_capacity(pairs);
    let m = reps.len();
    for _ in 0..pairs {
        let a = (rng.random::<f64>() * m as f64) as usize;
        let mut b = (rng.random::<f64>() * (m - 1) as f64) as usize;
        if b >= a {
            b += 1;
        }
        rep_rep.push(l1_distance(&reps[a], &reps[b]));
    }
    Ok((obs_rep, rep_rep))
}

/// Mann-Whitney U comparison of two samples.
#[derive(Debug, Clone, Copy)]
pub struct MannWhitney {
    /// Count of (a, b) pairs with a > b, ties counted half.
    pub u: f64,
    /// Normal approximation score with tie-corrected variance; 0 when the
    /// pooled sample is constant.
    pub z: f64,
}

/// Rank-based U statistic: U = R_a - n_a(n_a+1)/2 with midranks for ties,
/// z = (U - n_a n_b / 2) / sd where the variance carries the usual tie
/// correction n_a n_b / 12 * ((n + 1) - sum(t^3 - t) / (n(n-1))).
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> MannWhitney {
    let na = a.len();
    let nb = b.len();
    assert!(na > 0 && nb > 0, "Mann-Whitney needs nonempty samples");
    let n = na + nb;
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0usize;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        // Average rank of positions i..j (1-based ranks).
        let midrank = (i + 1 + j) as f64 / 2.0;
        for p in &pooled[i..j] {
            if p.1 {
                rank_sum_a += midrank;
            }
        }
        tie_term += t * t * t - t;
        i = j;
    }
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    let mean = (na * nb) as f64 / 2.0;
    let nf = n as f64;
    let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let z = if var > 0.0 { (u - mean) / var.sqrt() } else { 0.0 };
    MannWhitney { u, z }
}
