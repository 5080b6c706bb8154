//! The six block updates of one sampling scan.
//!
//! Scan order is fixed: cutpoints with latent responses, inclusion flags
//! with coefficients, attribute profiles with latent scores, thresholds,
//! covariance with regression coefficients, inclusion rate. The
//! probabilistic kernels that admit independent numerical checks
//! (cutpoint acceptance ratio, collapsed inclusion probability, collapsed
//! profile weights, inclusion-rate Beta parameters) are exposed as pure
//! functions and used verbatim by the updates.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::dist::{
    ln_normal_interval_prob, normal_interval_prob, sample_categorical_ln, sample_matrix_normal,
    sample_inverse_wishart, sample_truncated_exp, sample_truncated_normal, std_normal_cdf,
    std_normal_sf,
};
use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::state::ChainState;

/// Log acceptance ratio of a joint cutpoint proposal for one item.
///
/// `kappa` and `kappa_prop` are full cut vectors (-inf, 0, interior...,
/// +inf) of equal length; `sigma` is the random-walk sd that generated the
/// proposal. The data part multiplies each respondent's interval
/// probability ratio; the correction part accounts for the sequential
/// truncated-normal proposal. A zero interval probability under either the
/// current or proposed cuts rejects (-inf); a vanishing reverse-proposal
/// normalizer accepts (+inf).
pub fn cowles_log_ratio(
    y: &[u8],
    eta: &[f64],
    kappa: &[f64],
    kappa_prop: &[f64],
    sigma: f64,
) -> f64 {
    debug_assert_eq!(y.len(), eta.len());
    debug_assert_eq!(kappa.len(), kappa_prop.len());
    let m = kappa.len() - 1;
    let mut logr = 0.0;
    for (&yi, &e) in y.iter().zip(eta) {
        let yi = yi as usize;
        let p_new = normal_interval_prob(kappa_prop[yi] - e, kappa_prop[yi + 1] - e);
        let p_old = normal_interval_prob(kappa[yi] - e, kappa[yi + 1] - e);
        if p_new <= 0.0 || p_old <= 0.0 {
            return f64::NEG_INFINITY;
        }
        logr += p_new.ln() - p_old.ln();
    }
    for mm in 2..m {
        let fwd = std_normal_cdf((kappa[mm + 1] - kappa[mm]) / sigma)
            - std_normal_cdf((kappa_prop[mm - 1] - kappa[mm]) / sigma);
        let rev = std_normal_cdf((kappa_prop[mm + 1] - kappa_prop[mm]) / sigma)
            - std_normal_cdf((kappa[mm - 1] - kappa_prop[mm]) / sigma);
        if fwd <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if rev <= 0.0 {
            return f64::INFINITY;
        }
        logr += fwd.ln() - rev.ln();
    }
    logr
}

/// Collapsed probability that a coefficient is active given its
/// least-squares summary. `c1` and `c2_sq` are the conditional slab mean
/// and variance, `lower` the cone bound, `omega` the inclusion rate, and
/// `sigma_beta_sq` the slab variance. A positive bound forces inclusion:
/// zero is then outside the cone and the spike has no mass to stand on.
pub fn delta_one_probability(
    c1: f64,
    c2_sq: f64,
    lower: f64,
    omega: f64,
    sigma_beta_sq: f64,
) -> f64 {
    debug_assert!(c2_sq > 0.0 && sigma_beta_sq > 0.0);
    if lower > 0.0 {
        return 1.0;
    }
    let c2 = c2_sq.sqrt();
    let sb = sigma_beta_sq.sqrt();
    // lower <= 0, so the cone normalizer is at least one half.
    let ln_cone = std_normal_sf(lower / sb).ln();
    let ln_tail = ln_normal_interval_prob(f64::NEG_INFINITY, (c1 - lower) / c2);
    let ln_slab = omega.ln() - ln_cone + (c2 / sb).ln() + 0.5 * c1 * c1 / c2_sq + ln_tail;
    let ln_spike = (1.0 - omega).ln();
    let t = ln_slab - ln_spike;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Collapsed log weights over the levels of one attribute for one
/// respondent, up to an additive constant shared across levels. Candidate
/// profile indices are `base + level * stride`; the structural part bins a
/// conditional normal with moments (`mu`, `sd`) by the thresholds
/// `gamma_k`.
pub fn alpha_collapsed_ln_weights(
    ystar_row: &[f64],
    state_scores: &DMatrix<f64>,
    base: usize,
    stride: usize,
    levels: usize,
    gamma_k: &[f64],
    mu: f64,
    sd: f64,
) -> Vec<f64> {
    (0..levels)
        .map(|l| {
            let s = base + l * stride;
            let mut lnw = 0.0;
            for (jj, &ys) in ystar_row.iter().enumerate() {
                let r = ys - state_scores[(s, jj)];
                lnw -= 0.5 * r * r;
            }
            lnw + ln_normal_interval_prob((gamma_k[l] - mu) / sd, (gamma_k[l + 1] - mu) / sd)
        })
        .collect()
}

/// Beta parameters of the inclusion-rate update: prior plus the active and
/// inactive counts, the intercept row counted only on request.
pub fn omega_beta_params(
    delta: &DMatrix<u8>,
    include_intercept: bool,
    prior: (f64, f64),
) -> (f64, f64) {
    let start = usize::from(!include_intercept);
    let mut active = 0usize;
    let mut total = 0usize;
    for j in 0..delta.ncols() {
        for h in start..delta.nrows() {
            active += delta[(h, j)] as usize;
            total += 1;
        }
    }
    (
        active as f64 + prior.0,
        (total - active) as f64 + prior.1,
    )
}

/// Cone bound for coefficient (h, j) from the cached profile scores: the
/// largest value the coefficient could drop to before some dominated
/// profile overtakes a dominating one.
fn cone_lower_bound(st: &ChainState, h: usize, j: usize) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for &(u, v) in st.table.activation_pairs(h) {
        let gap = st.state_scores[(v, j)] - st.state_scores[(u, j)];
        if gap > worst {
            worst = gap;
        }
    }
    if worst == f64::NEG_INFINITY {
        worst
    } else {
        st.items.beta[(h, j)] + worst
    }
}

/// Block 1: per-item joint cutpoint move, then a refresh of every latent
/// response from its truncated conditional.
pub(crate) fn step_cutpoints_and_ystar(st: &mut ChainState, rng: &mut RngStream) -> Result<()> {
    let n = st.config.n;
    for j in 0..st.config.j() {
        let m_j = st.config.m[j];
        let mut accepted = true;
        if m_j >= 3 {
            let sigma = st.sigma_kappa[j];
            let kappa = st.items.kappa[j].clone();
            let mut prop = kappa.clone();
            for mm in 2..m_j {
                prop[mm] =
                    sample_truncated_normal(rng, kappa[mm], sigma * sigma, prop[mm - 1], kappa[mm + 1])?;
            }
            let y_col: Vec<u8> = st.y.column(j).iter().copied().collect();
            let eta: Vec<f64> = (0..n)
                .map(|i| st.state_scores[(st.state_idx[i], j)])
                .collect();
            let logr = cowles_log_ratio(&y_col, &eta, &kappa, &prop, sigma);
            accepted = if logr >= 0.0 {
                true
            } else if logr == f64::NEG_INFINITY || logr.is_nan() {
                false
            } else {
                rng.random::<f64>().ln() < logr
            };
            if accepted {
                st.items.kappa[j] = prop;
            }
            st.kappa_window_accepts[j] += usize::from(accepted);
        }
        if !st.in_burnin {
            st.kappa_post_attempts[j] += 1;
            st.kappa_post_accepts[j] += usize::from(accepted);
        }
        for i in 0..n {
            let e = st.state_scores[(st.state_idx[i], j)];
            let yi = st.y[(i, j)] as usize;
            let cuts = &st.items.kappa[j];
            st.ystar[(i, j)] = sample_truncated_normal(rng, e, 1.0, cuts[yi], cuts[yi + 1])?;
        }
    }
    Ok(())
}

/// Block 2: per-coefficient collapsed inclusion draw followed by the
/// coefficient itself, sweeping items in the outer loop and effects in the
/// inner one. The intercept is always active and untruncated.
pub(crate) fn step_inclusion_and_coefficients(
    st: &mut ChainState,
    rng: &mut RngStream,
) -> Result<()> {
    st.refresh_design_stats();
    let h_eff = st.table.h();
    let sbsq = st.config.sigma_beta_sq;
    for j in 0..st.config.j() {
        st.refresh_state_scores_col(j);
        let mut g: DVector<f64> = &st.gram * st.items.beta.column(j);
        for h in 0..h_eff {
            let ghh = st.gram[(h, h)];
            let c2_sq = 1.0 / (ghh + 1.0 / sbsq);
            let beta_old = st.items.beta[(h, j)];
            let t = st.dty[(h, j)] - (g[h] - ghh * beta_old);
            let c1 = c2_sq * t;
            let beta_new = if h == 0 {
                let z: f64 = rng.sample(StandardNormal);
                c1 + c2_sq.sqrt() * z
            } else {
                let lower = cone_lower_bound(st, h, j);
                let p_active = delta_one_probability(c1, c2_sq, lower, st.omega, sbsq);
                let active = rng.random::<f64>() < p_active;
                st.items.delta[(h, j)] = u8::from(active);
                if active {
                    sample_truncated_normal(rng, c1, c2_sq, lower, f64::INFINITY)?
                } else {
                    0.0
                }
            };
            let step = beta_new - beta_old;
            if step != 0.0 {
                st.items.beta[(h, j)] = beta_new;
                for h2 in 0..h_eff {
                    g[h2] += st.gram[(h2, h)] * step;
                }
                st.bump_state_scores(j, h, step);
            }
        }
    }
    Ok(())
}

/// Conditional moments of one attribute's latent score given the others
/// under the current covariance.
pub(crate) struct CondGaussian {
    coef: DVector<f64>,
    sd: f64,
}

impl CondGaussian {
    pub(crate) fn from_sigma(sigma: &DMatrix<f64>, k: usize) -> Result<Self> {
        let kk = sigma.nrows();
        let others: Vec<usize> = (0..kk).filter(|&i| i != k).collect();
        let mut cross = DVector::zeros(kk - 1);
        let coef = if kk > 1 {
            let mut sub = DMatrix::zeros(kk - 1, kk - 1);
            for (a, &i) in others.iter().enumerate() {
                cross[a] = sigma[(i, k)];
                for (b, &j2) in others.iter().enumerate() {
                    sub[(a, b)] = sigma[(i, j2)];
                }
            }
            Cholesky::new(sub)
                .ok_or_else(|| {
                    Error::Domain("attribute covariance submatrix is not positive definite".into())
                })?
                .solve(&cross)
        } else {
            cross.clone()
        };
        let var = sigma[(k, k)] - cross.dot(&coef);
        if !(var.is_finite() && var > 0.0) {
            return Err(Error::Domain(format!(
                "conditional variance of attribute {k} is not positive: {var}"
            )));
        }
        Ok(CondGaussian {
            coef,
            sd: var.sqrt(),
        })
    }
}

/// Block 3: per-respondent, per-attribute collapsed level draw followed by
/// a truncated refresh of the latent score.
pub(crate) fn step_attributes(st: &mut ChainState, rng: &mut RngStream) -> Result<()> {
    let n = st.config.n;
    let k_attr = st.config.k;
    let levels = st.config.l;
    let j_items = st.config.j();
    let x_lambda = &st.x * &st.lambda_t;
    let cond: Vec<CondGaussian> = (0..k_attr)
        .map(|k| CondGaussian::from_sigma(&st.sigma, k))
        .collect::<Result<_>>()?;
    let mut ystar_row = vec![0.0; j_items];
    for i in 0..n {
        for (jj, v) in ystar_row.iter_mut().enumerate() {
            *v = st.ystar[(i, jj)];
        }
        for k in 0..k_attr {
            let stride = levels.pow((k_attr - 1 - k) as u32);
            let cur = st.alpha[(i, k)] as usize;
            let base = st.state_idx[i] - cur * stride;
            let cg = &cond[k];
            let mut mu = x_lambda[(i, k)];
            let mut it = 0usize;
            for k2 in 0..k_attr {
                if k2 != k {
                    mu += cg.coef[it] * (st.alpha_star_t[(i, k2)] - x_lambda[(i, k2)]);
                    it += 1;
                }
            }
            let lnw = alpha_collapsed_ln_weights(
                &ystar_row,
                &st.state_scores,
                base,
                stride,
                levels,
                &st.gamma_t[k],
                mu,
                cg.sd,
            );
            let l_new = sample_categorical_ln(rng, &lnw)?;
            st.alpha[(i, k)] = l_new as u8;
            st.state_idx[i] = base + l_new * stride;
            st.alpha_star_t[(i, k)] = sample_truncated_normal(
                rng,
                mu,
                cg.sd * cg.sd,
                st.gamma_t[k][l_new],
                st.gamma_t[k][l_new + 1],
            )?;
        }
    }
    Ok(())
}

/// Block 4: free thresholds per attribute, ascending. Interior cuts are
/// uniform between the data and neighbor bounds; the top cut is
/// exponentially tied down and is the only one whose upper bound can be
/// infinite (when its level is empty).
pub(crate) fn step_thresholds(st: &mut ChainState, rng: &mut RngStream) -> Result<()> {
    let levels = st.config.l;
    if levels == 2 {
        return Ok(());
    }
    let n = st.config.n;
    for k in 0..st.config.k {
        let mut lo_star = vec![f64::INFINITY; levels];
        let mut hi_star = vec![f64::NEG_INFINITY; levels];
        for i in 0..n {
            let lev = st.alpha[(i, k)] as usize;
            let v = st.alpha_star_t[(i, k)];
            if v < lo_star[lev] {
                lo_star[lev] = v;
            }
            if v > hi_star[lev] {
                hi_star[lev] = v;
            }
        }
        for l in 2..levels {
            let lower = hi_star[l - 1].max(st.gamma_t[k][l - 1]);
            let upper = lo_star[l].min(st.gamma_t[k][l + 1]);
            if !(lower < upper) {
                return Err(Error::Domain(format!(
                    "threshold interval of attribute {k}, cut {l} collapsed to [{lower}, {upper}]"
                )));
            }
            let draw = if l == levels - 1 {
                if upper == f64::INFINITY {
                    st.gamma_top_unbounded[k] += 1;
                }
                sample_truncated_exp(rng, st.config.gamma_rate, lower, upper)?
            } else {
                sample_open_uniform(rng, lower, upper)?
            };
            st.gamma_t[k][l] = draw;
        }
    }
    Ok(())
}

fn sample_open_uniform(rng: &mut RngStream, lower: f64, upper: f64) -> Result<f64> {
    for _ in 0..64 {
        let u: f64 = rng.random();
        let x = lower + u * (upper - lower);
        if lower < x && x < upper {
            return Ok(x);
        }
    }
    let mid = lower + 0.5 * (upper - lower);
    if lower < mid && mid < upper {
        return Ok(mid);
    }
    Err(Error::Domain(format!(
        "no interior point in ({lower}, {upper})"
    )))
}

/// Block 5: conjugate covariance and regression update with a unit ridge.
pub(crate) fn step_covariance_and_regression(
    st: &mut ChainState,
    rng: &mut RngStream,
) -> Result<()> {
    let k = st.config.k;
    let xt_alpha = st.x.transpose() * &st.alpha_star_t;
    let l_hat = st.xtx_i_chol.solve(&xt_alpha);
    let resid = &st.alpha_star_t - &st.x * &l_hat;
    let scale = DMatrix::<f64>::identity(k, k)
        + resid.transpose() * &resid
        + l_hat.transpose() * &l_hat;
    let dof = st.config.v0() + st.config.n as f64;
    st.sigma = sample_inverse_wishart(rng, &scale, dof)?;
    st.lambda_t = sample_matrix_normal(rng, &l_hat, &st.xtx_i_inv, &st.sigma)?;
    Ok(())
}

/// Block 6: inclusion rate from its conjugate Beta.
pub(crate) fn step_inclusion_rate(st: &mut ChainState, rng: &mut RngStream) -> Result<()> {
    let (a, b) = omega_beta_params(
        &st.items.delta,
        st.config.omega_count_includes_intercept,
        st.config.omega_prior,
    );
    let dist = Beta::new(a, b).map_err(|e| {
        Error::Domain(format!("inclusion rate update: invalid Beta({a}, {b}): {e}"))
    })?;
    for _ in 0..100 {
        let w: f64 = dist.sample(rng);
        if w > 0.0 && w < 1.0 {
            st.omega = w;
            return Ok(());
        }
    }
    Err(Error::Domain(
        "inclusion rate update produced a degenerate Beta draw".into(),
    ))
}
