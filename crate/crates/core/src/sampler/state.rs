//! Chain state: data, current parameter values, and the sufficient
//! statistics the block updates share.
//!
//! The sampler works in expanded coordinates: an unrestricted attribute
//! covariance `sigma` together with scaled regression coefficients,
//! thresholds, and latent attribute scores. Identified parameters are
//! recovered only at recording time. The cached design cross-products and
//! per-profile fitted scores are refreshed or nudged incrementally by the
//! block updates; everything needed for one full scan lives here.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::config::ModelConfig;
use crate::dist::{ln_std_normal_pdf, std_normal_sf};
use crate::error::{Error, Result};
use crate::model::{cuts_strictly_increasing, EffectTable, ItemParams};

#[derive(Clone)]
pub struct ChainState {
    pub config: ModelConfig,
    pub table: EffectTable,
    /// Observed responses, N x J, entries in 0..M_j.
    pub y: DMatrix<u8>,
    /// Covariates, N x D, first column conventionally the intercept.
    pub x: DMatrix<f64>,
    /// Item names used in labeled output.
    pub item_names: Vec<String>,
    /// Covariate names used in labeled output.
    pub covariate_names: Vec<String>,
    pub items: ItemParams,
    /// Latent continuous responses, N x J.
    pub ystar: DMatrix<f64>,
    /// Per-item cutpoint proposal sd; tuned during burn-in, then frozen.
    pub sigma_kappa: Vec<f64>,
    /// Attribute profiles, N x K, entries in 0..L.
    pub alpha: DMatrix<u8>,
    /// Scaled latent attribute scores, N x K.
    pub alpha_star_t: DMatrix<f64>,
    /// Scaled thresholds, one vector of length L + 1 per attribute.
    pub gamma_t: Vec<Vec<f64>>,
    /// Scaled regression coefficients, D x K.
    pub lambda_t: DMatrix<f64>,
    /// Unrestricted attribute covariance, K x K.
    pub sigma: DMatrix<f64>,
    /// Coefficient inclusion probability.
    pub omega: f64,
    // Shared sufficient statistics and bookkeeping, maintained by the
    // block updates.
    pub(crate) state_idx: Vec<usize>,
    pub(crate) state_scores: DMatrix<f64>,
    pub(crate) gram: DMatrix<f64>,
    pub(crate) dty: DMatrix<f64>,
    pub(crate) xtx_i_chol: Cholesky<f64, Dyn>,
    pub(crate) xtx_i_inv: DMatrix<f64>,
    pub(crate) in_burnin: bool,
    pub(crate) kappa_window_accepts: Vec<usize>,
    pub(crate) kappa_post_accepts: Vec<usize>,
    pub(crate) kappa_post_attempts: Vec<usize>,
    pub(crate) gamma_top_unbounded: Vec<u64>,
}

impl ChainState {
    /// Assembles a runnable state, validating shapes, support, and the
    /// ordering/cone invariants of the initial values.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        config: ModelConfig,
        y: DMatrix<u8>,
        x: DMatrix<f64>,
        items: ItemParams,
        ystar: DMatrix<f64>,
        alpha: DMatrix<u8>,
        alpha_star_t: DMatrix<f64>,
        gamma_t: Vec<Vec<f64>>,
        lambda_t: DMatrix<f64>,
        sigma: DMatrix<f64>,
        omega: f64,
    ) -> Result<Self> {
        config.validate()?;
        let table = EffectTable::new(config.k, config.l, config.order)?;
        let n = config.n;
        let j = config.j();
        let h = table.h();
        if y.shape() != (n, j) {
            return Err(Error::Config(format!(
                "responses are {}x{}, expected {n}x{j}",
                y.nrows(),
                y.ncols()
            )));
        }
        for jj in 0..j {
            for i in 0..n {
                if y[(i, jj)] as usize >= config.m[jj] {
                    return Err(Error::Data {
                        message: format!(
                            "response ({i},{jj}) = {} exceeds the item's top level {}",
                            y[(i, jj)],
                            config.m[jj] - 1
                        ),
                        line: None,
                    });
                }
            }
        }
        if x.shape() != (n, config.d) {
            return Err(Error::Config(format!(
                "covariates are {}x{}, expected {n}x{}",
                x.nrows(),
                x.ncols(),
                config.d
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("covariates contain non-finite values".into()));
        }
        if items.beta.shape() != (h, j) || items.delta.shape() != (h, j) {
            return Err(Error::Config(format!(
                "coefficient blocks are {}x{} and {}x{}, expected {h}x{j}",
                items.beta.nrows(),
                items.beta.ncols(),
                items.delta.nrows(),
                items.delta.ncols()
            )));
        }
        if items.kappa.len() != j {
            return Err(Error::Config(format!(
                "cutpoint list has {} items, expected {j}",
                items.kappa.len()
            )));
        }
        for (jj, cuts) in items.kappa.iter().enumerate() {
            check_cut_vector(cuts, config.m[jj] + 1, &format!("item {jj} cutpoints"))?;
        }
        if ystar.shape() != (n, j) {
            return Err(Error::Config("latent response shape mismatch".into()));
        }
        if alpha.shape() != (n, config.k) || alpha_star_t.shape() != (n, config.k) {
            return Err(Error::Config("attribute block shape mismatch".into()));
        }
        if gamma_t.len() != config.k {
            return Err(Error::Config(format!(
                "threshold list has {} attributes, expected {}",
                gamma_t.len(),
                config.k
            )));
        }
        for (k, cuts) in gamma_t.iter().enumerate() {
            check_cut_vector(cuts, config.l + 1, &format!("attribute {k} thresholds"))?;
        }
        if lambda_t.shape() != (config.d, config.k) {
            return Err(Error::Config("regression coefficient shape mismatch".into()));
        }
        let xtx_i = x.transpose() * &x + DMatrix::<f64>::identity(config.d, config.d);
        let xtx_i_chol = Cholesky::new(xtx_i).ok_or_else(|| {
            Error::Config("ridge-augmented covariate gram is not positive definite".into())
        })?;
        let xtx_i_inv = xtx_i_chol.inverse();
        let mut state_idx = vec![0usize; n];
        let mut profile = vec![0u8; config.k];
        for i in 0..n {
            for k in 0..config.k {
                profile[k] = alpha[(i, k)];
                if profile[k] as usize >= config.l {
                    return Err(Error::Config(format!(
                        "attribute ({i},{k}) = {} exceeds the top level {}",
                        profile[k],
                        config.l - 1
                    )));
                }
            }
            state_idx[i] = table.state_index(&profile);
        }
        let item_names = (1..=j).map(|t| format!("item{t}")).collect();
        let covariate_names = (1..=config.d).map(|t| format!("x{t}")).collect();
        let sigma_kappa = vec![config.sigma_kappa; j];
        let num_states = table.num_states();
        let mut st = ChainState {
            state_scores: DMatrix::zeros(num_states, j),
            gram: DMatrix::zeros(h, h),
            dty: DMatrix::zeros(h, j),
            kappa_window_accepts: vec![0; j],
            kappa_post_accepts: vec![0; j],
            kappa_post_attempts: vec![0; j],
            gamma_top_unbounded: vec![0; config.k],
            in_burnin: true,
            config,
            table,
            y,
            x,
            item_names,
            covariate_names,
            items,
            ystar,
            sigma_kappa,
            alpha,
            alpha_star_t,
            gamma_t,
            lambda_t,
            sigma,
            omega,
            state_idx,
            xtx_i_chol,
            xtx_i_inv,
        };
        for jj in 0..st.config.j() {
            st.refresh_state_scores_col(jj);
        }
        st.refresh_design_stats();
        st.check_invariants()?;
        Ok(st)
    }

    /// Recomputes the fitted score of every profile for item `j` from the
    /// current coefficients, clearing any incremental rounding drift.
    pub(crate) fn refresh_state_scores_col(&mut self, j: usize) {
        let Self {
            table,
            state_scores,
            items,
            ..
        } = self;
        for (s, d) in table.state_design().iter().enumerate() {
            let mut acc = 0.0;
            for (h, dh) in d.iter().enumerate() {
                if *dh == 1.0 {
                    acc += items.beta[(h, j)];
                }
            }
            state_scores[(s, j)] = acc;
        }
    }

    /// Adds `step` to the fitted score of every profile that activates
    /// effect `h`, keeping the score cache in sync with a coefficient move.
    pub(crate) fn bump_state_scores(&mut self, j: usize, h: usize, step: f64) {
        let Self {
            table,
            state_scores,
            ..
        } = self;
        for (s, d) in table.state_design().iter().enumerate() {
            if d[h] == 1.0 {
                state_scores[(s, j)] += step;
            }
        }
    }

    /// Rebuilds the design cross-products d'd and d'Y* for the current
    /// profiles and latent responses. Grouping respondents by profile keeps
    /// this at O(N J) plus a term in the number of profiles.
    pub(crate) fn refresh_design_stats(&mut self) {
        let Self {
            table,
            config,
            state_idx,
            ystar,
            gram,
            dty,
            ..
        } = self;
        let num_states = table.num_states();
        let h = table.h();
        let j = config.j();
        let mut counts = vec![0usize; num_states];
        for &s in state_idx.iter() {
            counts[s] += 1;
        }
        let mut acc = DMatrix::<f64>::zeros(num_states, j);
        for i in 0..config.n {
            let s = state_idx[i];
            for jj in 0..j {
                acc[(s, jj)] += ystar[(i, jj)];
            }
        }
        gram.fill(0.0);
        dty.fill(0.0);
        for (s, d) in table.state_design().iter().enumerate() {
            if counts[s] == 0 {
                continue;
            }
            let c = counts[s] as f64;
            for h1 in 0..h {
                if d[h1] != 1.0 {
                    continue;
                }
                for h2 in 0..h {
                    if d[h2] == 1.0 {
                        gram[(h1, h2)] += c;
                    }
                }
                for jj in 0..j {
                    dty[(h1, jj)] += acc[(s, jj)];
                }
            }
        }
    }

    /// Burn-in adaptation of the cutpoint proposal sds: multiply by 1.1
    /// when the windowed acceptance exceeds 0.5, by 0.9 when it falls below
    /// 0.3. Items without free cutpoints are left alone.
    pub(crate) fn tune_cutpoint_proposals(&mut self, window: usize) {
        for j in 0..self.config.j() {
            if self.config.m[j] < 3 {
                continue;
            }
            let rate = self.kappa_window_accepts[j] as f64 / window as f64;
            if rate > 0.5 {
                self.sigma_kappa[j] *= 1.1;
            } else if rate < 0.3 {
                self.sigma_kappa[j] *= 0.9;
            }
            self.kappa_window_accepts[j] = 0;
        }
    }

    /// Verifies every support, ordering, and cone invariant of the current
    /// state: latent responses inside their cutpoint bins, latent attribute
    /// scores inside their threshold bins, strictly increasing cut vectors,
    /// monotone coefficient columns, consistent inclusion bookkeeping, a
    /// symmetric positive definite covariance, and an interior inclusion
    /// rate.
    pub fn check_invariants(&self) -> Result<()> {
        let cfg = &self.config;
        let h = self.table.h();
        let mut profile = vec![0u8; cfg.k];
        for j in 0..cfg.j() {
            let cuts = &self.items.kappa[j];
            if !cuts_strictly_increasing(cuts) {
                return Err(Error::Domain(format!(
                    "item {j} cutpoints are not strictly increasing"
                )));
            }
            for i in 0..cfg.n {
                let yi = self.y[(i, j)] as usize;
                let ys = self.ystar[(i, j)];
                if !(ys > cuts[yi] && ys <= cuts[yi + 1]) {
                    return Err(Error::Domain(format!(
                        "latent response ({i},{j}) = {ys} lies outside bin ({}, {}]",
                        cuts[yi],
                        cuts[yi + 1]
                    )));
                }
            }
            let beta_j: Vec<f64> = (0..h).map(|hh| self.items.beta[(hh, j)]).collect();
            if !self.table.is_monotone(&beta_j, 1e-12) {
                return Err(Error::Domain(format!(
                    "item {j} coefficients leave the monotonicity cone"
                )));
            }
            if self.items.delta[(0, j)] != 1 {
                return Err(Error::Domain(format!(
                    "intercept inclusion of item {j} is switched off"
                )));
            }
            for hh in 0..h {
                let d = self.items.delta[(hh, j)];
                if d > 1 {
                    return Err(Error::Domain(format!(
                        "inclusion flag ({hh},{j}) = {d} is not binary"
                    )));
                }
                if d == 0 && self.items.beta[(hh, j)] != 0.0 {
                    return Err(Error::Domain(format!(
                        "excluded coefficient ({hh},{j}) is nonzero"
                    )));
                }
            }
        }
        for k in 0..cfg.k {
            let cuts = &self.gamma_t[k];
            if !cuts_strictly_increasing(cuts) {
                return Err(Error::Domain(format!(
                    "attribute {k} thresholds are not strictly increasing"
                )));
            }
            for i in 0..cfg.n {
                let a = self.alpha[(i, k)] as usize;
                if a >= cfg.l {
                    return Err(Error::Domain(format!(
                        "attribute ({i},{k}) = {a} exceeds the top level"
                    )));
                }
                let v = self.alpha_star_t[(i, k)];
                if !(v > cuts[a] && v <= cuts[a + 1]) {
                    return Err(Error::Domain(format!(
                        "latent attribute ({i},{k}) = {v} lies outside bin ({}, {}]",
                        cuts[a],
                        cuts[a + 1]
                    )));
                }
            }
        }
        for i in 0..cfg.n {
            for k in 0..cfg.k {
                profile[k] = self.alpha[(i, k)];
            }
            if self.table.state_index(&profile) != self.state_idx[i] {
                return Err(Error::Domain(format!(
                    "stale profile index for respondent {i}"
                )));
            }
        }
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::Domain(format!(
                "inclusion rate {} left the open unit interval",
                self.omega
            )));
        }
        let asym = (self.sigma.clone() - self.sigma.transpose()).abs().max();
        if asym > 1e-9 {
            return Err(Error::Domain(format!(
                "attribute covariance asymmetric by {asym}"
            )));
        }
        if Cholesky::new(self.sigma.clone()).is_none() {
            return Err(Error::Domain(
                "attribute covariance is not positive definite".into(),
            ));
        }
        Ok(())
    }

    /// Log joint density of the current state under the sampler's target,
    /// up to a constant: latent responses given coefficients and profiles,
    /// the slab/spike coefficient prior with its per-coordinate cone
    /// normalizers, the inclusion and inclusion-rate priors, latent
    /// attribute rows given the regression, the regression and covariance
    /// priors, and the exponential tie-down on the top thresholds. Support
    /// violations return -inf. Used as a drift statistic, not inside the
    /// updates themselves.
    pub fn log_joint(&self) -> f64 {
        let cfg = &self.config;
        let h = self.table.h();
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        let mut lp = 0.0;
        for j in 0..cfg.j() {
            let cuts = &self.items.kappa[j];
            for i in 0..cfg.n {
                let e = self.state_scores[(self.state_idx[i], j)];
                let ys = self.ystar[(i, j)];
                lp += ln_std_normal_pdf(ys - e);
                let yi = self.y[(i, j)] as usize;
                if !(ys > cuts[yi] && ys <= cuts[yi + 1]) {
                    return f64::NEG_INFINITY;
                }
            }
        }
        let sb = cfg.sigma_beta_sq.sqrt();
        for j in 0..cfg.j() {
            let beta_j: Vec<f64> = (0..h).map(|hh| self.items.beta[(hh, j)]).collect();
            lp += ln_std_normal_pdf(beta_j[0] / sb) - sb.ln();
            for hh in 1..h {
                if self.items.delta[(hh, j)] == 1 {
                    let lower = self.table.monotonicity_lower_bound(hh, &beta_j);
                    if beta_j[hh] < lower {
                        return f64::NEG_INFINITY;
                    }
                    lp += ln_std_normal_pdf(beta_j[hh] / sb) - sb.ln()
                        - std_normal_sf(lower / sb).ln();
                    lp += self.omega.ln();
                } else {
                    lp += (1.0 - self.omega).ln();
                }
            }
        }
        lp += (cfg.omega_prior.0 - 1.0) * self.omega.ln()
            + (cfg.omega_prior.1 - 1.0) * (1.0 - self.omega).ln();
        let chol = match Cholesky::new(self.sigma.clone()) {
            Some(c) => c,
            None => return f64::NEG_INFINITY,
        };
        let ln_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let x_lambda = &self.x * &self.lambda_t;
        let kf = cfg.k as f64;
        for i in 0..cfg.n {
            let r = nalgebra::DVector::from_iterator(
                cfg.k,
                (0..cfg.k).map(|k| self.alpha_star_t[(i, k)] - x_lambda[(i, k)]),
            );
            let s = chol.solve(&r);
            lp += -0.5 * (kf * ln_2pi + ln_det + r.dot(&s));
            for k in 0..cfg.k {
                let cuts = &self.gamma_t[k];
                let a = self.alpha[(i, k)] as usize;
                let v = self.alpha_star_t[(i, k)];
                if !(v > cuts[a] && v <= cuts[a + 1]) {
                    return f64::NEG_INFINITY;
                }
            }
        }
        let df = cfg.d as f64;
        let mut quad = 0.0;
        for d in 0..cfg.d {
            let row = nalgebra::DVector::from_iterator(
                cfg.k,
                (0..cfg.k).map(|k| self.lambda_t[(d, k)]),
            );
            let s = chol.solve(&row);
            quad += row.dot(&s);
        }
        lp += -0.5 * (df * kf * ln_2pi + df * ln_det + quad);
        lp += -0.5 * (cfg.v0() + kf + 1.0) * ln_det - 0.5 * chol.inverse().trace();
        if cfg.l >= 3 {
            for k in 0..cfg.k {
                lp += cfg.gamma_rate.ln() - cfg.gamma_rate * self.gamma_t[k][cfg.l - 1];
            }
        }
        lp
    }
}

fn check_cut_vector(cuts: &[f64], want_len: usize, what: &str) -> Result<()> {
    if cuts.len() != want_len {
        return Err(Error::Config(format!(
            "{what} have length {}, expected {want_len}",
            cuts.len()
        )));
    }
    if cuts[0] != f64::NEG_INFINITY || cuts[1] != 0.0 || cuts[want_len - 1] != f64::INFINITY {
        return Err(Error::Config(format!(
            "{what} must run from -inf through a zero anchor to +inf"
        )));
    }
    if !cuts_strictly_increasing(cuts) {
        return Err(Error::Config(format!(
            "{what} are not strictly increasing"
        )));
    }
    Ok(())
}
