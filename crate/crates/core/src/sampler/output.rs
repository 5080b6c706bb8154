//! Recorded draws and chain-level summaries.

use crate::config::ModelConfig;
use crate::error::Result;
use crate::model::transform_to_original;

use super::state::ChainState;

/// Column-labeled draw storage, row-major by recorded iteration.
#[derive(Debug, Clone)]
pub struct DrawBlock {
    names: Vec<String>,
    data: Vec<f64>,
    rows: usize,
}

impl DrawBlock {
    pub(crate) fn new(names: Vec<String>) -> Self {
        DrawBlock {
            names,
            data: Vec::new(),
            rows: 0,
        }
    }

    fn reserve(&mut self, rows: usize) {
        self.data.reserve(rows * self.names.len());
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// All values, row-major.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.cols();
        &self.data[row * c..(row + 1) * c]
    }

    pub fn col_vec(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.value(r, col)).collect()
    }

    pub fn col_mean(&self, col: usize) -> f64 {
        if self.rows == 0 {
            return f64::NAN;
        }
        (0..self.rows).map(|r| self.value(r, col)).sum::<f64>() / self.rows as f64
    }

    pub(crate) fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.cols());
        self.data.extend_from_slice(row);
        self.rows += 1;
    }
}

/// Post-burn-in draws in identified coordinates plus chain summaries.
///
/// Coefficient and inclusion columns run item-major with effects inside
/// (`beta[item][e1 e2 ...]`); cutpoint columns carry the cut index within
/// the full vector; regression columns run covariate-major over
/// attributes; correlation columns hold the upper off-diagonal pairs.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub config: ModelConfig,
    pub effect_labels: Vec<String>,
    pub item_names: Vec<String>,
    pub covariate_names: Vec<String>,
    pub beta: DrawBlock,
    pub delta: DrawBlock,
    pub kappa: DrawBlock,
    pub lambda: DrawBlock,
    pub r: DrawBlock,
    pub gamma: DrawBlock,
    pub omega: DrawBlock,
    /// Log joint density per recorded draw when requested, else empty.
    pub log_joint: Vec<f64>,
    /// Post-burn-in attribute level counts, layout `[(i * K + k) * L + level]`.
    pub alpha_tally: Vec<u32>,
    /// Post-burn-in cutpoint acceptance rate per item: 1.0 for items
    /// without free cutpoints, NaN when nothing ran after burn-in.
    pub kappa_acceptance: Vec<f64>,
    /// Proposal sds as frozen after burn-in tuning.
    pub sigma_kappa: Vec<f64>,
    /// Per attribute: iterations whose top threshold had no data ceiling.
    pub gamma_top_unbounded: Vec<u64>,
}

impl ChainOutput {
    pub(crate) fn new(st: &ChainState) -> Self {
        let cfg = &st.config;
        let labels = st.table.labels();
        let items = &st.item_names;
        let mut beta_names = Vec::new();
        let mut delta_names = Vec::new();
        for item in items {
            for lab in labels {
                beta_names.push(format!("beta[{item}]{lab}"));
                delta_names.push(format!("delta[{item}]{lab}"));
            }
        }
        let mut kappa_names = Vec::new();
        for (j, item) in items.iter().enumerate() {
            for m in 2..cfg.m[j] {
                kappa_names.push(format!("kappa[{item}][{m}]"));
            }
        }
        let mut lambda_names = Vec::new();
        for cov in &st.covariate_names {
            for k in 1..=cfg.k {
                lambda_names.push(format!("lambda[{cov}][a{k}]"));
            }
        }
        let mut r_names = Vec::new();
        for i in 1..=cfg.k {
            for j2 in (i + 1)..=cfg.k {
                r_names.push(format!("r[a{i},a{j2}]"));
            }
        }
        let mut gamma_names = Vec::new();
        for k in 1..=cfg.k {
            for l in 2..cfg.l {
                gamma_names.push(format!("gamma[a{k}][{l}]"));
            }
        }
        ChainOutput {
            config: cfg.clone(),
            effect_labels: labels.to_vec(),
            item_names: items.clone(),
            covariate_names: st.covariate_names.clone(),
            beta: DrawBlock::new(beta_names),
            delta: DrawBlock::new(delta_names),
            kappa: DrawBlock::new(kappa_names),
            lambda: DrawBlock::new(lambda_names),
            r: DrawBlock::new(r_names),
            gamma: DrawBlock::new(gamma_names),
            omega: DrawBlock::new(vec!["omega".into()]),
            log_joint: Vec::new(),
            alpha_tally: vec![0; cfg.n * cfg.k * cfg.l],
            kappa_acceptance: vec![f64::NAN; cfg.j()],
            sigma_kappa: vec![cfg.sigma_kappa; cfg.j()],
            gamma_top_unbounded: vec![0; cfg.k],
        }
    }

    pub(crate) fn reserve(&mut self, rows: usize) {
        self.beta.reserve(rows);
        self.delta.reserve(rows);
        self.kappa.reserve(rows);
        self.lambda.reserve(rows);
        self.r.reserve(rows);
        self.gamma.reserve(rows);
        self.omega.reserve(rows);
    }

    /// Number of recorded draws.
    pub fn draws(&self) -> usize {
        self.omega.rows()
    }

    /// Tally of one respondent-attribute level over recorded draws.
    pub fn tally(&self, i: usize, k: usize, level: usize) -> u32 {
        self.alpha_tally[(i * self.config.k + k) * self.config.l + level]
    }

    /// Most-visited level of one respondent-attribute; ties go to the
    /// lowest level.
    pub fn modal_level(&self, i: usize, k: usize) -> usize {
        let mut best = 0usize;
        for l in 1..self.config.l {
            if self.tally(i, k, l) > self.tally(i, k, best) {
                best = l;
            }
        }
        best
    }

    pub(crate) fn record(&mut self, st: &ChainState) -> Result<()> {
        let cfg = &st.config;
        let h = st.table.h();
        let orig = transform_to_original(&st.sigma, &st.lambda_t, &st.gamma_t, &st.alpha_star_t)?;
        let mut row = Vec::with_capacity(self.beta.cols().max(self.lambda.cols()));
        for j in 0..cfg.j() {
            for hh in 0..h {
                row.push(st.items.beta[(hh, j)]);
            }
        }
        self.beta.push_row(&row);
        row.clear();
        for j in 0..cfg.j() {
            for hh in 0..h {
                row.push(st.items.delta[(hh, j)] as f64);
            }
        }
        self.delta.push_row(&row);
        row.clear();
        for j in 0..cfg.j() {
            for m in 2..cfg.m[j] {
                row.push(st.items.kappa[j][m]);
            }
        }
        self.kappa.push_row(&row);
        row.clear();
        for d in 0..cfg.d {
            for k in 0..cfg.k {
                row.push(orig.lambda[(d, k)]);
            }
        }
        self.lambda.push_row(&row);
        row.clear();
        for i in 0..cfg.k {
            for j2 in (i + 1)..cfg.k {
                row.push(orig.r[(i, j2)]);
            }
        }
        self.r.push_row(&row);
        row.clear();
        for k in 0..cfg.k {
            for l in 2..cfg.l {
                row.push(orig.gamma[k][l]);
            }
        }
        self.gamma.push_row(&row);
        self.omega.push_row(&[st.omega]);
        for i in 0..cfg.n {
            for k in 0..cfg.k {
                let idx = (i * cfg.k + k) * cfg.l + st.alpha[(i, k)] as usize;
                self.alpha_tally[idx] += 1;
            }
        }
        if cfg.record_log_joint {
            self.log_joint.push(st.log_joint());
        }
        Ok(())
    }

    pub(crate) fn finish(&mut self, st: &ChainState) {
        for j in 0..st.config.j() {
            let attempts = st.kappa_post_attempts[j];
            self.kappa_acceptance[j] = if attempts == 0 {
                f64::NAN
            } else {
                st.kappa_post_accepts[j] as f64 / attempts as f64
            };
        }
        self.sigma_kappa = st.sigma_kappa.clone();
        self.gamma_top_unbounded = st.gamma_top_unbounded.clone();
    }
}
