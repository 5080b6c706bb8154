//! Model and run configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions, hyperparameters, and run switches for one fit.
///
/// The inverse-Wishart prior degrees of freedom are fixed at `K + 1` (the
/// smallest value giving a proper prior with unit prior scale); they are
/// exposed through [`ModelConfig::v0`] rather than stored, so the constraint
/// holds by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Respondent count.
    pub n: usize,
    /// Response levels per item; `m.len()` is the item count J.
    pub m: Vec<usize>,
    /// Attribute count K.
    pub k: usize,
    /// Levels per attribute L (ordinal, 0..L-1).
    pub l: usize,
    /// Covariate columns including the intercept.
    pub d: usize,
    /// Highest interaction order kept in the design expansion.
    pub order: usize,
    /// Slab variance for active measurement coefficients.
    #[serde(default = "default_sigma_beta_sq")]
    pub sigma_beta_sq: f64,
    /// Beta prior parameters for the inclusion probability omega.
    #[serde(default = "default_omega_prior")]
    pub omega_prior: (f64, f64),
    /// Exponential rate tying down the top attribute threshold.
    #[serde(default = "default_gamma_rate")]
    pub gamma_rate: f64,
    /// Initial random-walk sd for cutpoint proposals; auto-tuned during
    /// burn-in, frozen afterwards.
    #[serde(default = "default_sigma_kappa")]
    pub sigma_kappa: f64,
    /// Total iterations including burn-in.
    pub chain_length: usize,
    /// Burn-in iterations (not recorded).
    pub burnin: usize,
    /// Count the fixed intercept row among the Bernoulli draws in omega's
    /// Beta update. Off by default: that row is not a random inclusion.
    #[serde(default)]
    pub omega_count_includes_intercept: bool,
    /// Clip a negative intercept at the least-squares initialization.
    /// Off by default: the intercept is exempt from the nonnegativity clip.
    #[serde(default)]
    pub clip_intercept_at_init: bool,
    /// Check support/cone/ordering invariants every iteration and abort on
    /// violation. Costs time; meant for validation runs.
    #[serde(default)]
    pub check_invariants: bool,
    /// Record the log joint density of the visited states.
    #[serde(default)]
    pub record_log_joint: bool,
}

fn default_sigma_beta_sq() -> f64 {
    2.0
}

fn default_omega_prior() -> (f64, f64) {
    (0.5, 0.5)
}

fn default_gamma_rate() -> f64 {
    1e-3
}

fn default_sigma_kappa() -> f64 {
    0.25
}

impl ModelConfig {
    /// Baseline configuration with default hyperparameters.
    pub fn new(n: usize, m: Vec<usize>, k: usize, l: usize, d: usize, order: usize) -> Self {
        ModelConfig {
            n,
            m,
            k,
            l,
            d,
            order,
            sigma_beta_sq: default_sigma_beta_sq(),
            omega_prior: default_omega_prior(),
            gamma_rate: default_gamma_rate(),
            sigma_kappa: default_sigma_kappa(),
            chain_length: 0,
            burnin: 0,
            omega_count_includes_intercept: false,
            clip_intercept_at_init: false,
            check_invariants: false,
            record_log_joint: false,
        }
    }

    pub fn with_chain(mut self, chain_length: usize, burnin: usize) -> Self {
        self.chain_length = chain_length;
        self.burnin = burnin;
        self
    }

    /// Item count.
    pub fn j(&self) -> usize {
        self.m.len()
    }

    /// Inverse-Wishart prior degrees of freedom, fixed at K + 1.
    pub fn v0(&self) -> f64 {
        self.k as f64 + 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.l < 2 {
            return Err(Error::Config(format!("l must be at least 2, got {}", self.l)));
        }
        if self.order == 0 || self.order > self.k {
            return Err(Error::Config(format!(
                "order must lie in 1..=k = {}, got {}",
                self.k, self.order
            )));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1 (intercept column)".into()));
        }
        for (j, &mj) in self.m.iter().enumerate() {
            if mj < 2 {
                return Err(Error::Config(format!(
                    "item {j} has {mj} response levels; at least 2 required"
                )));
            }
        }
        for (name, v) in [
            ("sigma_beta_sq", self.sigma_beta_sq),
            ("omega_prior.0", self.omega_prior.0),
            ("omega_prior.1", self.omega_prior.1),
            ("gamma_rate", self.gamma_rate),
            ("sigma_kappa", self.sigma_kappa),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.burnin > self.chain_length {
            return Err(Error::Config(format!(
                "burnin {} exceeds chain length {}",
                self.burnin, self.chain_length
            )));
        }
        Ok(())
    }
}
