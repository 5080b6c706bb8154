//! Cumulative-coding design expansion over ordinal attribute profiles.
//!
//! An attribute profile alpha in {0..L-1}^K maps to a binary design vector
//! indexed by effect tuples e with entries prod_k I(alpha_k >= e_k). Tuples
//! are enumerated with the last attribute varying fastest and truncated to
//! those with at most `order` nonzero entries; tuple (0,...,0) is the
//! intercept and always comes first. Dominance of profiles (componentwise
//! >=) drives the monotonicity cone on item coefficients.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EffectTable {
    k: usize,
    l: usize,
    order: usize,
    effects: Vec<Vec<u8>>,
    labels: Vec<String>,
    states: Vec<Vec<u8>>,
    state_design: Vec<Vec<f64>>,
    dominance_pairs: Vec<(usize, usize)>,
    activation_pairs: Vec<Vec<(usize, usize)>>,
}

impl EffectTable {
    pub fn new(k: usize, l: usize, order: usize) -> Result<Self> {
        if k == 0 || l < 2 {
            return Err(Error::Config(format!(
                "effect table requires k >= 1 and l >= 2, got k={k}, l={l}"
            )));
        }
        if order == 0 || order > k {
            return Err(Error::Config(format!(
                "effect table order must lie in 1..={k}, got {order}"
            )));
        }
        let states = enumerate_tuples(k, l);
        let effects: Vec<Vec<u8>> = enumerate_tuples(k, l)
            .into_iter()
            .filter(|t| t.iter().filter(|&&x| x > 0).count() <= order)
            .collect();
        let labels = effects.iter().map(|t| label_of(t)).collect();
        let state_design: Vec<Vec<f64>> = states
            .iter()
            .map(|alpha| {
                effects
                    .iter()
                    .map(|e| {
                        if e.iter().zip(alpha).all(|(&req, &a)| a >= req) {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let mut dominance_pairs = Vec::new();
        for (u, su) in states.iter().enumerate() {
            for (v, sv) in states.iter().enumerate() {
                if u != v && su.iter().zip(sv).all(|(a, b)| a >= b) {
                    dominance_pairs.push((u, v));
                }
            }
        }
        let activation_pairs = (0..effects.len())
            .map(|h| {
                dominance_pairs
                    .iter()
                    .copied()
                    .filter(|&(u, v)| state_design[u][h] == 1.0 && state_design[v][h] == 0.0)
                    .collect()
            })
            .collect();
        Ok(EffectTable {
            k,
            l,
            order,
            effects,
            labels,
            states,
            state_design,
            dominance_pairs,
            activation_pairs,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of effects H.
    pub fn h(&self) -> usize {
        self.effects.len()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn effects(&self) -> &[Vec<u8>] {
        &self.effects
    }

    /// Human-readable effect labels "[e1 e2 ... eK]".
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn state_design(&self) -> &[Vec<f64>] {
        &self.state_design
    }

    pub fn activation_pairs(&self, h: usize) -> &[(usize, usize)] {
        &self.activation_pairs[h]
    }

    pub fn dominance_pairs(&self) -> &[(usize, usize)] {
        &self.dominance_pairs
    }

    /// Position of a profile in the state enumeration (last attribute
    /// fastest).
    pub fn state_index(&self, alpha: &[u8]) -> usize {
        debug_assert_eq!(alpha.len(), self.k);
        let mut idx = 0usize;
        for &a in alpha {
            debug_assert!((a as usize) < self.l);
            idx = idx * self.l + a as usize;
        }
        idx
    }

    /// Effect index of a tuple, if it survived order truncation.
    pub fn effect_index(&self, tuple: &[u8]) -> Option<usize> {
        self.effects.iter().position(|e| e == tuple)
    }

    /// Design row of an arbitrary profile.
    pub fn design_row(&self, alpha: &[u8]) -> Vec<f64> {
        self.state_design[self.state_index(alpha)].clone()
    }

    /// Largest value of beta[h][j] at which flipping the effect off (or
    /// lowering it further) would break monotonicity, given the other
    /// coefficients of item j. -inf for the intercept (h = 0) and whenever
    /// no profile pair activates the effect.
    pub fn monotonicity_lower_bound(&self, h: usize, beta_j: &[f64]) -> f64 {
        debug_assert_eq!(beta_j.len(), self.h());
        let mut bound = f64::NEG_INFINITY;
        for &(u, v) in &self.activation_pairs[h] {
            let du = &self.state_design[u];
            let dv = &self.state_design[v];
            let mut s = 0.0;
            for hp in 0..beta_j.len() {
                if hp != h {
                    s += (dv[hp] - du[hp]) * beta_j[hp];
                }
            }
            if s > bound {
                bound = s;
            }
        }
        bound
    }

    /// Whether beta_j respects the dominance ordering within tolerance:
    /// every dominating profile has fitted value at least that of the
    /// dominated one minus `tol`.
    pub fn is_monotone(&self, beta_j: &[f64], tol: f64) -> bool {
        let scores: Vec<f64> = self
            .state_design
            .iter()
            .map(|d| d.iter().zip(beta_j).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        self.dominance_pairs
            .iter()
            .all(|&(u, v)| scores[u] >= scores[v] - tol)
    }
}

fn enumerate_tuples(k: usize, l: usize) -> Vec<Vec<u8>> {
    let total = l.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut t = vec![0u8; k];
        for pos in (0..k).rev() {
            t[pos] = (idx % l) as u8;
            idx /= l;
        }
        out.push(t);
    }
    out
}

fn label_of(tuple: &[u8]) -> String {
    let inner: Vec<String> = tuple.iter().map(|x| x.to_string()).collect();
    format!("[{}]", inner.join(" "))
}
