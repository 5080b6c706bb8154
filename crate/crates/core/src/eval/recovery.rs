//! Parameter-recovery scoring against a known generating truth.
//!
//! Attribute labels are only identified up to permutation, so each fit is
//! first aligned to the truth by the relabeling that best matches the
//! posterior modal profiles, and that relabeling is applied to the
//! regression, correlation, threshold, and effect blocks before any error
//! is measured.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{cuts_from_interior, eta_for_item, EffectTable};
use crate::sampler::ChainOutput;
use crate::sim::TruthSet;

/// All orderings of 0..k, in lexicographic enumeration order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; k];
    fn rec(k: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(k, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(k, &mut current, &mut used, &mut out);
    out
}

/// Attribute relabeling maximizing modal-profile agreement with the true
/// profiles: entry k of the result names the fitted attribute standing in
/// for true attribute k. Returns the relabeling and the matched fraction.
/// Ties resolve to the lexicographically first permutation.
pub fn align_attributes(out: &ChainOutput, true_alpha: &DMatrix<u8>) -> (Vec<usize>, f64) {
    let n = out.config.n;
    let k = out.config.k;
    let modal = DMatrix::<u8>::from_fn(n, k, |i, kk| out.modal_level(i, kk) as u8);
    let mut best: Option<(Vec<usize>, usize)> = None;
    for sigma in permutations(k) {
        let mut agree = 0usize;
        for i in 0..n {
            for kk in 0..k {
                if modal[(i, sigma[kk])] == true_alpha[(i, kk)] {
                    agree += 1;
                }
            }
        }
        match &best {
            Some((_, a)) if *a >= agree => {}
            _ => best = Some((sigma, agree)),
        }
    }
    let (sigma, agree) = best.expect("k >= 1 gives at least one permutation");
    (sigma, agree as f64 / (n * k) as f64)
}

/// Pooled recovery errors over a set of replicate fits of one truth.
///
/// All mean absolute errors pool elementwise over replicates. The response
/// probability block compares posterior-averaged class-conditional
/// probabilities (recomputed per draw) over every profile, item, and
/// level. Inclusion accuracy skips the intercept row, whose indicator is
/// fixed; its splits and the coefficient splits condition on the true
/// indicator. Blocks that are empty for the dimensions at hand (null
/// split with an all-active truth, correlations with one attribute,
/// thresholds with two levels) report as absent rather than zero.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub reps: usize,
    /// Mean over replicates of the aligned modal-profile match rate.
    pub alignment_agreement: f64,
    pub per_rep_agreement: Vec<f64>,
    pub mae_eta: f64,
    pub mae_beta: f64,
    pub mae_beta_active: Option<f64>,
    pub mae_beta_null: Option<f64>,
    pub mae_lambda: f64,
    pub mae_r: Option<f64>,
    pub mae_gamma: Option<f64>,
    pub delta_accuracy: Option<f64>,
    pub delta_accuracy_active: Option<f64>,
    pub delta_accuracy_null: Option<f64>,
}

#[derive(Default)]
struct ErrAcc {
    total: f64,
    count: usize,
}

impl ErrAcc {
    fn add(&mut self, err: f64) {
        self.total += err.abs();
        self.count += 1;
    }

    fn mae(&self) -> Option<f64> {
        if self.count == 0 {
            None
        } else {
            Some(self.total / self.count as f64)
        }
    }
}

/// Scores replicate fits `(chain output, true profiles)` against the truth
/// they were generated from.
pub fn recovery_report(
    truth: &TruthSet,
    fits: &[(&ChainOutput, &DMatrix<u8>)],
) -> Result<RecoveryReport> {
    let (first, _) = fits
        .first()
        .ok_or_else(|| Error::Usage("recovery needs at least one fitted replicate".into()))?;
    let cfg = &first.config;
    if cfg.j() == 0 {
        return Err(Error::Config("recovery needs at least one item".into()));
    }
    let table = EffectTable::new(cfg.k, cfg.l, cfg.order)?;
    let h = table.h();
    let j = cfg.j();
    if truth.items.beta.nrows() != h
        || truth.items.beta.ncols() != j
        || truth.structural.lambda.nrows() != cfg.d
        || truth.structural.lambda.ncols() != cfg.k
        || truth.structural.gamma.len() != cfg.k
        || truth.structural.gamma[0].len() != cfg.l + 1
    {
        return Err(Error::Config(
            "generating truth and fitted model have different dimensions".into(),
        ));
    }
    let s = table.num_states();

    // True class-conditional response probabilities, computed once.
    let truth_eta: Vec<DMatrix<f64>> = (0..j)
        .map(|jj| {
            let beta_j: Vec<f64> = (0..h).map(|hh| truth.items.beta[(hh, jj)]).collect();
            eta_for_item(&table, &beta_j, &truth.items.kappa[jj])
        })
        .collect();

    let mut eta_err = ErrAcc::default();
    let mut beta_err = ErrAcc::default();
    let mut beta_active_err = ErrAcc::default();
    let mut beta_null_err = ErrAcc::default();
    let mut lambda_err = ErrAcc::default();
    let mut r_err = ErrAcc::default();
    let mut gamma_err = ErrAcc::default();
    let mut delta_hits = ErrAcc::default();
    let mut delta_hits_active = ErrAcc::default();
    let mut delta_hits_null = ErrAcc::default();
    let mut per_rep_agreement = Vec::with_capacity(fits.len());

    for &(out, true_alpha) in fits {
        let ocfg = &out.config;
        if ocfg.k != cfg.k || ocfg.l != cfg.l || ocfg.order != cfg.order || ocfg.m != cfg.m
            || ocfg.d != cfg.d
        {
            return Err(Error::Config(
                "replicate fits have mismatched model dimensions".into(),
            ));
        }
        if true_alpha.nrows() != ocfg.n || true_alpha.ncols() != ocfg.k {
            return Err(Error::Config(
                "true profile matrix does not match the fit's respondent count".into(),
            ));
        }
        if out.draws() == 0 {
            return Err(Error::Usage("a replicate fit recorded no draws".into()));
        }
        let (sigma, agree) = align_attributes(out, true_alpha);
        per_rep_agreement.push(agree);

        // Effect and profile index maps induced by the relabeling: the
        // fitted tuple places true attribute k's requirement at fitted
        // position sigma[k].
        let mut effect_map = vec![0usize; h];
        for (h_t, tuple) in table.effects().iter().enumerate() {
            let mut pe = vec![0u8; cfg.k];
            for k in 0..cfg.k {
                pe[sigma[k]] = tuple[k];
            }
            effect_map[h_t] = table
                .effect_index(&pe)
                .expect("relabeling preserves interaction order");
        }
        let mut state_map = vec![0usize; s];
        for (s_t, profile) in table.states().iter().enumerate() {
            let mut ps = vec![0u8; cfg.k];
            for k in 0..cfg.k {
                ps[sigma[k]] = profile[k];
            }
            state_map[s_t] = table.state_index(&ps);
        }

        // Measurement side: posterior means, modal inclusion, averaged
        // response probabilities.
        let draws = out.draws();
        let mut eta_acc: Vec<DMatrix<f64>> =
            (0..j).map(|jj| DMatrix::zeros(s, cfg.m[jj])).collect();
        let mut kappa_off = vec![0usize; j];
        let mut off = 0usize;
        for (jj, &mj) in cfg.m.iter().enumerate() {
            kappa_off[jj] = off;
            off += mj - 2;
        }
        for r in 0..draws {
            let beta_row = out.beta.row(r);
            let kappa_row = out.kappa.row(r);
            for jj in 0..j {
                let beta_j = &beta_row[jj * h..(jj + 1) * h];
                let kappa_j =
                    cuts_from_interior(&kappa_row[kappa_off[jj]..kappa_off[jj] + cfg.m[jj] - 2]);
                let eta = eta_for_item(&table, beta_j, &kappa_j);
                let acc = &mut eta_acc[jj];
                for s_t in 0..s {
                    for m in 0..cfg.m[jj] {
                        acc[(s_t, m)] += eta[(state_map[s_t], m)];
                    }
                }
            }
        }
        for jj in 0..j {
            for s_t in 0..s {
                for m in 0..cfg.m[jj] {
                    eta_err.add(eta_acc[jj][(s_t, m)] / draws as f64 - truth_eta[jj][(s_t, m)]);
                }
            }
        }

        for jj in 0..j {
            for h_t in 0..h {
                let col = jj * h + effect_map[h_t];
                let err = out.beta.col_mean(col) - truth.items.beta[(h_t, jj)];
                beta_err.add(err);
                if truth.items.delta[(h_t, jj)] == 1 {
                    beta_active_err.add(err);
                } else {
                    beta_null_err.add(err);
                }
                if h_t > 0 {
                    let mode = f64::from(out.delta.col_mean(col) > 0.5);
                    let hit = f64::from(mode as u8 == truth.items.delta[(h_t, jj)]);
                    delta_hits.add(hit);
                    if truth.items.delta[(h_t, jj)] == 1 {
                        delta_hits_active.add(hit);
                    } else {
                        delta_hits_null.add(hit);
                    }
                }
            }
        }

        // Structural side under the relabeling.
        for d in 0..cfg.d {
            for k in 0..cfg.k {
                let est = out.lambda.col_mean(d * cfg.k + sigma[k]);
                lambda_err.add(est - truth.structural.lambda[(d, k)]);
            }
        }
        if cfg.k > 1 {
            let mut r_mean = DMatrix::identity(cfg.k, cfg.k);
            let mut p = 0usize;
            for i in 0..cfg.k {
                for j2 in (i + 1)..cfg.k {
                    let v = out.r.col_mean(p);
                    r_mean[(i, j2)] = v;
                    r_mean[(j2, i)] = v;
                    p += 1;
                }
            }
            for i in 0..cfg.k {
                for j2 in (i + 1)..cfg.k {
                    r_err.add(r_mean[(sigma[i], sigma[j2])] - truth.structural.r[(i, j2)]);
                }
            }
        }
        for k in 0..cfg.k {
            for li in 0..cfg.l - 2 {
                let est = out.gamma.col_mean(sigma[k] * (cfg.l - 2) + li);
                gamma_err.add(est - truth.structural.gamma[k][2 + li]);
            }
        }
    }

    let agreement =
        per_rep_agreement.iter().sum::<f64>() / per_rep_agreement.len() as f64;
    Ok(RecoveryReport {
        reps: fits.len(),
        alignment_agreement: agreement,
        per_rep_agreement,
        mae_eta: eta_err.mae().expect("items exist"),
        mae_beta: beta_err.mae().expect("items exist"),
        mae_beta_active: beta_active_err.mae(),
        mae_beta_null: beta_null_err.mae(),
        mae_lambda: lambda_err.mae().expect("covariates exist"),
        mae_r: r_err.mae(),
        mae_gamma: gamma_err.mae(),
        delta_accuracy: delta_hits.mae(),
        delta_accuracy_active: delta_hits_active.mae(),
        delta_accuracy_null: delta_hits_null.mae(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::model::{ItemParams, StructuralParams};
    use crate::sampler::DrawBlock;

    /// Hand-built truth with clearly distinguishable attributes: K = 2,
    /// L = 2, J = 4, M_j = 3, full interaction order.
    pub(crate) fn toy_truth() -> TruthSet {
        let beta = DMatrix::from_row_slice(
            4,
            4,
            &[
                -0.5, -0.8, -0.3, -0.6, // intercept
                1.2, 0.9, 1.4, 1.1, // main effect of attribute 1
                0.4, 0.6, 0.0, 0.5, // main effect of attribute 2
                0.3, 0.0, 0.0, 0.2, // interaction
            ],
        );
        let delta = DMatrix::from_row_slice(
            4,
            4,
            &[1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 0, 0, 1],
        );
        let kappa = vec![cuts_from_interior(&[1.0]); 4];
        let lambda = DMatrix::from_row_slice(3, 2, &[0.5, 0.1, 0.3, -0.2, -0.4, 0.6]);
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, 1.0]);
        let gamma = vec![cuts_from_interior(&[]); 2];
        TruthSet {
            items: ItemParams { beta, delta, kappa },
            structural: StructuralParams { lambda, r, gamma },
        }
    }

    /// ChainOutput whose every draw equals the given parameters and whose
    /// profile tallies equal the given profiles, as if the chain had
    /// collapsed onto them.
    pub(crate) fn degenerate_output(
        cfg: &ModelConfig,
        params: &TruthSet,
        alpha: &DMatrix<u8>,
        draws: usize,
    ) -> ChainOutput {
        let table = EffectTable::new(cfg.k, cfg.l, cfg.order).unwrap();
        let h = table.h();
        let j = cfg.j();
        let names = |n: usize, tag: &str| (0..n).map(|i| format!("{tag}{i}")).collect::<Vec<_>>();
        let mut beta = DrawBlock::new(names(h * j, "b"));
        let mut delta = DrawBlock::new(names(h * j, "d"));
        let kcols: usize = cfg.m.iter().map(|m| m - 2).sum();
        let mut kappa = DrawBlock::new(names(kcols, "k"));
        let mut lambda = DrawBlock::new(names(cfg.d * cfg.k, "l"));
        let mut rblk = DrawBlock::new(names(cfg.k * (cfg.k - 1) / 2, "r"));
        let mut gamma = DrawBlock::new(names(cfg.k * (cfg.l - 2), "g"));
        let mut omega = DrawBlock::new(names(1, "w"));
        let beta_row: Vec<f64> = (0..j)
            .flat_map(|jj| (0..h).map(move |hh| (hh, jj)))
            .map(|(hh, jj)| params.items.beta[(hh, jj)])
            .collect();
        let delta_row: Vec<f64> = (0..j)
            .flat_map(|jj| (0..h).map(move |hh| (hh, jj)))
            .map(|(hh, jj)| params.items.delta[(hh, jj)] as f64)
            .collect();
        let kappa_row: Vec<f64> = (0..j)
            .flat_map(|jj| params.items.kappa[jj][2..cfg.m[jj]].to_vec())
            .collect();
        let lambda_row: Vec<f64> = (0..cfg.d)
            .flat_map(|d| (0..cfg.k).map(move |k| (d, k)))
            .map(|(d, k)| params.structural.lambda[(d, k)])
            .collect();
        let r_row: Vec<f64> = (0..cfg.k)
            .flat_map(|i| ((i + 1)..cfg.k).map(move |j2| (i, j2)))
            .map(|(i, j2)| params.structural.r[(i, j2)])
            .collect();
        let gamma_row: Vec<f64> = (0..cfg.k)
            .flat_map(|k| params.structural.gamma[k][2..cfg.l].to_vec())
            .collect();
        for _ in 0..draws {
            beta.push_row(&beta_row);
            delta.push_row(&delta_row);
            kappa.push_row(&kappa_row);
            lambda.push_row(&lambda_row);
            rblk.push_row(&r_row);
            gamma.push_row(&gamma_row);
            omega.push_row(&[0.5]);
        }
        let mut alpha_tally = vec![0u32; cfg.n * cfg.k * cfg.l];
        for i in 0..cfg.n {
            for k in 0..cfg.k {
                alpha_tally[(i * cfg.k + k) * cfg.l + alpha[(i, k)] as usize] = draws as u32;
            }
        }
        ChainOutput {
            config: cfg.clone(),
            effect_labels: table.labels().to_vec(),
            item_names: names(j, "item"),
            covariate_names: names(cfg.d, "x"),
            beta,
            delta,
            kappa,
            lambda,
            r: rblk,
            gamma,
            omega,
            log_joint: Vec::new(),
            alpha_tally,
            kappa_acceptance: vec![1.0; j],
            sigma_kappa: vec![cfg.sigma_kappa; j],
            gamma_top_unbounded: vec![0; cfg.k],
        }
    }

    /// Truth with attribute labels permuted by sigma: fitted attribute
    /// sigma[k] plays the role of original attribute k.
    pub(crate) fn permute_truth(truth: &TruthSet, table: &EffectTable, sigma: &[usize]) -> TruthSet {
        let k = sigma.len();
        let mut beta = truth.items.beta.clone();
        let mut delta = truth.items.delta.clone();
        for (h_t, tuple) in table.effects().iter().enumerate() {
            let mut pe = vec![0u8; k];
            for kk in 0..k {
                pe[sigma[kk]] = tuple[kk];
            }
            let h_p = table.effect_index(&pe).unwrap();
            for j in 0..beta.ncols() {
                beta[(h_p, j)] = truth.items.beta[(h_t, j)];
                delta[(h_p, j)] = truth.items.delta[(h_t, j)];
            }
        }
        let mut lambda = truth.structural.lambda.clone();
        let mut r = truth.structural.r.clone();
        let mut gamma = truth.structural.gamma.clone();
        for kk in 0..k {
            for d in 0..lambda.nrows() {
                lambda[(d, sigma[kk])] = truth.structural.lambda[(d, kk)];
            }
            gamma[sigma[kk]] = truth.structural.gamma[kk].clone();
            for k2 in 0..k {
                r[(sigma[kk], sigma[k2])] = truth.structural.r[(kk, k2)];
            }
        }
        TruthSet {
            items: ItemParams {
                beta,
                delta,
                kappa: truth.items.kappa.clone(),
            },
            structural: StructuralParams { lambda, r, gamma },
        }
    }

    fn toy_alpha(n: usize) -> DMatrix<u8> {
        // Cycle through all four profiles so attributes are separable.
        DMatrix::from_fn(n, 2, |i, k| {
            let s = i % 4;
            if k == 0 {
                (s / 2) as u8
            } else {
                (s % 2) as u8
            }
        })
    }

    #[test]
    fn permutations_enumerate_factorially() {
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(2), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn degenerate_output_recovers_exactly() {
        let truth = toy_truth();
        let cfg = ModelConfig::new(20, vec![3; 4], 2, 2, 3, 2);
        let alpha = toy_alpha(cfg.n);
        let out = degenerate_output(&cfg, &truth, &alpha, 3);
        let rep = recovery_report(&truth, &[(&out, &alpha)]).unwrap();
        assert_eq!(rep.reps, 1);
        assert_eq!(rep.alignment_agreement, 1.0);
        assert!(rep.mae_eta < 1e-14, "eta mae {}", rep.mae_eta);
        assert!(rep.mae_beta < 1e-14);
        assert!(rep.mae_lambda < 1e-14);
        assert!(rep.mae_r.unwrap() < 1e-14);
        assert!(rep.mae_gamma.is_none(), "L = 2 has no interior thresholds");
        assert_eq!(rep.delta_accuracy, Some(1.0));
        assert_eq!(rep.delta_accuracy_active, Some(1.0));
        assert_eq!(rep.delta_accuracy_null, Some(1.0));
        assert!(rep.mae_beta_null.unwrap() < 1e-14);
    }

    #[test]
    fn swapped_attribute_labels_are_realigned() {
        // The chain labeled the attributes in the opposite order; the
        // report must undo the swap and still score perfectly.
        let truth = toy_truth();
        let cfg = ModelConfig::new(24, vec![3; 4], 2, 2, 3, 2);
        let table = EffectTable::new(2, 2, 2).unwrap();
        let sigma = vec![1usize, 0usize];
        let swapped = permute_truth(&truth, &table, &sigma);
        let alpha = toy_alpha(cfg.n);
        let mut alpha_swapped = alpha.clone();
        alpha_swapped.swap_columns(0, 1);
        let out = degenerate_output(&cfg, &swapped, &alpha_swapped, 2);
        let rep = recovery_report(&truth, &[(&out, &alpha)]).unwrap();
        assert_eq!(rep.alignment_agreement, 1.0);
        assert!(rep.mae_eta < 1e-14, "eta mae {}", rep.mae_eta);
        assert!(rep.mae_beta < 1e-14, "beta mae {}", rep.mae_beta);
        assert!(rep.mae_lambda < 1e-14, "lambda mae {}", rep.mae_lambda);
        assert!(rep.mae_r.unwrap() < 1e-14);
        assert_eq!(rep.delta_accuracy, Some(1.0));
    }

    #[test]
    fn misaligned_output_scores_worse_without_alignment_need() {
        // Sanity check that the swap actually matters: scoring the swapped
        // output against the swapped truth with identity alpha must still
        // align (any bijection works when both sides are swapped).
        let truth = toy_truth();
        let cfg = ModelConfig::new(24, vec![3; 4], 2, 2, 3, 2);
        let alpha = toy_alpha(cfg.n);
        let out = degenerate_output(&cfg, &truth, &alpha, 2);
        // Same output scored against a truth with different lambda must
        // show the difference.
        let mut other = toy_truth();
        other.structural.lambda[(0, 0)] += 0.8;
        let rep = recovery_report(&other, &[(&out, &alpha)]).unwrap();
        assert!(rep.mae_lambda > 0.1);
    }

    /// End-to-end recovery study at the two standard scenarios. Slow;
    /// run with --ignored --nocapture to see the per-replicate table.
    #[test]
    #[ignore]
    fn study_criterion_recovery() {
        use crate::rng::RngStream;
        use crate::runner::run_chains;
        use crate::sim::{gen_dataset, gen_truth, Scenario};

        let run_scenario = |sc: &Scenario, reps: usize, tag: &str| -> Vec<RecoveryReport> {
            let table = EffectTable::new(sc.k, sc.l, 2).unwrap();
            let mut reports = Vec::with_capacity(reps);
            for rep in 0..reps {
                let mut rng = RngStream::new(1000 + rep as u64, 0);
                let truth = gen_truth(sc, 2, &mut rng).unwrap();
                let data = gen_dataset(sc, 2, &truth, &mut rng).unwrap();
                let cfg = ModelConfig::new(sc.n, sc.m(), sc.k, sc.l, Scenario::D, 2)
                    .with_chain(6000, 2000);
                let fit = run_chains(&cfg, &data.y, &data.x, None, None, 2000 + rep as u64, 1)
                    .unwrap()
                    .remove(0);
                let rep_report =
                    recovery_report(&truth, &[(&fit.output, &data.alpha)]).unwrap();
                let active: usize = (0..truth.items.delta.ncols())
                    .map(|jj| {
                        (1..truth.items.delta.nrows())
                            .filter(|&hh| truth.items.delta[(hh, jj)] == 1)
                            .count()
                    })
                    .sum();
                let coverage: Vec<usize> = (0..sc.k)
                    .map(|k| {
                        (0..truth.items.delta.ncols())
                            .filter(|&jj| {
                                (0..table.h()).any(|hh| {
                                    let req = &table.effects()[hh];
                                    req[k] > 0
                                        && req.iter().filter(|&&v| v > 0).count() == 1
                                        && truth.items.delta[(hh, jj)] == 1
                                })
                            })
                            .count()
                    })
                    .collect();
                let omega = fit.output.omega.values();
                let half = omega.len() / 2;
                let om_first = omega[..half].iter().sum::<f64>() / half as f64;
                let om_last = omega[half..].iter().sum::<f64>() / (omega.len() - half) as f64;
                println!(
                    "{tag} rep {rep:2} act {active:2} cov {coverage:?} om {om_first:.2}/{om_last:.2} \
                     agree {:.3} eta {:.4} r {:.4} lambda {:.4} delta {:.3} (act {:.3} null {:.3})",
                    rep_report.alignment_agreement,
                    rep_report.mae_eta,
                    rep_report.mae_r.unwrap_or(f64::NAN),
                    rep_report.mae_lambda,
                    rep_report.delta_accuracy.unwrap_or(f64::NAN),
                    rep_report.delta_accuracy_active.unwrap_or(f64::NAN),
                    rep_report.delta_accuracy_null.unwrap_or(f64::NAN),
                );
                reports.push(rep_report);
            }
            reports
        };
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

        let sc1 = Scenario::new(500, 15, 2, 2, 0.0);
        let r1 = run_scenario(&sc1, 10, "n500 ");
        let sc2 = Scenario::new(1500, 15, 2, 2, 0.25);
        let r2 = run_scenario(&sc2, 5, "n1500");
        let eta1: Vec<f64> = r1.iter().map(|r| r.mae_eta).collect();
        let eta2: Vec<f64> = r2.iter().map(|r| r.mae_eta).collect();
        let rr1: Vec<f64> = r1.iter().map(|r| r.mae_r.unwrap()).collect();
        let lam2: Vec<f64> = r2.iter().map(|r| r.mae_lambda).collect();
        let d1: Vec<f64> = r1.iter().map(|r| r.delta_accuracy.unwrap()).collect();
        let d2: Vec<f64> = r2.iter().map(|r| r.delta_accuracy.unwrap()).collect();
        let pooled: Vec<f64> = d1.iter().chain(&d2).copied().collect();
        println!(
            "n500 : eta {:.4} r {:.4} delta {:.3}",
            mean(&eta1),
            mean(&rr1),
            mean(&d1)
        );
        println!(
            "n1500: eta {:.4} lambda {:.4} delta {:.3}",
            mean(&eta2),
            mean(&lam2),
            mean(&d2)
        );
        println!("pooled delta accuracy {:.4}", mean(&pooled));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let truth = toy_truth();
        let cfg = ModelConfig::new(20, vec![3; 4], 2, 2, 3, 2);
        let alpha = toy_alpha(cfg.n);
        let out = degenerate_output(&cfg, &truth, &alpha, 2);
        let mut bad = toy_truth();
        bad.structural.lambda = DMatrix::zeros(2, 2);
        assert!(recovery_report(&bad, &[(&out, &alpha)]).is_err());
        assert!(recovery_report(&truth, &[]).is_err());
        let short_alpha = DMatrix::<u8>::zeros(5, 2);
        assert!(recovery_report(&truth, &[(&out, &short_alpha)]).is_err());
    }
}
