//! Independent oracles for the closed-form kernels and the truncated
//! samplers, shared by the focused oracle suites and the acceptance
//! gate. Quadrature, Kronecker expansion, pair enumeration, and the
//! double-loop rank statistic are all written from first principles.

use nalgebra::DMatrix;
use rand::Rng;
use rlcm::dist::{
    sample_truncated_exp, sample_truncated_normal, std_normal_cdf, std_normal_sf,
};
use rlcm::model::EffectTable;
use rlcm::sampler::{alpha_collapsed_ln_weights, delta_one_probability};
use rlcm::RngStream;

use super::{
    ks_one_sample, ks_two_sample, reject_tail_uniform, reject_truncated_exp,
    reject_truncated_normal, simpson,
};

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-(d * d) / (2.0 * var)).exp() / (var * 2.0 * std::f64::consts::PI).sqrt()
}

// ---------------------------------------------------------------- delta step

/// Inclusion probability by quadrature from first principles: the slab
/// marginal integrates exp(t b - g b^2 / 2) against the cone-truncated
/// N(0, sb2) prior density; the spike contributes 1 when zero is inside
/// the cone. Fourteen posterior sds of integration range keep the
/// truncation error far below the comparison tolerance.
pub fn quad_delta_one(t: f64, g: f64, lower: f64, omega: f64, sb2: f64) -> f64 {
    if lower > 0.0 {
        return 1.0;
    }
    let cone = if lower == f64::NEG_INFINITY {
        1.0
    } else {
        std_normal_sf(lower / sb2.sqrt())
    };
    let prec = g + 1.0 / sb2;
    let center = t / prec;
    let sd = prec.sqrt().recip();
    let lo = (center - 14.0 * sd).max(lower);
    let hi = center + 14.0 * sd;
    let m1 = if hi > lo {
        simpson(
            |b| (t * b - 0.5 * g * b * b).exp() * normal_pdf(b, 0.0, sb2),
            lo,
            hi,
            8000,
        ) / cone
    } else {
        0.0
    };
    omega * m1 / (omega * m1 + (1.0 - omega))
}

/// The library's closed form, parameterized by the data summary (t, g)
/// instead of the precomputed conditional moments.
pub fn impl_delta_one(t: f64, g: f64, lower: f64, omega: f64, sb2: f64) -> f64 {
    let c2_sq = 1.0 / (g + 1.0 / sb2);
    delta_one_probability(c2_sq * t, c2_sq, lower, omega, sb2)
}

/// Worst |closed form - quadrature| over a grid spanning weak and strong
/// data, loose and tight cone bounds, and both slab variances in use.
pub fn delta_probability_worst_error() -> f64 {
    let mut worst = 0.0f64;
    for &t in &[-8.0, -2.0, 0.0, 1.5, 6.0] {
        for &g in &[4.0, 50.0, 174.0, 900.0] {
            for &omega in &[0.15, 0.5, 0.85] {
                for &lower in &[f64::NEG_INFINITY, -1.2, -0.4, -0.05, 0.3] {
                    for &sb2 in &[2.0, 0.7] {
                        let got = impl_delta_one(t, g, lower, omega, sb2);
                        let want = quad_delta_one(t, g, lower, omega, sb2);
                        worst = worst.max((got - want).abs());
                    }
                }
            }
        }
    }
    worst
}

// ------------------------------------------------------------ profile weights

pub fn softmax(lnw: &[f64]) -> Vec<f64> {
    let top = lnw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = lnw.iter().map(|&w| (w - top).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|&r| r / sum).collect()
}

/// Level probabilities by quadrature: the measurement factor is the
/// Gaussian residual kernel at unit variance, the structural factor
/// integrates the conditional normal over each threshold bin.
#[allow(clippy::too_many_arguments)]
pub fn quad_alpha_probs(
    ystar_row: &[f64],
    state_scores: &DMatrix<f64>,
    base: usize,
    stride: usize,
    levels: usize,
    gamma_k: &[f64],
    mu: f64,
    sd: f64,
) -> Vec<f64> {
    let raw: Vec<f64> = (0..levels)
        .map(|l| {
            let s = base + l * stride;
            let mut q = 0.0;
            for (jj, &ys) in ystar_row.iter().enumerate() {
                let r = ys - state_scores[(s, jj)];
                q += r * r;
            }
            let lo = gamma_k[l].max(mu - 14.0 * sd);
            let hi = gamma_k[l + 1].min(mu + 14.0 * sd);
            let bin = if hi > lo {
                simpson(|x| normal_pdf(x, mu, sd * sd), lo, hi, 4000)
            } else {
                0.0
            };
            (-0.5 * q).exp() * bin
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|&r| r / sum).collect()
}

/// Worst |collapsed weights - quadrature| over a seeded grid of score
/// tables, residual rows, threshold placements, and conditional moments.
pub fn alpha_weights_worst_error() -> f64 {
    let mut rng = RngStream::new(4242, 0);
    let mut worst = 0.0f64;
    for _ in 0..24 {
        let scores =
            DMatrix::from_fn(3, 3, |_, _| -1.5 + 3.0 * rng.random::<f64>());
        let ystar: Vec<f64> = (0..3).map(|_| -2.0 + 4.0 * rng.random::<f64>()).collect();
        let cut1 = -1.0 + 1.2 * rng.random::<f64>();
        let cut2 = cut1 + 0.2 + 1.3 * rng.random::<f64>();
        let gamma = [f64::NEG_INFINITY, cut1, cut2, f64::INFINITY];
        let mu = -1.0 + 2.0 * rng.random::<f64>();
        let sd = 0.5 + 1.1 * rng.random::<f64>();
        let lnw = alpha_collapsed_ln_weights(&ystar, &scores, 0, 1, 3, &gamma, mu, sd);
        let got = softmax(&lnw);
        let want = quad_alpha_probs(&ystar, &scores, 0, 1, 3, &gamma, mu, sd);
        for l in 0..3 {
            worst = worst.max((got[l] - want[l]).abs());
        }
    }
    worst
}

// ----------------------------------------------------------------- design row

pub fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// All tuples in {0..l-1}^k with the last position varying fastest, the
/// same nesting a repeated Kronecker product expands to.
pub fn all_tuples(k: usize, l: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * l);
        for t in &out {
            for v in 0..l {
                let mut tt = t.clone();
                tt.push(v as u8);
                next.push(tt);
            }
        }
        out = next;
    }
    out
}

fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Checks every design row of a table against the unrolled Kronecker
/// product of per-attribute cumulative indicator vectors, and the effect
/// count against the combinatorial identity sum_d C(k,d) (l-1)^d.
/// Panics on the first discrepancy.
pub fn check_design_kronecker(k: usize, l: usize, order: usize) {
    let table = EffectTable::new(k, l, order).unwrap();
    let tuples = all_tuples(k, l);
    let expected_h: usize = (0..=order)
        .map(|d| binomial(k, d) * (l - 1).pow(d as u32))
        .sum();
    assert_eq!(table.h(), expected_h, "effect count at k={k} l={l} order={order}");
    for alpha in all_tuples(k, l) {
        // Kronecker factor for one attribute: (1, I(a >= 1), ..., I(a >= l-1)).
        let mut full = vec![1.0];
        for &a in &alpha {
            let fac: Vec<f64> = (0..l).map(|c| f64::from(a as usize >= c)).collect();
            full = kron(&full, &fac);
        }
        let row = table.design_row(&alpha);
        assert_eq!(row.len(), table.h());
        let mut seen = 0usize;
        for (i, tuple) in tuples.iter().enumerate() {
            let ord = tuple.iter().filter(|&&x| x > 0).count();
            match table.effect_index(tuple) {
                Some(hidx) => {
                    assert!(ord <= order, "tuple {tuple:?} kept past order {order}");
                    assert_eq!(
                        row[hidx], full[i],
                        "profile {alpha:?}, tuple {tuple:?} at k={k} l={l}"
                    );
                    seen += 1;
                }
                None => assert!(ord > order, "tuple {tuple:?} missing below order"),
            }
        }
        assert_eq!(seen, table.h());
    }
}

/// Grids covering every dimension setting the study grid uses plus the
/// saturated and first-order truncations.
pub fn design_grids() -> Vec<(usize, usize, usize)> {
    vec![
        (2, 2, 2),
        (2, 3, 2),
        (3, 2, 2),
        (3, 3, 2),
        (2, 4, 2),
        (4, 2, 2),
        (3, 3, 3),
        (3, 2, 1),
    ]
}

// --------------------------------------------------------- monotonicity bound

/// Cone bound by brute force: over all componentwise-dominating profile
/// pairs that switch effect h on, the largest score gap contributed by
/// the other effects. Designs are recomputed from the requirement tuples
/// rather than read from the table.
pub fn oracle_monotone_bound(table: &EffectTable, h: usize, beta_j: &[f64]) -> f64 {
    let design = |alpha: &[u8], e: &[u8]| -> f64 {
        f64::from(e.iter().zip(alpha).all(|(&req, &a)| a >= req))
    };
    let mut bound = f64::NEG_INFINITY;
    let profiles = all_tuples(table.k(), table.l());
    for p in &profiles {
        for q in &profiles {
            let dominates = p != q && p.iter().zip(q).all(|(a, b)| a >= b);
            if !dominates {
                continue;
            }
            let eh = &table.effects()[h];
            if design(p, eh) != 1.0 || design(q, eh) != 0.0 {
                continue;
            }
            let mut s = 0.0;
            for (hp, e) in table.effects().iter().enumerate() {
                if hp != h {
                    s += (design(q, e) - design(p, e)) * beta_j[hp];
                }
            }
            if s > bound {
                bound = s;
            }
        }
    }
    bound
}

/// Bit-exact mismatches between the library bound and the enumeration
/// oracle over seeded random coefficient vectors on several grids.
pub fn monotone_bound_mismatches() -> usize {
    let mut rng = RngStream::new(727, 0);
    let mut mismatches = 0;
    for &(k, l, order) in &[(2, 2, 2), (2, 3, 2), (3, 2, 2), (3, 2, 1), (3, 3, 2)] {
        let table = EffectTable::new(k, l, order).unwrap();
        for _ in 0..20 {
            let beta: Vec<f64> = (0..table.h())
                .map(|_| -2.0 + 4.0 * rng.random::<f64>())
                .collect();
            for h in 0..table.h() {
                let got = table.monotonicity_lower_bound(h, &beta);
                let want = oracle_monotone_bound(&table, h, &beta);
                if got != want && !(got == f64::NEG_INFINITY && want == f64::NEG_INFINITY) {
                    mismatches += 1;
                }
            }
        }
    }
    mismatches
}

// ------------------------------------------------------------- rank statistic

/// U by the definitional double loop, z from a freshly sorted pooled
/// sample with tie runs counted directly.
pub fn oracle_mann_whitney(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut u = 0.0;
    for &x in a {
        for &y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let n = na + nb;
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut tie_sum = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut run = 1;
        while i + run < pooled.len() && pooled[i + run] == pooled[i] {
            run += 1;
        }
        let t = run as f64;
        tie_sum += t * t * t - t;
        i += run;
    }
    let var = na * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    let z = if var > 0.0 {
        (u - na * nb / 2.0) / var.sqrt()
    } else {
        0.0
    };
    (u, z)
}

/// Worst (|U gap|, |z gap|) between the rank-based implementation and
/// the double-loop oracle over seeded tied and continuous samples. The U
/// gap must come out exactly zero: both sides are exact in floating
/// point.
pub fn mann_whitney_worst_gaps() -> (f64, f64) {
    let mut rng = RngStream::new(929, 0);
    let mut worst_u = 0.0f64;
    let mut worst_z = 0.0f64;
    let mut check = |a: &[f64], b: &[f64], worst_u: &mut f64, worst_z: &mut f64| {
        let got = rlcm::eval::mann_whitney_u(a, b);
        let (u, z) = oracle_mann_whitney(a, b);
        *worst_u = worst_u.max((got.u - u).abs());
        *worst_z = worst_z.max((got.z - z).abs());
    };
    for _ in 0..40 {
        let na = 1 + (rng.random::<f64>() * 39.0) as usize;
        let nb = 1 + (rng.random::<f64>() * 39.0) as usize;
        let a: Vec<f64> = (0..na)
            .map(|_| (rng.random::<f64>() * 6.0).floor())
            .collect();
        let b: Vec<f64> = (0..nb)
            .map(|_| (rng.random::<f64>() * 6.0).floor())
            .collect();
        check(&a, &b, &mut worst_u, &mut worst_z);
        let a: Vec<f64> = (0..na).map(|_| -3.0 + 6.0 * rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..nb).map(|_| -3.0 + 6.0 * rng.random::<f64>()).collect();
        check(&a, &b, &mut worst_u, &mut worst_z);
    }
    (worst_u, worst_z)
}

// ------------------------------------------------------------- cutpoint ratio

/// The acceptance ratio rebuilt term by term: per-respondent interval
/// probability ratios, then the sequential proposal correction for each
/// interior cut above the anchored one.
pub fn oracle_cowles_ratio(
    y: &[u8],
    eta: &[f64],
    kappa: &[f64],
    kappa_prop: &[f64],
    sigma: f64,
) -> f64 {
    let phi = |x: f64| std_normal_cdf(x);
    let interval = |lo: f64, hi: f64| phi(hi) - phi(lo);
    let m = kappa.len() - 1;
    let mut logr = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let yi = yi as usize;
        let e = eta[i];
        logr += interval(kappa_prop[yi] - e, kappa_prop[yi + 1] - e).ln()
            - interval(kappa[yi] - e, kappa[yi + 1] - e).ln();
    }
    for mm in 2..m {
        let fwd = interval(
            (kappa_prop[mm - 1] - kappa[mm]) / sigma,
            (kappa[mm + 1] - kappa[mm]) / sigma,
        );
        let rev = interval(
            (kappa[mm - 1] - kappa_prop[mm]) / sigma,
            (kappa_prop[mm + 1] - kappa_prop[mm]) / sigma,
        );
        logr += fwd.ln() - rev.ln();
    }
    logr
}

// --------------------------------------------------------- truncated samplers

const N_KS: usize = 100_000;

/// Conditional CDF of N(mean, var) truncated to (lo, hi).
pub fn tn_cdf(mean: f64, var: f64, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let sd = var.sqrt();
    let fa = if lo == f64::NEG_INFINITY {
        0.0
    } else {
        std_normal_cdf((lo - mean) / sd)
    };
    let fb = if hi == f64::INFINITY {
        1.0
    } else {
        std_normal_cdf((hi - mean) / sd)
    };
    move |x: f64| (std_normal_cdf((x - mean) / sd) - fa) / (fb - fa)
}

/// Conditional CDF of Exp(rate) truncated to (lo, hi).
pub fn te_cdf(rate: f64, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let denom = if hi == f64::INFINITY {
        1.0
    } else {
        -(-rate * (hi - lo)).exp_m1()
    };
    move |x: f64| -(-rate * (x - lo)).exp_m1() / denom
}

pub fn impl_tn_draws(seed: u64, mean: f64, var: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0);
    (0..N_KS)
        .map(|_| sample_truncated_normal(&mut rng, mean, var, lo, hi).unwrap())
        .collect()
}

/// The five settings cover every internal draw path: central two-sided,
/// one-sided left, one-sided right past the mode, a narrow interval at
/// the mode, and the deep-tail inverse-CDF regime.
pub fn truncated_normal_cases() -> Vec<(&'static str, f64, f64, f64, f64)> {
    vec![
        ("central two-sided", 0.0, 1.0, -0.8, 1.3),
        ("one-sided left", 1.5, 4.0, f64::NEG_INFINITY, 0.0),
        ("one-sided right", -0.5, 0.49, 0.2, f64::INFINITY),
        ("narrow at the mode", 2.0, 2.25, 2.0, 2.3),
        ("deep tail", 0.0, 1.0, 6.0, 6.5),
    ]
}

pub fn truncated_exp_cases() -> Vec<(&'static str, f64, f64, f64)> {
    vec![
        ("plain exponential", 1.0, 0.0, f64::INFINITY),
        ("bounded", 2.5, 0.7, 1.1),
        ("shifted slow", 1e-3, 2.5, f64::INFINITY),
    ]
}

/// KS statistics over the truncated-normal settings:
/// (label, two-sample vs rejection, one-sample vs analytic CDF).
pub fn truncated_normal_ks() -> Vec<(&'static str, f64, f64)> {
    truncated_normal_cases()
        .into_iter()
        .enumerate()
        .map(|(i, (label, mean, var, lo, hi))| {
            let drawn = impl_tn_draws(31 + i as u64, mean, var, lo, hi);
            let mut orng = RngStream::new(131 + i as u64, 0);
            let oracle = if label == "deep tail" {
                reject_tail_uniform(&mut orng, lo, hi, N_KS)
            } else {
                reject_truncated_normal(&mut orng, mean, var, lo, hi, N_KS)
            };
            let d2 = ks_two_sample(&drawn, &oracle);
            let d1 = ks_one_sample(&drawn, tn_cdf(mean, var, lo, hi));
            (label, d2, d1)
        })
        .collect()
}

/// KS statistics over the truncated-exponential settings.
pub fn truncated_exp_ks() -> Vec<(&'static str, f64, f64)> {
    truncated_exp_cases()
        .into_iter()
        .enumerate()
        .map(|(i, (label, rate, lo, hi))| {
            let mut rng = RngStream::new(57 + i as u64, 0);
            let drawn: Vec<f64> = (0..N_KS)
                .map(|_| sample_truncated_exp(&mut rng, rate, lo, hi).unwrap())
                .collect();
            let mut orng = RngStream::new(157 + i as u64, 0);
            let oracle = reject_truncated_exp(&mut orng, rate, lo, hi, N_KS);
            let d2 = ks_two_sample(&drawn, &oracle);
            let d1 = ks_one_sample(&drawn, te_cdf(rate, lo, hi));
            (label, d2, d1)
        })
        .collect()
}
