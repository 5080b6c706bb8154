//! Shared oracle machinery for the integration suites: independent
//! rejection samplers, Kolmogorov-Smirnov statistics, composite Simpson
//! quadrature, and small scenario helpers. Everything here is written
//! from first principles so the library under test never certifies
//! itself.

#![allow(dead_code)]

pub mod oracles;

use rlcm::RngStream;

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic by a sorted merge walk.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Composite Simpson integral of `f` over [a, b] with `n` panels
/// (rounded up to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Standard normal draw by Box-Muller from the stream's uniforms,
/// deliberately avoiding the library's own normal sampler.
pub fn box_muller(rng: &mut RngStream) -> f64 {
    use rand::Rng;
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Rejection sampler for N(mean, var) on (lo, hi), proposing from the
/// parent normal via Box-Muller. Needs an interval of non-negligible
/// mass.
pub fn reject_truncated_normal(
    rng: &mut RngStream,
    mean: f64,
    var: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Vec<f64> {
    let sd = var.sqrt();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = mean + sd * box_muller(rng);
        if x > lo && x < hi {
            out.push(x);
        }
    }
    out
}

/// Rejection sampler for a standard normal restricted to a narrow far
/// interval [lo, hi] with 0 < lo: uniform proposals accepted with
/// probability exp((lo^2 - x^2) / 2).
pub fn reject_tail_uniform(rng: &mut RngStream, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    use rand::Rng;
    assert!(lo > 0.0 && hi > lo);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = lo + (hi - lo) * rng.random::<f64>();
        let acc = (0.5 * (lo * lo - x * x)).exp();
        if rng.random::<f64>() < acc {
            out.push(x);
        }
    }
    out
}

/// Rejection sampler for density proportional to exp(-rate x) on
/// (lo, hi): uniform proposals on the interval clipped to 30 / rate of
/// mass, accepted with probability exp(-rate (x - lo)).
pub fn reject_truncated_exp(
    rng: &mut RngStream,
    rate: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Vec<f64> {
    use rand::Rng;
    let top = hi.min(lo + 30.0 / rate);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = lo + (top - lo) * rng.random::<f64>();
        if rng.random::<f64>() < (-rate * (x - lo)).exp() {
            out.push(x);
        }
    }
    out
}
