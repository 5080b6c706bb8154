//! Convergence diagnostic comparing early and late chain segments.

/// Standardized mean difference between the first 10% and last 50% of a
/// chain, with segment variances estimated by batch means (square-root
/// batch count) so autocorrelation inflates the denominator instead of
/// the false-alarm rate.
#[derive(Debug, Clone, Copy)]
pub struct GewekeResult {
    pub z: f64,
    /// Set when the chain is too short or (numerically) constant; `z` is
    /// NaN in that case.
    pub degenerate: bool,
}

pub fn geweke_z(chain: &[f64]) -> GewekeResult {
    let n = chain.len();
    let n1 = n / 10;
    let n2 = n / 2;
    if n1 < 4 || n2 < 4 {
        return GewekeResult {
            z: f64::NAN,
            degenerate: true,
        };
    }
    let (m1, s1) = batch_means(&chain[..n1]);
    let (m2, s2) = batch_means(&chain[n - n2..]);
    let var = s1 / n1 as f64 + s2 / n2 as f64;
    if !(var.is_finite() && var > 0.0) {
        return GewekeResult {
            z: f64::NAN,
            degenerate: true,
        };
    }
    GewekeResult {
        z: (m1 - m2) / var.sqrt(),
        degenerate: false,
    }
}

/// Segment mean and batch-means estimate of the spectral density at zero:
/// batch size times the variance of the batch means.
fn batch_means(seg: &[f64]) -> (f64, f64) {
    let n = seg.len();
    let mean = seg.iter().sum::<f64>() / n as f64;
    let batches = (n as f64).sqrt().floor() as usize;
    if batches < 2 {
        return (mean, f64::NAN);
    }
    let size = n / batches;
    let mut bm = Vec::with_capacity(batches);
    for b in 0..batches {
        let chunk = &seg[b * size..(b + 1) * size];
        bm.push(chunk.iter().sum::<f64>() / size as f64);
    }
    let bmean = bm.iter().sum::<f64>() / batches as f64;
    let bvar = bm.iter().map(|v| (v - bmean) * (v - bmean)).sum::<f64>() / (batches - 1) as f64;
    (mean, size as f64 * bvar)
}
