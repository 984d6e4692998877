//! Monte Carlo summaries, least squares and bootstrap helpers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample mean with standard error `sd/√n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl MCEstimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::arg("an estimate needs at least one sample"));
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Ok(MCEstimate { mean, stderr: (var / n).sqrt(), n: xs.len() as u64 })
    }

    /// Estimate of a probability from `hits` successes out of `n`.
    pub fn from_counts(hits: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("an estimate needs at least one sample"));
        }
        let m = hits as f64 / n as f64;
        let var = if n > 1 { m * (1.0 - m) * n as f64 / (n as f64 - 1.0) } else { 0.0 };
        Ok(MCEstimate { mean: m, stderr: (var / n as f64).sqrt(), n })
    }

    pub fn exact(value: f64) -> Self {
        MCEstimate { mean: value, stderr: 0.0, n: 1 }
    }

    /// Whether `x` lies within `k` standard errors of the mean.
    pub fn covers(&self, x: f64, k: f64) -> bool {
        (self.mean - x).abs() <= k * self.stderr
    }
}

/// Ordinary least squares `y = a + b·x`. Returns `(a, b, residuals)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::arg("linear fit needs at least two paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::arg("linear fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let res = xs.iter().zip(ys).map(|(x, y)| y - a - b * x).collect();
    Ok((a, b, res))
}

/// Empirical quantile by linear interpolation on the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Values of `stat` on `resamples` bootstrap resamples of the indices `0..n`.
pub fn bootstrap_replicates(n: usize, resamples: usize, seed: u64, mut stat: impl FnMut(&[usize]) -> f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![0usize; n];
    (0..resamples)
        .map(|_| {
            for i in idx.iter_mut() {
                *i = rng.gen_range(0..n);
            }
            stat(&idx)
        })
        .collect()
}

/// Central interval holding `level` of the replicates.
pub fn percentile_interval(replicates: &[f64], level: f64) -> (f64, f64) {
    let mut vals = replicates.to_vec();
    vals.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    (quantile(&vals, a), quantile(&vals, 1.0 - a))
}

/// Sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Percentile bootstrap interval of `stat` over resampled trial indices.
pub fn bootstrap_interval(n: usize, resamples: usize, level: f64, seed: u64, stat: impl FnMut(&[usize]) -> f64) -> (f64, f64) {
    percentile_interval(&bootstrap_replicates(n, resamples, seed, stat), level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_constant_has_zero_stderr() {
        let e = MCEstimate::from_samples(&[2.0; 10]).unwrap();
        assert_eq!((e.mean, e.stderr, e.n), (2.0, 0.0, 10));
        assert!(MCEstimate::from_samples(&[]).is_err());
    }

    #[test]
    fn stderr_is_sd_over_root_n() {
        let e = MCEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.stderr - sd / 2.0).abs() < 1e-12);
        let b = MCEstimate::from_counts(3, 4).unwrap();
        let s = MCEstimate::from_samples(&[1.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((b.mean - s.mean).abs() < 1e-12 && (b.stderr - s.stderr).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 + 2.0 * x).collect();
        let (a, b, r) = linear_fit(&xs, &ys).unwrap();
        assert!((a - 1.5).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        assert!(r.iter().all(|e| e.abs() < 1e-12));
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn bootstrap_interval_brackets_the_mean() {
        let xs: Vec<f64> = (0..200).map(|i| (i % 7) as f64).collect();
        let (lo, hi) = bootstrap_interval(xs.len(), 500, 0.9, 1, |idx| {
            idx.iter().map(|&i| xs[i]).sum::<f64>() / idx.len() as f64
        });
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(lo < m && m < hi);
    }
}
