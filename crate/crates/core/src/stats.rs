//! Estimators: Wilson and normal intervals, factorial moments, Poisson fit.

use serde::Serialize;

use crate::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.high - self.low)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.low <= other.high && other.low <= self.high
    }
}

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> Interval {
    if trials == 0 {
        return Interval {
            estimate: f64::NAN,
            low: 0.0,
            high: 1.0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Interval {
        estimate: p,
        low: (center - half).max(0.0).min(p),
        high: (center + half).min(1.0).max(p),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl MeanEstimate {
    /// Normal-approximation 95% interval.
    pub fn interval(&self) -> Interval {
        Interval {
            estimate: self.mean,
            low: self.mean - Z95 * self.std_error,
            high: self.mean + Z95 * self.std_error,
        }
    }
}

/// Sample mean and its standard error (`s / sqrt(N)`, unbiased `s²`).
pub fn mean_estimate(values: &[f64]) -> Result<MeanEstimate> {
    if values.is_empty() {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok(MeanEstimate { mean, std_error: 0.0 });
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    Ok(MeanEstimate {
        mean,
        std_error: (ss / (n - 1.0) / n).sqrt(),
    })
}

/// `x (x-1) ... (x-k+1)`.
pub fn falling_factorial(x: u64, k: u32) -> f64 {
    (0..u64::from(k)).map(|i| x as f64 - i as f64).product()
}

/// Sample mean of the `k`-th falling factorial.
pub fn factorial_moment_estimate(samples: &[u64], k: u32) -> Result<f64> {
    Ok(factorial_moment(samples, k)?.mean)
}

/// [`factorial_moment_estimate`] with its standard error.
pub fn factorial_moment(samples: &[u64], k: u32) -> Result<MeanEstimate> {
    if k < 1 {
        return Err(Error::param("k", "factorial moments start at k = 1"));
    }
    let values: Vec<f64> = samples.iter().map(|&x| falling_factorial(x, k)).collect();
    mean_estimate(&values)
}

/// Poisson(μ) probabilities `P(0), ..., P(max)`.
pub fn poisson_pmf(mu: f64, max: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(max + 1);
    let mut cur = (-mu).exp();
    for j in 0..=max {
        p.push(cur);
        cur *= mu / (j + 1) as f64;
    }
    p
}

/// Total variation distance between the empirical law of `samples` and
/// Poisson(μ); the Poisson mass above `max(samples)` is added in full.
pub fn poisson_tv_distance(samples: &[u64], mu: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::param("samples", "need at least one sample"));
    }
    if !(mu >= 0.0) {
        return Err(Error::param("mu", "must be non-negative"));
    }
    let max = *samples.iter().max().unwrap() as usize;
    let mut freq = vec![0u64; max + 1];
    for &s in samples {
        freq[s as usize] += 1;
    }
    let n = samples.len() as f64;
    let pmf = poisson_pmf(mu, max);
    let body: f64 = freq.iter().zip(&pmf).map(|(&f, &p)| (f as f64 / n - p).abs()).sum();
    let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    Ok((0.5 * (body + tail)).clamp(0.0, 1.0))
}
