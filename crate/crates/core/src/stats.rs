//! Running moment accumulators for Monte-Carlo estimates.

use num_complex::Complex64;
use serde::Serialize;

/// Welford accumulator over complex samples. The reported variance is the
/// sum of the real and imaginary variances, i.e. `E|X - EX|^2`.
#[derive(Debug, Clone, Default)]
pub struct ComplexAccumulator {
    n: usize,
    mean: Complex64,
    m2: f64,
}

impl ComplexAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: Complex64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        let delta2 = x - self.mean;
        self.m2 += delta.re * delta2.re + delta.im * delta2.im;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Summary of a real sample: mean, variance and standard error of the mean.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RealSummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

pub fn summarize(values: &[f64]) -> RealSummary {
    let mut acc = ComplexAccumulator::new();
    for &v in values {
        acc.push(Complex64::new(v, 0.0));
    }
    RealSummary {
        n: acc.count(),
        mean: acc.mean().re,
        variance: acc.variance(),
        std_error: acc.std_error(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 2.0, 4.0, 7.0, -3.0];
        let s = summarize(&xs);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((s.mean - mean).abs() < 1e-14);
        assert!((s.variance - var).abs() < 1e-12);
        assert!((s.std_error - (var / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complex_variance_adds_components() {
        let mut acc = ComplexAccumulator::new();
        for (re, im) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            acc.push(Complex64::new(re, im));
        }
        assert!(acc.mean().norm() < 1e-15);
        assert!((acc.variance() - 4.0 / 3.0).abs() < 1e-14);
    }
}
