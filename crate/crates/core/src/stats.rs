//! Small estimators shared by the Monte Carlo games.

use serde::{Deserialize, Serialize};

/// A point estimate with its standard error and the number of trials behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            trials: 0,
        }
    }

    /// Bernoulli frequency with the plug-in standard error.
    pub fn frequency(successes: u64, trials: u64) -> Self {
        let p = successes as f64 / trials as f64;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }

    /// Sample mean with the standard error of the mean.
    pub fn mean(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            value: mean,
            std_error: (var / n as f64).sqrt(),
            trials: n as u64,
        }
    }

    /// True when `target` lies within `k` standard errors of the estimate.
    /// A zero standard error demands agreement to 1e-12.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + 1e-12
    }
}

/// Result of a two-world distinguishing game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Advantage {
    /// Pr[A = 1 | real] - Pr[A = 1 | ideal].
    pub signed: f64,
    /// |signed|; the quantity the security definitions bound.
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub real_accept: f64,
    pub ideal_accept: f64,
}

impl Advantage {
    pub fn from_counts(real_ones: u64, ideal_ones: u64, trials: u64) -> Self {
        let r = Estimate::frequency(real_ones, trials);
        let i = Estimate::frequency(ideal_ones, trials);
        let signed = r.value - i.value;
        Self {
            signed,
            value: signed.abs(),
            std_error: (r.std_error.powi(2) + i.std_error.powi(2)).sqrt(),
            trials,
            real_accept: r.value,
            ideal_accept: i.value,
        }
    }

    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.signed - target).abs() <= k * self.std_error + 1e-12
    }
}
