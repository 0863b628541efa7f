//! Monte Carlo L^p estimation and order-stable replicate execution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// L^p estimate `((1/R) sum |X_r|^p)^(1/p)` with a delta-method standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p: f64,
    pub n_replicates: usize,
    pub lp_value: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64], p: f64, seed: u64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(param(format!("L^p exponent must be >= 1, got {p}")));
        }
        if samples.len() < 2 {
            return Err(param("need at least two replicates"));
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(param(format!("non-finite replicate value {bad}")));
        }
        let r = samples.len() as f64;
        let powers: Vec<f64> = samples.iter().map(|x| x.abs().powf(p)).collect();
        let (m, var) = mean_var(&powers);
        let lp_value = m.powf(1.0 / p);
        let se_m = (var / r).sqrt();
        // d/dm m^(1/p) = m^(1/p - 1) / p
        let stderr = if m > 0.0 { lp_value / (p * m) * se_m } else { 0.0 };
        Ok(Self { p, n_replicates: samples.len(), lp_value, stderr, seed })
    }

    /// One-sided contract `estimate <= bound` allowing `k` standard errors.
    pub fn below(&self, bound: f64, k: f64) -> bool {
        self.lp_value <= bound + k * self.stderr
    }
}

/// Mean and unbiased variance with compensated sums, in slice order.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mut s = Neumaier::default();
    xs.iter().for_each(|&x| s.add(x));
    let mean = s.value() / n;
    let mut q = Neumaier::default();
    xs.iter().for_each(|&x| q.add((x - mean) * (x - mean)));
    let var = if xs.len() > 1 { q.value() / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// Runs `f(r)` for `r in 0..n` on the current rayon pool and returns results
/// in replicate order, so downstream reductions do not see the schedule.
pub fn replicates<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Runs `f` inside a pool with `workers` threads (`None`: rayon default).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(param("worker count must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| param(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (mx, _) = mean_var(x);
    let (my, _) = mean_var(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (my - slope * mx, slope, r2)
}

/// Compensated (Kahan-Babuska-Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
