//! Monte Carlo estimation, ergodic time averages, and distributional
//! distances used by every verification in the crate.
//!
//! Everything here is deterministic given `(seed, config)`: per-path seeds
//! are derived with [`crate::noise::path_seed`], results are collected in
//! index order, and aggregation uses pairwise summation so that the reported
//! value does not depend on scheduling.

use crate::error::{Error, Result};
use crate::noise::{self, path_seed, RosenblattSampler, SamplePath};
use crate::numerics::HurstParam;
use crate::sde::{simulate_linear_sde, LinearDynamics};
use rayon::prelude::*;

/// A Monte Carlo estimate with its normal-approximation standard error.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub seed: u64,
}

/// Driving-noise configuration for simulation-based verifications.
#[derive(Debug, Clone, Copy)]
pub enum NoiseModel {
    Brownian,
    Fbm { h: f64 },
    Rosenblatt { hurst: HurstParam, upsample: usize },
}

impl NoiseModel {
    /// Samples one driving path on `n` steps of size `dt`.
    fn sample(&self, n: usize, dt: f64, seed: u64) -> Result<SamplePath> {
        match *self {
            NoiseModel::Brownian => noise::gen_brownian(n, dt, seed),
            NoiseModel::Fbm { h } => noise::fgn_path_any(h, n, dt, seed),
            NoiseModel::Rosenblatt { hurst, upsample } => {
                RosenblattSampler::new(hurst, n, n as f64 * dt, upsample)?.path(seed)
            }
        }
    }
}

/// Numerically stable order-independent summation (pairwise splitting).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Sample mean, unbiased variance, and standardized third moment.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub variance: f64,
    /// `None` when the sample is (numerically) degenerate.
    pub skewness: Option<f64>,
}

/// Computes [`SummaryStats`]; requires at least 3 samples.
pub fn summary_stats(samples: &[f64]) -> Result<SummaryStats> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Config(format!("summary statistics need n ≥ 3, got {n}")));
    }
    let nf = n as f64;
    let mean = pairwise_sum(samples) / nf;
    let centered2: Vec<f64> = samples.iter().map(|x| (x - mean).powi(2)).collect();
    let m2 = pairwise_sum(&centered2) / nf;
    let variance = m2 * nf / (nf - 1.0);
    let skewness = if m2 <= 1e-300 * (1.0 + mean * mean) {
        None
    } else {
        let centered3: Vec<f64> = samples.iter().map(|x| (x - mean).powi(3)).collect();
        let m3 = pairwise_sum(&centered3) / nf;
        Some(m3 / m2.powf(1.5))
    };
    Ok(SummaryStats {
        mean,
        variance,
        skewness,
    })
}

/// Exact 1-D Wasserstein-1 distance between empirical laws: the mean absolute
/// difference of sorted samples. Unequal sample counts are aligned by
/// quantile resampling at `max(len)` levels.
pub fn wasserstein1(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Config("wasserstein1 requires nonempty samples".into()));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.total_cmp(q));
    b.sort_by(|p, q| p.total_cmp(q));
    let k = a.len().max(b.len());
    let quantile = |sorted: &[f64], level: f64| -> f64 {
        // Nearest-rank quantile of a sorted sample.
        let idx = (level * sorted.len() as f64).floor() as usize;
        sorted[idx.min(sorted.len() - 1)]
    };
    let total: f64 = (0..k)
        .map(|i| {
            let level = (i as f64 + 0.5) / k as f64;
            (quantile(&a, level) - quantile(&b, level)).abs()
        })
        .sum();
    Ok(total / k as f64)
}

/// Time-averaged quadratic cost `(1/T)∫₀^T (q x² + r u²) dt` under the state
/// feedback `u = gain·x`, averaged across `n_paths` independently driven
/// paths. The standard error is taken across paths — under long-range
/// dependence the time average converges slowly (variance ~ T^{2H−2}), so
/// cross-path spread is the honest error measure.
#[allow(clippy::too_many_arguments)]
pub fn estimate_ergodic_cost(
    dyn_: &LinearDynamics,
    gain: f64,
    q: f64,
    r: f64,
    noise: &NoiseModel,
    t_horizon: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<MCEstimate> {
    let n = (t_horizon / dt).round() as usize;
    if n < 2 || ((n as f64 * dt - t_horizon) / t_horizon).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "horizon {t_horizon} is not an integer multiple of dt {dt}"
        )));
    }
    // Build any expensive sampler state once, outside the parallel loop.
    let sampler = match *noise {
        NoiseModel::Rosenblatt { hurst, upsample } => {
            Some(RosenblattSampler::new(hurst, n, t_horizon, upsample)?)
        }
        _ => None,
    };
    let costs: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let s = path_seed(seed, i);
            let path = match &sampler {
                Some(sampler) => sampler.path(s)?,
                None => noise.sample(n, dt, s)?,
            };
            let state = simulate_linear_sde(dyn_, gain, &path, dt)?;
            let mut acc = 0.0;
            for k in 0..n {
                let x = state.values[k];
                if x.abs() > 1e9 {
                    return Err(Error::NonConvergence(format!(
                        "state exceeded the overflow guard at t={}; gain {gain} appears destabilizing",
                        state.time(k)
                    )));
                }
                let u = gain * x;
                acc += (q * x * x + r * u * u) * dt;
            }
            Ok(acc / t_horizon)
        })
        .collect::<Result<_>>()?;
    let stats = summary_stats(&costs)?;
    Ok(MCEstimate {
        value: stats.mean,
        std_error: (stats.variance / n_paths as f64).sqrt(),
        n: n_paths,
        seed,
    })
}
