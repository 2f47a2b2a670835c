//! Closed-form ergodic linear-quadratic control under long-range-dependent
//! noise: optimal gains, the algebraic Riccati link, surrogate-noise
//! suboptimality quantification, and variance-aware mean-field control.
//!
//! All formulas depend on the noise only through `Γ(2H+1)` and the power
//! `[−closed_loop]^{2H}`, so the same expressions cover the Brownian limit
//! `H → 1/2`.

use crate::error::{Error, Result};
use crate::numerics::{gamma_fn, HurstParam};

/// Solution of the single-agent ergodic problem.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ErgodicSolution {
    /// Optimal feedback gain K̂.
    pub gain: f64,
    /// Optimal long-run average cost L∞(K̂).
    pub cost: f64,
    /// Solution of the algebraic Riccati equation
    /// `(1−H)(b2²/r)P² + b1·P − H·q = 0` with `K̂ = (b2/r)·P`.
    ///
    /// Note: this root is always negative for b2 > 0 — the classical-LQ sign
    /// convention `K = −(b2/r)P` does not apply to these formulas, and the
    /// root satisfying the gain link is the one reported.
    pub riccati_p: f64,
    /// Closed-loop coefficient `b1 + b2·K̂` (strictly negative).
    pub closed_loop: f64,
}

/// Solution of the variance-aware (mean-field) ergodic problem.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MfErgodicSolution {
    /// Gain on the state deviation `x − x̄` (K*).
    pub gain_dev: f64,
    /// Gain on the mean state x̄ (K̄*).
    pub gain_mean: f64,
    /// Total optimal cost (deviation part + mean part).
    pub cost: f64,
    /// Closed-loop coefficient of the deviation dynamics (negative).
    pub stability_dev: f64,
    /// Closed-loop coefficient of the mean dynamics (negative).
    pub stability_mean: f64,
}

/// Outcome of optimizing against a surrogate noise model.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SurrogateOutcome {
    /// Gain computed as if the noise had index `h_assumed`.
    pub gain: f64,
    /// True long-run cost of that gain under the actual noise.
    pub true_cost: f64,
    /// Cost of the genuinely optimal gain.
    pub optimal_cost: f64,
    /// `true_cost − optimal_cost ≥ 0`, zero iff the surrogate is exact.
    pub gap: f64,
}

fn check_weights(q: f64, r: f64) -> Result<()> {
    if !(q > 0.0 && r > 0.0) {
        return Err(Error::Domain(format!("weights must be positive, got q={q}, r={r}")));
    }
    Ok(())
}

/// The optimal-gain radical shared by the single-agent problem, the
/// best-response map of the non-zero-sum game, and the variance-aware
/// deviation part: `−(a + sqrt(a² + 4H(1−H)b2²q/r)) / (2 b2 (1−H))`,
/// where `a` is the drift coefficient seen by the optimizing agent.
/// Setting `h = 1/2` gives the classical ergodic LQ gain.
pub(crate) fn gain_radical(a: f64, b2: f64, q: f64, r: f64, h: f64) -> f64 {
    -(a + (a * a + 4.0 * h * (1.0 - h) * b2 * b2 * q / r).sqrt()) / (2.0 * b2 * (1.0 - h))
}

/// Long-run average cost of the stationary feedback `u = k·x`:
/// `L∞(k) = Γ(2H+1)(q + r k²) / (2[−(b1 + b2 k)]^{2H})`.
///
/// A destabilizing gain returns the infinite-cost signal `f64::INFINITY`
/// (not an error), so parameter sweeps can cross the stability boundary.
pub fn ergodic_cost(k: f64, b1: f64, b2: f64, q: f64, r: f64, hurst: HurstParam) -> Result<f64> {
    check_weights(q, r)?;
    let b = b1 + b2 * k;
    if b >= 0.0 {
        return Ok(f64::INFINITY);
    }
    let h = hurst.h();
    let g = gamma_fn(2.0 * h + 1.0)?;
    Ok(g * (q + r * k * k) / (2.0 * (-b).powf(2.0 * h)))
}

/// Stationary second moment of the driven stable linear system
/// `dx = b·x·dt + dR^H`: `Γ(2H+1) / (2(−b)^{2H})`.
pub fn stationary_second_moment(b: f64, hurst: HurstParam) -> Result<f64> {
    if !(b < 0.0) {
        return Err(Error::Domain(format!(
            "stationary moment requires a stable coefficient b < 0, got {b}"
        )));
    }
    let h = hurst.h();
    Ok(gamma_fn(2.0 * h + 1.0)? / (2.0 * (-b).powf(2.0 * h)))
}

/// Closed-form optimal gain, cost, and Riccati solution for the ergodic
/// problem `min_K limsup (1/T) E ∫ (q x² + r u²)` with `u = Kx`.
pub fn optimal_gain(b1: f64, b2: f64, q: f64, r: f64, hurst: HurstParam) -> Result<ErgodicSolution> {
    check_weights(q, r)?;
    if b2 == 0.0 {
        return Err(Error::Domain("control coefficient b2 must be nonzero".into()));
    }
    let h = hurst.h();
    let gain = gain_radical(b1, b2, q, r, h);
    let closed_loop = b1 + b2 * gain;
    if closed_loop >= 0.0 {
        return Err(Error::Internal(format!(
            "optimal closed loop is not stable: b1={b1}, b2={b2} give {closed_loop}"
        )));
    }
    let cost = ergodic_cost(gain, b1, b2, q, r, hurst)?;
    // Equivalent cost expression from the stationarity identity:
    // L∞(K̂) = Γ(2H) · (−r K̂ / b2) / [−closed_loop]^{2H−1}.
    let alt = gamma_fn(2.0 * h)? * (-r * gain / b2) / (-closed_loop).powf(2.0 * h - 1.0);
    if ((cost - alt) / cost).abs() > 1e-10 {
        return Err(Error::Internal(format!(
            "cost expressions disagree: {cost} vs {alt}"
        )));
    }
    let riccati_p = r * gain / b2;
    Ok(ErgodicSolution {
        gain,
        cost,
        riccati_p,
        closed_loop,
    })
}

/// Optimizes the gain for an assumed Hurst index (1/2 = Brownian surrogate —
/// which also covers the "ignore the noise" surrogate, since the
/// deterministic LQ gain coincides with the H = 1/2 gain) and evaluates the
/// resulting cost under the true index.
pub fn surrogate_gain(
    h_true: HurstParam,
    h_assumed: f64,
    b1: f64,
    b2: f64,
    q: f64,
    r: f64,
) -> Result<SurrogateOutcome> {
    check_weights(q, r)?;
    if !(0.5..1.0).contains(&h_assumed) {
        return Err(Error::Domain(format!(
            "assumed index must lie in [1/2, 1), got {h_assumed}"
        )));
    }
    let gain = gain_radical(b1, b2, q, r, h_assumed);
    let true_cost = ergodic_cost(gain, b1, b2, q, r, h_true)?;
    let optimal_cost = optimal_gain(b1, b2, q, r, h_true)?.cost;
    Ok(SurrogateOutcome {
        gain,
        true_cost,
        optimal_cost,
        gap: true_cost - optimal_cost,
    })
}

/// Variance-aware control: optimal gains for the cost that penalizes both the
/// state deviation (through `q, r`) and the mean state/control (through
/// `q̄, r̄`), when the mean dynamics carry coefficients `b1+b̄1`, `b2+b̄2`
/// and a constant forcing `b̄0`.
#[allow(clippy::too_many_arguments)]
pub fn variance_aware_gains(
    b1: f64,
    b2: f64,
    bbar0: f64,
    bbar1: f64,
    bbar2: f64,
    q: f64,
    qbar: f64,
    r: f64,
    rbar: f64,
    hurst: HurstParam,
) -> Result<MfErgodicSolution> {
    check_weights(q, r)?;
    if !(qbar >= 0.0 && rbar > 0.0) {
        return Err(Error::Domain(format!(
            "mean-part weights must satisfy q̄ ≥ 0, r̄ > 0; got q̄={qbar}, r̄={rbar}"
        )));
    }
    let bm1 = b1 + bbar1;
    let bm2 = b2 + bbar2;
    if bm1 == 0.0 {
        return Err(Error::Domain("mean drift b1 + b̄1 must be nonzero".into()));
    }
    let h = hurst.h();
    let gain_dev = gain_radical(b1, b2, q, r, h);
    let stability_dev = b1 + b2 * gain_dev;
    if stability_dev >= 0.0 {
        return Err(Error::Internal(format!(
            "deviation closed loop not stable: {stability_dev}"
        )));
    }
    let gain_mean = bm2 * qbar / (rbar * bm1);
    let stability_mean = bm1 + bm2 * gain_mean;
    if stability_mean >= 0.0 {
        return Err(Error::NoEquilibrium(format!(
            "mean closed loop b1+b̄1+(b2+b̄2)K̄* = {stability_mean} is not stable; \
             the variance-aware formulas are only meaningful for a stable mean flow"
        )));
    }
    let dev_cost = gamma_fn(2.0 * h)? * (-r * gain_dev / b2)
        / (-stability_dev).powf(2.0 * h - 1.0);
    let mean_cost = bbar0 * bbar0 * qbar * rbar / (bm1 * bm1 * rbar + bm2 * bm2 * qbar);
    Ok(MfErgodicSolution {
        gain_dev,
        gain_mean,
        cost: dev_cost + mean_cost,
        stability_dev,
        stability_mean,
    })
}
