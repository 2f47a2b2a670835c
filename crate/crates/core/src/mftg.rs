//! Finite-horizon mean-field-type games driven by Rosenblatt noise.
//!
//! Each player controls a scalar state through a linear feedback
//! `u_i = −η_i(x − x̄) − η̄_i x̄` split into a *deviation* part (acting on the
//! state minus its mean) and a *mean* part. The equilibrium is characterized
//! by three backward ODE families per player — a Riccati equation for the
//! deviation multiplier λ_i, a possibly higher-order equation for the mean
//! multiplier λ̄_i, and a linear offset equation for γ_i — together with two
//! kernel functions `o(t)` and `v2(t)` that carry the long-memory noise into
//! the costs. The noise enters only through `o`/`v2`, so switching it off
//! (`KernelConstant::Custom(0.0)` with `v2_init = 0`) recovers the
//! deterministic mean-field game.
//!
//! Time-varying coefficients are represented as samples on a uniform grid
//! over `[0, T]` and evaluated by linear interpolation; a length-one slice is
//! a constant.

use crate::error::{Error, Result};
use crate::numerics::{
    gauss_panel, integrate_singular_lower, integrate_singular_upper, rosenblatt_constants,
    HurstParam,
};
use rayon::prelude::*;

/// Choice of the kernel constant `c3` in the memory function `o(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelConstant {
    /// `H(2H−1)/c` — the unique value for which the stationary variance of a
    /// stable constant-coefficient closed loop equals
    /// [`stationary_second_moment`], keeping this module consistent with the
    /// ergodic control formulas.
    Calibrated,
    /// The raw kernel constant `c̃_H` from the normalization table; retained
    /// for comparison but *not* consistent with the stationary variance.
    RawCTildeH,
    /// An explicit value; `Custom(0.0)` switches the noise kernel off.
    Custom(f64),
}

impl KernelConstant {
    /// Resolves the constant for a given Hurst index.
    pub fn value(self, hurst: HurstParam) -> f64 {
        let h = hurst.h();
        match self {
            KernelConstant::Calibrated => {
                h * (2.0 * h - 1.0) / rosenblatt_constants(hurst).c
            }
            KernelConstant::RawCTildeH => rosenblatt_constants(hurst).c_tilde_h,
            KernelConstant::Custom(v) => v,
        }
    }
}

/// Per-player coefficient functions and terminal data.
///
/// All time-varying entries are uniform-grid samples on `[0, T]`; a slice of
/// length one denotes a constant function.
#[derive(Debug, Clone)]
pub struct PlayerCoeffs {
    /// Control coefficient of the deviation dynamics.
    pub b2: Vec<f64>,
    /// Mean-adjustment of the control coefficient (the mean dynamics see
    /// `b2 + b2_bar`).
    pub b2_bar: Vec<f64>,
    /// Running weight on the squared state deviation (≥ 0).
    pub q: Vec<f64>,
    /// Running weight on the mean power term `x̄^{2k̄}/(2k̄)` (≥ 0).
    pub q_bar: Vec<f64>,
    /// Running weight on the squared control deviation (> 0).
    pub r: Vec<f64>,
    /// Running weight on the mean control power term (> 0).
    pub r_bar: Vec<f64>,
    /// Terminal weight on the squared state deviation.
    pub q_terminal: f64,
    /// Terminal weight on the mean power term.
    pub q_bar_terminal: f64,
    /// Mean-cost exponent: the mean terms are raised to the power `2k̄`.
    pub k_bar: u32,
}

impl PlayerCoeffs {
    /// Constant-coefficient convenience constructor.
    #[allow(clippy::too_many_arguments)]
    pub fn constant(
        b2: f64,
        b2_bar: f64,
        q: f64,
        q_bar: f64,
        r: f64,
        r_bar: f64,
        q_terminal: f64,
        q_bar_terminal: f64,
        k_bar: u32,
    ) -> Self {
        PlayerCoeffs {
            b2: vec![b2],
            b2_bar: vec![b2_bar],
            q: vec![q],
            q_bar: vec![q_bar],
            r: vec![r],
            r_bar: vec![r_bar],
            q_terminal,
            q_bar_terminal,
            k_bar,
        }
    }
}

/// Full specification of the finite-horizon mean-field-type game.
#[derive(Debug, Clone)]
pub struct MftgSpec {
    /// Horizon `T > 0`.
    pub horizon: f64,
    /// Number of uniform time steps used by the ODE solvers and the output
    /// grids (`n_steps + 1` grid points).
    pub n_steps: usize,
    /// Drift coefficient of the deviation dynamics (time grid).
    pub b1: Vec<f64>,
    /// Mean-adjustment of the drift (the mean dynamics see `b1 + b1_bar`).
    pub b1_bar: Vec<f64>,
    /// Per-player coefficients.
    pub players: Vec<PlayerCoeffs>,
    /// Initial squared deviation `E(x₀ − x̄₀)²`.
    pub x0_dev_sq: f64,
    /// Initial mean `x̄₀`.
    pub x0_mean: f64,
    /// Initial value of the second-central-moment function `v2`.
    pub v2_init: f64,
    /// Hurst index of the driving noise.
    pub hurst: HurstParam,
    /// Kernel constant policy for `o(t)`.
    pub kernel: KernelConstant,
}

impl MftgSpec {
    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.n_steps < 2 {
            return Err(Error::Config(format!(
                "at least 2 time steps required, got {}",
                self.n_steps
            )));
        }
        if self.players.is_empty() {
            return Err(Error::Config("at least one player required".into()));
        }
        if !(self.v2_init >= 0.0) || !(self.x0_dev_sq >= 0.0) {
            return Err(Error::Config(format!(
                "initial moments must be nonnegative, got v2_init={}, x0_dev_sq={}",
                self.v2_init, self.x0_dev_sq
            )));
        }
        for (i, p) in self.players.iter().enumerate() {
            if p.k_bar == 0 {
                return Err(Error::Config(format!(
                    "player {i}: the mean-cost exponent k_bar must be a positive integer"
                )));
            }
            if p.r.iter().any(|&v| !(v > 0.0)) || p.r_bar.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Config(format!(
                    "player {i}: control weights r, r_bar must be strictly positive on the grid"
                )));
            }
            if p.q.iter().any(|&v| !(v >= 0.0)) || p.q_bar.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::Config(format!(
                    "player {i}: state weights q, q_bar must be nonnegative on the grid"
                )));
            }
            if !(p.q_terminal >= 0.0) || !(p.q_bar_terminal >= 0.0) {
                return Err(Error::Config(format!(
                    "player {i}: terminal weights must be nonnegative"
                )));
            }
            if p.b2.iter().all(|&v| v == 0.0) {
                return Err(Error::Config(format!(
                    "player {i}: the control coefficient b2 must not vanish identically"
                )));
            }
        }
        Ok(())
    }
}

/// Equilibrium (or cooperative-optimum) output on the uniform time grid.
///
/// For [`mftg_equilibrium`] every per-player vector has one entry per player.
/// For [`cooperative_optimum`] the multiplier/offset vectors (`lambda`,
/// `lambda_bar`, `gamma`, `cost`) have a single entry — the aggregated
/// weighted problem has one multiplier system — while `eta`/`eta_bar` remain
/// per-player.
#[derive(Debug, Clone)]
pub struct MftgSolution {
    /// Grid times `0 = t₀ < … < t_m = T`.
    pub times: Vec<f64>,
    /// Deviation multipliers λ on the grid.
    pub lambda: Vec<Vec<f64>>,
    /// Mean multipliers λ̄ on the grid.
    pub lambda_bar: Vec<Vec<f64>>,
    /// Cost offsets γ on the grid (γ(T) = 0).
    pub gamma: Vec<Vec<f64>>,
    /// Deviation feedback gains η on the grid.
    pub eta: Vec<Vec<f64>>,
    /// Mean feedback gains η̄ on the grid.
    pub eta_bar: Vec<Vec<f64>>,
    /// Memory kernel `o(t)` under the equilibrium closed loop.
    pub o: Vec<f64>,
    /// Second central moment `v2(t)` under the equilibrium closed loop.
    pub v2: Vec<f64>,
    /// Total expected cost(s): `λ(0)E(x₀−x̄₀)² + λ̄(0)x̄₀^{2k̄}/(2k̄) + γ(0)`.
    pub cost: Vec<f64>,
    /// Outer fixed-point sweeps used by the mean-gain iteration.
    pub iterations: usize,
}

/// Linear interpolation of uniform-grid samples over `[0, horizon]`; a
/// length-one slice is treated as a constant function.
fn interp(values: &[f64], horizon: f64, t: f64) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let m = (n - 1) as f64;
            let x = (t / horizon * m).clamp(0.0, m);
            let j = (x.floor() as usize).min(n - 2);
            let w = x - j as f64;
            values[j] * (1.0 - w) + values[j + 1] * w
        }
    }
}

/// Integrates `−ẏ = rhs(t, y)` backward from `y(T) = terminal` with classical
/// RK4, monitoring the admissibility certificate at every accepted
/// step: the solution must stay nonnegative and bounded (no blow-up).
fn backward_rk4<F: Fn(f64, f64) -> f64>(
    rhs: F,
    terminal: f64,
    horizon: f64,
    steps: usize,
    label: &str,
) -> Result<Vec<f64>> {
    const BLOW_UP: f64 = 1e12;
    let dt = horizon / steps as f64;
    let mut out = vec![0.0; steps + 1];
    out[steps] = terminal;
    let mut y = terminal;
    for k in (0..steps).rev() {
        let t1 = (k + 1) as f64 * dt;
        // ẏ = −rhs; one RK4 step of size −dt.
        let f = |t: f64, y: f64| -rhs(t, y);
        let k1 = f(t1, y);
        let k2 = f(t1 - 0.5 * dt, y - 0.5 * dt * k1);
        let k3 = f(t1 - 0.5 * dt, y - 0.5 * dt * k2);
        let k4 = f(t1 - dt, y - dt * k3);
        y -= dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !y.is_finite() || y.abs() > BLOW_UP || y < 0.0 {
            return Err(Error::NoEquilibrium(format!(
                "{label} leaves the admissible region (value {y}) at t = {:.6}; \
                 the backward system blows up or turns negative",
                t1 - dt
            )));
        }
        out[k] = y;
    }
    Ok(out)
}

/// Solves the deviation Riccati equation
/// `−λ̇ = q + 2 b1 λ − (b2²/r) λ²`, `λ(T) = terminal`,
/// backward on a uniform grid of `steps` steps over `[0, horizon]`.
///
/// Coefficients are uniform-grid samples (length-one = constant). The
/// solution is returned forward in time (`result[k] = λ(k·T/steps)`). A
/// solution that exceeds `1e12` or turns negative yields a
/// no-equilibrium-certificate error.
pub fn solve_lambda(
    b1: &[f64],
    b2: &[f64],
    q: &[f64],
    r: &[f64],
    terminal: f64,
    horizon: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    check_grid(horizon, steps)?;
    if r.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("control weight r must be strictly positive".into()));
    }
    if !(terminal >= 0.0) {
        return Err(Error::Domain(format!(
            "terminal condition must be nonnegative, got {terminal}"
        )));
    }
    let rhs = |t: f64, y: f64| {
        let b2t = interp(b2, horizon, t);
        interp(q, horizon, t) + 2.0 * interp(b1, horizon, t) * y
            - b2t * b2t / interp(r, horizon, t) * y * y
    };
    backward_rk4(rhs, terminal, horizon, steps, "deviation multiplier")
}

/// Raises a base to `1/(2k̄−1)`; for `k̄ = 1` this is the identity (negative
/// bases allowed), otherwise the base must be nonnegative.
fn root_pow(base: f64, k_bar: u32) -> f64 {
    if k_bar == 1 {
        base
    } else {
        base.max(0.0).powf(1.0 / (2.0 * k_bar as f64 - 1.0))
    }
}

/// Solves the mean multiplier equation
/// `−λ̄̇ = q̄ + 2k̄(b1+b̄1)λ̄ − 2k̄ λ̄·cross − (2k̄−1) r̄ (b2⁺λ̄/r̄)^{2k̄/(2k̄−1)}`,
/// `λ̄(T) = terminal`, where `b2⁺ = b2 + b̄2` is the combined control
/// coefficient seen by the mean dynamics and `cross(t) = Σ_{j≠i} b2⁺_j η̄_j(t)`
/// aggregates the other players' mean feedback.
///
/// For `k̄ > 1` the fractional powers require `b2⁺ ≥ 0` on the whole grid
/// (otherwise a negative base would be raised to a fractional power); a
/// violation is reported as a coefficient-sign domain error. `k̄ = 1`
/// degenerates to the Riccati of [`solve_lambda`] with combined coefficients.
#[allow(clippy::too_many_arguments)]
pub fn solve_lambda_bar(
    b1_total: &[f64],
    b2_total: &[f64],
    q_bar: &[f64],
    r_bar: &[f64],
    k_bar: u32,
    cross: &[f64],
    terminal: f64,
    horizon: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    check_grid(horizon, steps)?;
    if k_bar == 0 {
        return Err(Error::Domain("mean-cost exponent k_bar must be ≥ 1".into()));
    }
    if r_bar.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("control weight r_bar must be strictly positive".into()));
    }
    if !(terminal >= 0.0) {
        return Err(Error::Domain(format!(
            "terminal condition must be nonnegative, got {terminal}"
        )));
    }
    if k_bar > 1 && b2_total.iter().any(|&v| v < 0.0) {
        return Err(Error::Domain(
            "coefficient sign: for k_bar > 1 the combined control coefficient b2 + b2_bar \
             must be nonnegative (fractional powers of a negative base)"
                .into(),
        ));
    }
    let kk = k_bar as f64;
    let expo = 2.0 * kk / (2.0 * kk - 1.0);
    let rhs = |t: f64, y: f64| {
        let b2t = interp(b2_total, horizon, t);
        let rb = interp(r_bar, horizon, t);
        let base = b2t * y / rb;
        let power_term = if k_bar == 1 {
            rb * base * base
        } else {
            (2.0 * kk - 1.0) * rb * base.max(0.0).powf(expo)
        };
        interp(q_bar, horizon, t) + 2.0 * kk * interp(b1_total, horizon, t) * y
            - 2.0 * kk * y * interp(cross, horizon, t)
            - power_term
    };
    backward_rk4(rhs, terminal, horizon, steps, "mean multiplier")
}

fn check_grid(horizon: f64, steps: usize) -> Result<()> {
    if !(horizon > 0.0) {
        return Err(Error::Config(format!("horizon must be positive, got {horizon}")));
    }
    if steps == 0 {
        return Err(Error::Config("at least one time step required".into()));
    }
    Ok(())
}

/// Exact integral of the piecewise-linear interpolant of `b` from 0 to `t`.
struct DriftIntegral<'a> {
    b: &'a [f64],
    horizon: f64,
    /// Trapezoid cumulative at the grid points.
    cumulative: Vec<f64>,
}

impl<'a> DriftIntegral<'a> {
    fn new(b: &'a [f64], horizon: f64) -> Self {
        let m = b.len().max(2) - 1;
        let dt = horizon / m as f64;
        let mut cumulative = vec![0.0; m + 1];
        for k in 0..m {
            let (bl, br) = if b.len() == 1 {
                (b[0], b[0])
            } else {
                (b[k], b[k + 1])
            };
            cumulative[k + 1] = cumulative[k] + 0.5 * dt * (bl + br);
        }
        DriftIntegral { b, horizon, cumulative }
    }

    fn at(&self, t: f64) -> f64 {
        let m = self.cumulative.len() - 1;
        let dt = self.horizon / m as f64;
        let x = (t / dt).clamp(0.0, m as f64);
        let j = (x.floor() as usize).min(m - 1);
        let w = t - j as f64 * dt;
        let bl = interp(self.b, self.horizon, j as f64 * dt);
        let bt = interp(self.b, self.horizon, t);
        self.cumulative[j] + 0.5 * w * (bl + bt)
    }
}

/// Evaluates the memory kernel `o(t)` and the second central moment `v2(t)`
/// of the closed-loop state on the uniform grid carrying `b` (the closed-loop
/// drift `b1 − Σ b_{2j}η_j`, sampled with `b.len() − 1` steps over
/// `[0, horizon]`):
///
/// `o(t) = ∫₀ᵗ c3 (t−s)^{2H−2} e^{∫ₛᵗ b} ds`,
/// `v2(t) = e^{2∫₀ᵗ b} v2(0) + ∫₀ᵗ 2c·o(s) e^{2∫ₛᵗ b} ds`,
///
/// with `c` the change-of-variable constant of the noise. The weakly singular
/// `(t−s)^{2H−2}` endpoint is handled by the graded singular rule, and all
/// exponentials are kept in the differenced form `∫ₛᵗ b` so that stable loops
/// never overflow on long horizons.
pub fn compute_o_v2(
    b: &[f64],
    horizon: f64,
    hurst: HurstParam,
    c3: f64,
    v2_init: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if b.len() < 2 {
        return Err(Error::Config(
            "closed-loop drift must be sampled on at least two grid points".into(),
        ));
    }
    check_grid(horizon, b.len() - 1)?;
    let steps = b.len() - 1;
    let dt = horizon / steps as f64;
    let h = hurst.h();
    let drift = DriftIntegral::new(b, horizon);
    if c3 == 0.0 {
        // Noise off: o ≡ 0 and v2 is the homogeneous relaxation of v2_init.
        let o = vec![0.0; steps + 1];
        let v2 = (0..=steps)
            .map(|k| v2_init * (2.0 * drift.at(k as f64 * dt)).exp())
            .collect();
        return Ok((o, v2));
    }
    let o_at = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let bt = drift.at(t);
        let f = |s: f64| c3 * (t - s).powf(2.0 * h - 2.0) * (bt - drift.at(s)).exp();
        integrate_singular_upper(&f, 0.0, t, 2.0 - 2.0 * h, 1)
    };
    let o: Vec<f64> = (0..=steps).into_par_iter().map(|k| o_at(k as f64 * dt)).collect();
    let c = rosenblatt_constants(hurst).c;
    // Cell-recursive update keeps every exponent a local drift difference.
    let cells: Vec<f64> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
            let b1c = drift.at(t1);
            let g = |s: f64| 2.0 * c * o_at(s) * (2.0 * (b1c - drift.at(s))).exp();
            if k == 0 {
                // o(s) ~ s^{2H−1} near zero: mildly non-smooth, graded rule.
                integrate_singular_lower(&g, t0, t1, 0.0, 1)
            } else {
                gauss_panel(&g, t0, t1)
            }
        })
        .collect();
    let mut v2 = vec![0.0; steps + 1];
    v2[0] = v2_init;
    for k in 0..steps {
        let decay =
            (2.0 * (drift.at((k + 1) as f64 * dt) - drift.at(k as f64 * dt))).exp();
        v2[k + 1] = decay * v2[k] + cells[k];
    }
    Ok((o, v2))
}

/// Backward trapezoid accumulation of γ: `γ(T) = 0`,
/// `γ(t_k) = ∫_{t_k}^T g(s) ds` for grid samples `g`.
fn gamma_from_integrand(g: &[f64], dt: f64) -> Vec<f64> {
    let m = g.len() - 1;
    let mut gamma = vec![0.0; m + 1];
    for k in (0..m).rev() {
        gamma[k] = gamma[k + 1] + 0.5 * dt * (g[k] + g[k + 1]);
    }
    gamma
}

/// Computes the Nash equilibrium of the mean-field-type game.
///
/// Structure of the computation (one pass plus a fixed point):
/// 1. the deviation multipliers λ_i do not depend on any feedback iterate, so
///    they are solved once, and η_i(t) = λ_i(t)·b_{2i}(t)/r_i(t) is the exact
///    minimizer of each player's deviation criterion — also independent of
///    the other players;
/// 2. the closed-loop drift `b = b1 − Σ b_{2j}η_j` then fixes `o` and `v2`;
/// 3. only the mean multipliers λ̄_i are genuinely coupled (through the other
///    players' mean gains η̄_j); they are resolved by damping-free Jacobi
///    sweeps until the η̄ profile moves less than `tol` in sup norm;
/// 4. γ_i is a backward line integral of the (equilibrium) running offset.
///
/// Per-player ODE solves inside one sweep run in parallel.
pub fn mftg_equilibrium(spec: &MftgSpec, tol: f64, max_iter: usize) -> Result<MftgSolution> {
    spec.validate()?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::Config(format!(
            "need tol > 0 and max_iter ≥ 1, got tol={tol}, max_iter={max_iter}"
        )));
    }
    let (horizon, m) = (spec.horizon, spec.n_steps);
    let dt = horizon / m as f64;
    let times: Vec<f64> = (0..=m).map(|k| k as f64 * dt).collect();
    let n = spec.players.len();

    // (1) Deviation multipliers and gains, solved once.
    let lambda: Vec<Vec<f64>> = spec
        .players
        .par_iter()
        .map(|p| solve_lambda(&spec.b1, &p.b2, &p.q, &p.r, p.q_terminal, horizon, m))
        .collect::<Result<_>>()?;
    let eta: Vec<Vec<f64>> = spec
        .players
        .iter()
        .zip(&lambda)
        .map(|(p, lam)| {
            (0..=m)
                .map(|k| {
                    lam[k] * interp(&p.b2, horizon, times[k]) / interp(&p.r, horizon, times[k])
                })
                .collect()
        })
        .collect();

    // (2) Closed-loop drift, memory kernel, second central moment.
    let b_closed: Vec<f64> = (0..=m)
        .map(|k| {
            interp(&spec.b1, horizon, times[k])
                - spec
                    .players
                    .iter()
                    .zip(&eta)
                    .map(|(p, e)| interp(&p.b2, horizon, times[k]) * e[k])
                    .sum::<f64>()
        })
        .collect();
    let c3 = spec.kernel.value(spec.hurst);
    let (o, v2) = compute_o_v2(&b_closed, horizon, spec.hurst, c3, spec.v2_init)?;

    // (3) Jacobi fixed point on the mean gains η̄.
    let b1_total: Vec<f64> = (0..=m)
        .map(|k| interp(&spec.b1, horizon, times[k]) + interp(&spec.b1_bar, horizon, times[k]))
        .collect();
    let b2_total: Vec<Vec<f64>> = spec
        .players
        .iter()
        .map(|p| {
            (0..=m)
                .map(|k| {
                    interp(&p.b2, horizon, times[k]) + interp(&p.b2_bar, horizon, times[k])
                })
                .collect()
        })
        .collect();
    let mut eta_bar: Vec<Vec<f64>> = vec![vec![0.0; m + 1]; n];
    let mut lambda_bar: Vec<Vec<f64>> = vec![vec![0.0; m + 1]; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let sweep: Vec<(Vec<f64>, Vec<f64>)> = spec
            .players
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let cross: Vec<f64> = (0..=m)
                    .map(|k| {
                        (0..n)
                            .filter(|&j| j != i)
                            .map(|j| b2_total[j][k] * eta_bar[j][k])
                            .sum()
                    })
                    .collect();
                let lam_bar = solve_lambda_bar(
                    &b1_total,
                    &b2_total[i],
                    &p.q_bar,
                    &p.r_bar,
                    p.k_bar,
                    &cross,
                    p.q_bar_terminal,
                    horizon,
                    m,
                )?;
                let eb: Vec<f64> = (0..=m)
                    .map(|k| {
                        root_pow(
                            b2_total[i][k] * lam_bar[k] / interp(&p.r_bar, horizon, times[k]),
                            p.k_bar,
                        )
                    })
                    .collect();
                Ok((lam_bar, eb))
            })
            .collect::<Result<_>>()?;
        let mut diff = 0.0f64;
        for (i, (lam_bar, eb)) in sweep.into_iter().enumerate() {
            for k in 0..=m {
                diff = diff.max((eb[k] - eta_bar[i][k]).abs());
            }
            lambda_bar[i] = lam_bar;
            eta_bar[i] = eb;
        }
        if diff < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "mean-gain fixed point did not settle within {max_iter} Jacobi sweeps (tol {tol})"
        )));
    }

    // (4) Cost offsets and total costs. At η_i = λ_i b_{2i}/r_i the quadratic
    // penalty term of the running offset vanishes identically.
    let c = rosenblatt_constants(spec.hurst).c;
    let gamma: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let p = &spec.players[i];
            let g: Vec<f64> = (0..=m)
                .map(|k| {
                    let t = times[k];
                    let slack = eta[i][k]
                        - lambda[i][k] * interp(&p.b2, horizon, t) / interp(&p.r, horizon, t);
                    let cross: f64 = (0..n)
                        .filter(|&j| j != i)
                        .map(|j| interp(&spec.players[j].b2, horizon, t) * eta[j][k])
                        .sum();
                    interp(&p.r, horizon, t) * slack * slack * v2[k]
                        - 2.0 * lambda[i][k] * cross * v2[k]
                        + 2.0 * c * lambda[i][k] * o[k]
                })
                .collect();
            gamma_from_integrand(&g, dt)
        })
        .collect();
    let cost: Vec<f64> = (0..n)
        .map(|i| {
            let kk = 2 * spec.players[i].k_bar;
            lambda[i][0] * spec.x0_dev_sq
                + lambda_bar[i][0] * spec.x0_mean.powi(kk as i32) / kk as f64
                + gamma[i][0]
        })
        .collect();

    Ok(MftgSolution {
        times,
        lambda,
        lambda_bar,
        gamma,
        eta,
        eta_bar,
        o,
        v2,
        cost,
        iterations,
    })
}

/// Computes the fully cooperative optimum for positive team weights `ω_i`
/// and a common mean-cost exponent `k̄`.
///
/// The weighted problem has a *single* multiplier system: a Riccati equation
/// with the aggregated control term `Σ b_{2i}²/(ω_i r_i)`, a mean equation
/// with the summed power terms, and gains `η_i = λ b_{2i}/(ω_i r_i)`,
/// `η̄_i = ((b_{2i}+b̄_{2i})λ̄/(ω_i r̄_i))^{1/(2k̄−1)}`. No fixed-point
/// iteration is needed. The returned `lambda`/`lambda_bar`/`gamma`/`cost`
/// hold one aggregated entry; `cost[0]` is the total weighted team cost.
pub fn cooperative_optimum(spec: &MftgSpec, weights: &[f64]) -> Result<MftgSolution> {
    spec.validate()?;
    let n = spec.players.len();
    if weights.len() != n {
        return Err(Error::Config(format!(
            "need one weight per player, got {} weights for {n} players",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Config("team weights must be strictly positive".into()));
    }
    let k_bar = spec.players[0].k_bar;
    if spec.players.iter().any(|p| p.k_bar != k_bar) {
        return Err(Error::Config(
            "the cooperative solution requires a common mean-cost exponent k_bar".into(),
        ));
    }
    let (horizon, m) = (spec.horizon, spec.n_steps);
    let dt = horizon / m as f64;
    let times: Vec<f64> = (0..=m).map(|k| k as f64 * dt).collect();

    // Aggregated deviation Riccati: −λ̇ = Σω_i q_i + 2b1λ − [Σ b_{2i}²/(ω_i r_i)]λ².
    let q_sum: Vec<f64> = (0..=m)
        .map(|k| {
            spec.players
                .iter()
                .zip(weights)
                .map(|(p, &w)| w * interp(&p.q, horizon, times[k]))
                .sum()
        })
        .collect();
    let s_sum: Vec<f64> = (0..=m)
        .map(|k| {
            spec.players
                .iter()
                .zip(weights)
                .map(|(p, &w)| {
                    let b2 = interp(&p.b2, horizon, times[k]);
                    b2 * b2 / (w * interp(&p.r, horizon, times[k]))
                })
                .sum()
        })
        .collect();
    let terminal: f64 = spec
        .players
        .iter()
        .zip(weights)
        .map(|(p, &w)| w * p.q_terminal)
        .sum();
    let rhs = |t: f64, y: f64| {
        interp(&q_sum, horizon, t) + 2.0 * interp(&spec.b1, horizon, t) * y
            - interp(&s_sum, horizon, t) * y * y
    };
    let lambda = backward_rk4(rhs, terminal, horizon, m, "team deviation multiplier")?;

    // Aggregated mean equation with summed power terms.
    let b2_total: Vec<Vec<f64>> = spec
        .players
        .iter()
        .map(|p| {
            (0..=m)
                .map(|k| {
                    interp(&p.b2, horizon, times[k]) + interp(&p.b2_bar, horizon, times[k])
                })
                .collect()
        })
        .collect();
    if k_bar > 1 && b2_total.iter().any(|col| col.iter().any(|&v| v < 0.0)) {
        return Err(Error::Domain(
            "coefficient sign: for k_bar > 1 the combined control coefficients b2 + b2_bar \
             must be nonnegative (fractional powers of a negative base)"
                .into(),
        ));
    }
    let q_bar_sum: Vec<f64> = (0..=m)
        .map(|k| {
            spec.players
                .iter()
                .zip(weights)
                .map(|(p, &w)| w * interp(&p.q_bar, horizon, times[k]))
                .sum()
        })
        .collect();
    let terminal_bar: f64 = spec
        .players
        .iter()
        .zip(weights)
        .map(|(p, &w)| w * p.q_bar_terminal)
        .sum();
    let kk = k_bar as f64;
    let expo = 2.0 * kk / (2.0 * kk - 1.0);
    let rhs_bar = |t: f64, y: f64| {
        let b1t = interp(&spec.b1, horizon, t) + interp(&spec.b1_bar, horizon, t);
        let power: f64 = spec
            .players
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(i, (p, &w))| {
                let wr = w * interp(&p.r_bar, horizon, t);
                let base = interp(&b2_total[i], horizon, t) * y / wr;
                if k_bar == 1 {
                    wr * base * base
                } else {
                    wr * base.max(0.0).powf(expo)
                }
            })
            .sum();
        interp(&q_bar_sum, horizon, t) + 2.0 * kk * b1t * y - (2.0 * kk - 1.0) * power
    };
    let lambda_bar = backward_rk4(rhs_bar, terminal_bar, horizon, m, "team mean multiplier")?;

    // Gains, closed loop, kernels.
    let eta: Vec<Vec<f64>> = spec
        .players
        .iter()
        .zip(weights)
        .map(|(p, &w)| {
            (0..=m)
                .map(|k| {
                    lambda[k] * interp(&p.b2, horizon, times[k])
                        / (w * interp(&p.r, horizon, times[k]))
                })
                .collect()
        })
        .collect();
    let eta_bar: Vec<Vec<f64>> = spec
        .players
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(i, (p, &w))| {
            (0..=m)
                .map(|k| {
                    root_pow(
                        b2_total[i][k] * lambda_bar[k]
                            / (w * interp(&p.r_bar, horizon, times[k])),
                        k_bar,
                    )
                })
                .collect()
        })
        .collect();
    let b_closed: Vec<f64> = (0..=m)
        .map(|k| {
            interp(&spec.b1, horizon, times[k])
                - spec
                    .players
                    .iter()
                    .zip(&eta)
                    .map(|(p, e)| interp(&p.b2, horizon, times[k]) * e[k])
                    .sum::<f64>()
        })
        .collect();
    let c3 = spec.kernel.value(spec.hurst);
    let (o, v2) = compute_o_v2(&b_closed, horizon, spec.hurst, c3, spec.v2_init)?;

    // Running team offset: the weighted quadratic gain penalty vanishes at
    // the minimizer, leaving the 2cλo memory term.
    let c = rosenblatt_constants(spec.hurst).c;
    let g: Vec<f64> = (0..=m).map(|k| 2.0 * c * lambda[k] * o[k]).collect();
    let gamma = gamma_from_integrand(&g, dt);
    let kk2 = 2 * k_bar;
    let cost = lambda[0] * spec.x0_dev_sq
        + lambda_bar[0] * spec.x0_mean.powi(kk2 as i32) / kk2 as f64
        + gamma[0];

    Ok(MftgSolution {
        times,
        lambda: vec![lambda],
        lambda_bar: vec![lambda_bar],
        gamma: vec![gamma],
        eta,
        eta_bar,
        o,
        v2,
        cost: vec![cost],
        iterations: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::stationary_second_moment;
    use crate::numerics::gamma_fn;

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    #[test]
    fn lambda_stationary_terminal_gives_constant_solution() {
        // Terminal condition at the positive equilibrium of the Riccati flow
        // keeps the solution flat on the whole grid.
        let (b1, b2, q, r) = (-0.7f64, 1.3f64, 2.0f64, 0.5f64);
        let root = r * (b1 + (b1 * b1 + q * b2 * b2 / r).sqrt()) / (b2 * b2);
        let lam = solve_lambda(&[b1], &[b2], &[q], &[r], root, 2.0, 128).unwrap();
        for &v in &lam {
            assert!((v - root).abs() < 1e-12, "expected flat solution, got {v} vs {root}");
        }
    }

    #[test]
    fn lambda_zero_data_stays_zero() {
        let lam = solve_lambda(&[0.4], &[1.0], &[0.0], &[1.0], 0.0, 1.0, 64).unwrap();
        assert!(lam.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lambda_matches_fine_grid_reference() {
        let args = (&[-0.3f64][..], &[0.9f64][..], &[1.7f64][..], &[0.8f64][..], 2.5f64);
        let coarse = solve_lambda(args.0, args.1, args.2, args.3, args.4, 1.5, 256).unwrap();
        let fine = solve_lambda(args.0, args.1, args.2, args.3, args.4, 1.5, 256 * 16).unwrap();
        for k in 0..=256 {
            assert!(
                (coarse[k] - fine[16 * k]).abs() < 1e-8,
                "step-refinement mismatch at k={k}: {} vs {}",
                coarse[k],
                fine[16 * k]
            );
        }
    }

    #[test]
    fn lambda_blow_up_is_certified() {
        // A negative running weight drives the backward flow below zero.
        let err = solve_lambda(&[0.0], &[1.0], &[-5.0], &[1.0], 0.1, 2.0, 128).unwrap_err();
        assert!(matches!(err, Error::NoEquilibrium(_)), "got {err:?}");
    }

    #[test]
    fn lambda_bar_k1_reduces_to_riccati() {
        let (b1, b1b, b2, b2b, qb, rb) = (-0.4, -0.2, 0.8, 0.3, 1.1, 0.6);
        let via_bar = solve_lambda_bar(
            &[b1 + b1b],
            &[b2 + b2b],
            &[qb],
            &[rb],
            1,
            &[0.0],
            0.7,
            2.0,
            100,
        )
        .unwrap();
        let via_riccati =
            solve_lambda(&[b1 + b1b], &[b2 + b2b], &[qb], &[rb], 0.7, 2.0, 100).unwrap();
        for k in 0..=100 {
            assert!(
                (via_bar[k] - via_riccati[k]).abs() < 1e-13,
                "k_bar = 1 must coincide with the deviation Riccati at k={k}"
            );
        }
    }

    #[test]
    fn lambda_bar_zero_data_stays_zero() {
        let lam =
            solve_lambda_bar(&[-0.5], &[1.0], &[0.0], &[1.0], 2, &[0.0], 0.0, 1.0, 64).unwrap();
        assert!(lam.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lambda_bar_matches_fine_grid_reference() {
        let coarse =
            solve_lambda_bar(&[-0.6], &[1.2], &[0.9], &[0.7], 2, &[0.1], 1.3, 1.5, 512).unwrap();
        let fine = solve_lambda_bar(&[-0.6], &[1.2], &[0.9], &[0.7], 2, &[0.1], 1.3, 1.5, 512 * 16)
            .unwrap();
        for k in 0..=512 {
            assert!(
                (coarse[k] - fine[16 * k]).abs() < 1e-8,
                "step-refinement mismatch at k={k}"
            );
        }
    }

    #[test]
    fn lambda_bar_negative_base_is_a_sign_error() {
        let err = solve_lambda_bar(&[-0.5], &[-1.0], &[1.0], &[1.0], 2, &[0.0], 1.0, 1.0, 64)
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "got {err:?}");
    }

    #[test]
    fn o_v2_start_from_trivial_values() {
        let b = vec![-1.0; 65];
        let (o, v2) = compute_o_v2(&b, 1.0, h(0.75), 0.5, 0.25).unwrap();
        assert_eq!(o[0], 0.0);
        assert_eq!(v2[0], 0.25);
        assert!(o.iter().all(|&v| v >= 0.0));
        assert!(v2.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn o_reaches_its_stationary_limit() {
        // Constant stable loop: o(t) → c3·Γ(2H−1)/(−b)^{2H−1}.
        let hurst = h(0.75);
        let (c3, b) = (0.8, -1.0f64);
        let steps = 200;
        let grid = vec![b; steps + 1];
        let (o, _) = compute_o_v2(&grid, 25.0, hurst, c3, 0.0).unwrap();
        let limit = c3 * gamma_fn(2.0 * 0.75 - 1.0).unwrap() / (-b).powf(2.0 * 0.75 - 1.0);
        let rel = (o[steps] - limit).abs() / limit;
        assert!(rel < 1e-6, "o(T) = {} vs limit {limit} (rel {rel:.2e})", o[steps]);
    }

    #[test]
    fn calibrated_v2_matches_stationary_second_moment() {
        // With the calibrated kernel constant, the stationary variance of the
        // closed-loop state agrees with the ergodic-control formula.
        let hurst = h(0.75);
        let b = -1.0f64;
        let c3 = KernelConstant::Calibrated.value(hurst);
        let steps = 240;
        let grid = vec![b; steps + 1];
        let (_, v2) = compute_o_v2(&grid, 30.0, hurst, c3, 1.0).unwrap();
        let target = stationary_second_moment(b, hurst).unwrap();
        let rel = (v2[steps] - target).abs() / target;
        assert!(rel < 1e-6, "v2(T) = {} vs {} (rel {rel:.2e})", v2[steps], target);
    }

    fn single_player_spec(kernel: KernelConstant, v2_init: f64) -> MftgSpec {
        MftgSpec {
            horizon: 1.5,
            n_steps: 96,
            b1: vec![-0.5],
            b1_bar: vec![-0.1],
            players: vec![PlayerCoeffs::constant(1.0, 0.2, 1.0, 0.8, 0.5, 0.6, 0.4, 0.3, 1)],
            x0_dev_sq: 0.9,
            x0_mean: 1.2,
            v2_init,
            hurst: h(0.75),
            kernel,
        }
    }

    #[test]
    fn noise_off_equilibrium_has_zero_offset() {
        let spec = single_player_spec(KernelConstant::Custom(0.0), 0.0);
        let sol = mftg_equilibrium(&spec, 1e-12, 20).unwrap();
        assert!(sol.o.iter().all(|&v| v == 0.0));
        assert!(sol.v2.iter().all(|&v| v == 0.0));
        assert!(sol.gamma[0].iter().all(|&v| v == 0.0));
        let expected = sol.lambda[0][0] * spec.x0_dev_sq
            + sol.lambda_bar[0][0] * spec.x0_mean * spec.x0_mean / 2.0;
        assert!((sol.cost[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn noisy_equilibrium_offset_terminates_at_zero_and_decreases() {
        let spec = single_player_spec(KernelConstant::Calibrated, 0.5);
        let sol = mftg_equilibrium(&spec, 1e-12, 20).unwrap();
        let m = spec.n_steps;
        assert_eq!(sol.gamma[0][m], 0.0, "terminal offset must vanish exactly");
        // Single player: the running offset integrand is nonnegative, so γ is
        // non-increasing forward in time.
        for k in 0..m {
            assert!(sol.gamma[0][k] >= sol.gamma[0][k + 1] - 1e-15);
        }
        assert!(sol.gamma[0][0] > 0.0);
        // The quadratic penalty term vanishes identically at the returned η.
        for k in 0..=m {
            let slack = sol.eta[0][k] - sol.lambda[0][k] * 1.0 / 0.5;
            assert_eq!(slack, 0.0);
        }
    }

    #[test]
    fn eta_minimizes_the_running_offset() {
        // f_i is quadratic in the player's own gain with positive curvature
        // r_i v2: any perturbation increases it wherever v2 > 0.
        let spec = single_player_spec(KernelConstant::Calibrated, 0.5);
        let sol = mftg_equilibrium(&spec, 1e-12, 20).unwrap();
        let (r, v2, k) = (0.5, sol.v2[48], 48);
        let f = |z: f64| {
            let slack = z - sol.lambda[0][k] * 1.0 / r;
            r * slack * slack * v2
        };
        let at_eta = f(sol.eta[0][k]);
        for dz in [-0.5, -0.01, 0.01, 0.5] {
            assert!(f(sol.eta[0][k] + dz) > at_eta, "perturbation {dz} must not improve");
        }
    }

    #[test]
    fn symmetric_players_get_symmetric_profiles() {
        let p = PlayerCoeffs::constant(0.9, 0.3, 1.1, 0.7, 0.6, 0.8, 0.5, 0.4, 2);
        let spec = MftgSpec {
            horizon: 1.2,
            n_steps: 64,
            b1: vec![-0.6],
            b1_bar: vec![0.1],
            players: vec![p.clone(), p],
            x0_dev_sq: 1.0,
            x0_mean: 0.8,
            v2_init: 0.3,
            hurst: h(0.8),
            kernel: KernelConstant::Calibrated,
        };
        let sol = mftg_equilibrium(&spec, 1e-11, 200).unwrap();
        for k in 0..=spec.n_steps {
            assert!((sol.lambda[0][k] - sol.lambda[1][k]).abs() < 1e-14);
            assert!((sol.lambda_bar[0][k] - sol.lambda_bar[1][k]).abs() < 1e-10);
            assert!((sol.eta_bar[0][k] - sol.eta_bar[1][k]).abs() < 1e-10);
            assert!((sol.gamma[0][k] - sol.gamma[1][k]).abs() < 1e-12);
        }
        assert!((sol.cost[0] - sol.cost[1]).abs() < 1e-10);
    }

    #[test]
    fn jacobi_fixed_point_is_self_consistent() {
        // Asymmetric two-player game: re-solving each mean multiplier with
        // the converged cross profile must reproduce the returned η̄.
        let spec = MftgSpec {
            horizon: 1.0,
            n_steps: 80,
            b1: vec![-0.5],
            b1_bar: vec![-0.2],
            players: vec![
                PlayerCoeffs::constant(1.0, 0.1, 1.0, 0.9, 0.5, 0.7, 0.3, 0.2, 1),
                PlayerCoeffs::constant(0.7, 0.4, 1.4, 0.5, 0.9, 0.4, 0.6, 0.1, 1),
            ],
            x0_dev_sq: 0.5,
            x0_mean: 1.0,
            v2_init: 0.2,
            hurst: h(0.75),
            kernel: KernelConstant::Calibrated,
        };
        let sol = mftg_equilibrium(&spec, 1e-12, 500).unwrap();
        let m = spec.n_steps;
        for i in 0..2 {
            let p = &spec.players[i];
            let j = 1 - i;
            let b2tj: Vec<f64> = vec![
                interp(&spec.players[j].b2, spec.horizon, 0.0)
                    + interp(&spec.players[j].b2_bar, spec.horizon, 0.0);
                m + 1
            ];
            let cross: Vec<f64> = (0..=m).map(|k| b2tj[k] * sol.eta_bar[j][k]).collect();
            let lam_bar = solve_lambda_bar(
                &[spec.b1[0] + spec.b1_bar[0]],
                &[p.b2[0] + p.b2_bar[0]],
                &p.q_bar,
                &p.r_bar,
                p.k_bar,
                &cross,
                p.q_bar_terminal,
                spec.horizon,
                m,
            )
            .unwrap();
            for k in 0..=m {
                let eb = root_pow((p.b2[0] + p.b2_bar[0]) * lam_bar[k] / p.r_bar[0], p.k_bar);
                assert!(
                    (eb - sol.eta_bar[i][k]).abs() < 1e-10,
                    "player {i} mean gain not a fixed point at k={k}"
                );
            }
        }
    }

    #[test]
    fn tight_iteration_budget_reports_non_convergence() {
        let spec = MftgSpec {
            horizon: 1.0,
            n_steps: 32,
            b1: vec![-0.5],
            b1_bar: vec![-0.2],
            players: vec![
                PlayerCoeffs::constant(1.0, 0.1, 1.0, 0.9, 0.5, 0.7, 0.3, 0.2, 1),
                PlayerCoeffs::constant(0.7, 0.4, 1.4, 0.5, 0.9, 0.4, 0.6, 0.1, 1),
            ],
            x0_dev_sq: 0.5,
            x0_mean: 1.0,
            v2_init: 0.0,
            hurst: h(0.75),
            kernel: KernelConstant::Custom(0.0),
        };
        let err = mftg_equilibrium(&spec, 1e-12, 1).unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)), "got {err:?}");
    }

    #[test]
    fn cooperative_single_player_matches_equilibrium() {
        let spec = single_player_spec(KernelConstant::Calibrated, 0.4);
        let eq = mftg_equilibrium(&spec, 1e-12, 20).unwrap();
        let coop = cooperative_optimum(&spec, &[1.0]).unwrap();
        for k in 0..=spec.n_steps {
            assert!((eq.lambda[0][k] - coop.lambda[0][k]).abs() < 1e-12);
            assert!((eq.lambda_bar[0][k] - coop.lambda_bar[0][k]).abs() < 1e-12);
            assert!((eq.eta[0][k] - coop.eta[0][k]).abs() < 1e-12);
            assert!((eq.eta_bar[0][k] - coop.eta_bar[0][k]).abs() < 1e-12);
            assert!((eq.gamma[0][k] - coop.gamma[0][k]).abs() < 1e-12);
        }
        assert!((eq.cost[0] - coop.cost[0]).abs() < 1e-12);
    }

    #[test]
    fn cooperative_weight_scaling_leaves_strategies_invariant() {
        let p1 = PlayerCoeffs::constant(0.9, 0.3, 1.1, 0.7, 0.6, 0.8, 0.5, 0.4, 2);
        let p2 = PlayerCoeffs::constant(1.2, 0.1, 0.8, 1.0, 0.4, 0.5, 0.2, 0.7, 2);
        let spec = MftgSpec {
            horizon: 1.0,
            n_steps: 64,
            b1: vec![-0.7],
            b1_bar: vec![-0.1],
            players: vec![p1, p2],
            x0_dev_sq: 0.6,
            x0_mean: 0.9,
            v2_init: 0.2,
            hurst: h(0.75),
            kernel: KernelConstant::Calibrated,
        };
        let base = cooperative_optimum(&spec, &[1.0, 2.0]).unwrap();
        let scaled = cooperative_optimum(&spec, &[3.0, 6.0]).unwrap();
        for k in 0..=spec.n_steps {
            // Multipliers scale linearly with the weights...
            assert!((scaled.lambda[0][k] - 3.0 * base.lambda[0][k]).abs() < 1e-10);
            assert!((scaled.lambda_bar[0][k] - 3.0 * base.lambda_bar[0][k]).abs() < 1e-10);
            // ...while the feedback strategies are invariant.
            for i in 0..2 {
                assert!((scaled.eta[i][k] - base.eta[i][k]).abs() < 1e-11);
                assert!((scaled.eta_bar[i][k] - base.eta_bar[i][k]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn cooperative_zero_data_costs_nothing() {
        let spec = MftgSpec {
            horizon: 1.0,
            n_steps: 32,
            b1: vec![-0.5],
            b1_bar: vec![0.0],
            players: vec![PlayerCoeffs::constant(1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1)],
            x0_dev_sq: 1.0,
            x0_mean: 2.0,
            v2_init: 0.0,
            hurst: h(0.75),
            kernel: KernelConstant::Calibrated,
        };
        let coop = cooperative_optimum(&spec, &[1.0]).unwrap();
        assert!(coop.lambda[0].iter().all(|&v| v == 0.0));
        assert!(coop.lambda_bar[0].iter().all(|&v| v == 0.0));
        assert_eq!(coop.cost[0], 0.0);
    }

    #[test]
    fn kernel_constant_calibration_is_consistent() {
        // H(2H−1)Γ(2H−1) = Γ(2H+1)/2 makes the calibrated constant exactly
        // the one closing the stationary-variance identity.
        let hurst = h(0.75);
        let c3 = KernelConstant::Calibrated.value(hurst);
        let c = rosenblatt_constants(hurst).c;
        let lhs = c * c3 * gamma_fn(2.0 * 0.75 - 1.0).unwrap();
        let rhs = gamma_fn(2.0 * 0.75 + 1.0).unwrap() / 2.0;
        assert!((lhs - rhs).abs() < 1e-13);
        assert!(KernelConstant::RawCTildeH.value(hurst) > 0.0);
        assert_eq!(KernelConstant::Custom(0.25).value(hurst), 0.25);
    }
}
