//! Simulation of linear systems driven by the generated noises, the exact
//! Ornstein–Uhlenbeck convolution solution, and the change-of-variable
//! coefficient transformation for Rosenblatt-driven dynamics.

use crate::error::{Error, Result};
use crate::noise::{PathKind, SamplePath};
use crate::numerics::{rosenblatt_constants, HurstParam};

/// Coefficients of the controlled linear system
/// `dx = (b1 x + b2 u (+ b3 v)) dt + dN`, with optional mean-field terms.
#[derive(Debug, Clone, Copy)]
pub struct LinearDynamics {
    /// State coefficient.
    pub b1: f64,
    /// Control coefficient (nonzero when a controller is present).
    pub b2: f64,
    /// Adversary coefficient (zero-sum problems).
    pub b3: Option<f64>,
    /// Mean-field forcing / mean-state / mean-control coefficients.
    pub bbar0: Option<f64>,
    pub bbar1: Option<f64>,
    pub bbar2: Option<f64>,
    /// Initial state.
    pub x0: f64,
}

impl LinearDynamics {
    /// Plain controlled system without adversary or mean-field terms.
    pub fn new(b1: f64, b2: f64, x0: f64) -> Self {
        LinearDynamics {
            b1,
            b2,
            b3: None,
            bbar0: None,
            bbar1: None,
            bbar2: None,
            x0,
        }
    }
}

/// Drift / mixed-noise / Rosenblatt coefficient triple sampled on a grid
/// (the `(d1, d2, d3)` of the transformed dynamics).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTriple {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
}

/// A scalar field `f(t, x)` with the derivatives the transformation formula
/// needs (twice in time-state, three times in state).
pub struct ScalarField<'a> {
    pub f_t: &'a dyn Fn(f64, f64) -> f64,
    pub f_x: &'a dyn Fn(f64, f64) -> f64,
    pub f_xx: &'a dyn Fn(f64, f64) -> f64,
    pub f_xxx: &'a dyn Fn(f64, f64) -> f64,
}

/// Euler simulation of the closed-loop linear system
/// `x[k+1] = x[k] + (b1 + b2·gain)·x[k]·dt + (noise[k+1] − noise[k])`.
///
/// Additive noise enters exactly through path increments; only the drift is
/// discretized.
pub fn simulate_linear_sde(
    dyn_: &LinearDynamics,
    gain: f64,
    noise: &SamplePath,
    dt: f64,
) -> Result<SamplePath> {
    if ((noise.dt - dt) / dt).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "noise grid step {} does not match requested dt {}",
            noise.dt, dt
        )));
    }
    let b = dyn_.b1 + dyn_.b2 * gain;
    if !b.is_finite() {
        return Err(Error::Config(format!("closed-loop coefficient is not finite: {b}")));
    }
    let mut values = Vec::with_capacity(noise.values.len());
    let mut x = dyn_.x0;
    values.push(x);
    for k in 0..noise.steps() {
        x += b * x * dt + noise.increment(k);
        values.push(x);
    }
    Ok(SamplePath {
        t0: noise.t0,
        dt,
        values,
        kind: PathKind::Derived,
        seed: noise.seed,
    })
}

/// Exact (up to grid quadrature) mean-reverting solution
/// `x(t) = e^{−θt} x0 + (1 − e^{−θt}) m + σ ∫₀^t e^{−θ(t−s)} dR(s)`,
/// with the stochastic convolution evaluated by pathwise integration by
/// parts: `∫₀^t e^{−θ(t−s)} dR(s) = R(t) − θ ∫₀^t e^{−θ(t−s)} R(s) ds`
/// (the Riemann integral taken as a trapezoid on the grid, updated
/// recursively so large `θt` cannot overflow).
pub fn rosenblatt_ou_exact(
    theta: f64,
    m: f64,
    sigma: f64,
    x0: f64,
    noise: &SamplePath,
) -> SamplePath {
    let dt = noise.dt;
    let decay = (-theta * dt).exp();
    let mut values = Vec::with_capacity(noise.values.len());
    values.push(x0);
    // j ≈ ∫₀^{t_k} e^{−θ(t_k−s)} R(s) ds, advanced one trapezoid at a time.
    let mut j = 0.0;
    for k in 1..noise.values.len() {
        j = decay * j + 0.5 * dt * (decay * noise.values[k - 1] + noise.values[k]);
        let e = (-theta * noise.time(k)).exp();
        let convolution = noise.values[k] - theta * j;
        values.push(e * x0 + (1.0 - e) * m + sigma * convolution);
    }
    SamplePath {
        t0: noise.t0,
        dt,
        values,
        kind: PathKind::Derived,
        seed: noise.seed,
    }
}

/// Coefficient transformation for `y = f(t, x)` when `x` is driven by the
/// triple `(d1, d2, d3)` (drift, mixed-noise, Rosenblatt): returns the
/// transformed triple `(d̃1, d̃2, d̃3)` evaluated along the supplied state
/// path. The caller provides the fractional gradient evaluations
/// `grad_x(t) = (∇^{H/2}x)(t)` and `grad2_x(t) = (∇^{H/2,H/2}x)(t,t)` —
/// closed forms exist for every linear case used here.
pub fn ito_transform_coeffs(
    field: &ScalarField,
    d: &CoeffTriple,
    grad_x: &dyn Fn(f64) -> f64,
    grad2_x: &dyn Fn(f64) -> f64,
    hurst: HurstParam,
    state: &SamplePath,
) -> Result<CoeffTriple> {
    let n = state.values.len();
    if d.d1.len() != n || d.d2.len() != n || d.d3.len() != n {
        return Err(Error::Config(format!(
            "coefficient grids (lengths {}, {}, {}) do not match the state grid (length {n})",
            d.d1.len(),
            d.d2.len(),
            d.d3.len()
        )));
    }
    let c = rosenblatt_constants(hurst).c;
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let mut d3 = Vec::with_capacity(n);
    for k in 0..n {
        let (t, x) = (state.time(k), state.values[k]);
        let (ft, fx, fxx, fxxx) = (
            (field.f_t)(t, x),
            (field.f_x)(t, x),
            (field.f_xx)(t, x),
            (field.f_xxx)(t, x),
        );
        let (g1, g2) = (grad_x(t), grad2_x(t));
        d1.push(
            ft + fx * d.d1[k]
                + 2.0 * c * fxx * g1 * d.d2[k]
                + c * fxx * g2 * d.d3[k]
                + c * fxxx * g1 * g1 * d.d3[k],
        );
        d2.push(fx * d.d2[k] + fxx * g1 * d.d3[k]);
        d3.push(fx * d.d3[k]);
    }
    Ok(CoeffTriple { d1, d2, d3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::summary_stats;
    use crate::noise::{gen_rosenblatt, path_seed, RosenblattMethod};

    fn zero_noise(n: usize, dt: f64) -> SamplePath {
        SamplePath {
            t0: 0.0,
            dt,
            values: vec![0.0; n + 1],
            kind: PathKind::Derived,
            seed: 0,
        }
    }

    /// Restriction of a path to every `stride`-th grid point (increments add
    /// up, so this is the same underlying noise on a coarser grid).
    fn subsample(p: &SamplePath, stride: usize) -> SamplePath {
        SamplePath {
            t0: p.t0,
            dt: p.dt * stride as f64,
            values: p.values.iter().copied().step_by(stride).collect(),
            kind: p.kind,
            seed: p.seed,
        }
    }

    #[test]
    fn deterministic_part_is_an_euler_exponential() {
        let n = 4096;
        let dt = 1.0 / n as f64;
        let dyn_ = LinearDynamics::new(-1.0, 1.0, 1.0);
        let x = simulate_linear_sde(&dyn_, 0.0, &zero_noise(n, dt), dt).unwrap();
        let exact = (-1.0f64).exp();
        assert!((x.values[n] - exact).abs() < 2.0 * dt, "x(1) = {}", x.values[n]);
    }

    #[test]
    fn pure_integrator_reproduces_the_noise_path() {
        let h = HurstParam::new(0.75).unwrap();
        let r = gen_rosenblatt(h, 64, 1.0, 9, RosenblattMethod::default()).unwrap();
        let dyn_ = LinearDynamics::new(0.0, 1.0, 0.0);
        let x = simulate_linear_sde(&dyn_, 0.0, &r, r.dt).unwrap();
        for k in 0..=64 {
            assert!((x.values[k] - r.values[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_mismatch_is_a_configuration_error() {
        let dyn_ = LinearDynamics::new(-1.0, 1.0, 0.0);
        assert!(simulate_linear_sde(&dyn_, 0.0, &zero_noise(8, 0.125), 0.1).is_err());
    }

    #[test]
    fn euler_converges_to_the_exact_ou_solution_at_first_order() {
        let h = HurstParam::new(0.75).unwrap();
        let fine = gen_rosenblatt(
            h,
            1024,
            1.0,
            31,
            RosenblattMethod::Hermite { upsample: 64 },
        )
        .unwrap();
        let theta = 1.0;
        let exact = rosenblatt_ou_exact(theta, 0.0, 1.0, 0.5, &fine);
        let dev = |stride: usize| -> f64 {
            let coarse = subsample(&fine, stride);
            let euler = simulate_linear_sde(
                &LinearDynamics::new(-theta, 1.0, 0.5),
                0.0,
                &coarse,
                coarse.dt,
            )
            .unwrap();
            euler
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| (v - exact.values[k * stride]).abs())
                .fold(0.0, f64::max)
        };
        let (e4, e2) = (dev(4), dev(2));
        let ratio = e4 / e2;
        assert!(
            ratio > 1.5 && ratio < 2.6,
            "halving dt should halve the deviation: e(4dt)={e4}, e(2dt)={e2}"
        );
    }

    #[test]
    fn ou_exact_degenerate_cases() {
        let h = HurstParam::new(0.75).unwrap();
        let r = gen_rosenblatt(h, 32, 1.0, 17, RosenblattMethod::default()).unwrap();
        // σ = 0: deterministic relaxation.
        let x = rosenblatt_ou_exact(2.0, 3.0, 0.0, 1.0, &r);
        for k in 0..=32 {
            let t = r.time(k);
            let exact = (-2.0 * t).exp() * 1.0 + (1.0 - (-2.0 * t).exp()) * 3.0;
            assert!((x.values[k] - exact).abs() < 1e-12);
        }
        // θ = 0: pure integral of the noise.
        let y = rosenblatt_ou_exact(0.0, 3.0, 2.0, 1.0, &r);
        for k in 0..=32 {
            assert!((y.values[k] - (1.0 + 2.0 * r.values[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn ou_stationary_variance_and_zero_mean_stochastic_term() {
        // θ=1, σ=1, H=0.75: Var(x(∞)) → Γ(2.5)/2 ≈ 0.66467; and the
        // stochastic convolution itself has zero expectation.
        let h = HurstParam::new(0.75).unwrap();
        let t_max = 30.0;
        let n = 960;
        let n_paths = 400;
        let mut terminal = Vec::with_capacity(n_paths);
        let mut convolution = Vec::with_capacity(n_paths);
        for i in 0..n_paths {
            let r = gen_rosenblatt(
                h,
                n,
                t_max,
                path_seed(1234, i),
                RosenblattMethod::Hermite { upsample: 64 },
            )
            .unwrap();
            let x = rosenblatt_ou_exact(1.0, 0.0, 1.0, 0.0, &r);
            terminal.push(x.values[n]);
            convolution.push(x.values[n]); // x0 = m = 0 ⇒ x(T) is the integral
        }
        let stats = summary_stats(&terminal).unwrap();
        let expected = crate::control::stationary_second_moment(-1.0, h).unwrap();
        assert!(
            (stats.variance - expected).abs() < 0.15 * expected,
            "Var(x(T)) = {} vs {}",
            stats.variance,
            expected
        );
        let se = (stats.variance / n_paths as f64).sqrt();
        let conv_mean = convolution.iter().sum::<f64>() / n_paths as f64;
        assert!(conv_mean.abs() < 3.0 * se, "E[∫e^{{−θ(t−s)}}dR] = {conv_mean} ± {se}");
    }

    #[test]
    fn identity_map_leaves_coefficients_unchanged() {
        let h = HurstParam::new(0.75).unwrap();
        let state = zero_noise(4, 0.25);
        let d = CoeffTriple {
            d1: vec![1.0; 5],
            d2: vec![2.0; 5],
            d3: vec![3.0; 5],
        };
        let field = ScalarField {
            f_t: &|_, _| 0.0,
            f_x: &|_, _| 1.0,
            f_xx: &|_, _| 0.0,
            f_xxx: &|_, _| 0.0,
        };
        let out = ito_transform_coeffs(&field, &d, &|_| 0.7, &|_| 0.3, h, &state).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn square_map_matches_the_displayed_transformation() {
        // f(t,x) = x², d = (b·x, 0, 1):
        // d̃1 = 2bx² + 2c·grad2_x, d̃2 = 2·grad_x, d̃3 = 2x.
        let h = HurstParam::new(0.8).unwrap();
        let c = rosenblatt_constants(h).c;
        let b = -0.5;
        let state = SamplePath {
            t0: 0.0,
            dt: 0.5,
            values: vec![1.0, 0.4, -0.3],
            kind: PathKind::Derived,
            seed: 0,
        };
        let d = CoeffTriple {
            d1: state.values.iter().map(|x| b * x).collect(),
            d2: vec![0.0; 3],
            d3: vec![1.0; 3],
        };
        let field = ScalarField {
            f_t: &|_, _| 0.0,
            f_x: &|_, x| 2.0 * x,
            f_xx: &|_, _| 2.0,
            f_xxx: &|_, _| 0.0,
        };
        let grad_x = |t: f64| 0.1 + t;
        let grad2_x = |t: f64| 0.2 * t;
        let out = ito_transform_coeffs(&field, &d, &grad_x, &grad2_x, h, &state).unwrap();
        for k in 0..3 {
            let (t, x) = (state.time(k), state.values[k]);
            assert!((out.d1[k] - (2.0 * b * x * x + 2.0 * c * grad2_x(t))).abs() < 1e-14);
            assert!((out.d2[k] - 2.0 * grad_x(t)).abs() < 1e-14);
            assert!((out.d3[k] - 2.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_field_maps_to_zero() {
        let h = HurstParam::new(0.6).unwrap();
        let state = zero_noise(3, 0.1);
        let d = CoeffTriple {
            d1: vec![1.0; 4],
            d2: vec![1.0; 4],
            d3: vec![1.0; 4],
        };
        let field = ScalarField {
            f_t: &|_, _| 0.0,
            f_x: &|_, _| 0.0,
            f_xx: &|_, _| 0.0,
            f_xxx: &|_, _| 0.0,
        };
        let out = ito_transform_coeffs(&field, &d, &|_| 1.0, &|_| 1.0, h, &state).unwrap();
        assert!(out.d1.iter().chain(&out.d2).chain(&out.d3).all(|&v| v == 0.0));
    }
}
