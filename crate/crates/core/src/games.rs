//! Stationary linear-feedback games under long-range-dependent noise:
//! a zero-sum controller/adversary saddle point in closed form, and the
//! N-player non-zero-sum Nash equilibrium via damped best-response iteration.

use crate::control::{ergodic_cost, gain_radical};
use crate::error::{Error, Result};
use crate::numerics::{gamma_fn, HurstParam};

/// Parameters of the zero-sum game `dx = (b1 x + b2 u + b3 v)dt + dR^H`
/// with long-run average payoff `q x² + r u² − s v²` (u minimizes,
/// v maximizes).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ZeroSumSpec {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub h: HurstParam,
}

/// Quadratic `A·L² + B·L + C = 0` characterizing the adversary gain at the
/// saddle: substituting the exact gain link `K = −(b2 s/(b3 r)) L` into the
/// maximizer's first-order condition `s L (−b) = H b3 (q + rK² − sL²)` gives
/// `A = (1−H) s b3 (1 − b2²s/(b3²r))`, `B = s b1`, `C = H b3 q`.
fn saddle_quadratic(spec: &ZeroSumSpec) -> (f64, f64, f64) {
    let ZeroSumSpec { b1, b2, b3, q, r, s, h } = *spec;
    let h = h.h();
    let a = (1.0 - h) * s * b3 * (1.0 - b2 * b2 * s / (b3 * b3 * r));
    (a, s * b1, h * b3 * q)
}

impl ZeroSumSpec {
    pub fn new(
        b1: f64,
        b2: f64,
        b3: f64,
        q: f64,
        r: f64,
        s: f64,
        h: HurstParam,
    ) -> Result<Self> {
        if b2 == 0.0 || b3 == 0.0 {
            return Err(Error::Domain(format!(
                "control coefficients must be nonzero, got b2={b2}, b3={b3}"
            )));
        }
        if !(q > 0.0 && r > 0.0 && s > 0.0) {
            return Err(Error::Domain(format!(
                "weights must be positive, got q={q}, r={r}, s={s}"
            )));
        }
        let spec = ZeroSumSpec { b1, b2, b3, q, r, s, h };
        let (a, b, c) = saddle_quadratic(&spec);
        if a != 0.0 && b * b < 4.0 * a * c {
            return Err(Error::Domain(format!(
                "existence condition violated: the saddle quadratic has \
                 discriminant {} < 0",
                b * b - 4.0 * a * c
            )));
        }
        Ok(spec)
    }
}

/// Saddle point of the zero-sum game.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SaddleSolution {
    /// Minimizer's gain K.
    pub k: f64,
    /// Adversary's gain L.
    pub l: f64,
    /// Value of the game (long-run average payoff at the saddle).
    pub value: f64,
    /// Closed-loop coefficient `b1 + b2 K + b3 L` (negative).
    pub closed_loop: f64,
}

/// Long-run average payoff of the stationary pair `u = kx`, `v = lx`:
/// `Γ(2H+1)(q + r k² − s l²) / (2[−(b1 + b2 k + b3 l)]^{2H})`.
/// A destabilizing pair returns the infinite-cost signal.
pub fn zero_sum_value_at(k: f64, l: f64, spec: &ZeroSumSpec) -> Result<f64> {
    let b = spec.b1 + spec.b2 * k + spec.b3 * l;
    if b >= 0.0 {
        // The state second moment grows without bound, so the average payoff
        // diverges with the sign of its running coefficient q + rk² − sl²
        // (an adversary that destabilizes while paying a dominating penalty
        // drives the payoff to −∞, not +∞).
        let n = spec.q + spec.r * k * k - spec.s * l * l;
        return Ok(if n == 0.0 { 0.0 } else { n.signum() * f64::INFINITY });
    }
    let h = spec.h.h();
    let g = gamma_fn(2.0 * h + 1.0)?;
    Ok(g * (spec.q + spec.r * k * k - spec.s * l * l) / (2.0 * (-b).powf(2.0 * h)))
}

/// Closed-form saddle point: the adversary gain solves the saddle quadratic,
/// the minimizer's gain follows from `K = −(b2 s/(b3 r)) L`, and the root is
/// chosen to stabilize the closed loop (the root of smaller |L| if both do).
pub fn zero_sum_saddle(spec: &ZeroSumSpec) -> Result<SaddleSolution> {
    let (a, b, c) = saddle_quadratic(spec);
    let roots: Vec<f64> = if a == 0.0 {
        if b == 0.0 {
            return Err(Error::NoEquilibrium(
                "saddle quadratic is degenerate (A = B = 0)".into(),
            ));
        }
        vec![-c / b]
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Err(Error::Domain("existence condition violated".into()));
        }
        let sq = disc.sqrt();
        // Numerically stable pair q/a, c/q with q = −(b + sign(b)·sqrt)/2.
        let qq = -0.5 * (b + b.signum() * sq);
        if qq == 0.0 {
            vec![0.0]
        } else {
            vec![qq / a, c / qq]
        }
    };
    let kappa = -(spec.b2 * spec.s) / (spec.b3 * spec.r);
    let mut best: Option<(f64, f64)> = None;
    for &l in &roots {
        let k = kappa * l;
        let cl = spec.b1 + spec.b2 * k + spec.b3 * l;
        if cl < 0.0 && best.map_or(true, |(lb, _)| l.abs() < lb.abs()) {
            best = Some((l, cl));
        }
    }
    let Some((l, closed_loop)) = best else {
        return Err(Error::NoEquilibrium(format!(
            "no root of the saddle quadratic stabilizes the closed loop \
             (roots: {roots:?})"
        )));
    };
    let k = kappa * l;
    let value = zero_sum_value_at(k, l, spec)?;
    Ok(SaddleSolution { k, l, value, closed_loop })
}

/// Parameters of the N-player game: common drift `b1`, per-player control
/// coefficients `b2` and weights `q`, `r`, shared noise index `h`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NashSpec {
    pub b1: f64,
    pub b2: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub h: HurstParam,
}

impl NashSpec {
    pub fn new(b1: f64, b2: Vec<f64>, q: Vec<f64>, r: Vec<f64>, h: HurstParam) -> Result<Self> {
        let n = b2.len();
        if n == 0 || q.len() != n || r.len() != n {
            return Err(Error::Config(format!(
                "player sequences must share one nonzero length, got b2: {}, q: {}, r: {}",
                b2.len(),
                q.len(),
                r.len()
            )));
        }
        if b2.iter().any(|&v| v == 0.0) {
            return Err(Error::Domain("all control coefficients must be nonzero".into()));
        }
        if q.iter().chain(&r).any(|&v| !(v > 0.0)) {
            return Err(Error::Domain("all weights must be positive".into()));
        }
        Ok(NashSpec { b1, b2, q, r, h })
    }

    pub fn n_players(&self) -> usize {
        self.b2.len()
    }
}

/// Best-response gain of one player against the aggregate drift
/// `a = b1 + Σ_{j≠i} b2_j K_j` produced by the others:
/// `K_i* = −(a + sqrt(a² + 4H(1−H) b2i² qi/ri)) / (2 b2i (1−H))`.
pub fn best_response_gain(a: f64, b2i: f64, qi: f64, ri: f64, h: HurstParam) -> Result<f64> {
    if b2i == 0.0 {
        return Err(Error::Domain("control coefficient must be nonzero".into()));
    }
    if !(qi > 0.0 && ri > 0.0) {
        return Err(Error::Domain(format!("weights must be positive, got q={qi}, r={ri}")));
    }
    Ok(gain_radical(a, b2i, qi, ri, h.h()))
}

/// Nash profile computed by damped Jacobi best-response iteration from the
/// all-zero profile. Returns the gains once the best-response residual
/// `max_i |K_i − BR_i(K_{−i})|` drops below `tol`.
pub fn nash_fixed_point(
    spec: &NashSpec,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::Config(format!("damping must lie in (0, 1], got {damping}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let n = spec.n_players();
    let mut k = vec![0.0f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let drive: f64 = spec.b2.iter().zip(&k).map(|(b, g)| b * g).sum();
        let mut next = Vec::with_capacity(n);
        residual = 0.0;
        for i in 0..n {
            let a = spec.b1 + drive - spec.b2[i] * k[i];
            let br = best_response_gain(a, spec.b2[i], spec.q[i], spec.r[i], spec.h)?;
            residual = residual.max((k[i] - br).abs());
            next.push(k[i] + damping * (br - k[i]));
        }
        if residual < tol {
            let joint = spec.b1 + drive;
            if joint >= 0.0 {
                return Err(Error::NoEquilibrium(format!(
                    "fixed point reached but joint loop b1 + Σ b2ᵢKᵢ = {joint} is unstable"
                )));
            }
            return Ok(k);
        }
        k = next;
    }
    Err(Error::NonConvergence(format!(
        "best-response iteration did not reach tol {tol} in {max_iter} steps \
         (last residual {residual:.3e})"
    )))
}

/// Closed-form long-run average cost of player `i` when the profile `k` is
/// played (same structure as the single-agent cost, with the other players
/// folded into the drift).
pub fn nash_player_cost(i: usize, k: &[f64], spec: &NashSpec) -> Result<f64> {
    let a: f64 = spec.b1
        + k.iter()
            .zip(&spec.b2)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (g, b))| b * g)
            .sum::<f64>();
    ergodic_cost(k[i], a, spec.b2[i], spec.q[i], spec.r[i], spec.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{optimal_gain, stationary_second_moment};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    fn worked_spec() -> ZeroSumSpec {
        ZeroSumSpec::new(-1.0, 1.0, 1.0, 1.0, 1.0, 2.0, h(0.75)).unwrap()
    }

    #[test]
    fn saddle_solves_the_example_in_closed_form() {
        // b1=−1, b2=b3=q=r=1, s=2, H=3/4: the quadratic is
        // −0.5L² − 2L + 1.5 = 0, stabilizing root L = −2 + √7.
        let sol = zero_sum_saddle(&worked_spec()).unwrap();
        let l_exact = -2.0 + 5.5f64.sqrt();
        assert!((sol.l - l_exact).abs() < 1e-14, "L = {}", sol.l);
        assert!((sol.k + 2.0 * l_exact).abs() < 1e-14, "K = {}", sol.k);
        assert!(sol.closed_loop < 0.0);
    }

    #[test]
    fn gain_link_holds_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let Ok(spec) = ZeroSumSpec::new(
                rng.random_range(-3.0..-0.2),
                rng.random_range(0.3..2.0),
                rng.random_range(0.3..2.0),
                rng.random_range(0.2..2.0),
                rng.random_range(0.5..2.0),
                rng.random_range(0.2..1.0),
                h(rng.random_range(0.55..0.95)),
            ) else {
                continue;
            };
            if let Ok(sol) = zero_sum_saddle(&spec) {
                let link = sol.k + spec.b2 * spec.s / (spec.b3 * spec.r) * sol.l;
                assert!(link.abs() < 1e-12, "link residual {link}");
            }
        }
    }

    #[test]
    fn no_unilateral_grid_deviation_improves_either_side() {
        let spec = worked_spec();
        let sol = zero_sum_saddle(&spec).unwrap();
        let m = 400;
        for i in 0..=m {
            let kp = sol.k - 2.0 + 4.0 * i as f64 / m as f64;
            let lp = sol.l - 2.0 + 4.0 * i as f64 / m as f64;
            let v_k = zero_sum_value_at(kp, sol.l, &spec).unwrap();
            assert!(v_k >= sol.value - 1e-9, "K'={kp} lowers the value to {v_k}");
            let v_l = zero_sum_value_at(sol.k, lp, &spec).unwrap();
            assert!(v_l <= sol.value + 1e-9, "L'={lp} raises the value to {v_l}");
        }
    }

    #[test]
    fn saddle_first_order_conditions_vanish_on_random_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut checked = 0;
        while checked < 15 {
            let Ok(spec) = ZeroSumSpec::new(
                rng.random_range(-3.0..-0.2),
                rng.random_range(0.3..2.0),
                rng.random_range(0.3..2.0),
                rng.random_range(0.2..2.0),
                rng.random_range(0.5..2.0),
                rng.random_range(0.2..1.5),
                h(rng.random_range(0.55..0.95)),
            ) else {
                continue;
            };
            let Ok(sol) = zero_sum_saddle(&spec) else { continue };
            let eps = 1e-5;
            let dk = (zero_sum_value_at(sol.k + eps, sol.l, &spec).unwrap()
                - zero_sum_value_at(sol.k - eps, sol.l, &spec).unwrap())
                / (2.0 * eps);
            let dl = (zero_sum_value_at(sol.k, sol.l + eps, &spec).unwrap()
                - zero_sum_value_at(sol.k, sol.l - eps, &spec).unwrap())
                / (2.0 * eps);
            assert!(dk.abs() < 1e-6 * (1.0 + sol.value.abs()), "∂K residual {dk}");
            assert!(dl.abs() < 1e-6 * (1.0 + sol.value.abs()), "∂L residual {dl}");
            checked += 1;
        }
    }

    #[test]
    fn huge_adversary_penalty_degenerates_to_the_single_controller() {
        let spec = ZeroSumSpec::new(-1.0, 1.0, 1.0, 1.0, 1.0, 1e4, h(0.75)).unwrap();
        let sol = zero_sum_saddle(&spec).unwrap();
        assert!(sol.l.abs() < 1e-3, "L = {}", sol.l);
        let single = optimal_gain(-1.0, 1.0, 1.0, 1.0, h(0.75)).unwrap();
        assert!((sol.k - single.gain).abs() < 1e-3, "{} vs {}", sol.k, single.gain);
    }

    #[test]
    fn value_at_reduces_to_single_agent_formulas() {
        let spec = worked_spec();
        let sol = zero_sum_saddle(&spec).unwrap();
        assert_eq!(zero_sum_value_at(sol.k, sol.l, &spec).unwrap(), sol.value);
        // Adversary off: the single-controller ergodic cost.
        let v = zero_sum_value_at(-2.0, 0.0, &spec).unwrap();
        let c = ergodic_cost(-2.0, spec.b1, spec.b2, spec.q, spec.r, spec.h).unwrap();
        assert!((v - c).abs() < 1e-14);
        // Both off: q × stationary second moment of the uncontrolled state.
        let v0 = zero_sum_value_at(0.0, 0.0, &spec).unwrap();
        let m2 = stationary_second_moment(spec.b1, spec.h).unwrap();
        assert!((v0 - spec.q * m2).abs() < 1e-14);
        // Destabilizing pair signals infinite cost.
        assert!(zero_sum_value_at(2.0, 0.0, &spec).unwrap().is_infinite());
    }

    #[test]
    fn spec_construction_rejects_bad_parameters() {
        assert!(ZeroSumSpec::new(-1.0, 0.0, 1.0, 1.0, 1.0, 1.0, h(0.75)).is_err());
        assert!(ZeroSumSpec::new(-1.0, 1.0, 1.0, -1.0, 1.0, 1.0, h(0.75)).is_err());
        // Positive b1 large enough to break the discriminant with A > 0:
        // A = (1−H)s b2(1 − s) < 0 needs s > 1; pick s < 1 so A > 0 and a
        // tiny |b1| so B² < 4AC.
        let res = ZeroSumSpec::new(0.01, 1.0, 1.0, 5.0, 1.0, 0.5, h(0.75));
        assert!(res.is_err(), "discriminant should fail: {res:?}");
    }

    #[test]
    fn best_response_matches_the_grid_oracle_and_single_agent() {
        let k = best_response_gain(1.0, 1.0, 1.0, 1.0, h(0.75)).unwrap();
        assert!((k + 4.645_75).abs() < 1e-4, "K* = {k}");
        let single = optimal_gain(1.0, 1.0, 1.0, 1.0, h(0.75)).unwrap();
        assert!((k - single.gain).abs() < 1e-14);
        // Vanishing state weight with stable aggregate drift.
        let k0 = best_response_gain(-1.0, 1.0, 1e-14, 1.0, h(0.75)).unwrap();
        assert!(k0.abs() < 1e-6);
    }

    #[test]
    fn single_player_nash_is_the_single_agent_optimum() {
        let spec = NashSpec::new(1.0, vec![1.0], vec![1.0], vec![1.0], h(0.75)).unwrap();
        let k = nash_fixed_point(&spec, 0.5, 1e-13, 10_000).unwrap();
        let single = optimal_gain(1.0, 1.0, 1.0, 1.0, h(0.75)).unwrap();
        assert!((k[0] - single.gain).abs() < 1e-12);
    }

    #[test]
    fn symmetric_two_player_equilibrium_matches_a_bisection_oracle() {
        let spec =
            NashSpec::new(-1.0, vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0], h(0.75)).unwrap();
        let k = nash_fixed_point(&spec, 0.5, 1e-12, 10_000).unwrap();
        assert!((k[0] - k[1]).abs() < 1e-11, "asymmetric: {k:?}");
        // Residual of the best-response condition.
        for i in 0..2 {
            let a = spec.b1 + spec.b2[1 - i] * k[1 - i];
            let br = best_response_gain(a, 1.0, 1.0, 1.0, h(0.75)).unwrap();
            assert!((k[i] - br).abs() < 1e-10, "residual {}", (k[i] - br).abs());
        }
        // Independent oracle: bisection on g(x) = x − BR(b1 + b2 x).
        let g = |x: f64| x - best_response_gain(-1.0 + x, 1.0, 1.0, 1.0, h(0.75)).unwrap();
        let (mut lo, mut hi) = (-10.0, 0.0);
        assert!(g(lo) < 0.0 && g(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((k[0] - oracle).abs() < 1e-10, "{} vs {}", k[0], oracle);
    }

    #[test]
    fn no_unilateral_deviation_improves_a_player() {
        let spec = NashSpec::new(
            -0.5,
            vec![1.0, -0.8, 1.3],
            vec![1.0, 0.4, 2.0],
            vec![0.7, 1.0, 0.5],
            h(0.8),
        )
        .unwrap();
        let k = nash_fixed_point(&spec, 0.5, 1e-12, 20_000).unwrap();
        for i in 0..3 {
            let at_eq = nash_player_cost(i, &k, &spec).unwrap();
            for step in 0..400 {
                let mut kd = k.clone();
                kd[i] = k[i] - 3.0 + 6.0 * step as f64 / 400.0;
                let dev = nash_player_cost(i, &kd, &spec).unwrap();
                assert!(dev >= at_eq - 1e-9, "player {i} improves at {}", kd[i]);
            }
        }
    }

    #[test]
    fn permuting_players_permutes_the_gains() {
        let a = NashSpec::new(-1.0, vec![1.0, 0.5], vec![1.0, 2.0], vec![1.0, 0.3], h(0.75))
            .unwrap();
        let b = NashSpec::new(-1.0, vec![0.5, 1.0], vec![2.0, 1.0], vec![0.3, 1.0], h(0.75))
            .unwrap();
        let ka = nash_fixed_point(&a, 0.5, 1e-12, 20_000).unwrap();
        let kb = nash_fixed_point(&b, 0.5, 1e-12, 20_000).unwrap();
        assert!((ka[0] - kb[1]).abs() < 1e-11 && (ka[1] - kb[0]).abs() < 1e-11);
    }

    #[test]
    fn solver_reports_non_convergence_and_bad_config() {
        let spec = NashSpec::new(1.0, vec![1.0], vec![1.0], vec![1.0], h(0.75)).unwrap();
        assert!(matches!(
            nash_fixed_point(&spec, 0.5, 1e-12, 3),
            Err(Error::NonConvergence(_))
        ));
        assert!(nash_fixed_point(&spec, 0.0, 1e-12, 10).is_err());
        assert!(NashSpec::new(1.0, vec![1.0], vec![1.0, 2.0], vec![1.0], h(0.75)).is_err());
    }
}
