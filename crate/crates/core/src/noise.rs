//! Sample-path synthesis for Brownian motion, fractional Brownian motion, and
//! the Rosenblatt process, plus the statistical helpers used to validate them.
//!
//! Fractional Gaussian noise is generated exactly by circulant embedding
//! (Davies–Harte): the covariance circulant is diagonalized with one FFT and
//! complex Gaussians are colored in the spectral domain. The Rosenblatt
//! process is synthesized by the Hermite-rank-2 construction — partial sums of
//! `H₂(X) = X² − 1` over a fractional Gaussian sequence with index
//! `(1+H)/2` — whose non-central limit is exactly the Rosenblatt process with
//! index `H`. A direct discretization of the defining double Wiener–Itô
//! integral is kept as a slow cross-check oracle.

use crate::error::{Error, Result};
use crate::numerics::{beta_fn, gauss_legendre, HurstParam};
use once_cell::sync::Lazy;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use std::io::Write;

/// What process a [`SamplePath`] discretizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathKind {
    Brownian,
    Fbm(f64),
    Rosenblatt(HurstParam),
    /// Output of a transformation (state trajectory, prediction residual, …).
    Derived,
}

/// A process observed on the uniform grid `t0 + k·dt`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub kind: PathKind,
    pub seed: u64,
}

impl SamplePath {
    /// Number of grid steps (`values.len() - 1`).
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Time of grid point `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Increment over step `k` (from grid point `k` to `k+1`).
    pub fn increment(&self, k: usize) -> f64 {
        self.values[k + 1] - self.values[k]
    }

    /// Index of grid time `t`, requiring `t` to sit on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.t0) / self.dt;
        let k = x.round();
        if (x - k).abs() > 1e-9 || k < 0.0 || k as usize >= self.values.len() {
            return Err(Error::Config(format!(
                "time {t} is not on the grid [{}, {}] with step {}",
                self.t0,
                self.time(self.steps()),
                self.dt
            )));
        }
        Ok(k as usize)
    }

    /// Path value at grid time `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.index_of(t)?])
    }
}

/// A collection of paths sharing grid and kind; path `i` is reproducible from
/// `(base_seed, i)` alone.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub paths: Vec<SamplePath>,
    pub base_seed: u64,
}

impl PathEnsemble {
    /// Cross-sectional samples of the process at grid time `t`.
    pub fn marginal_at(&self, t: f64) -> Result<Vec<f64>> {
        self.paths.iter().map(|p| p.value_at(t)).collect()
    }
}

/// Derives the per-path seed from an ensemble base seed (splitmix64 step, so
/// that nearby indices give well-separated ChaCha streams).
pub fn path_seed(base_seed: u64, index: usize) -> u64 {
    let mut z = base_seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Fractional Gaussian noise (circulant embedding)
// ---------------------------------------------------------------------------

/// Autocovariance of unit-spacing fractional Gaussian noise at lag `k`.
fn fgn_autocov(h: f64, k: u64) -> f64 {
    let k = k as f64;
    0.5 * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h))
}

/// Exact sampling of `n` unit-variance fGn increments by Davies–Harte
/// circulant embedding (`n` must be a power of two here; callers that need an
/// arbitrary length go through [`fgn_any_len`]).
fn fgn_unit(h: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    debug_assert!(n.is_power_of_two());
    let m = 2 * n;
    // First row of the circulant: r(0), …, r(n), r(n−1), …, r(1).
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(m);
    for k in 0..=n {
        row.push(Complex::new(fgn_autocov(h, k as u64), 0.0));
    }
    for k in (1..n).rev() {
        row.push(Complex::new(fgn_autocov(h, k as u64), 0.0));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    // Eigenvalues of the circulant; exact fGn embeddings are nonnegative
    // definite, but guard against rounding and pathological inputs.
    let mut eigen = Vec::with_capacity(m);
    for v in &row {
        let lam = v.re;
        if lam < -1e-8 * n as f64 {
            return Err(Error::Config(format!(
                "circulant embedding not nonnegative definite for h={h}, n={n}"
            )));
        }
        eigen.push(lam.max(0.0));
    }
    // Color complex Gaussians by sqrt(eigenvalues).
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex::new(0.0, 0.0); m];
    let g0: f64 = rng.sample(StandardNormal);
    let gn: f64 = rng.sample(StandardNormal);
    spec[0] = Complex::new((eigen[0] / m as f64).sqrt() * g0, 0.0);
    spec[n] = Complex::new((eigen[n] / m as f64).sqrt() * gn, 0.0);
    for k in 1..n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let s = (eigen[k] / (2.0 * m as f64)).sqrt();
        spec[k] = Complex::new(s * re, s * im);
        spec[m - k] = spec[k].conj();
    }
    fft.process(&mut spec);
    Ok(spec[..n].iter().map(|z| z.re).collect())
}

/// fGn of arbitrary length: embeds into the next power of two and truncates
/// (the marginal law of any prefix is unchanged).
fn fgn_any_len(h: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let n_pow = n.next_power_of_two().max(2);
    let mut x = fgn_unit(h, n_pow, seed)?;
    x.truncate(n);
    Ok(x)
}

/// Fractional Brownian motion on `0..=n·dt`: stationary Gaussian increments
/// with autocovariance `(dt^{2h}/2)(|k+1|^{2h} − 2|k|^{2h} + |k−1|^{2h})`,
/// cumulated to a path starting at 0.
pub fn gen_fgn(h: f64, n: usize, dt: f64, seed: u64) -> Result<SamplePath> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("fGn index must lie in (0,1), got {h}")));
    }
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::Config(format!(
            "circulant embedding requires a power-of-two step count, got {n}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let scale = dt.powf(h);
    let incr = fgn_unit(h, n, seed)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for x in incr {
        acc += scale * x;
        values.push(acc);
    }
    Ok(SamplePath {
        t0: 0.0,
        dt,
        values,
        kind: PathKind::Fbm(h),
        seed,
    })
}

/// Standard Brownian motion (i.i.d. Gaussian increments of variance `dt`).
pub fn gen_brownian(n: usize, dt: f64, seed: u64) -> Result<SamplePath> {
    if !(dt > 0.0) || n < 1 {
        return Err(Error::Config(format!("invalid Brownian grid: n={n}, dt={dt}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = dt.sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        acc += s * z;
        values.push(acc);
    }
    Ok(SamplePath {
        t0: 0.0,
        dt,
        values,
        kind: PathKind::Brownian,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Rosenblatt synthesis
// ---------------------------------------------------------------------------

/// How to synthesize a Rosenblatt path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RosenblattMethod {
    /// Hermite-rank-2 partial sums over an upsampled fGn base sequence; the
    /// default and fast method. `upsample` is the number of base Gaussians
    /// aggregated per output step (≥ 64).
    Hermite { upsample: usize },
    /// Direct discretization of the defining double Wiener–Itô integral;
    /// O(grid²) per time point, restricted to short grids, used as an oracle.
    DoubleIntegral,
}

impl Default for RosenblattMethod {
    fn default() -> Self {
        RosenblattMethod::Hermite { upsample: 256 }
    }
}

/// Exact variance of the Hermite-rank-2 partial sum `Σ_{i=1}^{k} (X_i²−1)`
/// over unit-variance fGn with index `h_base`: for jointly Gaussian X,
/// `Cov(X_i²−1, X_j²−1) = 2ρ(i−j)²`, so the normalization is available in
/// closed form rather than estimated empirically.
fn hermite_sum_variance(h_base: f64, k: usize) -> f64 {
    let mut acc = k as f64; // lag-0 terms: k · ρ(0)² with ρ(0)=1
    for l in 1..k {
        let rho = fgn_autocov(h_base, l as u64);
        acc += (k - l) as f64 * 2.0 * rho * rho;
    }
    2.0 * acc
}

/// Precomputed normalization for Hermite synthesis on a fixed grid.
struct HermiteSampler {
    h_base: f64,
    n: usize,
    t_max: f64,
    upsample: usize,
    scale: f64,
    hurst: HurstParam,
}

impl HermiteSampler {
    fn new(hurst: HurstParam, n: usize, t_max: f64, upsample: usize) -> Result<Self> {
        if upsample < 64 {
            return Err(Error::Config(format!(
                "hermite upsampling must aggregate at least 64 base Gaussians per step, got {upsample}"
            )));
        }
        if n < 2 || !(t_max > 0.0) {
            return Err(Error::Config(format!("invalid grid: n={n}, t_max={t_max}")));
        }
        let h = hurst.h();
        let h_base = (1.0 + h) / 2.0;
        let dt = t_max / n as f64;
        // Normalize the law exactly at t=1 when that time sits on the grid
        // (Var(R(1)) = 1); otherwise at the horizon via self-similarity.
        let j1 = (1.0 / dt).round();
        let (k_ref, target_var) = if (j1 * dt - 1.0).abs() < 1e-9 && j1 >= 1.0 && (j1 as usize) <= n
        {
            (j1 as usize * upsample, 1.0)
        } else {
            (n * upsample, t_max.powf(2.0 * h))
        };
        let scale = (target_var / hermite_sum_variance(h_base, k_ref)).sqrt();
        Ok(HermiteSampler {
            h_base,
            n,
            t_max,
            upsample,
            scale,
            hurst,
        })
    }

    fn path(&self, seed: u64) -> Result<SamplePath> {
        let total = self.n * self.upsample;
        let base = fgn_any_len(self.h_base, total, seed)?;
        let mut values = Vec::with_capacity(self.n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for (i, x) in base.iter().enumerate() {
            acc += x * x - 1.0;
            if (i + 1) % self.upsample == 0 {
                values.push(acc * self.scale);
            }
        }
        Ok(SamplePath {
            t0: 0.0,
            dt: self.t_max / self.n as f64,
            values,
            kind: PathKind::Rosenblatt(self.hurst),
            seed,
        })
    }
}

// --- double Wiener–Itô integral oracle -------------------------------------

static GAUSS8: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(8));

/// Discretization of the double Wiener–Itô integral
/// `R(t) = c ∬' f_t(y₁, y₂) dW(y₁) dW(y₂)` with
/// `f_t(y₁,y₂) = ∫₀^t (u−y₁)₊^{H/2−1} (u−y₂)₊^{H/2−1} du` and `c` the unit
/// variance normalizer `sqrt(H(2H−1)/2)/B(H/2, 1−H)` (the unique constant
/// with `E R(1)² = 1`; verified against quadrature of `‖f_1‖²`).
///
/// Instead of point evaluation, the kernel is L²-projected onto a product
/// cell grid: with `φ_i(u) = ∫_{cell_i} (u−y)₊^{H/2−1} dy` (closed form),
/// the projected kernel matrix is the Gram integral
/// `A_{ij}(t) = c ∫₀^t φ_i(u)φ_j(u) du / sqrt(Δ_iΔ_j)`, and the sample is
/// `R(t) = zᵀA z − tr A` — diagonal cells contribute Hermite terms
/// `z_i² − 1` exactly as the continuum integral requires. The Brownian axis
/// uses uniform cells on `[−T, T]` plus geometric cells down to `−5·10⁸ T`
/// (the kernel tail decays only like `L^{−(1−H)}`, so a shallow truncation
/// loses a large fraction of the variance; log-spaced cells make the deep
/// truncation cheap).
pub struct DoubleIntegralSampler {
    hurst: HurstParam,
    n: usize,
    t_max: f64,
    /// Flattened symmetric projected-kernel matrices, one per grid time.
    mats: Vec<Vec<f64>>,
    traces: Vec<f64>,
    dim: usize,
}

impl DoubleIntegralSampler {
    pub fn new(hurst: HurstParam, n: usize, t_max: f64) -> Result<Self> {
        if n > 64 {
            return Err(Error::ResourceLimit(format!(
                "double-integral oracle is O(grid²) per time point; limited to 64 steps, got {n}"
            )));
        }
        if n < 1 || !(t_max > 0.0) {
            return Err(Error::Config(format!("invalid grid: n={n}, t_max={t_max}")));
        }
        let h = hurst.h();
        let t = t_max;
        // Unit-variance normalizer: 2c²·‖f_1‖² = 1 with
        // ‖f_1‖² = B(H/2, 1−H)²/(H(2H−1)).
        let c = (0.5 * h * (2.0 * h - 1.0)).sqrt() / beta_fn(h / 2.0, 1.0 - h)?;

        // Cell edges: geometric on [−5e8·T, −T], uniform on [−T, T].
        let (far, near) = (160usize, 192usize);
        let depth: f64 = 5e8;
        let mut edges = Vec::with_capacity(far + near + 1);
        let rho = depth.powf(1.0 / far as f64);
        for j in 0..=far {
            edges.push(-t * rho.powi((far - j) as i32));
        }
        for j in 1..=near {
            edges.push(-t + 2.0 * t * j as f64 / near as f64);
        }
        let dim = edges.len() - 1;
        let inv_sqw: Vec<f64> =
            (0..dim).map(|i| 1.0 / (edges[i + 1] - edges[i]).sqrt()).collect();

        // u-panel boundaries: output grid times merged with the cell edges in
        // (0, T), so every φ_i kink sits on a panel boundary.
        let dt = t / n as f64;
        let mut bounds: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        for &e in &edges {
            if e > 1e-12 * t && e < t * (1.0 - 1e-12) {
                bounds.push(e);
            }
        }
        bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * t);

        let p = h / 2.0;
        let pow_p = |x: f64| if x > 0.0 { x.powf(p) } else { 0.0 };
        // Accumulate A(t) = c ∫ φφᵀ du panel by panel, snapshotting at each
        // output time. Each panel is split into sub-panels graded toward both
        // ends, where freshly activated cells have infinite-slope kinks.
        let mut accum = vec![0.0f64; dim * dim];
        let mut phi = vec![0.0f64; dim];
        let mut mats: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut traces = Vec::with_capacity(n);
        let mut next_out = 1usize;
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            // Graded sub-panels: [a, m] split geometrically toward a,
            // mirrored toward b on [m, b].
            let m = 0.5 * (a + b);
            let hh = m - a;
            let mut subs = Vec::with_capacity(8);
            let grades = [0.0, 0.125, 0.25, 0.5, 1.0];
            for g in grades.windows(2) {
                subs.push((a + g[0] * hh, a + g[1] * hh));
            }
            for g in grades.windows(2) {
                subs.push((b - g[1] * hh, b - g[0] * hh));
            }
            for (lo, hi) in subs {
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (lo + hi);
                for (&x, &gw) in GAUSS8.0.iter().zip(&GAUSS8.1) {
                    let u = mid + half * x;
                    let wq = gw * half;
                    let mut active = 0;
                    for i in 0..dim {
                        if edges[i] >= u {
                            break;
                        }
                        phi[i] = (pow_p(u - edges[i]) - pow_p(u - edges[i + 1])) / p
                            * inv_sqw[i];
                        active = i + 1;
                    }
                    for i in 0..active {
                        let s = wq * phi[i];
                        let row = &mut accum[i * dim..i * dim + i + 1];
                        for (j, slot) in row.iter_mut().enumerate() {
                            *slot += s * phi[j];
                        }
                    }
                }
            }
            if (b - next_out as f64 * dt).abs() < 1e-9 * t {
                let mut mat = vec![0.0f64; dim * dim];
                let mut tr = 0.0;
                for i in 0..dim {
                    for j in 0..=i {
                        let v = c * accum[i * dim + j];
                        mat[i * dim + j] = v;
                        mat[j * dim + i] = v;
                    }
                    tr += mat[i * dim + i];
                }
                mats.push(mat);
                traces.push(tr);
                next_out += 1;
            }
        }
        if mats.len() != n {
            return Err(Error::Internal(format!(
                "panel merge produced {} of {n} output times",
                mats.len()
            )));
        }
        Ok(DoubleIntegralSampler {
            hurst,
            n,
            t_max,
            mats,
            traces,
            dim,
        })
    }

    /// One sample path: the centered quadratic form `zᵀAz − tr A` in a fresh
    /// Gaussian vector.
    pub fn path(&self, seed: u64) -> SamplePath {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut values = Vec::with_capacity(self.n + 1);
        values.push(0.0);
        for (mat, tr) in self.mats.iter().zip(&self.traces) {
            let mut acc = -tr;
            for i in 0..self.dim {
                let row = &mat[i * self.dim..(i + 1) * self.dim];
                let dot: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                acc += z[i] * dot;
            }
            values.push(acc);
        }
        SamplePath {
            t0: 0.0,
            dt: self.t_max / self.n as f64,
            values,
            kind: PathKind::Rosenblatt(self.hurst),
            seed,
        }
    }

    /// Exact variance of the discretized process at grid index `k ≥ 1`:
    /// for the centered quadratic form, `Var = 2 tr(A²)`. Useful to
    /// quantify the projection/truncation bias of the oracle.
    pub fn variance_at(&self, k: usize) -> f64 {
        let m = &self.mats[k - 1];
        2.0 * m.iter().map(|a| a * a).sum::<f64>()
    }
}

/// Reusable Hermite-method Rosenblatt sampler: precomputes the exact
/// rank-2 normalization once so that large ensembles or long horizons do not
/// pay the O(n·upsample) setup per path.
pub struct RosenblattSampler {
    inner: HermiteSampler,
}

impl RosenblattSampler {
    pub fn new(hurst: HurstParam, n: usize, t_max: f64, upsample: usize) -> Result<Self> {
        Ok(RosenblattSampler {
            inner: HermiteSampler::new(hurst, n, t_max, upsample)?,
        })
    }

    pub fn path(&self, seed: u64) -> Result<SamplePath> {
        self.inner.path(seed)
    }
}

/// Fractional Brownian path on an arbitrary (not necessarily power-of-two)
/// grid; used internally where simulation horizons fix the step count.
pub(crate) fn fgn_path_any(h: f64, n: usize, dt: f64, seed: u64) -> Result<SamplePath> {
    let incr = fgn_any_len(h, n, seed)?;
    let scale = dt.powf(h);
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for x in incr {
        acc += scale * x;
        values.push(acc);
    }
    Ok(SamplePath {
        t0: 0.0,
        dt,
        values,
        kind: PathKind::Fbm(h),
        seed,
    })
}

/// Generates one Rosenblatt path on `0..=t_max` with `n` steps.
pub fn gen_rosenblatt(
    hurst: HurstParam,
    n: usize,
    t_max: f64,
    seed: u64,
    method: RosenblattMethod,
) -> Result<SamplePath> {
    match method {
        RosenblattMethod::Hermite { upsample } => {
            HermiteSampler::new(hurst, n, t_max, upsample)?.path(seed)
        }
        RosenblattMethod::DoubleIntegral => {
            Ok(DoubleIntegralSampler::new(hurst, n, t_max)?.path(seed))
        }
    }
}

/// Generates an ensemble of Rosenblatt paths; path `i` uses
/// `path_seed(base_seed, i)` and the normalization / kernel matrices are
/// computed once and shared across parallel workers.
pub fn gen_rosenblatt_ensemble(
    hurst: HurstParam,
    n: usize,
    t_max: f64,
    n_paths: usize,
    base_seed: u64,
    method: RosenblattMethod,
) -> Result<PathEnsemble> {
    let paths: Vec<SamplePath> = match method {
        RosenblattMethod::Hermite { upsample } => {
            let sampler = HermiteSampler::new(hurst, n, t_max, upsample)?;
            (0..n_paths)
                .into_par_iter()
                .map(|i| sampler.path(path_seed(base_seed, i)))
                .collect::<Result<_>>()?
        }
        RosenblattMethod::DoubleIntegral => {
            let sampler = DoubleIntegralSampler::new(hurst, n, t_max)?;
            (0..n_paths)
                .into_par_iter()
                .map(|i| sampler.path(path_seed(base_seed, i)))
                .collect()
        }
    };
    Ok(PathEnsemble {
        paths,
        base_seed,
    })
}

/// Closed-form Rosenblatt covariance
/// `(1/2)(t^{2H} + s^{2H} − |t−s|^{2H})` (shared with fBm).
pub fn covariance_rosenblatt(s: f64, t: f64, hurst: HurstParam) -> Result<f64> {
    if s < 0.0 || t < 0.0 {
        return Err(Error::Domain(format!("times must be nonnegative, got ({s}, {t})")));
    }
    let h2 = 2.0 * hurst.h();
    Ok(0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2)))
}

/// Wasserstein-1 distance between the empirical laws of `R(c·t)` and
/// `c^H · R(t)` across the ensemble — a direct check of self-similarity.
pub fn self_similarity_stat(ensemble: &PathEnsemble, c: f64, t: f64) -> Result<f64> {
    let hurst = match ensemble.paths.first().map(|p| p.kind) {
        Some(PathKind::Rosenblatt(h)) => h,
        _ => {
            return Err(Error::Config(
                "self-similarity check requires a Rosenblatt ensemble".into(),
            ))
        }
    };
    let scaled_time = ensemble.marginal_at(c * t)?;
    let scaled_value: Vec<f64> = ensemble
        .marginal_at(t)?
        .into_iter()
        .map(|x| c.powf(hurst.h()) * x)
        .collect();
    crate::harness::wasserstein1(&scaled_time, &scaled_value)
}

/// Writes an ensemble in the CSV exchange format:
/// header `t,path_0,…,path_{m-1}`, one row per grid point, shortest
/// round-trip float formatting.
pub fn write_paths_csv<W: Write>(out: &mut W, ensemble: &PathEnsemble) -> std::io::Result<()> {
    write!(out, "t")?;
    for i in 0..ensemble.paths.len() {
        write!(out, ",path_{i}")?;
    }
    writeln!(out)?;
    let n = ensemble.paths[0].values.len();
    for k in 0..n {
        write!(out, "{}", ensemble.paths[0].time(k))?;
        for p in &ensemble.paths {
            write!(out, ",{}", p.values[k])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::summary_stats;

    #[test]
    fn fgn_starts_at_zero_and_is_deterministic() {
        let p = gen_fgn(0.7, 256, 0.01, 42).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.values.len(), 257);
        let q = gen_fgn(0.7, 256, 0.01, 42).unwrap();
        assert_eq!(p.values, q.values);
        let r = gen_fgn(0.7, 256, 0.01, 43).unwrap();
        assert_ne!(p.values, r.values);
    }

    #[test]
    fn fgn_rejects_bad_grids() {
        assert!(gen_fgn(0.7, 100, 0.01, 1).is_err()); // not a power of two
        assert!(gen_fgn(1.2, 64, 0.01, 1).is_err());
        assert!(gen_fgn(0.7, 64, -0.5, 1).is_err());
    }

    #[test]
    fn brownian_case_has_uncorrelated_increments() {
        // h = 1/2: lag-1 sample autocorrelation ≈ 0 within 3/√n.
        let p = gen_fgn(0.5, 1 << 17, 1.0, 7).unwrap();
        let n = p.steps();
        let inc: Vec<f64> = (0..n).map(|k| p.increment(k)).collect();
        let mean = inc.iter().sum::<f64>() / n as f64;
        let var = inc.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let lag1 = (0..n - 1)
            .map(|k| (inc[k] - mean) * (inc[k + 1] - mean))
            .sum::<f64>()
            / ((n - 1) as f64 * var);
        assert!(lag1.abs() < 3.0 / (n as f64).sqrt(), "lag-1 autocorr {lag1}");
        assert!((var - 1.0).abs() < 0.02, "unit variance, got {var}");
    }

    #[test]
    fn fgn_lag_one_autocovariance_matches_the_closed_form() {
        // h = 0.875, dt = 1: r(1) = (2^{1.75} − 2)/2. Long-range dependence
        // makes single-path error bars unreliable, so average the per-path
        // estimator over independent paths and use the cross-path s.e.
        let h = 0.875;
        let expected = (2f64.powf(1.75) - 2.0) / 2.0;
        let paths = 32;
        let n = 1 << 15;
        let per_path: Vec<f64> = (0..paths)
            .map(|i| {
                let p = gen_fgn(h, n, 1.0, path_seed(99, i)).unwrap();
                let inc: Vec<f64> = (0..n).map(|k| p.increment(k)).collect();
                (0..n - 1).map(|k| inc[k] * inc[k + 1]).sum::<f64>() / (n - 1) as f64
            })
            .collect();
        let stats = summary_stats(&per_path).unwrap();
        let se = (stats.variance / paths as f64).sqrt();
        assert!(
            (stats.mean - expected).abs() < 3.0 * se.max(1e-3),
            "lag-1 autocov {} vs {} (se {})",
            stats.mean,
            expected,
            se
        );
    }

    #[test]
    fn fbm_terminal_variance_scales_as_t_to_the_2h() {
        let h = 0.75;
        let t = 2.0;
        let n = 64;
        let terminal: Vec<f64> = (0..4000)
            .map(|i| {
                gen_fgn(h, n, t / n as f64, path_seed(5, i)).unwrap().values[n]
            })
            .collect();
        let stats = summary_stats(&terminal).unwrap();
        let expected = t.powf(2.0 * h);
        assert!(
            (stats.variance - expected).abs() < 0.12 * expected,
            "Var(B^h({t})) = {} vs {}",
            stats.variance,
            expected
        );
    }

    #[test]
    fn rosenblatt_path_basics() {
        let h = HurstParam::new(0.75).unwrap();
        let p = gen_rosenblatt(h, 16, 1.0, 3, RosenblattMethod::default()).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.values.len(), 17);
        let q = gen_rosenblatt(h, 16, 1.0, 3, RosenblattMethod::default()).unwrap();
        assert_eq!(p.values, q.values);
        // Guards.
        assert!(gen_rosenblatt(h, 16, 1.0, 3, RosenblattMethod::Hermite { upsample: 32 }).is_err());
        assert!(gen_rosenblatt(h, 128, 1.0, 3, RosenblattMethod::DoubleIntegral).is_err());
    }

    #[test]
    fn hermite_ensemble_is_normalized_and_positively_skewed() {
        let h = HurstParam::new(0.75).unwrap();
        let ens = gen_rosenblatt_ensemble(
            h,
            16,
            1.0,
            3000,
            11,
            RosenblattMethod::Hermite { upsample: 128 },
        )
        .unwrap();
        let at_one = ens.marginal_at(1.0).unwrap();
        let stats = summary_stats(&at_one).unwrap();
        assert!((stats.variance - 1.0).abs() < 0.1, "Var(R(1)) = {}", stats.variance);
        assert!(stats.mean.abs() < 0.06, "mean {}", stats.mean);
        assert!(stats.skewness.unwrap() > 0.3, "skewness {:?}", stats.skewness);
    }

    #[test]
    fn double_integral_oracle_variance_is_close_to_one() {
        let h = HurstParam::new(0.75).unwrap();
        let sampler = DoubleIntegralSampler::new(h, 4, 1.0).unwrap();
        let v = sampler.variance_at(4);
        assert!((v - 1.0).abs() < 0.05, "discretized Var(R(1)) = {v}");
    }

    #[test]
    fn covariance_formula_spot_values() {
        let h = HurstParam::new(0.75).unwrap();
        assert!((covariance_rosenblatt(1.0, 1.0, h).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(covariance_rosenblatt(0.0, 5.0, h).unwrap(), 0.0);
        let c = covariance_rosenblatt(1.0, 2.0, h).unwrap();
        assert!((c - 2f64.powf(0.5)).abs() < 1e-12, "Cov(R(1),R(2)) = {c}");
        assert!(covariance_rosenblatt(-1.0, 1.0, h).is_err());
    }

    #[test]
    fn self_similarity_stat_is_zero_at_unit_scaling() {
        let h = HurstParam::new(0.75).unwrap();
        let ens = gen_rosenblatt_ensemble(
            h,
            8,
            1.0,
            200,
            21,
            RosenblattMethod::Hermite { upsample: 64 },
        )
        .unwrap();
        assert_eq!(self_similarity_stat(&ens, 1.0, 0.5).unwrap(), 0.0);
        assert!(self_similarity_stat(&ens, 4.0, 0.5).is_err()); // 2.0 outside grid
    }

    #[test]
    fn csv_export_shape() {
        let h = HurstParam::new(0.75).unwrap();
        let ens = gen_rosenblatt_ensemble(
            h,
            4,
            1.0,
            3,
            21,
            RosenblattMethod::Hermite { upsample: 64 },
        )
        .unwrap();
        let mut buf = Vec::new();
        write_paths_csv(&mut buf, &ens).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,path_0,path_1,path_2");
        assert_eq!(lines.count(), 5);
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), 4);
        }
    }
}
