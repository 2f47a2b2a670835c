//! Simulation, control, and game-theoretic solvers for linear systems driven
//! by long-range-dependent noise, with a focus on the (non-Gaussian)
//! Rosenblatt process.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`] — special functions, process normalization constants, and
//!   quadrature for weakly singular kernels;
//! * [`noise`] — fractional Gaussian and Rosenblatt sample-path synthesis;
//! * [`sde`] — Euler simulation of driven linear systems and the exact
//!   Ornstein–Uhlenbeck convolution solution;
//! * [`predict`] — martingale-style and explicit linear predictors;
//! * [`control`] — closed-form ergodic linear-quadratic control, surrogate
//!   suboptimality, and variance-aware mean-field control;
//! * [`games`] — zero-sum saddle points and N-player Nash fixed points in
//!   stationary linear feedback;
//! * [`mftg`] — finite-horizon mean-field-type game equilibria via backward
//!   ODE systems;
//! * [`cournot`] — an energy-market Cournot application of the mean-field-type
//!   machinery, with a "price of simplicity" comparison;
//! * [`diffusion`] — forward/reverse generative diffusion dynamics with exact
//!   Gaussian scores and a chi-square limit check;
//! * [`harness`] — Monte Carlo estimation, ergodic time averages, and
//!   distributional distances;
//! * [`acceptance`] — the end-to-end verification suite shared by the test
//!   harness and the CLI.

pub mod acceptance;
pub mod control;
pub mod cournot;
pub mod diffusion;
pub mod error;
pub mod games;
pub mod harness;
pub mod mftg;
pub mod noise;
pub mod numerics;
pub mod predict;
pub mod sde;

pub use error::{Error, Result};
pub use numerics::HurstParam;
