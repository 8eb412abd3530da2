//! Solver for the McKean stochastic game (a cancellable perpetual American
//! put) driven by a spectrally negative jump-diffusion
//!
//! ```text
//! X_t = σ B_t + μ t − Σ_{i ≤ N_t} ξ_i,   N ~ Poisson(λ),  ξ_i ~ Exp(θ).
//! ```
//!
//! The crate is `no_std` (it needs `alloc` only for the piecewise value
//! representation). Everything is a pure function of immutable inputs.
//!
//! * [`model`]: parameters, Laplace exponents and the cubic root system.
//! * [`scale`]: closed-form scale functions `W`, `Z` and the fluctuation
//!   identities built on them.
//! * [`put`]: the McKean optimal stopping problem (perpetual American put).
//! * [`game`]: exercise boundaries `x*`, `y*`, the threshold `δ₀`, the
//!   regime classifier, the value function and quadrature-based oracles.
//! * [`quad`]: adaptive Gauss–Kronrod quadrature and bracketed bisection.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod game;
pub mod model;
pub mod put;
pub mod quad;
pub mod scale;

pub use error::Error;
pub use game::{GameSolution, McKeanGame, PiecewiseValue, Regime};
pub use model::{Contract, CubicBasis, ModelParams, TiltIndex};
pub use put::PutSolution;
pub use scale::ScaleFunctions;

/// Relative tolerance under which `q` and `ψ(1)` are treated as equal.
pub const RISK_NEUTRAL_TOL: f64 = 1e-12;
