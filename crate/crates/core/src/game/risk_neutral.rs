//! Explicit jump-diffusion formulas for `q = ψ(1)` (so `Φ(q) = β₃ = 1`).

use libm::{exp, log};

use super::McKeanGame;
use crate::Error;

/// `Σ Cᵢ K^{βᵢ} e^{−βᵢx*} / (βᵢ(θ + βᵢ))`.
fn weighted_sum(game: &McKeanGame, x_star: f64) -> f64 {
    let b = &game.basis;
    let theta = game.params.theta();
    let ell = game.log_strike - x_star;
    (0..3).map(|i| b.coeff[i] * exp(b.beta[i] * ell) / (b.beta[i] * (theta + b.beta[i]))).sum()
}

/// Left side minus right side of the `δ₀` equation
/// `q S(x*(z)) − (λ + (θ+1)q) z/(λθK) = 1/(θ+1)`; positive below `δ₀`.
pub(super) fn delta_0_residual(game: &McKeanGame, z: f64, x_star: f64) -> f64 {
    let (l, theta, q, k) = (game.params.lambda(), game.params.theta(), game.q, game.strike);
    q * weighted_sum(game, x_star) - (l + (theta + 1.0) * q) / (l * theta * k) * z - 1.0 / (theta + 1.0)
}

/// `y*` from `e^{θy*} = λθK^{θ+1}/((θ+1)qδ) (q S − 1/(θ+1) − δ/(θK))`.
pub(super) fn y_star(game: &McKeanGame, delta: f64, x_star: f64) -> Result<f64, Error> {
    let (l, theta, q, k) = (game.params.lambda(), game.params.theta(), game.q, game.strike);
    let bracket = q * weighted_sum(game, x_star) - 1.0 / (theta + 1.0) - delta / (theta * k);
    if !(bracket > 0.0) {
        return Err(Error::Inconsistency { what: "exp(theta y*)", value: bracket });
    }
    let log_rhs = log(l * theta / ((theta + 1.0) * q * delta)) + (theta + 1.0) * game.log_strike + log(bracket);
    Ok(log_rhs / theta)
}

/// Coefficients of `e^{βᵢ(x − log K)}` on `[log K, ∞)` for `y* = log K`:
/// `K Cᵢ (q e^{βᵢ(log K − x*)}/βᵢ + ψ′(1) − Kq e^{−x*})`.
pub(super) fn point_tail(game: &McKeanGame, x_star: f64) -> [f64; 2] {
    let b = &game.basis;
    let (k, q) = (game.strike, game.q);
    let ell = game.log_strike - x_star;
    let common = game.dpsi_one - k * q * exp(-x_star);
    let coeff = |i: usize| k * b.coeff[i] * (q * exp(b.beta[i] * ell) / b.beta[i] + common);
    [coeff(0), coeff(1)]
}
