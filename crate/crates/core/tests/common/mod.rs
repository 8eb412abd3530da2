#![allow(dead_code)]

use mckean_core::{McKeanGame, ModelParams};

pub const STRIKE: f64 = 5.0;

/// σ = 0.4, λ = 1, θ = 2 with the risk-neutral drift for q = 0.05.
pub fn p0_params() -> ModelParams {
    ModelParams::risk_neutral(0.4, 1.0, 2.0, 0.05).unwrap()
}

pub fn p0() -> McKeanGame {
    McKeanGame::new(p0_params(), STRIKE, 0.05).unwrap()
}

/// Same model discounted at q = 0.1 > ψ(1).
pub fn p0_general() -> McKeanGame {
    McKeanGame::new(p0_params(), STRIKE, 0.1).unwrap()
}

/// A mix of risk-neutral and strictly-discounted games.
pub fn game_set() -> Vec<McKeanGame> {
    let mut out = vec![p0(), p0_general()];
    for &(sigma, lambda, theta, q_rn, q) in &[
        (0.25, 0.5, 3.0, 0.03, 0.03),
        (0.6, 2.0, 1.5, 0.08, 0.08),
        (0.3, 1.5, 4.0, 0.05, 0.12),
        (0.5, 0.7, 2.5, 0.02, 0.04),
    ] {
        let params = ModelParams::risk_neutral(sigma, lambda, theta, q_rn).unwrap();
        out.push(McKeanGame::new(params, STRIKE, q).unwrap());
    }
    out
}

/// One-sided derivative by Richardson extrapolation of forward (`dir = 1`)
/// or backward (`dir = -1`) differences.
pub fn one_sided_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64, dir: f64) -> f64 {
    const LEVELS: usize = 5;
    let mut table = [[0.0; LEVELS]; LEVELS];
    let fx = f(x);
    for i in 0..LEVELS {
        let hi = h / f64::powi(2.0, i as i32);
        table[i][0] = (f(x + dir * hi) - fx) / (dir * hi);
        for j in 1..=i {
            let p = f64::powi(2.0, j as i32);
            table[i][j] = (p * table[i][j - 1] - table[i - 1][j - 1]) / (p - 1.0);
        }
    }
    table[LEVELS - 1][LEVELS - 1]
}

pub fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}
