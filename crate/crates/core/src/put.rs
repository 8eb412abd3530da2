//! The McKean optimal stopping problem (perpetual American put).
//!
//! Above the exercise boundary `k*` the value `U(x) = K Z(x−k*) − eˣ Z₁(x−k*)`
//! collapses to two decaying exponentials: the `e^{Φx}` and `eˣ` parts cancel
//! exactly because of the equation defining `k*`. Both routes below return
//! that two-exponential form.

use libm::{exp, log};

use crate::model::{is_risk_neutral, ModelParams};
use crate::scale::ScaleFunctions;
use crate::Error;

/// Optimal boundary, value coefficients and `δ̄ = U(log K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PutSolution {
    pub strike: f64,
    /// Log-price exercise boundary: stop once `X < k*`.
    pub k_star: f64,
    /// `U(log K)`, the penalty level at which cancellation becomes worthless.
    pub delta_bar: f64,
    pub c1: f64,
    pub c2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl PutSolution {
    /// `U(x)`.
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.k_star {
            self.strike - exp(x)
        } else {
            let d = x - self.k_star;
            self.c1 * exp(self.beta1 * d) + self.c2 * exp(self.beta2 * d)
        }
    }

    /// `U′(x)` (one-sided from the right at `k*`).
    pub fn derivative(&self, x: f64) -> f64 {
        if x < self.k_star {
            -exp(x)
        } else {
            let d = x - self.k_star;
            self.c1 * self.beta1 * exp(self.beta1 * d) + self.c2 * self.beta2 * exp(self.beta2 * d)
        }
    }
}

/// Solves the put, taking the explicit `q = ψ(1)` formulas when the discount
/// is risk neutral and [`solve_general`] otherwise.
pub fn solve_put(params: &ModelParams, q: f64, strike: f64) -> Result<PutSolution, Error> {
    let psi_one = params.check_discount(q)?;
    let scale = ScaleFunctions::untilted(params, q)?;
    if is_risk_neutral(psi_one, q) {
        risk_neutral(params, &scale, q, strike)
    } else {
        general(params, &scale, q, psi_one, strike)
    }
}

/// Scale-function route valid for every admissible `q`, using the limiting
/// forms at `q = ψ(1)`.
pub fn solve_general(params: &ModelParams, q: f64, strike: f64) -> Result<PutSolution, Error> {
    let psi_one = params.check_discount(q)?;
    let scale = ScaleFunctions::untilted(params, q)?;
    general(params, &scale, q, psi_one, strike)
}

/// `U(x)`.
pub fn put_value(solution: &PutSolution, x: f64) -> f64 {
    solution.value(x)
}

fn basis_of(scale: &ScaleFunctions) -> Result<&crate::CubicBasis, Error> {
    scale.basis().ok_or(Error::DegenerateRoots)
}

fn check_strike(strike: f64) -> Result<(), Error> {
    if strike > 0.0 && strike.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "strike", value: strike })
    }
}

pub(crate) fn general(
    params: &ModelParams,
    scale: &ScaleFunctions,
    q: f64,
    psi_one: f64,
    strike: f64,
) -> Result<PutSolution, Error> {
    check_strike(strike)?;
    let b = basis_of(scale)?;
    let phi = b.beta[2];
    let rn = is_risk_neutral(psi_one, q);
    let exercise = if rn {
        strike * psi_one / params.laplace_exponent_derivative(1.0)?
    } else {
        strike * (q / phi) * (phi - 1.0) / (q - psi_one)
    };
    let excess = if rn { 0.0 } else { q - psi_one };
    let coeff = |i: usize| {
        strike * q * b.coeff[i] / b.beta[i] - exercise * excess * b.coeff[i] / (b.beta[i] - 1.0)
    };
    finish(strike, log(exercise), coeff(0), coeff(1), b.beta[0], b.beta[1])
}

fn risk_neutral(params: &ModelParams, scale: &ScaleFunctions, q: f64, strike: f64) -> Result<PutSolution, Error> {
    check_strike(strike)?;
    let b = basis_of(scale)?;
    let (s, l, t) = (params.sigma(), params.lambda(), params.theta());
    let exercise = strike * q / (0.5 * s * s + q + l / ((t + 1.0) * (t + 1.0)));
    let (b1, b2) = (b.beta[0], b.beta[1]);
    let c1 = (b2 * strike + (1.0 - b2) * exercise) / (b2 - b1);
    let c2 = (b1 * strike + (1.0 - b1) * exercise) / (b1 - b2);
    finish(strike, log(exercise), c1, c2, b1, b2)
}

fn finish(strike: f64, k_star: f64, c1: f64, c2: f64, beta1: f64, beta2: f64) -> Result<PutSolution, Error> {
    if !(k_star.is_finite() && k_star < log(strike)) {
        return Err(Error::Inconsistency { what: "put exercise boundary", value: k_star });
    }
    let mut sol = PutSolution { strike, k_star, delta_bar: 0.0, c1, c2, beta1, beta2 };
    sol.delta_bar = sol.value(log(strike));
    if !(sol.delta_bar > 0.0 && sol.delta_bar < strike) {
        return Err(Error::Inconsistency { what: "delta_bar", value: sol.delta_bar });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn risk_neutral_boundary_matches_arithmetic() {
        let p = ModelParams::risk_neutral(0.4, 1.0, 2.0, 0.05).unwrap();
        let s = solve_put(&p, 0.05, 5.0).unwrap();
        let expected = 0.25 / (0.08 + 0.05 + 1.0 / 9.0);
        assert!((s.k_star.exp() - expected).abs() < 1e-13);
        assert!((s.value(s.k_star) - (5.0 - expected)).abs() < 1e-12);
        assert!((s.value(5f64.ln()) - s.delta_bar).abs() < 1e-15);
        // Slowest rate β₂ ≈ −0.19.
        assert!(s.value(50.0) < 1e-3 && s.value(150.0) < 1e-6);
    }

    #[test]
    fn brownian_boundary() {
        // λ = 0, μ chosen so that ψ(1) = q.
        let p = ModelParams::risk_neutral(0.3, 0.0, 1.0, 0.04).unwrap();
        let s = solve_put(&p, 0.04, 2.0).unwrap();
        assert!((s.k_star.exp() - 2.0 * 0.04 / (0.045 + 0.04)).abs() < 1e-13);
        assert!(s.c1.abs() < 1e-12);
    }

    #[test]
    fn violated_assumption_is_rejected() {
        let p = ModelParams::risk_neutral(0.4, 1.0, 2.0, 0.05).unwrap();
        assert!(matches!(solve_put(&p, 0.01, 5.0), Err(Error::AssumptionViolated { .. })));
    }
}
