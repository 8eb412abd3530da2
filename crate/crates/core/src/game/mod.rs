//! The McKean stochastic game: the maximiser collects `(K − e^{X_τ})⁺`, the
//! minimiser may cancel at `(K − e^{X_σ})⁺ + δ`.
//!
//! For `δ ≥ δ̄ = U(log K)` cancellation is never used and `V = U`. Below
//! `δ̄` the maximiser stops under `x*` and the minimiser on `[log K, y*]`,
//! where `y* = log K` for `δ ∈ [δ₀, δ̄)` and `y* > log K` for `δ ∈ (0, δ₀)`.
//!
//! With exponential jumps every jump integral reduces to the one-dimensional
//!
//! ```text
//! J(δ) = ∫_{−∞}^{log K} (V_δ(s) − δ) e^{θs} ds,
//! ```
//!
//! which has a closed form. `δ₀` is the zero of
//! `f′_δ(log K+) = (2/σ²)(λθ/(Φ+θ) K^{−θ} J(δ) − qδ/Φ)` and
//! `e^{θy*} = λθΦ J(δ) / ((Φ+θ) δ q)`. The [`oracle`](McKeanGame::h_oracle)
//! methods evaluate the same equations by adaptive quadrature instead.

mod oracle;
mod risk_neutral;
mod value;

use core::fmt;

use alloc::vec;
use libm::{exp, expm1, log};

use crate::model::{is_risk_neutral, Contract, CubicBasis, ModelParams};
use crate::put::{self, PutSolution};
use crate::quad::bisect;
use crate::scale::{exp_integral, ScaleFunctions};
use crate::Error;

pub use value::{Piece, PiecewiseValue, Segment};

/// Shape of the minimiser's stopping region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `δ ≥ δ̄`: the minimiser never stops.
    NoCancel,
    /// `δ₀ ≤ δ < δ̄`: the minimiser stops only at `log K`.
    PointCancel,
    /// `0 < δ < δ₀`: the minimiser stops on `[log K, y*]`, `y* > log K`.
    IntervalCancel,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::NoCancel => "NO_CANCEL",
            Regime::PointCancel => "POINT_CANCEL",
            Regime::IntervalCancel => "INTERVAL_CANCEL",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Saddle point and value function for one penalty level.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub regime: Regime,
    pub penalty: f64,
    pub put: PutSolution,
    /// Maximiser's boundary, present when `δ < δ̄`.
    pub x_star: Option<f64>,
    pub delta_0: f64,
    /// Upper end of the minimiser's interval, present in `IntervalCancel`.
    pub y_star: Option<f64>,
    /// Weight of `W(x − log K)` in the value, present in `PointCancel`.
    pub alpha: Option<f64>,
    pub value: PiecewiseValue,
}

impl GameSolution {
    /// `V(x)`.
    pub fn value_at(&self, x: f64) -> f64 {
        self.value.eval(x)
    }
}

/// `V(x)` for a solved game.
pub fn value_at(solution: &GameSolution, x: f64) -> f64 {
    solution.value_at(x)
}

/// Precomputed state shared by every penalty level: the scale basis for
/// killing rate `q`, the put solution and `δ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct McKeanGame {
    params: ModelParams,
    strike: f64,
    log_strike: f64,
    q: f64,
    psi_one: f64,
    dpsi_one: f64,
    excess: f64,
    risk_neutral: bool,
    scale: ScaleFunctions,
    basis: CubicBasis,
    put: PutSolution,
    delta_0: f64,
}

impl McKeanGame {
    pub fn new(params: ModelParams, strike: f64, q: f64) -> Result<Self, Error> {
        let psi_one = params.check_discount(q)?;
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::InvalidParameter { name: "strike", value: strike });
        }
        let risk_neutral = is_risk_neutral(psi_one, q);
        let scale = ScaleFunctions::untilted(&params, q)?;
        let basis = *scale.basis().ok_or(Error::DegenerateRoots)?;
        let put = put::solve_put(&params, q, strike)?;
        let mut game = Self {
            params,
            strike,
            log_strike: log(strike),
            q,
            psi_one,
            dpsi_one: params.laplace_exponent_derivative(1.0)?,
            excess: if risk_neutral { 0.0 } else { q - psi_one },
            risk_neutral,
            scale,
            basis,
            put,
            delta_0: 0.0,
        };
        game.delta_0 = game.compute_delta_0()?;
        Ok(game)
    }

    pub fn from_contract(params: ModelParams, contract: &Contract) -> Result<Self, Error> {
        Self::new(params, contract.strike(), contract.discount())
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn log_strike(&self) -> f64 {
        self.log_strike
    }

    pub fn discount(&self) -> f64 {
        self.q
    }

    /// `ψ(1)`.
    pub fn psi_one(&self) -> f64 {
        self.psi_one
    }

    /// `Φ(q)`.
    pub fn phi(&self) -> f64 {
        self.basis.beta[2]
    }

    /// True when `q = ψ(1)` and the explicit jump-diffusion formulas apply.
    pub fn is_risk_neutral(&self) -> bool {
        self.risk_neutral
    }

    pub fn scale(&self) -> &ScaleFunctions {
        &self.scale
    }

    pub fn basis(&self) -> &CubicBasis {
        &self.basis
    }

    pub fn put(&self) -> &PutSolution {
        &self.put
    }

    pub fn delta_bar(&self) -> f64 {
        self.put.delta_bar
    }

    /// `δ₀`; zero without jumps, where the interval regime never occurs.
    pub fn delta_0(&self) -> f64 {
        self.delta_0
    }

    /// `Z(ℓ) − Z₁(ℓ)`, computed from the exponential sums directly so that
    /// small `ℓ` does not lose digits to the leading 1s.
    fn z_gap(&self, ell: f64) -> f64 {
        if ell <= 0.0 {
            return 0.0;
        }
        let b = &self.basis;
        let z = self.q * (0..3).map(|i| b.coeff[i] * expm1(b.beta[i] * ell) / b.beta[i]).sum::<f64>();
        let z1 = self.excess * (0..3).map(|i| b.coeff[i] * exp_integral(b.beta[i] - 1.0, ell)).sum::<f64>();
        z - z1
    }

    /// `V(x)` on `(−∞, log K]` given the maximiser's boundary.
    pub fn value_below_strike(&self, x_star: f64, x: f64) -> f64 {
        if x <= x_star {
            self.strike - exp(x)
        } else {
            let d = x - x_star;
            self.strike * self.scale.z(d) - exp(x) * self.scale.z_tilted_one(self.excess, d)
        }
    }

    fn check_penalty(delta: f64) -> Result<(), Error> {
        if delta > 0.0 && delta.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name: "delta", value: delta })
        }
    }

    /// `x*(δ)`, the root in `(k*, log K)` of `Z(log K − x) − Z₁(log K − x) = δ/K`.
    pub fn x_star(&self, delta: f64) -> Result<f64, Error> {
        Self::check_penalty(delta)?;
        if delta >= self.delta_bar() {
            return Err(Error::Regime { delta });
        }
        self.x_star_unchecked(delta)
    }

    /// As [`x_star`](Self::x_star) but returns `k*` for `δ ≥ δ̄`.
    pub(crate) fn x_star_unchecked(&self, delta: f64) -> Result<f64, Error> {
        let k_star = self.put.k_star;
        if delta >= self.delta_bar() {
            return Ok(k_star);
        }
        let target = delta / self.strike;
        let f = |x: f64| self.z_gap(self.log_strike - x) - target;
        if f(k_star) <= 0.0 {
            // δ within rounding of δ̄.
            return Ok(k_star);
        }
        bisect(f, k_star, self.log_strike, 0.0)
    }

    /// Closed form of `J(δ) = ∫_{−∞}^{log K} (V(s) − δ) e^{θs} ds` for a
    /// given boundary `x*`.
    pub fn jump_integral(&self, delta: f64, x_star: f64) -> f64 {
        let theta = self.params.theta();
        let k = self.strike;
        let q = self.q;
        let b = &self.basis;
        let ell = self.log_strike - x_star;
        let ex = exp(x_star);
        let e = |a: f64| exp_integral(a, ell);

        let below = (k - delta) * exp(theta * x_star) / theta - exp((theta + 1.0) * x_star) / (theta + 1.0);

        let e_theta = e(theta);
        let e_theta1 = e(theta + 1.0);
        let z_part: f64 = (0..3).map(|i| b.coeff[i] / b.beta[i] * (e(theta + b.beta[i]) - e_theta)).sum();
        let z1_part: f64 = if self.excess == 0.0 {
            0.0
        } else {
            (0..3)
                .map(|i| {
                    let gap = b.beta[i] - 1.0;
                    let d = if gap.abs() < 1e-9 {
                        let a = theta + 1.0;
                        (ell * exp(a * ell) - e_theta1) / a
                    } else {
                        (e(theta + b.beta[i]) - e_theta1) / gap
                    };
                    b.coeff[i] * d
                })
                .sum()
        };
        let between = k * e_theta + k * q * z_part - ex * (e_theta1 + self.excess * z1_part) - delta * e_theta;
        below + exp(theta * x_star) * between
    }

    /// `f′_δ(log K+)`: the slope at `log K⁺` of the maximiser's value when the
    /// minimiser stops only at `log K`. Positive exactly when `δ < δ₀`.
    pub fn f_prime_at_strike(&self, delta: f64) -> Result<f64, Error> {
        Self::check_penalty(delta)?;
        if delta > self.delta_bar() * (1.0 + 1e-12) {
            return Err(Error::Regime { delta });
        }
        let x_star = self.x_star_unchecked(delta)?;
        Ok(self.slope_from_boundary(delta, x_star))
    }

    fn slope_from_boundary(&self, delta: f64, x_star: f64) -> f64 {
        let theta = self.params.theta();
        let phi = self.phi();
        let s2 = self.params.sigma() * self.params.sigma();
        let jump = self.params.lambda() * theta / (phi + theta) * exp(-theta * self.log_strike)
            * self.jump_integral(delta, x_star);
        (jump - self.q * delta / phi) * 2.0 / s2
    }

    fn compute_delta_0(&self) -> Result<f64, Error> {
        if self.params.lambda() == 0.0 {
            return Ok(0.0);
        }
        let bar = self.delta_bar();
        let lo = bar * 1e-12;
        let hi = bar * (1.0 - 1e-12);
        let res = if self.risk_neutral {
            bisect(
                |d| match self.x_star_unchecked(d) {
                    Ok(x) => risk_neutral::delta_0_residual(self, d, x),
                    Err(_) => f64::NAN,
                },
                lo,
                hi,
                0.0,
            )
        } else {
            bisect(
                |d| match self.x_star_unchecked(d) {
                    Ok(x) => self.slope_from_boundary(d, x),
                    Err(_) => f64::NAN,
                },
                lo,
                hi,
                0.0,
            )
        };
        res.map_err(|e| match e {
            Error::NoBracket { .. } => Error::Inconsistency { what: "delta_0 bracket", value: bar },
            other => other,
        })
    }

    /// `y*(δ)` for `δ ∈ (0, δ₀)`.
    pub fn y_star(&self, delta: f64) -> Result<f64, Error> {
        Self::check_penalty(delta)?;
        if self.params.lambda() == 0.0 {
            return Err(Error::DegenerateJumps);
        }
        if delta >= self.delta_0 {
            return Err(Error::Regime { delta });
        }
        let x_star = self.x_star_unchecked(delta)?;
        let y = if self.risk_neutral {
            risk_neutral::y_star(self, delta, x_star)?
        } else {
            let theta = self.params.theta();
            let phi = self.phi();
            let ratio = self.params.lambda() * theta * phi * self.jump_integral(delta, x_star)
                / ((phi + theta) * delta * self.q);
            if !(ratio > 0.0) {
                return Err(Error::Inconsistency { what: "exp(theta y*)", value: ratio });
            }
            log(ratio) / theta
        };
        if !(y > self.log_strike) {
            return Err(Error::Inconsistency { what: "y* not above log K", value: y });
        }
        Ok(y)
    }

    pub fn classify(&self, delta: f64) -> Regime {
        if delta >= self.delta_bar() {
            Regime::NoCancel
        } else if delta >= self.delta_0 {
            Regime::PointCancel
        } else {
            Regime::IntervalCancel
        }
    }

    /// `α = e^{x*}(q − ψ(1))/(Φ − 1) − qK/Φ`, or `e^{x*}ψ′(1) − Kψ(1)` at `q = ψ(1)`.
    pub fn alpha(&self, x_star: f64) -> f64 {
        if self.risk_neutral {
            exp(x_star) * self.dpsi_one - self.strike * self.psi_one
        } else {
            let phi = self.phi();
            exp(x_star) * self.excess / (phi - 1.0) - self.q * self.strike / phi
        }
    }

    /// Coefficients of `e^{βᵢ(x − log K)}`, `i = 1, 2`, of `V` on
    /// `[log K, ∞)` when the minimiser stops only at `log K`.
    fn point_tail(&self, x_star: f64) -> [f64; 2] {
        if self.risk_neutral {
            return risk_neutral::point_tail(self, x_star);
        }
        let b = &self.basis;
        let phi = self.phi();
        let ell = self.log_strike - x_star;
        let ex = exp(x_star);
        let alpha = self.alpha(x_star);
        let coeff = |i: usize| {
            let base = self.strike * self.q * b.coeff[i] / b.beta[i] - ex * self.excess * b.coeff[i] / (b.beta[i] - 1.0);
            (base + alpha * b.coeff[i] * exp((phi - b.beta[i]) * ell)) * exp(b.beta[i] * ell)
        };
        [coeff(0), coeff(1)]
    }

    /// Saddle point, regime and value function for penalty `δ`.
    pub fn solve(&self, delta: f64) -> Result<GameSolution, Error> {
        Self::check_penalty(delta)?;
        let regime = self.classify(delta);
        let rates = [self.basis.beta[0], self.basis.beta[1]];
        let put = self.put;
        let mk = |pieces| PiecewiseValue::new(self.strike, self.excess, self.scale, pieces);
        let solution = match regime {
            Regime::NoCancel => GameSolution {
                regime,
                penalty: delta,
                put,
                x_star: None,
                delta_0: self.delta_0,
                y_star: None,
                alpha: None,
                value: mk(vec![
                    Piece { upper: put.k_star, segment: Segment::Intrinsic },
                    Piece {
                        upper: f64::INFINITY,
                        segment: Segment::TwoExponential { origin: put.k_star, coeff: [put.c1, put.c2], rate: rates },
                    },
                ]),
            },
            Regime::PointCancel => {
                let x_star = self.x_star(delta)?;
                GameSolution {
                    regime,
                    penalty: delta,
                    put,
                    x_star: Some(x_star),
                    delta_0: self.delta_0,
                    y_star: None,
                    alpha: Some(self.alpha(x_star)),
                    value: mk(vec![
                        Piece { upper: x_star, segment: Segment::Intrinsic },
                        Piece { upper: self.log_strike, segment: Segment::ScaleExpansion { boundary: x_star } },
                        Piece {
                            upper: f64::INFINITY,
                            segment: Segment::TwoExponential {
                                origin: self.log_strike,
                                coeff: self.point_tail(x_star),
                                rate: rates,
                            },
                        },
                    ]),
                }
            }
            Regime::IntervalCancel => {
                let x_star = self.x_star(delta)?;
                let y_star = self.y_star(delta)?;
                let (b1, b2) = (rates[0], rates[1]);
                // Continuous and smooth fit at y*: V(y*) = δ, V′(y*+) = 0.
                let coeff = [delta * b2 / (b2 - b1), -delta * b1 / (b2 - b1)];
                GameSolution {
                    regime,
                    penalty: delta,
                    put,
                    x_star: Some(x_star),
                    delta_0: self.delta_0,
                    y_star: Some(y_star),
                    alpha: None,
                    value: mk(vec![
                        Piece { upper: x_star, segment: Segment::Intrinsic },
                        Piece { upper: self.log_strike, segment: Segment::ScaleExpansion { boundary: x_star } },
                        Piece { upper: y_star, segment: Segment::Constant(delta) },
                        Piece {
                            upper: f64::INFINITY,
                            segment: Segment::TwoExponential { origin: y_star, coeff, rate: rates },
                        },
                    ]),
                }
            }
        };
        Ok(solution)
    }
}

fn game_for(params: &ModelParams, contract: &Contract) -> Result<McKeanGame, Error> {
    McKeanGame::from_contract(*params, contract)
}

/// `x*` for the contract's penalty.
pub fn solve_x_star(params: &ModelParams, contract: &Contract) -> Result<f64, Error> {
    game_for(params, contract)?.x_star(contract.penalty())
}

/// `δ₀` for strike `K` and discount `q` (zero when `λ = 0`).
pub fn solve_delta_0(params: &ModelParams, q: f64, strike: f64) -> Result<f64, Error> {
    Ok(McKeanGame::new(*params, strike, q)?.delta_0())
}

pub fn solve_y_star(params: &ModelParams, contract: &Contract) -> Result<f64, Error> {
    game_for(params, contract)?.y_star(contract.penalty())
}

pub fn classify(params: &ModelParams, contract: &Contract) -> Result<Regime, Error> {
    Ok(game_for(params, contract)?.classify(contract.penalty()))
}

pub fn solve_game(params: &ModelParams, contract: &Contract) -> Result<GameSolution, Error> {
    game_for(params, contract)?.solve(contract.penalty())
}

pub fn f_prime_at_k(params: &ModelParams, contract: &Contract) -> Result<f64, Error> {
    game_for(params, contract)?.f_prime_at_strike(contract.penalty())
}

pub fn h_oracle(params: &ModelParams, contract: &Contract, x: f64, y: f64) -> Result<f64, Error> {
    game_for(params, contract)?.h_oracle(contract.penalty(), x, y)
}
