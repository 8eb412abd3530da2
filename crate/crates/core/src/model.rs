//! Process parameters, Laplace exponents and the cubic root system behind
//! the closed-form scale functions.
//!
//! For the jump-diffusion with `Exp(θ)` downward jumps the tilted exponent
//!
//! ```text
//! ψ_c(z) = ψ(z + c) − ψ(c) = σ²/2 z² + (σ²c + μ) z − λθz / ((θ + z + c)(θ + c))
//! ```
//!
//! is rational, and `(θ + c + z)(ψ_c(z) − r) = σ²/2 (z − β₁)(z − β₂)(z − β₃)`.
//! The roots satisfy `β₁ < −θ − c < β₂ ≤ β₃`, and `W_c^{(r)}(x) = Σ Cᵢ e^{βᵢ x}`.

use libm::{acos, cos, sqrt};

use crate::{Error, RISK_NEUTRAL_TOL};

/// Coefficients `(σ, μ, λ, θ)` of the driving jump-diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    sigma: f64,
    mu: f64,
    lambda: f64,
    theta: f64,
}

impl ModelParams {
    pub fn new(sigma: f64, mu: f64, lambda: f64, theta: f64) -> Result<Self, Error> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter { name: "sigma", value: sigma });
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter { name: "mu", value: mu });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter { name: "lambda", value: lambda });
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter { name: "theta", value: theta });
        }
        Ok(Self { sigma, mu, lambda, theta })
    }

    /// Parameters whose drift makes `ψ(1) = q`.
    pub fn risk_neutral(sigma: f64, lambda: f64, theta: f64, q: f64) -> Result<Self, Error> {
        Self::new(sigma, risk_neutral_drift(sigma, lambda, theta, q), lambda, theta)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self, Error> {
        Self::new(sigma, self.mu, self.lambda, self.theta)
    }

    /// `ψ(z) = σ²/2 z² + μz − λz/(θ + z)` for `z > −θ`.
    pub fn laplace_exponent(&self, z: f64) -> Result<f64, Error> {
        if !(z > -self.theta) {
            return Err(Error::Pole { z });
        }
        Ok(self.psi_unchecked(z))
    }

    /// `ψ′(z) = σ² z + μ − λθ/(θ + z)²`.
    pub fn laplace_exponent_derivative(&self, z: f64) -> Result<f64, Error> {
        if !(z > -self.theta) {
            return Err(Error::Pole { z });
        }
        let d = self.theta + z;
        Ok(self.sigma * self.sigma * z + self.mu - self.lambda * self.theta / (d * d))
    }

    /// `ψ_c(z) = ψ(z + c) − ψ(c)`, evaluated in the cancellation-free form.
    pub fn tilted_laplace_exponent(&self, tilt: TiltIndex, z: f64) -> Result<f64, Error> {
        if !(z + tilt.c > -self.theta) {
            return Err(Error::Pole { z });
        }
        Ok(self.tilted_psi_unchecked(tilt.c, z))
    }

    pub(crate) fn psi_unchecked(&self, z: f64) -> f64 {
        0.5 * self.sigma * self.sigma * z * z + self.mu * z - self.lambda * z / (self.theta + z)
    }

    fn tilted_psi_unchecked(&self, c: f64, z: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let a = self.theta + c;
        0.5 * s2 * z * z + (s2 * c + self.mu) * z - self.lambda * self.theta * z / ((a + z) * a)
    }

    /// `ψ_c(−θ − c − ε)` with the pole factor taken as exactly `−ε`.
    fn tilted_psi_at_gap(&self, c: f64, eps: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let a = self.theta + c;
        let z = -a - eps;
        0.5 * s2 * z * z + (s2 * c + self.mu) * z + self.lambda * self.theta * z / (eps * a)
    }

    fn tilted_psi_derivative_at_gap(&self, c: f64, eps: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let a = self.theta + c;
        s2 * (-a - eps) + s2 * c + self.mu - self.lambda * self.theta / (eps * eps)
    }

    fn tilted_psi_derivative(&self, c: f64, z: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let a = self.theta + c;
        let d = a + z;
        s2 * z + s2 * c + self.mu - self.lambda * self.theta / (d * d)
    }

    /// Checks `0 ≤ ψ(1) ≤ q`, `q > 0` and reports `ψ(1)`.
    ///
    /// `ψ(1)` within a relative `1e-12` of `q` (or of zero) is accepted so
    /// that drifts produced by [`risk_neutral_drift`] pass.
    pub fn check_discount(&self, q: f64) -> Result<f64, Error> {
        let psi_one = self.psi_unchecked(1.0);
        let slack = RISK_NEUTRAL_TOL * q.abs().max(1.0);
        if !(q > 0.0 && q.is_finite()) || psi_one > q + slack || psi_one < -slack {
            return Err(Error::AssumptionViolated { psi_one, discount: q });
        }
        Ok(psi_one)
    }

    /// `Φ(q)`, the largest root of `ψ(z) = q`.
    pub fn phi(&self, q: f64) -> Result<f64, Error> {
        if !(q > 0.0) {
            return Err(Error::InvalidParameter { name: "q", value: q });
        }
        Ok(solve_roots(self, TiltIndex::new(0.0, q)?)?.beta[2])
    }
}

/// Drift `μ = q − σ²/2 + λ/(θ + 1)`, which makes `ψ(1) = q`.
pub fn risk_neutral_drift(sigma: f64, lambda: f64, theta: f64, q: f64) -> f64 {
    q - 0.5 * sigma * sigma + lambda / (theta + 1.0)
}

/// Economics of the game: strike `K`, cancellation penalty `δ`, discount `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    strike: f64,
    penalty: f64,
    discount: f64,
}

impl Contract {
    /// Validates the contract against the process (`0 ≤ ψ(1) ≤ q`, `q > 0`).
    pub fn new(params: &ModelParams, strike: f64, penalty: f64, discount: f64) -> Result<Self, Error> {
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::InvalidParameter { name: "strike", value: strike });
        }
        if !(penalty > 0.0 && penalty.is_finite()) {
            return Err(Error::InvalidParameter { name: "penalty", value: penalty });
        }
        params.check_discount(discount)?;
        Ok(Self { strike, penalty, discount })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn log_strike(&self) -> f64 {
        libm::log(self.strike)
    }
}

/// Esscher tilt `c` and killing rate `r` indexing `ψ_c`, `W_c^{(r)}`, `Z_c^{(r)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltIndex {
    pub c: f64,
    pub r: f64,
}

impl TiltIndex {
    pub fn new(c: f64, r: f64) -> Result<Self, Error> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter { name: "c", value: c });
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter { name: "r", value: r });
        }
        Ok(Self { c, r })
    }
}

/// Roots `β₁ < −θ − c < β₂ ≤ β₃` of `ψ_c(z) = r` and the coefficients
/// `Cᵢ = 2(θ + c + βᵢ) / (σ² Π_{j≠i}(βⱼ − βᵢ))` of `W_c^{(r)}`.
///
/// Without jumps (`λ = 0`) the factor `θ + c + z` is spurious: `β₁ = −θ − c`
/// exactly, `C₁ = 0`, and `β₂ < β₃` are the roots of the quadratic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBasis {
    pub tilt: TiltIndex,
    pub beta: [f64; 3],
    pub coeff: [f64; 3],
    /// `−θ − c − β₁ > 0` carried separately from `β₁` (zero when `λ = 0`).
    pub pole_gap: f64,
}

impl CubicBasis {
    /// `max |ψ_c(βᵢ) − r|` over the genuine roots.
    pub fn max_residual(&self, params: &ModelParams) -> f64 {
        let c = self.tilt.c;
        let r = self.tilt.r;
        let first = if params.lambda == 0.0 {
            0.0
        } else {
            (params.tilted_psi_at_gap(c, self.pole_gap) - r).abs()
        };
        self.beta[1..]
            .iter()
            .map(|&b| (params.tilted_psi_unchecked(c, b) - r).abs())
            .fold(first, f64::max)
    }
}

/// Gap `β₃ − β₂` below which the roots are treated as a double root.
pub const DOUBLE_ROOT_GAP: f64 = 1e-8;

/// Solves `ψ_c(z) = r` for its three real roots and forms the scale
/// coefficients.
///
/// Seeds come from the trigonometric solution of the monic cubic; each root
/// is then refined by Newton steps kept inside its proven bracket
/// (`(−∞, −θ−c)` for `β₁`, either side of the minimiser of the convex branch
/// on `(−θ−c, ∞)` for `β₂`, `β₃`).
pub fn solve_roots(params: &ModelParams, tilt: TiltIndex) -> Result<CubicBasis, Error> {
    let c = tilt.c;
    let r = tilt.r;
    let s2 = params.sigma * params.sigma;
    let half = 0.5 * s2;
    let a = params.theta + c;
    let m = s2 * c + params.mu;

    let mut pole_gap = 0.0;
    let beta = if params.lambda == 0.0 {
        let (lo, hi) = quadratic_roots(half, m, r)?;
        [-a, lo, hi]
    } else {
        let g = |z: f64| params.tilted_psi_unchecked(c, z) - r;
        let dg = |z: f64| params.tilted_psi_derivative(c, z);
        let seeds = cubic_seeds(params, c, r);

        // β₁ = −a − ε: g → −∞ as ε → 0⁺ and → +∞ as ε → ∞. Working in ε keeps
        // the pole factor a + β₁ = −ε exact when β₁ crowds the pole.
        let g1 = |eps: f64| params.tilted_psi_at_gap(c, eps) - r;
        let dg1 = |eps: f64| -params.tilted_psi_derivative_at_gap(c, eps);
        let seed1 = -a - seeds[0];
        let mut hi1 = seed1.max(1.0);
        while g1(hi1) <= 0.0 {
            hi1 *= 2.0;
            if !hi1.is_finite() {
                return Err(Error::Nonconvergence { what: "bracketing beta_1" });
            }
        }
        let mut lo1 = seed1.min(hi1) * 0.5;
        while g1(lo1) >= 0.0 {
            lo1 *= 0.5;
            if lo1 < 1e-300 {
                return Err(Error::Nonconvergence { what: "bracketing beta_1" });
            }
        }
        let gap = safeguarded_newton(&g1, &dg1, lo1, hi1, seed1)?;
        pole_gap = gap;
        let b1 = -a - gap;

        // Minimiser of the convex branch on (−a, ∞).
        let z_min = convex_minimiser(params, c, a)?;
        let g_min = g(z_min);
        let (b2, b3) = if r == 0.0 {
            let slope = dg(0.0);
            if slope == 0.0 || g_min >= 0.0 {
                return Err(Error::DegenerateRoots);
            } else if slope > 0.0 {
                (root_left_of(&g, &dg, a, z_min, seeds[1])?, 0.0)
            } else {
                (0.0, root_right_of(&g, &dg, z_min, seeds[2])?)
            }
        } else {
            if g_min >= 0.0 {
                return Err(Error::DegenerateRoots);
            }
            (root_left_of(&g, &dg, a, z_min, seeds[1])?, root_right_of(&g, &dg, z_min, seeds[2])?)
        };
        [b1, b2, b3]
    };

    if beta[2] - beta[1] < DOUBLE_ROOT_GAP {
        return Err(Error::DegenerateRoots);
    }

    let coeff = if params.lambda == 0.0 {
        let k = 2.0 / (s2 * (beta[2] - beta[1]));
        [0.0, -k, k]
    } else {
        let mut coeff = [0.0; 3];
        for i in 0..3 {
            let mut denom = s2;
            for j in 0..3 {
                if j != i {
                    denom *= beta[j] - beta[i];
                }
            }
            let shifted = if i == 0 { -pole_gap } else { a + beta[i] };
            coeff[i] = 2.0 * shifted / denom;
        }
        coeff
    };

    Ok(CubicBasis { tilt, beta, coeff, pole_gap })
}

/// `Φ(q)`, the largest root of `ψ(z) = q`.
pub fn phi(params: &ModelParams, q: f64) -> Result<f64, Error> {
    params.phi(q)
}

/// Roots of `h z² + m z − r` (`r ≥ 0`) in increasing order.
fn quadratic_roots(h: f64, m: f64, r: f64) -> Result<(f64, f64), Error> {
    let disc = m * m + 4.0 * h * r;
    let sq = sqrt(disc);
    if r == 0.0 {
        let other = -m / h;
        return Ok(if other < 0.0 { (other, 0.0) } else { (0.0, other) });
    }
    // Stable pair: one root from the quadratic formula, the other via Vieta.
    let t = -0.5 * (m + if m >= 0.0 { sq } else { -sq });
    let z1 = t / h;
    let z2 = -r / t;
    Ok(if z1 < z2 { (z1, z2) } else { (z2, z1) })
}

/// Seeds from the closed-form trigonometric solution of
/// `σ²/2 z³ + (m + a σ²/2) z² + (a m − r − L) z − a r = 0`, `L = λθ/(θ+c)`.
fn cubic_seeds(params: &ModelParams, c: f64, r: f64) -> [f64; 3] {
    let s2 = params.sigma * params.sigma;
    let h = 0.5 * s2;
    let a = params.theta + c;
    let m = s2 * c + params.mu;
    let l = params.lambda * params.theta / a;
    let b2 = (m + a * h) / h;
    let b1 = (a * m - r - l) / h;
    let b0 = -a * r / h;
    let p = b1 - b2 * b2 / 3.0;
    let q = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0;
    let shift = -b2 / 3.0;
    if p >= 0.0 {
        // Not three distinct real roots in floating point; fall back to
        // bracket-interior guesses.
        return [-a - 1.0, -a * 0.5, 1.0];
    }
    let amp = 2.0 * sqrt(-p / 3.0);
    let arg = (3.0 * q / (2.0 * p) * sqrt(-3.0 / p)).clamp(-1.0, 1.0);
    let phase = acos(arg) / 3.0;
    let third = 2.0 * core::f64::consts::PI / 3.0;
    let mut roots = [
        amp * cos(phase) + shift,
        amp * cos(phase - third) + shift,
        amp * cos(phase - 2.0 * third) + shift,
    ];
    roots.sort_by(f64::total_cmp);
    roots
}

fn convex_minimiser(params: &ModelParams, c: f64, a: f64) -> Result<f64, Error> {
    let dg = |z: f64| params.tilted_psi_derivative(c, z);
    // Derivative tends to −∞ at the pole; walk towards it until negative.
    let mut gap = 1.0;
    let mut lo = -a + gap;
    while dg(lo) >= 0.0 {
        gap *= 0.5;
        lo = -a + gap;
        if gap < 1e-300 {
            return Err(Error::Nonconvergence { what: "bracketing the convex minimiser" });
        }
    }
    let mut hi = lo.abs().max(1.0);
    while dg(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Nonconvergence { what: "bracketing the convex minimiser" });
        }
    }
    crate::quad::bisect(dg, lo, hi, 0.0)
}

fn root_left_of<G, D>(g: &G, dg: &D, a: f64, z_min: f64, seed: f64) -> Result<f64, Error>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    // g → +∞ at −a⁺.
    let mut gap = (z_min + a) * 0.5;
    let mut lo = -a + gap;
    while g(lo) <= 0.0 {
        gap *= 0.5;
        lo = -a + gap;
        if gap < 1e-300 {
            return Err(Error::Nonconvergence { what: "bracketing beta_2" });
        }
    }
    safeguarded_newton(g, dg, lo, z_min, seed)
}

fn root_right_of<G, D>(g: &G, dg: &D, z_min: f64, seed: f64) -> Result<f64, Error>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut step = 1.0;
    let mut hi = z_min + step;
    while g(hi) <= 0.0 {
        step *= 2.0;
        hi = z_min + step;
        if !hi.is_finite() {
            return Err(Error::Nonconvergence { what: "bracketing beta_3" });
        }
    }
    safeguarded_newton(g, dg, z_min, hi, seed)
}

/// Newton iteration confined to a bracket `[lo, hi]` on which `g` changes
/// sign; falls back to bisection whenever a step leaves the bracket or fails
/// to halve the bracket.
fn safeguarded_newton<G, D>(g: &G, dg: &D, lo: f64, hi: f64, seed: f64) -> Result<f64, Error>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if (g_lo > 0.0) == (g_hi > 0.0) {
        return Err(Error::NoBracket { lo, hi });
    }
    let lo_positive = g_lo > 0.0;
    let mut x = if seed > lo && seed < hi { seed } else { 0.5 * (lo + hi) };
    let mut best = x;
    let mut best_abs = f64::INFINITY;
    for _ in 0..400 {
        let gx = g(x);
        if gx.abs() < best_abs {
            best_abs = gx.abs();
            best = x;
        }
        if gx == 0.0 {
            return Ok(x);
        }
        if (gx > 0.0) == lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(best);
        }
        let d = dg(x);
        let newton = x - gx / d;
        x = if d != 0.0 && newton > lo && newton < hi && (newton - x).abs() < 0.5 * width {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if x == lo || x == hi {
            return Ok(best);
        }
    }
    Ok(best)
}

/// Whether `ψ(1)` equals `q` up to [`RISK_NEUTRAL_TOL`].
pub fn is_risk_neutral(psi_one: f64, q: f64) -> bool {
    (q - psi_one).abs() < RISK_NEUTRAL_TOL * q.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> ModelParams {
        ModelParams::risk_neutral(0.4, 1.0, 2.0, 0.05).unwrap()
    }

    #[test]
    fn psi_vanishes_at_zero() {
        assert_eq!(p0().laplace_exponent(0.0).unwrap(), 0.0);
        let t = TiltIndex::new(0.7, 0.0).unwrap();
        assert_eq!(p0().tilted_laplace_exponent(t, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn risk_neutral_drift_examples() {
        let mu = risk_neutral_drift(0.4, 1.0, 2.0, 0.05);
        assert!((mu - (0.05 - 0.08 + 1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(risk_neutral_drift(1.0, 0.0, 1.0, 0.5), 0.0);
        assert!((p0().laplace_exponent(1.0).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn pole_is_rejected() {
        assert!(matches!(p0().laplace_exponent(-2.0), Err(Error::Pole { .. })));
        assert!(matches!(p0().laplace_exponent(-3.0), Err(Error::Pole { .. })));
        let t = TiltIndex::new(1.0, 0.0).unwrap();
        assert!(p0().tilted_laplace_exponent(t, -2.5).is_ok());
        assert!(matches!(p0().tilted_laplace_exponent(t, -3.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn invalid_parameters() {
        assert!(ModelParams::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.1, 0.0, -1.0, 1.0).is_err());
        assert!(ModelParams::new(0.1, 0.0, 1.0, 0.0).is_err());
        assert!(TiltIndex::new(-1.0, 0.0).is_err());
        assert!(TiltIndex::new(0.0, -1.0).is_err());
    }

    #[test]
    fn assumption_gate() {
        let p = p0();
        assert!(Contract::new(&p, 5.0, 1.0, 0.05).is_ok());
        assert!(Contract::new(&p, 5.0, 1.0, 0.1).is_ok());
        assert!(matches!(Contract::new(&p, 5.0, 1.0, 0.04), Err(Error::AssumptionViolated { .. })));
        let negative = ModelParams::new(0.4, -1.0, 1.0, 2.0).unwrap();
        assert!(matches!(Contract::new(&negative, 5.0, 1.0, 0.05), Err(Error::AssumptionViolated { .. })));
    }

    #[test]
    fn risk_neutral_roots() {
        let b = solve_roots(&p0(), TiltIndex::new(0.0, 0.05).unwrap()).unwrap();
        assert!((b.beta[2] - 1.0).abs() < 1e-14);
        assert!((b.beta[0] * b.beta[1] * b.beta[2] - 1.25).abs() < 1e-12);
        assert!(b.max_residual(&p0()) < 1e-12);
    }

    #[test]
    fn brownian_roots_have_spurious_pole_root() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let b = solve_roots(&p, TiltIndex::new(0.0, 0.5).unwrap()).unwrap();
        assert_eq!(b.beta[0], -1.0);
        assert_eq!(b.coeff[0], 0.0);
        assert!((b.beta[1] + 1.0).abs() < 1e-15);
        assert!((b.beta[2] - 1.0).abs() < 1e-15);
        assert!((p.phi(0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_killing_places_a_root_at_zero() {
        // ψ′(0) = μ − λ/θ > 0 here, so β₃ = 0.
        let p = ModelParams::new(0.4, 1.0, 1.0, 2.0).unwrap();
        let b = solve_roots(&p, TiltIndex::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(b.beta[2], 0.0);
        assert!(b.beta[1] < 0.0);
        // ψ′(0) < 0: β₂ = 0.
        let p = ModelParams::new(0.4, 0.1, 1.0, 2.0).unwrap();
        let b = solve_roots(&p, TiltIndex::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(b.beta[1], 0.0);
        assert!(b.beta[2] > 0.0);
    }

    #[test]
    fn double_root_is_flagged() {
        // ψ′(0) = μ − λ/θ = 0.
        let p = ModelParams::new(0.4, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(solve_roots(&p, TiltIndex::new(0.0, 0.0).unwrap()), Err(Error::DegenerateRoots));
    }
}
