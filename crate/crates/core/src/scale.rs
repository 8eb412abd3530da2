//! Closed-form scale functions `W_c^{(r)}`, `Z_c^{(r)}` and the fluctuation
//! identities expressed through them.

use libm::{exp, expm1};

use crate::model::{solve_roots, CubicBasis, ModelParams, TiltIndex};
use crate::Error;

/// `|β − 1|` below which `(e^{(β−1)x} − 1)/(β − 1)` is replaced by `x`.
const UNIT_ROOT_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Repr {
    Exponential(CubicBasis),
    /// `β₂ = β₃ = 0` (only for `r = 0`, `ψ_c′(0) = 0`): `W` has a linear part.
    DoubleZero { beta1: f64, a: f64, sigma2: f64 },
}

/// `W_c^{(r)}` and `Z_c^{(r)}` for one tilt index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFunctions {
    tilt: TiltIndex,
    repr: Repr,
}

impl ScaleFunctions {
    pub fn new(params: &ModelParams, tilt: TiltIndex) -> Result<Self, Error> {
        let repr = match solve_roots(params, tilt) {
            Ok(basis) => Repr::Exponential(basis),
            Err(Error::DegenerateRoots) => {
                let s2 = params.sigma() * params.sigma();
                let a = params.theta() + tilt.c;
                let m = s2 * tilt.c + params.mu();
                // Cubic reduces to σ²/2 z²(z − β₁).
                let beta1 = -(m + 0.5 * a * s2) / (0.5 * s2);
                Repr::DoubleZero { beta1, a, sigma2: s2 }
            }
            Err(e) => return Err(e),
        };
        Ok(Self { tilt, repr })
    }

    /// Scale functions with no tilt and killing rate `q`.
    pub fn untilted(params: &ModelParams, q: f64) -> Result<Self, Error> {
        Self::new(params, TiltIndex::new(0.0, q)?)
    }

    pub fn tilt(&self) -> TiltIndex {
        self.tilt
    }

    /// The exponential-sum basis, absent in the double-root case.
    pub fn basis(&self) -> Option<&CubicBasis> {
        match &self.repr {
            Repr::Exponential(b) => Some(b),
            Repr::DoubleZero { .. } => None,
        }
    }

    /// Largest root `β₃`; equals `Φ(r)` when `c = 0`.
    pub fn phi(&self) -> f64 {
        match &self.repr {
            Repr::Exponential(b) => b.beta[2],
            Repr::DoubleZero { .. } => 0.0,
        }
    }

    /// `W(x)`, zero on `(−∞, 0)`.
    pub fn w(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.repr {
            Repr::Exponential(b) => {
                if x < 1.0 {
                    // Σ Cᵢ = 0, so the expm1 form keeps full relative accuracy near 0.
                    (0..3).map(|i| b.coeff[i] * expm1(b.beta[i] * x)).sum()
                } else {
                    let top = b.beta[2];
                    exp(top * x) * (0..3).map(|i| b.coeff[i] * exp((b.beta[i] - top) * x)).sum::<f64>()
                }
            }
            &Repr::DoubleZero { beta1, a, sigma2 } => {
                2.0 / sigma2 * ((a + beta1) * expm1(beta1 * x) / (beta1 * beta1) - a * x / beta1)
            }
        }
    }

    /// `e^{−βx} W(x)`, without overflow when `W(x)` alone would exceed the
    /// double range.
    pub fn w_damped(&self, x: f64, beta: f64) -> f64 {
        match &self.repr {
            Repr::Exponential(b) if x >= 1.0 => (0..3).map(|i| b.coeff[i] * exp((b.beta[i] - beta) * x)).sum(),
            _ => exp(-beta * x) * self.w(x),
        }
    }

    /// Right derivative `W′(x)` for `x ≥ 0` (`W′(0+) = 2/σ²`).
    pub fn w_prime(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.repr {
            Repr::Exponential(b) => (0..3).map(|i| b.coeff[i] * b.beta[i] * exp(b.beta[i] * x)).sum(),
            &Repr::DoubleZero { beta1, a, sigma2 } => {
                2.0 / sigma2 * ((a + beta1) * exp(beta1 * x) / beta1 - a / beta1)
            }
        }
    }

    /// `Z(x) = 1 + r ∫₀ˣ W`, equal to 1 on `(−∞, 0]` and for `r = 0`.
    pub fn z(&self, x: f64) -> f64 {
        if x <= 0.0 || self.tilt.r == 0.0 {
            return 1.0;
        }
        match &self.repr {
            Repr::Exponential(b) => {
                1.0 + self.tilt.r * (0..3).map(|i| b.coeff[i] * expm1(b.beta[i] * x) / b.beta[i]).sum::<f64>()
            }
            Repr::DoubleZero { .. } => 1.0,
        }
    }

    /// `1 + excess ∫₀ˣ e^{−y} W(y) dy`.
    ///
    /// With `c = 0`, `r = q` and `excess = q − ψ(1)` this is
    /// `Z₁^{(q−ψ(1))}(x)`, since `W₁^{(q−ψ(1))}(y) = e^{−y} W^{(q)}(y)`.
    pub fn z_tilted_one(&self, excess: f64, x: f64) -> f64 {
        if x <= 0.0 || excess == 0.0 {
            return 1.0;
        }
        match &self.repr {
            Repr::Exponential(b) => {
                1.0 + excess * (0..3).map(|i| b.coeff[i] * exp_integral(b.beta[i] - 1.0, x)).sum::<f64>()
            }
            // Only reachable for r = 0, where excess = −ψ(1) ≤ 0 and callers
            // never ask for it; integrate the closed form anyway.
            &Repr::DoubleZero { beta1, a, sigma2 } => {
                let k = 2.0 / sigma2;
                let lin = -a / beta1;
                let ex = (a + beta1) / (beta1 * beta1);
                // ∫₀ˣ e^{−y}[ex (e^{β₁y} − 1) + lin y] dy
                let int_exp = exp_integral(beta1 - 1.0, x) - exp_integral(-1.0, x);
                let int_lin = 1.0 - exp(-x) * (1.0 + x);
                1.0 + excess * k * (ex * int_exp + lin * int_lin)
            }
        }
    }

    /// `E_x[e^{−rτ_a⁺}; τ_a⁺ < τ_0⁻] = W(x ∧ a)/W(a)`.
    pub fn exit_up_probability(&self, x: f64, a: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= a {
            return 1.0;
        }
        self.w(x) / self.w(a)
    }

    /// `E_x[e^{−rτ_0⁻}; τ_0⁻ < ∞] = Z(x) − (r/Φ(r)) W(x)`.
    ///
    /// Uses `Σ Cᵢ/βᵢ = 1/r` to drop the `e^{β₃x}` terms analytically, which
    /// keeps the value accurate for large `x`. Requires `r > 0`.
    pub fn ruin_transform(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match &self.repr {
            Repr::Exponential(b) => {
                let r = self.tilt.r;
                let phi = b.beta[2];
                r * (0..2).map(|i| b.coeff[i] * (1.0 / b.beta[i] - 1.0 / phi) * exp(b.beta[i] * x)).sum::<f64>()
            }
            Repr::DoubleZero { .. } => 1.0,
        }
    }

    /// `q`-resolvent density at level `t` of the process started at `s > 0`
    /// and killed below 0: `e^{−Φ t} W(s) − W(s − t)` for `t ≥ 0`, zero below.
    pub fn resolvent_density(&self, s: f64, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        exp(-self.phi() * t) * self.w(s) - self.w(s - t)
    }
}

/// `∫₀ˣ e^{b y} dy`, with the `b → 0` limit.
pub(crate) fn exp_integral(b: f64, x: f64) -> f64 {
    if b.abs() < UNIT_ROOT_GAP {
        x
    } else {
        expm1(b * x) / b
    }
}

/// `W_c^{(r)}(x)`.
pub fn w(params: &ModelParams, tilt: TiltIndex, x: f64) -> Result<f64, Error> {
    Ok(ScaleFunctions::new(params, tilt)?.w(x))
}

/// `Z_c^{(r)}(x)`.
pub fn z(params: &ModelParams, tilt: TiltIndex, x: f64) -> Result<f64, Error> {
    Ok(ScaleFunctions::new(params, tilt)?.z(x))
}

/// `Z₁^{(q−ψ(1))}(x)`; requires `q ≥ ψ(1)`.
pub fn z_tilted_1(params: &ModelParams, q: f64, x: f64) -> Result<f64, Error> {
    let psi_one = params.check_discount(q)?;
    let excess = if crate::model::is_risk_neutral(psi_one, q) { 0.0 } else { q - psi_one };
    Ok(ScaleFunctions::untilted(params, q)?.z_tilted_one(excess, x))
}

pub fn exit_up_probability(params: &ModelParams, q: f64, x: f64, a: f64) -> Result<f64, Error> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter { name: "a", value: a });
    }
    Ok(ScaleFunctions::untilted(params, q)?.exit_up_probability(x, a))
}

pub fn ruin_transform(params: &ModelParams, q: f64, x: f64) -> Result<f64, Error> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter { name: "q", value: q });
    }
    Ok(ScaleFunctions::untilted(params, q)?.ruin_transform(x))
}

pub fn resolvent_density(params: &ModelParams, q: f64, s: f64, t: f64) -> Result<f64, Error> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter { name: "s", value: s });
    }
    Ok(ScaleFunctions::untilted(params, q)?.resolvent_density(s, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> ModelParams {
        ModelParams::risk_neutral(0.4, 1.0, 2.0, 0.05).unwrap()
    }

    #[test]
    fn damped_w_stays_finite() {
        let s = ScaleFunctions::untilted(&p0(), 0.05).unwrap();
        let x = 2.5;
        assert!((s.w_damped(x, 1.5) / ((-1.5 * x).exp() * s.w(x)) - 1.0).abs() < 1e-13);
        // W(800) overflows; the damped form does not.
        assert!(s.w(800.0).is_infinite() || s.w(800.0) > 1e300);
        let far = s.w_damped(800.0, s.phi() + 0.5);
        assert!(far.is_finite() && far > 0.0 && far < 1e-100);
    }

    #[test]
    fn w_support_and_origin() {
        let s = ScaleFunctions::untilted(&p0(), 0.05).unwrap();
        assert_eq!(s.w(-1.0), 0.0);
        assert_eq!(s.w(0.0), 0.0);
        assert!((s.w_prime(0.0) - 2.0 / 0.16).abs() < 1e-10);
    }

    #[test]
    fn z_is_one_off_support_and_without_killing() {
        let s = ScaleFunctions::untilted(&p0(), 0.05).unwrap();
        assert_eq!(s.z(-2.0), 1.0);
        assert_eq!(s.z(0.0), 1.0);
        let s0 = ScaleFunctions::new(&p0(), TiltIndex::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(s0.z(3.0), 1.0);
    }

    #[test]
    fn z_tilted_is_one_at_risk_neutral_discount() {
        assert_eq!(z_tilted_1(&p0(), 0.05, 2.0).unwrap(), 1.0);
        assert_eq!(z_tilted_1(&p0(), 0.1, -1.0).unwrap(), 1.0);
        assert!(matches!(z_tilted_1(&p0(), 0.01, 1.0), Err(Error::AssumptionViolated { .. })));
    }

    #[test]
    fn exit_and_ruin_edges() {
        let p = p0();
        assert_eq!(exit_up_probability(&p, 0.05, -0.3, 1.0).unwrap(), 0.0);
        assert_eq!(exit_up_probability(&p, 0.05, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(ruin_transform(&p, 0.05, -0.5).unwrap(), 1.0);
        assert!(ruin_transform(&p, 0.05, 150.0).unwrap() < 1e-6);
        assert!((ruin_transform(&p, 0.05, 1e-300).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resolvent_density_edges() {
        let s = ScaleFunctions::untilted(&p0(), 0.05).unwrap();
        assert_eq!(s.resolvent_density(1.0, 0.0), 0.0);
        let beyond = s.resolvent_density(1.0, 1.5);
        assert!((beyond - (-s.phi() * 1.5).exp() * s.w(1.0)).abs() < 1e-15);
        assert_eq!(s.resolvent_density(1.0, -1.0), 0.0);
    }
}
