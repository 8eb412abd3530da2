//! Quadrature evaluations of the jump-integral equations. These are
//! independent of the closed forms in the parent module and serve as their
//! cross-checks.

use libm::{exp, log};

use super::McKeanGame;
use crate::quad::{bisect, integrate, integrate_pieces, QuadConfig};
use crate::Error;

const TAIL: f64 = 1e-16;

impl McKeanGame {
    /// `∫_{t<0} (w_δ(t + y) − δ) e^{θt} dt` by adaptive quadrature, where
    /// `w_δ = V` below `log K` and `δ` above. Requires `y ≥ log K`.
    pub fn reduced_jump_integral_quadrature(&self, delta: f64, y: f64) -> Result<f64, Error> {
        if !(y >= self.log_strike) {
            return Err(Error::InvalidParameter { name: "y", value: y });
        }
        let x_star = self.x_star_unchecked(delta)?;
        let theta = self.params.theta();
        let top = self.log_strike - y;
        let kink = x_star - y;
        // Below `bottom` the integrand is bounded by K e^{θt} and its mass by TAIL.
        let bottom = (log(TAIL * theta / self.strike) / theta).min(kink - 1.0);
        let integrand = |t: f64| (self.value_below_strike(x_star, t + y) - delta) * exp(theta * t);
        integrate_pieces(integrand, &[bottom, kink, top], QuadConfig::default())
    }

    fn jump_equation_quadrature(&self, delta: f64, y: f64) -> Result<f64, Error> {
        let theta = self.params.theta();
        let phi = self.phi();
        let m = self.reduced_jump_integral_quadrature(delta, y)?;
        Ok(self.params.lambda() * theta / (phi + theta) * m - delta * self.q / phi)
    }

    /// `δ₀` by bisection on the quadrature-evaluated threshold equation.
    pub fn delta_0_quadrature(&self) -> Result<f64, Error> {
        if self.params.lambda() == 0.0 {
            return Err(Error::DegenerateJumps);
        }
        let bar = self.delta_bar();
        let mut err = None;
        let root = bisect(
            |d| match self.jump_equation_quadrature(d, self.log_strike) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            bar * 1e-12,
            bar * (1.0 - 1e-12),
            1e-13 * bar,
        );
        match err {
            Some(e) => Err(e),
            None => root,
        }
    }

    /// `y*` by bisection on the quadrature-evaluated smooth-fit equation,
    /// doubling the bracket above `log K` until the sign changes.
    pub fn y_star_quadrature(&self, delta: f64) -> Result<f64, Error> {
        if self.params.lambda() == 0.0 {
            return Err(Error::DegenerateJumps);
        }
        if !(delta > 0.0 && delta < self.delta_0) {
            return Err(Error::Regime { delta });
        }
        let lo = self.log_strike;
        let mut width = 1.0;
        while self.jump_equation_quadrature(delta, lo + width)? > 0.0 {
            width *= 2.0;
            if width > 1e6 {
                return Err(Error::Nonconvergence { what: "bracketing y*" });
            }
        }
        let mut err = None;
        let root = bisect(
            |y| match self.jump_equation_quadrature(delta, y) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            lo,
            lo + width,
            1e-13,
        );
        match err {
            Some(e) => Err(e),
            None => root,
        }
    }

    /// `h(x, y) = E_x[e^{−qτ_y⁻} w_δ(X_{τ_y⁻})]`, the maximiser's value when
    /// the minimiser stops on `[log K, y]`, via the compensation formula:
    ///
    /// ```text
    /// h = λθ M(y) (W(d)/(Φ+θ) − ∫₀ᵈ W(d−v) e^{−θv} dv) + δ (Z(d) − q/Φ W(d)),  d = x − y,
    /// ```
    ///
    /// with `M(y)` from [`reduced_jump_integral_quadrature`](Self::reduced_jump_integral_quadrature).
    pub fn h_oracle(&self, delta: f64, x: f64, y: f64) -> Result<f64, Error> {
        if !(delta > 0.0 && delta <= self.delta_bar()) {
            return Err(Error::Regime { delta });
        }
        if !(x > y && y >= self.log_strike) {
            return Err(Error::InvalidParameter { name: "x", value: x });
        }
        let theta = self.params.theta();
        let phi = self.phi();
        let d = x - y;
        let m = self.reduced_jump_integral_quadrature(delta, y)?;
        let w = &self.scale;
        let convolution = integrate(|v| w.w(d - v) * exp(-theta * v), 0.0, d, QuadConfig::default())?;
        let jumps = self.params.lambda() * theta * m * (w.w(d) / (phi + theta) - convolution);
        Ok(jumps + delta * (w.z(d) - self.q / phi * w.w(d)))
    }
}
