use core::fmt;

/// Errors raised by the analytic solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// A parameter is out of its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// `z` lies on or beyond the pole `−θ` of the Laplace exponent.
    Pole { z: f64 },
    /// `0 ≤ ψ(1) ≤ q`, `q > 0` does not hold.
    AssumptionViolated { psi_one: f64, discount: f64 },
    /// `β₂ = β₃`: the exponential-sum scale representation does not exist.
    DegenerateRoots,
    /// An iterative method did not reach its tolerance.
    Nonconvergence { what: &'static str },
    /// The operation needs jumps (`λ > 0`).
    DegenerateJumps,
    /// The penalty does not belong to the regime the operation requires.
    Regime { delta: f64 },
    /// A closed form produced a value outside its proven range.
    Inconsistency { what: &'static str, value: f64 },
    /// Adaptive quadrature failed to meet its tolerance.
    Quadrature { estimate: f64, error: f64 },
    /// A bracketing method found no sign change.
    NoBracket { lo: f64, hi: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value {value} for parameter `{name}`")
            }
            Error::Pole { z } => write!(f, "laplace exponent evaluated at or beyond its pole (z = {z})"),
            Error::AssumptionViolated { psi_one, discount } => write!(
                f,
                "need 0 <= psi(1) <= q and q > 0, got psi(1) = {psi_one}, q = {discount}"
            ),
            Error::DegenerateRoots => write!(f, "beta_2 = beta_3, use the double-root scale form"),
            Error::Nonconvergence { what } => write!(f, "{what} did not converge"),
            Error::DegenerateJumps => write!(f, "operation requires a nonzero jump intensity"),
            Error::Regime { delta } => write!(f, "penalty {delta} is outside the regime this operation requires"),
            Error::Inconsistency { what, value } => write!(f, "{what} is inconsistent (value {value})"),
            Error::Quadrature { estimate, error } => {
                write!(f, "quadrature did not converge (estimate {estimate}, error {error})")
            }
            Error::NoBracket { lo, hi } => write!(f, "no sign change on [{lo}, {hi}]"),
        }
    }
}

impl core::error::Error for Error {}
