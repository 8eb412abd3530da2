use alloc::vec::Vec;

use libm::exp;

use crate::scale::ScaleFunctions;

/// Closed form used on one interval of the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// `K − eˣ`.
    Intrinsic,
    /// `K Z(x − b) − eˣ Z₁(x − b)` anchored at the maximiser's boundary `b`.
    ScaleExpansion { boundary: f64 },
    /// The constant upper payoff `δ`.
    Constant(f64),
    /// `a₁ e^{r₁(x−o)} + a₂ e^{r₂(x−o)}` with negative rates.
    TwoExponential { origin: f64, coeff: [f64; 2], rate: [f64; 2] },
}

/// A segment valid on `(previous upper, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub upper: f64,
    pub segment: Segment,
}

/// Value function as an ordered list of closed-form pieces; the last piece
/// extends to `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseValue {
    strike: f64,
    excess: f64,
    scale: ScaleFunctions,
    pieces: Vec<Piece>,
}

impl PiecewiseValue {
    pub(crate) fn new(strike: f64, excess: f64, scale: ScaleFunctions, pieces: Vec<Piece>) -> Self {
        debug_assert!(pieces.windows(2).all(|w| w[0].upper <= w[1].upper));
        debug_assert!(pieces.last().is_some_and(|p| p.upper == f64::INFINITY));
        Self { strike, excess, scale, pieces }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints in increasing order.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces[..self.pieces.len() - 1].iter().map(|p| p.upper)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.pieces.iter().position(|p| x <= p.upper).unwrap_or(self.pieces.len() - 1);
        self.eval_piece(idx, x)
    }

    /// Evaluates the closed form of piece `idx` at `x`, even outside the
    /// piece's interval (used for continuity checks at breakpoints).
    pub fn eval_piece(&self, idx: usize, x: f64) -> f64 {
        match self.pieces[idx].segment {
            Segment::Intrinsic => self.strike - exp(x),
            Segment::ScaleExpansion { boundary } => {
                let d = x - boundary;
                self.strike * self.scale.z(d) - exp(x) * self.scale.z_tilted_one(self.excess, d)
            }
            Segment::Constant(c) => c,
            Segment::TwoExponential { origin, coeff, rate } => {
                let d = x - origin;
                coeff[0] * exp(rate[0] * d) + coeff[1] * exp(rate[1] * d)
            }
        }
    }
}
