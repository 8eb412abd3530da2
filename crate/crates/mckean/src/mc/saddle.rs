use mckean_core::{Error, McKeanGame, Regime};

use super::{estimate_pairs, PayoffEstimate, SimConfig, Strategy};

/// Which inequality of the saddle point a check tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `M(τ*, σ*) = V`.
    Equilibrium,
    /// `M(τ, σ*) ≤ V`.
    Maximiser,
    /// `M(τ*, σ) ≥ V`.
    Minimiser,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Equilibrium => "equilibrium",
            Side::Maximiser => "maximiser_deviation",
            Side::Minimiser => "minimiser_deviation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleCheck {
    pub side: Side,
    pub tau: Strategy,
    pub sigma: Strategy,
    pub estimate: PayoffEstimate,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleReport {
    pub start: f64,
    pub penalty: f64,
    pub regime: Regime,
    pub checks: Vec<SaddleCheck>,
}

impl SaddleReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Tolerance of every check, in standard errors.
pub const SADDLE_SE: f64 = 3.0;

/// Perturbation sizes for both players' thresholds.
pub const PERTURBATIONS: [f64; 2] = [0.1, 0.3];

/// The equilibrium pair and its deviations: the maximiser moves `x*` by
/// `±ε`; the minimiser moves `y*` by `±ε` (kept at or above `log K`) or
/// never cancels.
pub fn strategies(game: &McKeanGame, delta: f64) -> Result<(Regime, Vec<(Side, Strategy, Strategy)>), Error> {
    let sol = game.solve(delta)?;
    let log_k = game.log_strike();
    let boundary = sol.x_star.unwrap_or(sol.put.k_star);
    let tau_star = Strategy::PassageBelow(boundary);
    let sigma_star = match sol.regime {
        Regime::NoCancel => Strategy::Never,
        Regime::PointCancel => Strategy::HitLevel(log_k),
        Regime::IntervalCancel => Strategy::EnterInterval(log_k, sol.y_star.unwrap()),
    };
    let y_star = sol.y_star.unwrap_or(log_k);
    let mut out = vec![(Side::Equilibrium, tau_star, sigma_star)];
    for eps in PERTURBATIONS {
        for shift in [-eps, eps] {
            out.push((Side::Maximiser, Strategy::PassageBelow(boundary + shift), sigma_star));
        }
    }
    if sol.regime != Regime::NoCancel {
        for eps in PERTURBATIONS {
            for shift in [-eps, eps] {
                let top = (y_star + shift).max(log_k);
                let rule = if top == log_k { Strategy::HitLevel(log_k) } else { Strategy::EnterInterval(log_k, top) };
                if rule != sigma_star {
                    out.push((Side::Minimiser, tau_star, rule));
                }
            }
        }
        out.push((Side::Minimiser, tau_star, Strategy::Never));
    }
    Ok((sol.regime, out))
}

/// Checks `M_x(τ, σ*) ≤ M_x(τ*, σ*) = V(x) ≤ M_x(τ*, σ)` by simulation, each
/// inequality allowed [`SADDLE_SE`] standard errors of slack.
pub fn verify_saddle(game: &McKeanGame, delta: f64, x0: f64, cfg: &SimConfig) -> Result<SaddleReport, Error> {
    let (regime, rules) = strategies(game, delta)?;
    let value = game.solve(delta)?.value_at(x0);
    let pairs: Vec<(Strategy, Strategy)> = rules.iter().map(|&(_, t, s)| (t, s)).collect();
    let estimates = estimate_pairs(game.params(), game.discount(), game.strike(), delta, x0, &pairs, cfg);
    let checks = rules
        .iter()
        .zip(estimates)
        .map(|(&(side, tau, sigma), estimate)| {
            let slack = SADDLE_SE * estimate.std_error;
            let pass = match side {
                Side::Equilibrium => (estimate.mean - value).abs() <= slack,
                Side::Maximiser => estimate.mean <= value + slack,
                Side::Minimiser => estimate.mean >= value - slack,
            };
            SaddleCheck { side, tau, sigma, estimate, value, pass }
        })
        .collect();
    Ok(SaddleReport { start: x0, penalty: delta, regime, checks })
}
