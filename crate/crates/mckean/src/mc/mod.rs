//! Monte Carlo verification of the game solution and of the fluctuation
//! identities.
//!
//! Paths use exact jump times on top of a regular grid. Between consecutive
//! event times the continuous part is a Brownian bridge, and barrier
//! crossings inside a step are sampled from the bridge extreme, so first
//! passage is not biased by the grid. All strategies of an estimate are
//! evaluated on the same paths.

mod estimate;
mod identities;
mod path;
mod saddle;

pub use estimate::{estimate_pairs, estimate_put, run, PayoffEstimate, SimConfig};
pub use identities::{estimate_exit_up, estimate_occupation, estimate_ruin};
pub use path::{simulate, simulate_path, PathRecord, Step, Stepper};
pub use saddle::{strategies, verify_saddle, SaddleCheck, SaddleReport, Side, PERTURBATIONS, SADDLE_SE};

use std::cmp::Ordering;

/// Declarative stopping rule, in log-price units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// `τ_a⁻ = inf{t : X_t < a}`.
    PassageBelow(f64),
    /// `T_{[a,b]} = inf{t : X_t ∈ [a, b]}`.
    EnterInterval(f64, f64),
    /// `inf{t : X_t = b}`.
    HitLevel(f64),
    Never,
}

impl Strategy {
    /// Closed interval for the entry rules.
    fn interval(&self) -> Option<(f64, f64)> {
        match *self {
            Strategy::EnterInterval(a, b) => Some((a, b)),
            Strategy::HitLevel(b) => Some((b, b)),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Strategy::PassageBelow(a) => format!("passage_below({a:.6})"),
            Strategy::EnterInterval(a, b) => format!("enter_interval({a:.6},{b:.6})"),
            Strategy::HitLevel(b) => format!("hit_level({b:.6})"),
            Strategy::Never => "never".to_owned(),
        }
    }
}

/// When and where a strategy fires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stop {
    pub time: f64,
    pub value: f64,
    step: u64,
    phase: u8,
    /// Distance travelled from the step start before a continuous crossing.
    order: f64,
}

impl Stop {
    fn at_start(x0: f64) -> Self {
        Stop { time: 0.0, value: x0, step: 0, phase: 0, order: 0.0 }
    }

    fn continuous(step: &Step, level: f64) -> Self {
        Stop {
            time: 0.5 * (step.t0 + step.t1),
            value: level,
            step: step.index,
            phase: 1,
            order: (step.start - level).abs(),
        }
    }

    fn jump(step: &Step) -> Self {
        Stop { time: step.t1, value: step.end, step: step.index, phase: 2, order: 0.0 }
    }

    /// Event order along the path; equal keys are simultaneous.
    pub fn cmp_event(&self, other: &Stop) -> Ordering {
        (self.step, self.phase)
            .cmp(&(other.step, other.phase))
            .then(self.order.total_cmp(&other.order))
    }
}

/// Probability that a Brownian bridge over time `h` with endpoints at
/// distances `d0, d1 > 0` from a level reaches it.
#[inline]
fn bridge_hit(d0: f64, d1: f64, sigma2_h: f64) -> f64 {
    let e = -2.0 * d0 * d1 / sigma2_h;
    if e < -40.0 {
        0.0
    } else {
        e.exp()
    }
}

/// Checks the rule at time 0.
pub fn fires_at_start(strategy: &Strategy, x0: f64) -> Option<Stop> {
    let hit = match *strategy {
        Strategy::PassageBelow(a) => x0 <= a,
        Strategy::Never => false,
        _ => {
            let (a, b) = strategy.interval().unwrap();
            a <= x0 && x0 <= b
        }
    };
    hit.then(|| Stop::at_start(x0))
}

/// Checks the rule along one step, assuming it has not fired before.
#[inline]
pub fn fires_in_step(strategy: &Strategy, step: &Step, sigma: f64) -> Option<Stop> {
    let sigma2_h = sigma * sigma * (step.t1 - step.t0);
    match *strategy {
        Strategy::Never => None,
        Strategy::PassageBelow(a) => {
            let (x0, x1) = (step.start, step.before);
            if x1 < a || step.u_min < bridge_hit(x0 - a, x1 - a, sigma2_h) {
                Some(Stop::continuous(step, a))
            } else if step.jump && step.end < a {
                Some(Stop::jump(step))
            } else {
                None
            }
        }
        _ => {
            let (a, b) = strategy.interval().unwrap();
            let (x0, x1) = (step.start, step.before);
            let continuous = if x0 > b {
                x1 <= b || step.u_min < bridge_hit(x0 - b, x1 - b, sigma2_h)
            } else {
                // x0 < a: only an up-crossing of a reaches the interval.
                x1 >= a || step.u_max < bridge_hit(a - x0, a - x1, sigma2_h)
            };
            if continuous {
                Some(Stop::continuous(step, if x0 > b { b } else { a }))
            } else if step.jump && a <= step.end && step.end <= b {
                Some(Stop::jump(step))
            } else {
                None
            }
        }
    }
}

/// First time the rule fires on a stored path.
pub fn first_stop(path: &PathRecord, strategy: &Strategy) -> Option<Stop> {
    fires_at_start(strategy, path.start)
        .or_else(|| path.steps.iter().find_map(|s| fires_in_step(strategy, s, path.sigma)))
}

/// Game payoff for the maximiser: `e^{−qτ}(K − e^{X_τ})⁺` if `τ ≤ σ`,
/// `e^{−qσ}((K − e^{X_σ})⁺ + δ)` if `σ < τ`, zero if neither fires.
pub fn payoff_from_stops(q: f64, strike: f64, delta: f64, tau: Option<&Stop>, sig: Option<&Stop>) -> f64 {
    let put = |s: &Stop| (strike - s.value.exp()).max(0.0);
    match (tau, sig) {
        (Some(t), Some(s)) if s.cmp_event(t) == Ordering::Less => (-q * s.time).exp() * (put(s) + delta),
        (Some(t), _) => (-q * t.time).exp() * put(t),
        (None, Some(s)) => (-q * s.time).exp() * (put(s) + delta),
        (None, None) => 0.0,
    }
}

/// [`payoff_from_stops`] on a stored path.
pub fn payoff(q: f64, strike: f64, delta: f64, path: &PathRecord, tau: &Strategy, sig: &Strategy) -> f64 {
    payoff_from_stops(q, strike, delta, first_stop(path, tau).as_ref(), first_stop(path, sig).as_ref())
}
