//! Estimators for the one- and two-sided exit identities and the killed
//! occupation measure.

use std::cmp::Ordering;

use mckean_core::ModelParams;

use super::{fires_at_start, fires_in_step, run, PayoffEstimate, SimConfig, Strategy};

/// `E_x[e^{−qτ_a⁺}; τ_a⁺ < τ_0⁻]`.
pub fn estimate_exit_up(params: &ModelParams, q: f64, x: f64, a: f64, cfg: &SimConfig) -> PayoffEstimate {
    let up = Strategy::EnterInterval(a, f64::INFINITY);
    let down = Strategy::PassageBelow(0.0);
    run(params, x, cfg, 1, |stepper, values, truncated| {
        let sigma = stepper.sigma();
        let (mut hit_up, mut hit_down) = (fires_at_start(&up, x), fires_at_start(&down, x));
        if hit_up.is_none() && hit_down.is_none() {
            for step in stepper.by_ref() {
                hit_up = fires_in_step(&up, &step, sigma);
                hit_down = fires_in_step(&down, &step, sigma);
                if hit_up.is_some() || hit_down.is_some() {
                    break;
                }
            }
        }
        values[0] = match (hit_up, hit_down) {
            (Some(u), Some(d)) if d.cmp_event(&u) == Ordering::Less => 0.0,
            (Some(u), _) => (-q * u.time).exp(),
            _ => 0.0,
        };
        truncated[0] = hit_up.is_none() && hit_down.is_none();
    })[0]
}

/// `E_x[e^{−qτ_0⁻}; τ_0⁻ < ∞]`.
pub fn estimate_ruin(params: &ModelParams, q: f64, x: f64, cfg: &SimConfig) -> PayoffEstimate {
    let down = Strategy::PassageBelow(0.0);
    run(params, x, cfg, 1, |stepper, values, truncated| {
        let sigma = stepper.sigma();
        let stop = fires_at_start(&down, x).or_else(|| stepper.find_map(|s| fires_in_step(&down, &s, sigma)));
        values[0] = stop.map_or(0.0, |s| (-q * s.time).exp());
        truncated[0] = stop.is_none();
    })[0]
}

/// `E_x ∫₀^{τ_0⁻} e^{−qt} f(X_t) dt`, by the trapezoid rule on each step.
pub fn estimate_occupation<F>(params: &ModelParams, q: f64, x: f64, f: F, cfg: &SimConfig) -> PayoffEstimate
where
    F: Fn(f64) -> f64 + Sync,
{
    let down = Strategy::PassageBelow(0.0);
    run(params, x, cfg, 1, |stepper, values, truncated| {
        let sigma = stepper.sigma();
        let mut acc = 0.0;
        let mut stopped = fires_at_start(&down, x).is_some();
        if !stopped {
            for step in stepper.by_ref() {
                let h = step.t1 - step.t0;
                let stop = fires_in_step(&down, &step, sigma);
                let left = (-q * step.t0).exp() * f(step.start);
                let right = if stop.is_some() { 0.0 } else { (-q * step.t1).exp() * f(step.before) };
                acc += 0.5 * h * (left + right);
                if stop.is_some() {
                    stopped = true;
                    break;
                }
            }
        }
        values[0] = acc;
        truncated[0] = !stopped;
    })[0]
}
