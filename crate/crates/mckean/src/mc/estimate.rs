use mckean_core::ModelParams;
use rayon::prelude::*;

use super::{fires_at_start, fires_in_step, payoff_from_stops, Stepper, Stop, Strategy};

/// Monte Carlo run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: u64,
    pub dt: f64,
    pub seed: u64,
    /// Paths still running at this time contribute zero.
    pub horizon: f64,
    /// Paths per parallel work unit; part of the reproducibility key.
    pub batch: u64,
}

impl SimConfig {
    pub fn new(n_paths: u64, dt: f64, seed: u64, horizon: f64) -> Self {
        Self { n_paths, dt, seed, horizon, batch: 1024 }
    }

    /// Horizon with `e^{−qT}(K + δ) < 1e−4`.
    pub fn discounted_horizon(q: f64, strike: f64, delta: f64) -> f64 {
        ((strike + delta) / 1e-4).ln() / q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    /// Fraction of paths that reached the horizon undecided.
    pub truncation_mass: f64,
}

impl PayoffEstimate {
    /// `(mean − reference) / std_error`.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.mean - reference;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }

    pub fn within(&self, reference: f64, n_se: f64) -> bool {
        (self.mean - reference).abs() <= n_se * self.std_error
    }
}

#[derive(Debug, Clone)]
struct Sums {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    truncated: Vec<u64>,
}

impl Sums {
    fn new(n: usize) -> Self {
        Self { sum: vec![0.0; n], sum_sq: vec![0.0; n], truncated: vec![0; n] }
    }
}

/// Runs `cfg.n_paths` paths from `x0` and averages the `outputs` values that
/// `per_path` writes for each. `per_path` also flags outputs left undecided
/// at the horizon.
///
/// Batches run in parallel; their partial sums are combined in batch order,
/// so the result is identical for a fixed `(seed, n_paths, batch)`.
pub fn run<F>(params: &ModelParams, x0: f64, cfg: &SimConfig, outputs: usize, per_path: F) -> Vec<PayoffEstimate>
where
    F: Fn(&mut Stepper, &mut [f64], &mut [bool]) + Sync,
{
    let batch = cfg.batch.max(1);
    let n_batches = cfg.n_paths.div_ceil(batch);
    let partial: Vec<Sums> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut sums = Sums::new(outputs);
            let mut values = vec![0.0; outputs];
            let mut truncated = vec![false; outputs];
            for path in b * batch..((b + 1) * batch).min(cfg.n_paths) {
                values.fill(0.0);
                truncated.fill(false);
                let mut stepper = Stepper::new(params, x0, cfg.horizon, cfg.dt, cfg.seed, path);
                per_path(&mut stepper, &mut values, &mut truncated);
                for i in 0..outputs {
                    sums.sum[i] += values[i];
                    sums.sum_sq[i] += values[i] * values[i];
                    sums.truncated[i] += truncated[i] as u64;
                }
            }
            sums
        })
        .collect();

    let mut total = Sums::new(outputs);
    for part in &partial {
        for i in 0..outputs {
            total.sum[i] += part.sum[i];
            total.sum_sq[i] += part.sum_sq[i];
            total.truncated[i] += part.truncated[i];
        }
    }
    let n = cfg.n_paths as f64;
    (0..outputs)
        .map(|i| {
            let mean = total.sum[i] / n;
            let var = if cfg.n_paths > 1 { ((total.sum_sq[i] - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
            PayoffEstimate {
                mean,
                std_error: (var / n).sqrt(),
                n_paths: cfg.n_paths,
                truncation_mass: total.truncated[i] as f64 / n,
            }
        })
        .collect()
}

/// Estimates `M_x(τ, σ)` for every `(τ, σ)` pair on common paths.
pub fn estimate_pairs(
    params: &ModelParams,
    q: f64,
    strike: f64,
    delta: f64,
    x0: f64,
    pairs: &[(Strategy, Strategy)],
    cfg: &SimConfig,
) -> Vec<PayoffEstimate> {
    let mut rules: Vec<Strategy> = Vec::new();
    let mut index = |s: Strategy| match rules.iter().position(|r| *r == s) {
        Some(i) => i,
        None => {
            rules.push(s);
            rules.len() - 1
        }
    };
    let slots: Vec<(usize, usize)> = pairs.iter().map(|&(t, s)| (index(t), index(s))).collect();
    let rules = rules;

    run(params, x0, cfg, pairs.len(), |stepper, values, truncated| {
        let sigma = stepper.sigma();
        let mut stops: Vec<Option<Stop>> = rules.iter().map(|r| fires_at_start(r, x0)).collect();
        let resolved = |stops: &[Option<Stop>]| slots.iter().all(|&(t, s)| stops[t].is_some() || stops[s].is_some());
        // Rules that still matter: not fired and part of an unresolved pair.
        let mut live: Vec<usize> = Vec::with_capacity(rules.len());
        let refresh = |stops: &[Option<Stop>], live: &mut Vec<usize>| {
            live.clear();
            for (i, rule) in rules.iter().enumerate() {
                if stops[i].is_none()
                    && *rule != Strategy::Never
                    && slots.iter().any(|&(t, s)| (t == i || s == i) && stops[t].is_none() && stops[s].is_none())
                {
                    live.push(i);
                }
            }
        };
        refresh(&stops, &mut live);
        if !resolved(&stops) && !live.is_empty() {
            for step in stepper.by_ref() {
                let mut fired = false;
                for &i in &live {
                    if let Some(stop) = fires_in_step(&rules[i], &step, sigma) {
                        stops[i] = Some(stop);
                        fired = true;
                    }
                }
                if fired {
                    if resolved(&stops) {
                        break;
                    }
                    refresh(&stops, &mut live);
                    if live.is_empty() {
                        break;
                    }
                }
            }
        }
        for (k, &(t, s)) in slots.iter().enumerate() {
            let (tau, sig) = (stops[t].as_ref(), stops[s].as_ref());
            truncated[k] = tau.is_none() && sig.is_none();
            values[k] = payoff_from_stops(q, strike, delta, tau, sig);
        }
    })
}

/// `E_x[e^{−qτ_k⁻}(K − e^{X_{τ_k⁻}})⁺]`, the put value of the threshold rule.
pub fn estimate_put(params: &ModelParams, q: f64, strike: f64, x0: f64, k: f64, cfg: &SimConfig) -> PayoffEstimate {
    estimate_pairs(params, q, strike, 0.0, x0, &[(Strategy::PassageBelow(k), Strategy::Never)], cfg)[0]
}
