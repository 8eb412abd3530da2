//! Exact-jump, grid-plus-jump-times simulation of
//! `X_t = x₀ + μt + σB_t − Σ_{i ≤ N_t} ξᵢ`.

use mckean_core::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

/// One sub-interval `(t0, t1]` of a path.
///
/// The Gaussian increment carries `start` to `before` at `t1−`; if a jump
/// occurs at `t1` the path then drops to `end`. `u_min` and `u_max` drive the
/// Brownian-bridge extreme of the continuous piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// 1-based position along the path.
    pub index: u64,
    pub t0: f64,
    pub t1: f64,
    pub start: f64,
    pub before: f64,
    pub end: f64,
    pub jump: bool,
    pub u_min: f64,
    pub u_max: f64,
}

/// Streams the steps of one path without storing them.
#[derive(Debug, Clone)]
pub struct Stepper {
    mu: f64,
    sigma: f64,
    lambda: f64,
    theta: f64,
    dt: f64,
    sd_dt: f64,
    horizon: f64,
    rng: Xoshiro256PlusPlus,
    t: f64,
    x: f64,
    grid: u64,
    on_grid: bool,
    index: u64,
    next_jump: f64,
}

impl Stepper {
    /// Path `path` of the family seeded by `seed`. The path generator is keyed
    /// by ChaCha stream `path` of `seed`, so results do not depend on how
    /// paths are scheduled.
    pub fn new(params: &ModelParams, x0: f64, horizon: f64, dt: f64, seed: u64, path: u64) -> Self {
        let mut key = ChaCha8Rng::seed_from_u64(seed);
        key.set_stream(path);
        let mut rng = Xoshiro256PlusPlus::from_rng(&mut key);
        let lambda = params.lambda();
        let next_jump = if lambda > 0.0 { rng.sample::<f64, _>(Exp1) / lambda } else { f64::INFINITY };
        Self {
            mu: params.mu(),
            sigma: params.sigma(),
            lambda,
            theta: params.theta(),
            dt,
            sd_dt: params.sigma() * dt.sqrt(),
            horizon,
            rng,
            t: 0.0,
            x: x0,
            grid: 0,
            on_grid: true,
            index: 0,
            next_jump,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn position(&self) -> f64 {
        self.x
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Iterator for Stepper {
    type Item = Step;

    #[inline]
    fn next(&mut self) -> Option<Step> {
        if self.t >= self.horizon {
            return None;
        }
        let next_grid = (self.grid + 1) as f64 * self.dt;
        let t1 = next_grid.min(self.next_jump).min(self.horizon);
        let h = t1 - self.t;
        let z: f64 = self.rng.sample(StandardNormal);
        let full = self.on_grid && t1 == next_grid;
        let sd = if full { self.sd_dt } else { self.sigma * h.sqrt() };
        let before = self.x + self.mu * h + sd * z;
        let bits: u64 = self.rng.random();
        let u_min = ((bits >> 32) as f64 + 0.5) * (1.0 / 4_294_967_296.0);
        let u_max = ((bits & 0xffff_ffff) as f64 + 0.5) * (1.0 / 4_294_967_296.0);
        let jump = self.next_jump <= t1;
        let end = if jump {
            let size = self.rng.sample::<f64, _>(Exp1) / self.theta;
            self.next_jump = t1 + self.rng.sample::<f64, _>(Exp1) / self.lambda;
            before - size
        } else {
            before
        };
        self.on_grid = t1 >= next_grid;
        if self.on_grid {
            self.grid += 1;
        }
        self.index += 1;
        let step = Step { index: self.index, t0: self.t, t1, start: self.x, before, end, jump, u_min, u_max };
        self.t = t1;
        self.x = end;
        Some(step)
    }
}

/// A stored path: the union of the regular grid and the jump times, with the
/// bridge uniforms of every step so that stopping rules can be replayed.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub start: f64,
    pub grid_step: f64,
    pub horizon: f64,
    pub sigma: f64,
    pub steps: Vec<Step>,
}

impl PathRecord {
    /// `(time, value)` at every step end, post-jump.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        std::iter::once((0.0, self.start)).chain(self.steps.iter().map(|s| (s.t1, s.end)))
    }

    /// `(time, size)` of every jump; sizes are positive downward moves.
    pub fn jump_times(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.steps.iter().filter(|s| s.jump).map(|s| (s.t1, s.before - s.end))
    }

    pub fn terminal(&self) -> f64 {
        self.steps.last().map_or(self.start, |s| s.end)
    }
}

/// Simulates path 0 of the family seeded by `seed` up to `horizon`.
pub fn simulate(params: &ModelParams, x0: f64, horizon: f64, dt: f64, seed: u64) -> PathRecord {
    simulate_path(params, x0, horizon, dt, seed, 0)
}

pub fn simulate_path(params: &ModelParams, x0: f64, horizon: f64, dt: f64, seed: u64, path: u64) -> PathRecord {
    let steps = Stepper::new(params, x0, horizon, dt, seed, path).collect();
    PathRecord { start: x0, grid_step: dt, horizon, sigma: params.sigma(), steps }
}
