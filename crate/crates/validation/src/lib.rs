//! Acceptance criteria for the solver, each returning a pass flag and a
//! one-line summary. The `acceptance` test target runs them all.

use std::time::{Duration, Instant};

use mckean::cli::run_from;
use mckean::mc::{estimate_exit_up, estimate_ruin, SimConfig};
use mckean::verify::{default_starts, laplace_quadrature, saddle};
use mckean_core::model::solve_roots;
use mckean_core::put::{solve_general, solve_put};
use mckean_core::{CubicBasis, McKeanGame, ModelParams, Regime, ScaleFunctions, TiltIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STRIKE: f64 = 5.0;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

/// Worst value seen and where; `note` keeps the first description of a violation.
#[derive(Default)]
struct Tally {
    worst: f64,
    failures: usize,
    note: Option<String>,
}

impl Tally {
    fn bound(&mut self, observed: f64, tolerance: f64, what: impl FnOnce() -> String) {
        let observed = if observed.is_nan() { f64::INFINITY } else { observed };
        self.worst = self.worst.max(observed / tolerance);
        if observed > tolerance {
            self.fail(what);
        }
    }

    fn holds(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.fail(what);
        }
    }

    fn fail(&mut self, what: impl FnOnce() -> String) {
        self.failures += 1;
        if self.note.is_none() {
            self.note = Some(what());
        }
    }

    fn outcome(self, summary: String) -> Outcome {
        match self.note {
            None => Outcome::new(true, summary),
            Some(n) => Outcome::new(false, format!("{summary}; {} violation(s), first: {n}", self.failures)),
        }
    }
}

fn p0_params() -> ModelParams {
    ModelParams::risk_neutral(0.4, 1.0, 2.0, 0.05).unwrap()
}

fn p0() -> McKeanGame {
    McKeanGame::new(p0_params(), STRIKE, 0.05).unwrap()
}

/// Risk-neutral and strictly-discounted games used by the analytic suites.
fn games() -> Vec<McKeanGame> {
    let mut out = vec![p0(), McKeanGame::new(p0_params(), STRIKE, 0.1).unwrap()];
    for &(sigma, lambda, theta, q_rn, q) in &[
        (0.25, 0.5, 3.0, 0.03, 0.03),
        (0.6, 2.0, 1.5, 0.08, 0.08),
        (0.3, 1.5, 4.0, 0.05, 0.12),
        (0.5, 0.7, 2.5, 0.02, 0.04),
    ] {
        let params = ModelParams::risk_neutral(sigma, lambda, theta, q_rn).unwrap();
        out.push(McKeanGame::new(params, STRIKE, q).unwrap());
    }
    out
}

fn penalties(g: &McKeanGame) -> Vec<f64> {
    let (d0, bar) = (g.delta_0(), g.delta_bar());
    vec![d0 * 0.1, d0 * 0.5, d0 * 0.9, d0, 0.5 * (d0 + bar), bar * 0.999, bar, bar * 1.5]
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}

/// Richardson-extrapolated one-sided difference quotient.
fn one_sided_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64, dir: f64) -> f64 {
    const LEVELS: usize = 5;
    let mut table = [[0.0; LEVELS]; LEVELS];
    let fx = f(x);
    for i in 0..LEVELS {
        let hi = h / f64::powi(2.0, i as i32);
        table[i][0] = (f(x + dir * hi) - fx) / (dir * hi);
        for j in 1..=i {
            let p = f64::powi(2.0, j as i32);
            table[i][j] = (p * table[i][j - 1] - table[i - 1][j - 1]) / (p - 1.0);
        }
    }
    table[LEVELS - 1][LEVELS - 1]
}

fn random_model(rng: &mut ChaCha8Rng) -> (ModelParams, TiltIndex) {
    let p = ModelParams::new(
        rng.random_range(0.05..2.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.0..5.0),
        rng.random_range(0.2..10.0),
    )
    .unwrap();
    (p, TiltIndex::new(rng.random_range(0.0..3.0), rng.random_range(1e-3..2.0)).unwrap())
}

fn initial_value_errors(b: &CubicBasis, sigma: f64) -> (f64, f64) {
    let scale = b.coeff.iter().map(|c| c.abs()).fold(1.0, f64::max);
    let sum: f64 = b.coeff.iter().sum();
    let slope: f64 = b.coeff.iter().zip(&b.beta).map(|(c, z)| c * z).sum();
    (sum.abs() / scale, (slope * sigma * sigma / 2.0 - 1.0).abs())
}

fn timed(limit: Duration, elapsed: Duration, t: &mut Tally) {
    t.holds(elapsed < limit, || format!("runtime {:.2} s over {:.0} s", elapsed.as_secs_f64(), limit.as_secs_f64()));
}

pub fn roots() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut t = Tally::default();
    let start = Instant::now();
    for i in 0..1000 {
        let (p, tilt) = random_model(&mut rng);
        let b = solve_roots(&p, tilt).unwrap();
        let a = p.theta() + tilt.c;
        t.bound(b.max_residual(&p), 1e-10 * tilt.r.max(1.0), || format!("draw {i} residual {:e}", b.max_residual(&p)));
        let below = if p.lambda() > 0.0 { b.beta[0] < -a } else { b.beta[0] == -a };
        t.holds(below && -a < b.beta[1] && b.beta[1] <= b.beta[2], || format!("draw {i} ordering {:?}", b.beta));
    }
    let elapsed = start.elapsed();
    timed(Duration::from_secs(5), elapsed, &mut t);
    let summary = format!("1000 draws, worst residual/tolerance {:.2e}, {:.3} s", t.worst, elapsed.as_secs_f64());
    t.outcome(summary)
}

fn laplace_sets() -> Vec<(ModelParams, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..10)
        .map(|_| {
            let p = ModelParams::new(
                rng.random_range(0.1..1.0),
                rng.random_range(-0.5..0.5),
                rng.random_range(0.0..3.0),
                rng.random_range(0.5..5.0),
            )
            .unwrap();
            (p, rng.random_range(0.01..0.5))
        })
        .collect()
}

pub fn laplace() -> Outcome {
    let mut t = Tally::default();
    let start = Instant::now();
    for (i, (p, q)) in laplace_sets().iter().enumerate() {
        let w = ScaleFunctions::untilted(p, *q).unwrap();
        for offset in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let beta = w.phi() + offset;
            let exact = 1.0 / (p.laplace_exponent(beta).unwrap() - q);
            let err = (laplace_quadrature(&w, beta).unwrap() - exact).abs() / exact.abs();
            t.bound(err, 1e-6, || format!("set {i} beta {beta}: relative error {err:e}"));
        }
    }
    let elapsed = start.elapsed();
    timed(Duration::from_secs(10), elapsed, &mut t);
    let summary = format!("10 sets x 5 beta, worst error/tolerance {:.2e}, {:.3} s", t.worst, elapsed.as_secs_f64());
    t.outcome(summary)
}

pub fn initial_values() -> Outcome {
    let mut t = Tally::default();
    let mut check = |b: &CubicBasis, sigma: f64, label: &dyn Fn() -> String| {
        let (sum, slope) = initial_value_errors(b, sigma);
        t.bound(sum, 1e-9, || format!("{} sum C = {sum:e}", label()));
        t.bound(slope, 1e-9, || format!("{} sum C beta relative error {slope:e}", label()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..1000 {
        let (p, tilt) = random_model(&mut rng);
        check(&solve_roots(&p, tilt).unwrap(), p.sigma(), &|| format!("draw {i}"));
    }
    for (i, (p, q)) in laplace_sets().iter().enumerate() {
        check(&solve_roots(p, TiltIndex::new(0.0, *q).unwrap()).unwrap(), p.sigma(), &|| format!("set {i}"));
    }
    for (i, g) in games().iter().enumerate() {
        check(g.basis(), g.params().sigma(), &|| format!("game {i}"));
    }
    let summary = format!("1016 bases, worst error/tolerance {:.2e}", t.worst);
    t.outcome(summary)
}

pub fn put_suite() -> Outcome {
    let mut t = Tally::default();
    for (i, g) in games().iter().enumerate() {
        let put = g.put();
        for x in grid(-3.0, 6.0, 999) {
            let payoff = (STRIKE - x.exp()).max(0.0);
            // The solver's exp (libm) and std's may differ in the last ulp.
            t.holds(put.value(x) >= payoff - 1e-12, || format!("game {i}: U({x}) below payoff"));
        }
        let k = put.k_star;
        let fit = (one_sided_derivative(|x| put.value(x), k, 1e-2, 1.0) + k.exp()).abs();
        t.bound(fit, 1e-8, || format!("game {i}: smooth fit {fit:e}"));
        if g.is_risk_neutral() {
            let fast = solve_put(g.params(), g.discount(), STRIKE).unwrap();
            let general = solve_general(g.params(), g.discount(), STRIKE).unwrap();
            for x in grid(-3.0, 6.0, 999) {
                let diff = (fast.value(x) - general.value(x)).abs();
                t.bound(diff, 1e-10, || format!("game {i}: paths differ by {diff:e} at {x}"));
            }
        }
    }
    t.outcome("6 games, 1000-point grids, smooth fit, fast path vs general".into())
}

pub fn game_suite() -> Outcome {
    let mut t = Tally::default();
    for (i, g) in games().iter().enumerate() {
        let log_k = g.log_strike();
        for d in penalties(g) {
            let sol = g.solve(d).unwrap();
            let v = |x: f64| sol.value_at(x);
            let at = || format!("game {i} delta {d}");
            if let Some(x) = sol.x_star {
                t.holds(sol.put.k_star < x && x < log_k, || format!("{}: k* < x* < log K fails", at()));
                let fit = (one_sided_derivative(v, x, 1e-2, 1.0) + x.exp()).abs();
                t.bound(fit, 1e-8, || format!("{}: smooth fit at x* {fit:e}", at()));
            }
            if let Some(y) = sol.y_star {
                let fit = one_sided_derivative(v, y, 1e-2, 1.0).abs();
                t.bound(fit, 1e-6, || format!("{}: smooth fit at y* {fit:e}", at()));
            }
            if sol.regime != Regime::NoCancel {
                t.bound((v(log_k) - d).abs(), 1e-9, || format!("{}: V(log K) - delta", at()));
            }
            for (j, b) in sol.value.breakpoints().enumerate() {
                let jump = (sol.value.eval_piece(j, b) - sol.value.eval_piece(j + 1, b)).abs();
                t.bound(jump, 1e-9, || format!("{}: discontinuity {jump:e} at {b}", at()));
            }
            for x in grid(-2.0, 8.0, 1000) {
                let lower = (STRIKE - x.exp()).max(0.0);
                let value = v(x);
                t.holds(lower - 1e-12 <= value && value <= lower + d + 1e-12, || format!("{}: sandwich at {x}", at()));
                if d >= g.delta_bar() {
                    t.bound((value - sol.put.value(x)).abs(), 1e-12, || format!("{}: V != U at {x}", at()));
                }
            }
        }
    }
    t.outcome("6 games x 8 penalties: ordering, V(log K), continuity, smooth fit, sandwich, V = U".into())
}

pub fn oracle_suite() -> Outcome {
    let mut t = Tally::default();
    let start = Instant::now();
    let (mut combos, mut points) = (0, 0);
    let gs = games();
    for (i, g) in gs.iter().enumerate().take(5) {
        let d0 = g.delta_0();
        let err = (g.delta_0_quadrature().unwrap() - d0).abs();
        t.bound(err, 1e-6, || format!("game {i}: delta_0 off by {err:e}"));
        for frac in [0.2, 0.7] {
            let d = frac * d0;
            let err = (g.y_star(d).unwrap() - g.y_star_quadrature(d).unwrap()).abs();
            t.bound(err, 1e-6, || format!("game {i} delta {d}: y* off by {err:e}"));
            combos += 1;
        }
    }
    for (i, g) in gs.iter().enumerate().take(5) {
        for d in [0.5 * g.delta_0(), 0.5 * (g.delta_0() + g.delta_bar())] {
            let sol = g.solve(d).unwrap();
            let y = sol.y_star.unwrap_or(g.log_strike());
            for x in [y + 0.3, y + 1.5] {
                let err = (sol.value_at(x) - g.h_oracle(d, x, y).unwrap()).abs();
                t.bound(err, 1e-6, || format!("game {i} delta {d} x {x}: value vs h off by {err:e}"));
                points += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    timed(Duration::from_secs(60), elapsed, &mut t);
    let summary = format!(
        "{combos} (delta, parameter) combos + 5 delta_0, {points} h points, worst error/tolerance {:.2e}, {:.2} s",
        t.worst,
        elapsed.as_secs_f64()
    );
    t.outcome(summary)
}

pub fn regime_consistency() -> Outcome {
    let mut t = Tally::default();
    for (i, g) in games().iter().enumerate() {
        for d in grid(0.0, g.delta_bar(), 50).skip(1) {
            let slope = g.f_prime_at_strike(d).unwrap();
            let interval = g.classify(d) == Regime::IntervalCancel;
            t.holds(interval == (slope > 0.0), || format!("game {i} delta {d}: slope {slope:e} vs {:?}", g.classify(d)));
        }
        let at = g.f_prime_at_strike(g.delta_0()).unwrap().abs();
        t.bound(at, 1e-8, || format!("game {i}: f'(delta_0) = {at:e}"));
    }
    t.outcome("6 games x 50-point penalty grid, f'(delta_0) = 0".into())
}

pub fn monotonicity_and_limits() -> Outcome {
    let mut t = Tally::default();
    for (i, g) in games().iter().enumerate() {
        let mut prev_x = f64::INFINITY;
        for d in grid(0.0, g.delta_bar(), 60).skip(1).take(59) {
            let x = g.x_star(d).unwrap();
            t.holds(x < prev_x, || format!("game {i}: x* not decreasing at {d}"));
            prev_x = x;
        }
        let mut prev_y = f64::INFINITY;
        for d in grid(0.0, g.delta_0(), 60).skip(1).take(59) {
            let y = g.y_star(d).unwrap();
            t.holds(y < prev_y, || format!("game {i}: y* not decreasing at {d}"));
            prev_y = y;
        }
        let gap = g.y_star(g.delta_0() * 0.9999).unwrap() - g.log_strike();
        t.bound(gap, 1e-2, || format!("game {i}: y*(0.9999 delta_0) - log K = {gap:e}"));
    }
    let g = p0();
    let d = 1e-8;
    let ratio = g.params().theta() * g.y_star(d).unwrap() / -d.ln();
    t.bound((ratio - 1.0).abs(), 0.05, || format!("theta y*/(-ln delta) = {ratio:.4} at delta = 1e-8 (P0)"));
    t.outcome(format!("strict decrease on grids, y* -> log K at delta_0, rate ratio {ratio:.4} at 1e-8"))
}

pub fn monte_carlo() -> Outcome {
    let mut t = Tally::default();
    let start = Instant::now();
    let g = p0();
    let delta = g.delta_0() / 2.0;
    let horizon = SimConfig::discounted_horizon(g.discount(), STRIKE, delta);
    let cfg = SimConfig::new(100_000, 1e-3, 20_240_601, horizon);
    let starts = default_starts(&g, delta).unwrap();
    let checks = saddle(&g, delta, &starts, &cfg).unwrap();
    let worst = checks.iter().map(|c| c.observed.abs()).fold(0.0, f64::max);
    for c in &checks {
        t.holds(c.pass, || format!("{} z = {:.2}", c.name, c.observed));
    }
    let w = g.scale();
    let mut worst_identity: f64 = 0.0;
    for x in [0.25, 0.5, 0.75] {
        let z = estimate_exit_up(g.params(), g.discount(), x, 1.0, &cfg).z_score(w.exit_up_probability(x, 1.0));
        worst_identity = worst_identity.max(z.abs());
        t.bound(z.abs(), 3.0, || format!("exit-up at {x}: z = {z:.2}"));
    }
    for x in [0.5, 1.0, 2.0] {
        let z = estimate_ruin(g.params(), g.discount(), x, &cfg).z_score(w.ruin_transform(x));
        worst_identity = worst_identity.max(z.abs());
        t.bound(z.abs(), 3.0, || format!("ruin at {x}: z = {z:.2}"));
    }
    let elapsed = start.elapsed();
    timed(Duration::from_secs(300), elapsed, &mut t);
    let summary = format!(
        "P0, 1e5 paths, dt 1e-3, {} starts, {} saddle checks (worst |z| {worst:.2}), 6 identity checks (worst |z| {worst_identity:.2}), {:.0} s",
        starts.len(),
        checks.len(),
        elapsed.as_secs_f64()
    );
    t.outcome(summary)
}

pub fn figure_shapes() -> Outcome {
    let mut t = Tally::default();
    let sweeps: [(&str, &str, &str, &str); 2] = [("0.2", "0.05", "0.6", "0.5"), ("0.05", "0.25", "0.4", "1.0")];
    let mut rows_seen = 0;
    for (q, from, to, delta) in sweeps {
        let out = run_from([
            "mckean", "sweep", "--param", "sigma", "--from", from, "--to", to, "--n", "22", "--lambda", "1", "--theta", "2",
            "--q", q, "--strike", "5", "--delta", delta, "--risk-neutral-at", to,
        ]);
        let label = format!("q={q} sigma in [{from}, {to}]");
        t.holds(out.code == 0, || format!("{label}: exit {}", out.code));
        let text = out.stdout;
        let mut prev: Option<(f64, f64)> = None;
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f[1] == "skipped" {
                continue;
            }
            rows_seen += 1;
            let num = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
            let (sigma, bar, d0, y) = (num(f[0]), num(f[1]), num(f[2]), num(f[4]));
            t.holds(d0 < bar, || format!("{label}: delta_0 >= delta_bar at sigma {sigma}"));
            if let Some((gap, y_prev)) = prev {
                t.holds(bar - d0 > gap, || format!("{label}: delta_bar - delta_0 not shrinking toward small sigma at {sigma}"));
                t.holds(y <= y_prev, || format!("{label}: y* increasing at sigma {sigma}"));
            }
            prev = Some((bar - d0, y));
        }
    }
    t.outcome(format!("2 sweeps, {rows_seen} valid rows"))
}

/// Every criterion, in reporting order.
pub fn criteria() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("root residuals and ordering", roots),
        ("scale-function Laplace identity", laplace),
        ("W(0) = 0 and W'(0+) = 2/sigma^2", initial_values),
        ("put suite", put_suite),
        ("game suite", game_suite),
        ("oracle equivalence", oracle_suite),
        ("regime consistency", regime_consistency),
        ("monotonicity and limits", monotonicity_and_limits),
        ("Monte Carlo saddle point and identities", monte_carlo),
        ("figure shapes via sweep", figure_shapes),
    ]
}
