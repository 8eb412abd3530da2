//! Check suites behind `mckean verify`.

use mckean_core::model::solve_roots;
use mckean_core::quad::{integrate_pieces, QuadConfig};
use mckean_core::{Error, McKeanGame, Regime, ScaleFunctions, TiltIndex};

use crate::mc::{self, estimate_exit_up, estimate_ruin, verify_saddle, SimConfig};

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub observed: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `|observed| ≤ tolerance`.
    pub fn bounded(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Check { name: name.into(), tolerance, observed, pass: observed.abs() <= tolerance }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `∫₀^∞ e^{−βx} W(x) dx`, truncated where the integrand is below 1e−12 of its size.
pub fn laplace_quadrature(w: &ScaleFunctions, beta: f64) -> Result<f64, Error> {
    let top = (40.0 / (beta - w.phi())).max(1.0);
    let breaks: Vec<f64> = (0..=40).map(|i| top * i as f64 / 40.0).collect();
    integrate_pieces(|x| w.w_damped(x, beta), &breaks, QuadConfig::default())
}

/// Analytic scale-function identities plus Monte Carlo replication of the
/// two-sided exit and ruin transforms.
pub fn identities(game: &McKeanGame, cfg: &SimConfig) -> Result<Vec<Check>, Error> {
    let p = game.params();
    let q = game.discount();
    let w = game.scale();
    let phi = game.phi();
    let mut out = Vec::new();
    for offset in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let beta = phi + offset;
        let exact = 1.0 / (p.laplace_exponent(beta)? - q);
        out.push(Check::bounded(format!("laplace_identity/beta={beta:.6}"), rel(laplace_quadrature(w, beta)?, exact), 1e-6));
    }
    let basis = solve_roots(p, TiltIndex::new(0.0, q)?)?;
    let s2 = p.sigma() * p.sigma();
    out.push(Check::bounded("root_residual", basis.max_residual(p), 1e-10 * q.max(1.0)));
    let scale = basis.coeff.iter().map(|c| c.abs()).fold(1.0, f64::max);
    out.push(Check::bounded("w_at_zero", basis.coeff.iter().sum::<f64>() / scale, 1e-9));
    let slope: f64 = basis.coeff.iter().zip(&basis.beta).map(|(c, b)| c * b).sum();
    out.push(Check::bounded("w_slope_at_zero", rel(slope, 2.0 / s2), 1e-9));
    let psi_one = game.psi_one();
    let tilted = ScaleFunctions::new(p, TiltIndex::new(1.0, (q - psi_one).max(0.0))?)?;
    let tilt_err = [0.25, 1.0, 3.0].iter().map(|&x| rel(tilted.w(x) * f64::exp(x), w.w(x))).fold(0.0, f64::max);
    out.push(Check::bounded("tilting_consistency", tilt_err, 1e-10));

    for x in [0.25, 0.5, 0.75] {
        let est = estimate_exit_up(p, q, x, 1.0, cfg);
        out.push(Check::bounded(format!("mc_exit_up/x={x}/a=1"), est.z_score(w.exit_up_probability(x, 1.0)), 3.0));
    }
    for x in [0.5, 1.0, 2.0] {
        let est = estimate_ruin(p, q, x, cfg);
        out.push(Check::bounded(format!("mc_ruin/x={x}"), est.z_score(w.ruin_transform(x)), 3.0));
    }
    Ok(out)
}

/// Closed-form boundaries against the quadrature-evaluated equations.
pub fn oracles(game: &McKeanGame) -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    if game.params().lambda() == 0.0 {
        out.push(Check::bounded("delta_0_without_jumps", game.delta_0(), 0.0));
        return Ok(out);
    }
    let d0 = game.delta_0();
    out.push(Check::bounded("delta_0_vs_quadrature", game.delta_0_quadrature()? - d0, 1e-6));
    out.push(Check::bounded("f_prime_at_delta_0", game.f_prime_at_strike(d0)?, 1e-8));
    for frac in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let d = d0 * frac;
        out.push(Check::bounded(
            format!("y_star_vs_quadrature/delta={}", crate::format::number(d)),
            game.y_star(d)? - game.y_star_quadrature(d)?,
            1e-6,
        ));
    }
    for d in [0.5 * d0, 0.5 * (d0 + game.delta_bar())] {
        let sol = game.solve(d)?;
        let y = sol.y_star.unwrap_or(game.log_strike());
        for offset in [0.25, 1.0] {
            let x = y + offset;
            out.push(Check::bounded(
                format!("value_vs_h_oracle/delta={}/x={}", crate::format::number(d), crate::format::number(x)),
                sol.value_at(x) - game.h_oracle(d, x, y)?,
                1e-6,
            ));
        }
    }
    Ok(out)
}

/// Start points that exercise both continuation regions: three between the
/// maximiser's boundary and `log K`, two above the minimiser's region.
pub fn default_starts(game: &McKeanGame, delta: f64) -> Result<Vec<f64>, Error> {
    let sol = game.solve(delta)?;
    let low = sol.x_star.unwrap_or(sol.put.k_star);
    let top = match sol.regime {
        Regime::IntervalCancel => sol.y_star.unwrap(),
        _ => game.log_strike(),
    };
    let span = game.log_strike() - low;
    Ok(vec![low + 0.25 * span, low + 0.5 * span, low + 0.75 * span, top + 0.2, top + 0.5])
}

pub fn saddle(game: &McKeanGame, delta: f64, starts: &[f64], cfg: &SimConfig) -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    for &x0 in starts {
        let report = verify_saddle(game, delta, x0, cfg)?;
        for c in &report.checks {
            let z = c.estimate.z_score(c.value);
            let name = format!("saddle/x0={}/{}/{}/{}", crate::format::number(x0), c.side.as_str(), c.tau.label(), c.sigma.label());
            // One-sided checks report the signed z-score; only the adverse side counts.
            let observed = match c.side {
                mc::Side::Equilibrium => z,
                mc::Side::Maximiser => z.max(0.0),
                mc::Side::Minimiser => z.min(0.0),
            };
            out.push(Check { name, tolerance: mc::SADDLE_SE, observed, pass: c.pass });
        }
    }
    Ok(out)
}
