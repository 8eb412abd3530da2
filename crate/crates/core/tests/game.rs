mod common;

use common::{game_set, grid, one_sided_derivative, p0, p0_general, STRIKE};
use mckean_core::game::{self, Segment};
use mckean_core::{Contract, Error, McKeanGame, ModelParams, Regime};

fn penalties(g: &McKeanGame) -> Vec<f64> {
    let bar = g.delta_bar();
    let d0 = g.delta_0();
    vec![d0 * 0.1, d0 * 0.5, d0 * 0.9, d0, 0.5 * (d0 + bar), bar * 0.999, bar, bar * 1.5]
}

#[test]
fn p0_reference_values() {
    let g = p0();
    assert!(g.is_risk_neutral());
    assert!((g.delta_bar() - 2.909).abs() < 1e-3);
    assert!(0.0 < g.delta_0() && g.delta_0() < g.delta_bar());
    let x = g.x_star(1.0).unwrap();
    assert!(0.036 < x && x < STRIKE.ln());
    let residual = |x: f64| {
        let ell = STRIKE.ln() - x;
        g.scale().z(ell) - g.scale().z_tilted_one(0.0, ell) - 1.0 / STRIKE
    };
    assert!(residual(x - 1e-10) * residual(x + 1e-10) <= 0.0);
}

#[test]
fn boundary_ordering() {
    for g in game_set() {
        let k = g.put().k_star;
        for d in grid(0.0, g.delta_bar(), 40).skip(1).take(39) {
            let x = g.x_star(d).unwrap();
            assert!(k < x && x < g.log_strike(), "δ={d}: {k} {x}");
            if d < g.delta_0() {
                assert!(g.y_star(d).unwrap() > g.log_strike());
            }
        }
    }
}

#[test]
fn value_at_strike_is_penalty() {
    for g in game_set() {
        for d in penalties(&g) {
            let sol = g.solve(d).unwrap();
            if sol.regime != Regime::NoCancel {
                assert!((sol.value_at(g.log_strike()) - d).abs() <= 1e-9, "{:?} δ={d}", sol.regime);
            }
        }
    }
}

#[test]
fn continuous_fit_at_breakpoints() {
    for g in game_set() {
        for d in penalties(&g) {
            let sol = g.solve(d).unwrap();
            for (i, b) in sol.value.breakpoints().enumerate() {
                let left = sol.value.eval_piece(i, b);
                let right = sol.value.eval_piece(i + 1, b);
                assert!((left - right).abs() <= 1e-9, "{:?} δ={d} at {b}: {left} vs {right}", sol.regime);
            }
        }
    }
}

#[test]
fn smooth_fit() {
    for g in game_set() {
        for d in penalties(&g) {
            let sol = g.solve(d).unwrap();
            let v = |x: f64| sol.value_at(x);
            if let Some(x) = sol.x_star {
                let right = one_sided_derivative(v, x, 1e-2, 1.0);
                assert!((right + x.exp()).abs() <= 1e-8, "δ={d}: {}", right + x.exp());
            }
            if let Some(y) = sol.y_star {
                let right = one_sided_derivative(v, y, 1e-2, 1.0);
                assert!(right.abs() <= 1e-6, "δ={d}: {right}");
            }
        }
    }
}

#[test]
fn sandwich() {
    for g in game_set() {
        for d in penalties(&g) {
            let sol = g.solve(d).unwrap();
            for x in grid(-2.0, 8.0, 1000) {
                let lower = (STRIKE - x.exp()).max(0.0);
                let v = sol.value_at(x);
                assert!(v >= lower - 1e-12 && v <= lower + d + 1e-12, "δ={d} x={x}: {lower} {v}");
            }
        }
    }
}

#[test]
fn no_cancel_is_the_put() {
    for g in game_set() {
        for d in [g.delta_bar(), g.delta_bar() * 2.0] {
            let sol = g.solve(d).unwrap();
            assert_eq!(sol.regime, Regime::NoCancel);
            assert!(sol.x_star.is_none() && sol.y_star.is_none() && sol.alpha.is_none());
            for x in grid(-2.0, 8.0, 200) {
                assert!((sol.value_at(x) - g.put().value(x)).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn point_cancel_tail_matches_scale_representation() {
    // V(x) = K Z(x − x*) − eˣ Z₁(x − x*) + α e^{Φ(log K − x*)} W(x − log K) above log K.
    for g in game_set() {
        let excess = (g.discount() - g.psi_one()).max(0.0);
        let excess = if g.is_risk_neutral() { 0.0 } else { excess };
        let d = 0.5 * (g.delta_0() + g.delta_bar());
        let sol = g.solve(d).unwrap();
        assert_eq!(sol.regime, Regime::PointCancel);
        let (x_star, alpha) = (sol.x_star.unwrap(), sol.alpha.unwrap());
        let w = g.scale();
        for x in grid(g.log_strike(), g.log_strike() + 3.0, 15) {
            let direct = STRIKE * w.z(x - x_star) - x.exp() * w.z_tilted_one(excess, x - x_star)
                + alpha * (g.phi() * (g.log_strike() - x_star)).exp() * w.w(x - g.log_strike());
            assert!((direct - sol.value_at(x)).abs() <= 1e-8, "x={x}: {direct} {}", sol.value_at(x));
        }
        assert!(sol.value_at(150.0) < 1e-6);
        let last = sol.value.pieces().last().unwrap();
        assert!(matches!(last.segment, Segment::TwoExponential { .. }));
    }
}

#[test]
fn interval_cancel_is_flat_between_strike_and_y_star() {
    let g = p0();
    let sol = g.solve(g.delta_0() / 2.0).unwrap();
    let y = sol.y_star.unwrap();
    assert!((sol.value_at(g.log_strike()) - sol.penalty).abs() <= 1e-9);
    for x in grid(g.log_strike(), y, 30).skip(1) {
        assert_eq!(sol.value_at(x), sol.penalty);
    }
    assert!(sol.value_at(y + 0.5) < sol.penalty);
}

#[test]
fn delta_0_matches_quadrature() {
    for g in game_set() {
        let quad = g.delta_0_quadrature().unwrap();
        assert!((quad - g.delta_0()).abs() <= 1e-6, "{} vs {quad}", g.delta_0());
    }
}

#[test]
fn y_star_matches_quadrature() {
    for g in game_set() {
        for frac in [0.05, 0.5] {
            let d = g.delta_0() * frac;
            let (y, quad) = (g.y_star(d).unwrap(), g.y_star_quadrature(d).unwrap());
            assert!((y - quad).abs() <= 1e-6, "δ={d}: {y} vs {quad}");
        }
    }
}

#[test]
fn value_matches_compensation_oracle() {
    for g in [p0(), p0_general()] {
        for d in [g.delta_0() * 0.3, 0.5 * (g.delta_0() + g.delta_bar())] {
            let sol = g.solve(d).unwrap();
            let y = sol.y_star.unwrap_or(g.log_strike());
            for x in grid(y, y + 3.0, 5).skip(1) {
                let h = g.h_oracle(d, x, y).unwrap();
                assert!((h - sol.value_at(x)).abs() <= 1e-6, "δ={d} x={x}: {h} {}", sol.value_at(x));
            }
        }
    }
}

#[test]
fn compensation_oracle_smooth_at_threshold() {
    let g = p0();
    let (d, y) = (g.delta_0(), g.log_strike());
    let h = |x: f64| if x <= y { d } else { g.h_oracle(d, x, y).unwrap() };
    assert!((h(y + 1e-12) - d).abs() < 1e-9);
    let slope = one_sided_derivative(h, y, 1e-2, 1.0);
    assert!(slope.abs() <= 1e-6, "{slope}");
}

#[test]
fn regime_matches_slope_sign() {
    for g in game_set() {
        for d in grid(0.0, g.delta_bar(), 50).skip(1) {
            let slope = g.f_prime_at_strike(d).unwrap();
            match g.classify(d) {
                Regime::IntervalCancel => assert!(slope > 0.0, "δ={d}"),
                _ => assert!(slope <= 0.0, "δ={d}"),
            }
        }
        assert!(g.f_prime_at_strike(g.delta_0()).unwrap().abs() <= 1e-8);
        assert!(g.f_prime_at_strike(g.delta_bar()).unwrap() < 0.0);
        assert!(g.f_prime_at_strike(g.delta_0() / 2.0).unwrap() > 0.0);
    }
}

#[test]
fn classification_edges() {
    let g = p0();
    assert_eq!(g.classify(g.delta_bar()), Regime::NoCancel);
    assert_eq!(g.classify(g.delta_0()), Regime::PointCancel);
    assert_eq!(g.classify(g.delta_0() * (1.0 - 1e-9)), Regime::IntervalCancel);
    assert!(matches!(g.x_star(g.delta_bar()), Err(Error::Regime { .. })));
    assert!(matches!(g.y_star(g.delta_0()), Err(Error::Regime { .. })));
    assert!(matches!(g.solve(0.0), Err(Error::InvalidParameter { .. })));
}

#[test]
fn boundaries_decrease_in_penalty() {
    for g in game_set() {
        let xs: Vec<f64> = grid(0.0, g.delta_bar(), 60).skip(1).take(59).map(|d| g.x_star(d).unwrap()).collect();
        assert!(xs.windows(2).all(|w| w[1] < w[0]));
        let ys: Vec<f64> = grid(0.0, g.delta_0(), 60).skip(1).take(59).map(|d| g.y_star(d).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn boundary_limits() {
    let g = p0();
    assert!(g.y_star(g.delta_0() * 0.9999).unwrap() - g.log_strike() <= 1e-2);
    assert!(g.x_star(g.delta_bar() * (1.0 - 1e-8)).unwrap() - g.put().k_star < 1e-4);
    let near: Vec<f64> = [1e-2, 1e-4, 1e-6].iter().map(|&d| g.x_star(d).unwrap()).collect();
    assert!(near[0] < near[1] && near[1] < near[2] && near[2] < g.log_strike());
    assert!(g.log_strike() - near[2] < 1e-3);
}

#[test]
fn y_star_diverges_logarithmically() {
    // e^{θy*} δ → λΦK^{θ+1}/((Φ+θ) q (θ+1)) since J(0+) = K^{θ+1}/(θ(θ+1)).
    for g in game_set() {
        let p = g.params();
        let (theta, phi) = (p.theta(), g.phi());
        let limit = p.lambda() * phi * STRIKE.powf(theta + 1.0) / ((phi + theta) * g.discount() * (theta + 1.0));
        let mut prev = f64::INFINITY;
        for k in 3..=8 {
            let d = 10f64.powi(-k);
            let y = g.y_star(d).unwrap();
            let ratio = theta * y / -d.ln();
            assert!(ratio < prev);
            prev = ratio;
            if k == 8 {
                assert!(((theta * y + d.ln()).exp() / limit - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn brownian_game_never_enters_interval_regime() {
    let p = ModelParams::risk_neutral(0.4, 0.0, 2.0, 0.05).unwrap();
    let g = McKeanGame::new(p, STRIKE, 0.05).unwrap();
    assert_eq!(g.delta_0(), 0.0);
    for d in grid(0.0, g.delta_bar(), 10).skip(1).take(9) {
        let sol = g.solve(d).unwrap();
        assert_eq!(sol.regime, Regime::PointCancel);
        assert!((sol.value_at(g.log_strike()) - d).abs() < 1e-9);
    }
    assert_eq!(game::solve_delta_0(&p, 0.05, STRIKE).unwrap(), 0.0);
}

#[test]
fn free_functions_agree_with_solver() {
    let p = common::p0_params();
    let g = p0();
    let d = g.delta_0() / 2.0;
    let c = Contract::new(&p, STRIKE, d, 0.05).unwrap();
    let sol = game::solve_game(&p, &c).unwrap();
    assert_eq!(sol.regime, game::classify(&p, &c).unwrap());
    assert_eq!(sol.x_star.unwrap(), game::solve_x_star(&p, &c).unwrap());
    assert_eq!(sol.y_star.unwrap(), game::solve_y_star(&p, &c).unwrap());
    assert_eq!(game::value_at(&sol, 1.0), sol.value_at(1.0));
    assert!(game::f_prime_at_k(&p, &c).unwrap() > 0.0);
    let y = sol.y_star.unwrap();
    assert!((game::h_oracle(&p, &c, y + 1.0, y).unwrap() - sol.value_at(y + 1.0)).abs() < 1e-6);
}
