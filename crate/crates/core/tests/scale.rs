mod common;

use common::{grid, one_sided_derivative, p0_params};
use mckean_core::quad::{integrate, integrate_pieces, QuadConfig};
use mckean_core::scale::{self, ScaleFunctions};
use mckean_core::{ModelParams, TiltIndex};

fn laplace_sets() -> Vec<(ModelParams, f64)> {
    let mut v = Vec::new();
    for &(sigma, lambda, theta, q) in &[
        (0.4, 1.0, 2.0, 0.05),
        (0.2, 0.5, 1.0, 0.03),
        (0.8, 2.0, 3.0, 0.10),
        (0.3, 0.0, 2.0, 0.05),
        (1.2, 3.0, 0.5, 0.20),
    ] {
        let p = ModelParams::risk_neutral(sigma, lambda, theta, q).unwrap();
        v.push((p, q));
        v.push((p, 2.0 * q + 0.01));
    }
    v
}

/// `∫₀^∞ e^{−βx} W(x) dx` truncated where the integrand is below 1e−12 of its scale.
fn laplace_by_quadrature(w: &ScaleFunctions, beta: f64) -> f64 {
    let rate = beta - w.phi();
    let top = (40.0 / rate).max(1.0);
    let breaks: Vec<f64> = grid(0.0, top, 40).collect();
    integrate_pieces(|x| (-beta * x).exp() * w.w(x), &breaks, QuadConfig::default()).unwrap()
}

#[test]
fn laplace_identity() {
    for (p, q) in laplace_sets() {
        let w = ScaleFunctions::untilted(&p, q).unwrap();
        let phi = w.phi();
        for beta in [phi + 0.1, phi + 0.5, phi + 1.0, phi + 3.0, 10.0 + phi] {
            let exact = 1.0 / (p.laplace_exponent(beta).unwrap() - q);
            let quad = laplace_by_quadrature(&w, beta);
            assert!(((quad - exact) / exact).abs() < 1e-6, "{p:?} q={q} beta={beta}: {quad} vs {exact}");
        }
    }
}

#[test]
fn p0_laplace_at_three() {
    let p = p0_params();
    let w = ScaleFunctions::untilted(&p, 0.05).unwrap();
    let integral = integrate(|x| (-3.0 * x).exp() * w.w(x), 0.0, 200.0, QuadConfig::default()).unwrap();
    let exact = 1.0 / (p.laplace_exponent(3.0).unwrap() - 0.05);
    assert!((integral - exact).abs() < 1e-6 * exact);
}

#[test]
fn initial_values() {
    for (p, q) in laplace_sets() {
        let w = ScaleFunctions::untilted(&p, q).unwrap();
        let s2 = p.sigma() * p.sigma();
        assert!(w.w(0.0).abs() < 1e-12);
        let d = one_sided_derivative(|x| w.w(x), 0.0, 1e-3, 1.0);
        assert!((d * s2 / 2.0 - 1.0).abs() < 1e-7, "{d}");
        assert!((w.w_prime(0.0) * s2 / 2.0 - 1.0).abs() < 1e-12);
        assert_eq!(w.w(-1.0), 0.0);
        assert_eq!(w.z(-1.0), 1.0);
    }
}

#[test]
fn z_is_one_plus_integrated_w() {
    let p = p0_params();
    let w = ScaleFunctions::untilted(&p, 0.05).unwrap();
    for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let integral = integrate(|y| w.w(y), 0.0, x, QuadConfig::default()).unwrap();
        assert!((w.z(x) - 1.0 - 0.05 * integral).abs() < 1e-8);
    }
}

#[test]
fn z_derivative_is_q_w() {
    let p = p0_params();
    let w = ScaleFunctions::untilted(&p, 0.05).unwrap();
    for x in [0.3, 1.0, 2.5] {
        let d = one_sided_derivative(|y| w.z(y), x, 1e-2, 1.0);
        assert!((d - 0.05 * w.w(x)).abs() < 1e-8, "{d} vs {}", 0.05 * w.w(x));
    }
}

#[test]
fn w_derivative_matches_closed_form() {
    let p = p0_params();
    let w = ScaleFunctions::untilted(&p, 0.05).unwrap();
    for x in [0.2, 1.0, 3.0] {
        let d = one_sided_derivative(|y| w.w(y), x, 1e-2, 1.0);
        assert!((d - w.w_prime(x)).abs() < 1e-7 * w.w_prime(x).abs().max(1.0));
    }
}

#[test]
fn tilted_z_one_against_its_defining_integral() {
    // Z₁(x) = 1 + (q − ψ(1)) ∫₀ˣ e^{−y} W(y) dy.
    let p = p0_params();
    let q = 0.1;
    let excess = q - p.laplace_exponent(1.0).unwrap();
    let w = ScaleFunctions::untilted(&p, q).unwrap();
    for x in [0.5, 1.0, 2.0] {
        let integral = integrate(|y| (-y).exp() * w.w(y), 0.0, x, QuadConfig::default()).unwrap();
        let expected = 1.0 + excess * integral;
        assert!((w.z_tilted_one(excess, x) - expected).abs() < 1e-8);
        assert!((scale::z_tilted_1(&p, q, x).unwrap() - expected).abs() < 1e-8);
    }
}

#[test]
fn exponential_tilting() {
    // W_c^{(q − ψ(c))}(x) = e^{−cx} W^{(q)}(x).
    let p = p0_params();
    let q = 0.3;
    let w = ScaleFunctions::untilted(&p, q).unwrap();
    for c in [0.25, 0.5, 1.0] {
        let r = q - p.laplace_exponent(c).unwrap();
        let tilted = ScaleFunctions::new(&p, TiltIndex::new(c, r).unwrap()).unwrap();
        for x in [0.1, 1.0, 4.0] {
            let lhs = tilted.w(x);
            let rhs = (-c * x).exp() * w.w(x);
            assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0), "c={c} x={x}");
        }
    }
}

#[test]
fn ruin_transform_is_z_minus_scaled_w() {
    let p = p0_params();
    for q in [0.05, 0.1] {
        let w = ScaleFunctions::untilted(&p, q).unwrap();
        for x in [0.0, 0.5, 1.0, 3.0] {
            let expected = w.z(x) - q / w.phi() * w.w(x);
            assert!((w.ruin_transform(x) - expected).abs() < 1e-10);
        }
        assert!(w.ruin_transform(150.0) < 1e-6);
        assert!((w.ruin_transform(-1.0) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn exit_up_probability_bounds() {
    let p = p0_params();
    let w = ScaleFunctions::untilted(&p, 0.05).unwrap();
    let mut prev = 0.0;
    for x in grid(0.0, 1.0, 20) {
        let e = w.exit_up_probability(x, 1.0);
        assert!((0.0..=1.0).contains(&e) && e >= prev);
        prev = e;
    }
    assert!((w.exit_up_probability(1.0, 1.0) - 1.0).abs() < 1e-14);
}

#[test]
fn resolvent_density_is_nonnegative() {
    let p = p0_params();
    let w = ScaleFunctions::untilted(&p, 0.05).unwrap();
    assert_eq!(w.resolvent_density(1.0, -1.0), 0.0);
    for s in grid(0.0, 3.0, 12) {
        for t in grid(0.0, 6.0, 24) {
            assert!(w.resolvent_density(s, t) >= -1e-12, "s={s} t={t}");
        }
    }
}

#[test]
fn resolvent_integrates_to_killed_mass() {
    // ∫₀^∞ u(x, t) dt = E_x ∫₀^{τ₀⁻} e^{−qs} ds = (1 − E_x[e^{−qτ₀⁻}])/q.
    let p = p0_params();
    let q = 0.05;
    let w = ScaleFunctions::untilted(&p, q).unwrap();
    let x = 1.0;
    let total = integrate_pieces(|t| w.resolvent_density(x, t), &[0.0, x, 20.0, 200.0], QuadConfig::default()).unwrap();
    let expected = (1.0 - w.ruin_transform(x)) / q;
    assert!((total - expected).abs() < 1e-6 * expected, "{total} vs {expected}");
}

#[test]
fn brownian_limit() {
    // λ = 0: W(x) = 2/(σ²(β₃ − β₂)) (e^{β₃x} − e^{β₂x}).
    let p = ModelParams::new(0.5, 0.1, 0.0, 1.0).unwrap();
    let q: f64 = 0.2;
    let s2: f64 = 0.25;
    let disc = (0.01 + 2.0 * s2 * q).sqrt();
    let (b2, b3) = ((-0.1 - disc) / s2, (-0.1 + disc) / s2);
    let w = ScaleFunctions::untilted(&p, q).unwrap();
    for x in [0.1, 1.0, 3.0] {
        let expected = 2.0 / (s2 * (b3 - b2)) * ((b3 * x).exp() - (b2 * x).exp());
        assert!((w.w(x) - expected).abs() < 1e-12 * expected.max(1.0));
    }
}

#[test]
fn double_root_scale_function() {
    // ψ′(0) = 0 at r = 0: W must still satisfy the Laplace identity.
    let p = ModelParams::new(0.4, 0.5, 1.0, 2.0).unwrap();
    let w = ScaleFunctions::untilted(&p, 0.0).unwrap();
    assert!(w.basis().is_none());
    for beta in [0.5, 1.0, 2.0] {
        let exact = 1.0 / p.laplace_exponent(beta).unwrap();
        let quad = integrate_pieces(
            |x| (-beta * x).exp() * w.w(x),
            &grid(0.0, 80.0 / beta, 40).collect::<Vec<_>>(),
            QuadConfig::default(),
        )
        .unwrap();
        assert!(((quad - exact) / exact).abs() < 1e-6, "beta={beta}: {quad} vs {exact}");
    }
}
