use mckean_core::model::{solve_roots, DOUBLE_ROOT_GAP};
use mckean_core::{Error, ModelParams, TiltIndex};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = (ModelParams, TiltIndex)> {
    (0.05f64..2.0, -1.0f64..1.0, 0.0f64..5.0, 0.2f64..10.0, 0.0f64..3.0, 1e-3f64..2.0).prop_map(
        |(sigma, mu, lambda, theta, c, r)| {
            (ModelParams::new(sigma, mu, lambda, theta).unwrap(), TiltIndex::new(c, r).unwrap())
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn residuals_and_ordering((p, tilt) in params()) {
        let b = solve_roots(&p, tilt).unwrap();
        let a = p.theta() + tilt.c;
        prop_assert!(b.max_residual(&p) <= 1e-10 * tilt.r.max(1.0), "residual {}", b.max_residual(&p));
        if p.lambda() > 0.0 {
            prop_assert!(b.beta[0] < -a);
        } else {
            prop_assert_eq!(b.beta[0], -a);
        }
        prop_assert!(-a < b.beta[1] && b.beta[1] < 0.0 && 0.0 < b.beta[2]);
    }

    #[test]
    fn scale_coefficients_encode_initial_values((p, tilt) in params()) {
        let b = solve_roots(&p, tilt).unwrap();
        let s2 = p.sigma() * p.sigma();
        let sum: f64 = b.coeff.iter().sum();
        let slope: f64 = b.coeff.iter().zip(b.beta.iter()).map(|(c, z)| c * z).sum();
        let scale = b.coeff.iter().map(|c| c.abs()).fold(0.0, f64::max);
        prop_assert!(sum.abs() <= 1e-9 * scale.max(1.0), "sum C = {sum}");
        prop_assert!((slope * s2 / 2.0 - 1.0).abs() <= 1e-9, "sum C beta = {slope}");
    }

    #[test]
    fn vieta_product((p, tilt) in params()) {
        prop_assume!(p.lambda() > 0.0);
        let b = solve_roots(&p, tilt).unwrap();
        let s2 = p.sigma() * p.sigma();
        let expected = 2.0 * (p.theta() + tilt.c) * tilt.r / s2;
        let product = b.beta[0] * b.beta[1] * b.beta[2];
        prop_assert!((product - expected).abs() <= 1e-9 * expected.max(1.0));
    }
}

#[test]
fn zero_rate_places_root_at_origin() {
    for mu in [-0.3, 0.4] {
        let p = ModelParams::new(0.4, mu, 1.0, 2.0).unwrap();
        let b = solve_roots(&p, TiltIndex::new(0.0, 0.0).unwrap()).unwrap();
        assert!(b.beta.contains(&0.0), "{:?}", b.beta);
        assert!(b.beta[2] - b.beta[1] > DOUBLE_ROOT_GAP);
    }
}

#[test]
fn zero_rate_with_zero_mean_is_degenerate() {
    // ψ′(0) = μ − λ/θ = 0.
    let p = ModelParams::new(0.4, 0.5, 1.0, 2.0).unwrap();
    assert_eq!(solve_roots(&p, TiltIndex::new(0.0, 0.0).unwrap()), Err(Error::DegenerateRoots));
}
