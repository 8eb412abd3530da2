//! Adaptive Gauss–Kronrod (7/15) quadrature and bracketed bisection.

use alloc::vec::Vec;

use crate::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kronrod += w * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Panel { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Integrates `f` over `[a, b]` by globally adaptive bisection of the panel
/// with the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<f64, Error> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, cfg).map(|v| -v);
    }
    let mut panels: Vec<Panel> = Vec::with_capacity(64);
    panels.push(kronrod(&f, a, b));
    loop {
        let (value, error) = panels.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !value.is_finite() {
            return Err(Error::Quadrature { estimate: value, error });
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(value);
        }
        if panels.len() >= cfg.max_intervals {
            return Err(Error::Quadrature { estimate: value, error });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel cannot be split any further in floating point.
            return Err(Error::Quadrature { estimate: value, error });
        }
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
    }
}

/// Integrates over consecutive breakpoints `[x_0, x_1], [x_1, x_2], …`.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], cfg: QuadConfig) -> Result<f64, Error> {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += integrate(&f, w[0], w[1], cfg)?;
        }
    }
    Ok(total)
}

/// Bisection on a bracket with a sign change; stops when the bracket is no
/// wider than `x_tol` (or cannot be halved further).
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> Result<f64, Error> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Nonconvergence { what: "bisection" })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, QuadConfig::default()).unwrap();
        assert!((v - 0.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_and_reversed_limits() {
        let v = integrate(|x: f64| (-3.0 * x).exp(), 0.0, 40.0, QuadConfig::default()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-13);
        let w = integrate(|x: f64| (-3.0 * x).exp(), 40.0, 0.0, QuadConfig::default()).unwrap();
        assert_eq!(v, -w);
    }

    #[test]
    fn kink_is_resolved() {
        let v = integrate(|x: f64| (x - 0.3).abs(), -1.0, 1.0, QuadConfig::default()).unwrap();
        assert!((v - (1.3f64 * 1.3 / 2.0 + 0.7 * 0.7 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bisection_rejects_missing_sign_change() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::NoBracket { .. })));
    }
}
