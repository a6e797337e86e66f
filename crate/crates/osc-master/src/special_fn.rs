//! Digamma/polygamma for complex arguments and a few hyperbolic helpers.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

pub type ComplexValue = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("pole of polygamma at z = {0}")]
    Pole(Complex64),
    #[error("unsupported polygamma order {0} (expected 0, 1 or 2)")]
    Order(u32),
    #[error("argument {0} outside the domain")]
    Domain(f64),
}

// B_{2k} for k = 1..10
const BERNOULLI_2K: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const SHIFT_RADIUS: f64 = 10.0;

fn is_pole(z: Complex64) -> bool {
    if z.re > 0.5 {
        return false;
    }
    let n = z.re.round();
    let tol = 64.0 * f64::EPSILON * n.abs().max(1.0);
    (z.re - n).abs() <= tol && z.im.abs() <= tol
}

/// ψ_n(z) for n in {0, 1, 2}.
pub fn polygamma(order: u32, z: Complex64) -> Result<Complex64, SpecialFnError> {
    if order > 2 {
        return Err(SpecialFnError::Order(order));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecialFnError::Domain(z.re));
    }
    if is_pole(z) {
        return Err(SpecialFnError::Pole(z));
    }
    let mut v = if z.re < 0.0 {
        reflect(order, z)
    } else {
        shifted_asymptotic(order, z)
    };
    if z.im == 0.0 {
        v.im = 0.0;
    }
    Ok(v)
}

pub fn digamma(z: Complex64) -> Result<Complex64, SpecialFnError> {
    polygamma(0, z)
}

/// Real-argument convenience wrapper.
pub fn polygamma_re(order: u32, x: f64) -> Result<f64, SpecialFnError> {
    polygamma(order, Complex64::new(x, 0.0)).map(|c| c.re)
}

fn reflect(order: u32, z: Complex64) -> Complex64 {
    let w = Complex64::new(1.0, 0.0) - z;
    let base = shifted_asymptotic(order, w);
    let s = (z * PI).sin();
    let c = (z * PI).cos();
    match order {
        0 => base - c / s * PI,
        1 => -base + Complex64::new(PI * PI, 0.0) / (s * s),
        _ => base - c / (s * s * s) * (2.0 * PI * PI * PI),
    }
}

fn shifted_asymptotic(order: u32, z: Complex64) -> Complex64 {
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.norm() < SHIFT_RADIUS {
        let inv = w.inv();
        acc += match order {
            0 => -inv,
            1 => inv * inv,
            _ => inv * inv * inv * -2.0,
        };
        w += 1.0;
    }
    acc + asymptotic(order, w)
}

fn asymptotic(order: u32, w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    match order {
        0 => {
            let mut s = Complex64::new(0.0, 0.0);
            let mut p = inv2;
            for (k, b) in BERNOULLI_2K.iter().enumerate() {
                s += p * (b / (2.0 * (k as f64 + 1.0)));
                p *= inv2;
            }
            w.ln() - inv * 0.5 - s
        }
        1 => {
            let mut s = Complex64::new(0.0, 0.0);
            let mut p = inv2 * inv;
            for b in BERNOULLI_2K.iter() {
                s += p * *b;
                p *= inv2;
            }
            inv + inv2 * 0.5 + s
        }
        _ => {
            let mut s = Complex64::new(0.0, 0.0);
            let mut p = inv2 * inv2;
            for (k, b) in BERNOULLI_2K.iter().enumerate() {
                s += p * (b * (2.0 * (k as f64 + 1.0) + 1.0));
                p *= inv2;
            }
            -inv2 - inv2 * inv - s
        }
    }
}

/// 1/x + Σ_{n=1}^{N} 2x/(x² + n²π²).
pub fn coth_partial_sum(x: f64, n_terms: u64) -> Result<f64, SpecialFnError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialFnError::Domain(x));
    }
    // smallest terms first
    let mut s = 0.0;
    let mut n = n_terms;
    while n > 0 {
        let np = n as f64 * PI;
        s += 2.0 * x / (x * x + np * np);
        n -= 1;
    }
    Ok(s + 1.0 / x)
}

/// 1/sinh²(x), stable for large |x|.
pub fn csch_sq(x: f64) -> Result<f64, SpecialFnError> {
    if x == 0.0 || x.is_nan() {
        return Err(SpecialFnError::Domain(x));
    }
    let a = x.abs();
    let e = (-2.0 * a).exp();
    let d = (-2.0 * a).exp_m1();
    Ok(4.0 * e / (d * d))
}

pub fn coth(x: f64) -> Result<f64, SpecialFnError> {
    if x == 0.0 || x.is_nan() {
        return Err(SpecialFnError::Domain(x));
    }
    Ok(1.0 / x.tanh())
}

/// cot(d) − 1/d, accurate near d = 0.
pub fn cot_minus_inv(d: f64) -> f64 {
    if d.abs() < 0.1 {
        let d2 = d * d;
        // −d/3 − d³/45 − 2d⁵/945 − d⁷/4725 − 2d⁹/93555
        -d * (1.0 / 3.0 + d2 * (1.0 / 45.0 + d2 * (2.0 / 945.0 + d2 * (1.0 / 4725.0 + d2 * 2.0 / 93555.0))))
    } else {
        1.0 / d.tan() - 1.0 / d
    }
}
