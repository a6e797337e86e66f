//! Brute-force time-domain paths: nested 2D quadrature for the order-3
//! integrals and products of 1D transforms for the separable ones.

use super::kernel::CorrelationKernel;
use super::{OracleError, OracleValue, QuadratureSpec};
use crate::quad::{integrate, Tol};
use num_complex::Complex64;
use std::cell::RefCell;
use std::f64::consts::PI;

type C = Complex64;

fn horizon(k: &CorrelationKernel, q: &QuadratureSpec) -> f64 {
    let mu = 1.0f64.min(PI / k.params.z);
    q.t_max_periods * 2.0 * PI / mu
}

fn panels(u_max: f64, w0: f64) -> Vec<f64> {
    let len = (PI / w0).min(1.0);
    let n = ((u_max / len).ceil() as usize).max(1);
    let mut pts: Vec<f64> = (0..=n).map(|j| u_max * j as f64 / n as f64).collect();
    pts.insert(1, (1e-3 * len).min(pts[1] * 0.5));
    pts
}

fn first_error(slot: &RefCell<Option<OracleError>>, e: OracleError) {
    let mut s = slot.borrow_mut();
    if s.is_none() {
        *s = Some(e);
    }
}

/// T31–T34 by direct nested adaptive quadrature over (t12, t23).
pub fn nested_t3(name: &str, k: &CorrelationKernel, q: &QuadratureSpec) -> Result<OracleValue, OracleError> {
    let w = k.params.omega0_tilde;
    let trig = |x: f64, cos: bool| if cos { x.cos() } else { x.sin() };
    let (adjacent_im, cos) = match name {
        "T31" => (true, true),
        "T32" => (true, false),
        "T33" => (false, true),
        "T34" => (false, false),
        _ => return Err(OracleError::Unsupported(format!("no nested path for {name}"))),
    };
    let u_max = horizon(k, q);
    let pts = panels(u_max, w);
    let failure = RefCell::new(None);
    let inner_tol = Tol::new(q.abs_tol * 1e-2, q.rel_tol * 1e-2);
    let outer = integrate(
        |a: f64| {
            let inner = integrate(
                |b: f64| {
                    let r = if adjacent_im {
                        k.value(b).map(|cb| cb * (k.im(a) * trig(w * (a + b), cos)))
                    } else {
                        k.value(a + b)
                            .and_then(|cab| k.value(b).map(|cb| C::new((cab * cb).im * trig(w * a, cos), 0.0)))
                    };
                    r.unwrap_or_else(|e| {
                        first_error(&failure, e);
                        C::new(0.0, 0.0)
                    })
                },
                &pts,
                inner_tol,
            );
            match inner {
                Ok(v) => v.value,
                Err(e) => {
                    first_error(&failure, e.into());
                    C::new(0.0, 0.0)
                }
            }
        },
        &pts,
        Tol::new(q.abs_tol, q.rel_tol),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = outer?;
    Ok(OracleValue {
        value: r.value * (4.0 * w),
        error: r.error * 4.0 * w,
    })
}

struct Transforms {
    im_plus: C,
    im_minus: C,
    c_plus: C,
    c_minus: C,
    error: f64,
}

fn transforms(k: &CorrelationKernel, q: &QuadratureSpec) -> Result<Transforms, OracleError> {
    let w = k.params.omega0_tilde;
    let u_max = horizon(k, q);
    let pts = panels(u_max, w);
    let tol = Tol::new(q.abs_tol * 1e-2, q.rel_tol * 1e-2);
    let failure = RefCell::new(None);
    let mut err = 0.0;
    let mut one = |f: &dyn Fn(f64) -> Result<C, OracleError>| -> Result<C, OracleError> {
        let r = integrate(
            |t| {
                f(t).unwrap_or_else(|e| {
                    first_error(&failure, e);
                    C::new(0.0, 0.0)
                })
            },
            &pts,
            tol,
        )?;
        err += r.error;
        Ok(r.value)
    };
    let phase = |t: f64, s: f64| C::from_polar(1.0, s * w * t);
    let im_plus = one(&|t| Ok(phase(t, 1.0) * k.im(t)))?;
    let im_minus = one(&|t| Ok(phase(t, -1.0) * k.im(t)))?;
    let c_plus = one(&|t| k.value(t).map(|c| c * phase(t, 1.0)))?;
    let c_minus = one(&|t| k.value(t).map(|c| c * phase(t, -1.0)))?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Transforms {
        im_plus,
        im_minus,
        c_plus,
        c_minus,
        error: err,
    })
}

/// T31, T32, T61, T62 as products of 1D transforms of Im C and C against e^{±iω0t}.
pub fn factorized(name: &str, k: &CorrelationKernel, q: &QuadratureSpec) -> Result<OracleValue, OracleError> {
    let w = k.params.omega0_tilde;
    let t = transforms(k, q)?;
    let (plus, minus, pref) = match name {
        "T31" | "T32" => (t.im_plus * t.c_plus, t.im_minus * t.c_minus, 4.0 * w),
        "T61" | "T62" => (
            t.im_plus * t.im_plus * t.c_plus,
            t.im_minus * t.im_minus * t.c_minus,
            8.0 * w,
        ),
        _ => return Err(OracleError::Unsupported(format!("{name} does not factorize"))),
    };
    let value = if name.ends_with('1') {
        (plus + minus) * 0.5
    } else {
        (plus - minus) / C::new(0.0, 2.0)
    };
    let scale = t.im_plus.norm().max(t.c_plus.norm()).max(1.0);
    Ok(OracleValue {
        value: value * pref,
        error: t.error * scale * scale * pref,
    })
}
