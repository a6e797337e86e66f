//! The twelve ordered-time integrals as exponential-sum integrands.
//!
//! Gaps: 0 = t12, 1 = t23, 2 = t34. Prefactors are included; internal units
//! ħ = m = Ω = 1, so w0 is ω̃0 and κ = Ω̃/2.

use super::engine::{mask, Expr, Factor, TrigKind};
use num_complex::Complex64;

const T12: u8 = 0b001;
const T23: u8 = 0b010;
const T34: u8 = 0b100;
const T13: u8 = 0b011;
const T24: u8 = 0b110;
const T14: u8 = 0b111;

fn kind(cos: bool) -> TrigKind {
    if cos {
        TrigKind::Cos
    } else {
        TrigKind::Sin
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn order2(cos: bool, w0: f64, kappa: f64) -> Expr {
    Expr::unit(1)
        .times(&Factor::full_c(mask(&[0]), kappa))
        .times(&Factor::trig(kind(cos), mask(&[0]), w0))
        .scaled(real(2.0 * w0))
}

fn t31(cos: bool, w0: f64, kappa: f64) -> Expr {
    Expr::unit(2)
        .times(&Factor::im_c(T12, kappa))
        .times(&Factor::full_c(T23, kappa))
        .times(&Factor::trig(kind(cos), T13, w0))
        .scaled(real(4.0 * w0))
}

fn t33(cos: bool, w0: f64, kappa: f64) -> Expr {
    Expr::unit(2)
        .times(&Factor::im_pair(T13, T23, kappa))
        .times(&Factor::trig(kind(cos), T12, w0))
        .scaled(real(4.0 * w0))
}

/// Same as T33/T34 with the ⟨12⟩⟨23⟩ kernel in place of ⟨13⟩⟨23⟩.
pub fn t33_adjacent(cos: bool, w0: f64, kappa: f64) -> Expr {
    Expr::unit(2)
        .times(&Factor::im_pair(T12, T23, kappa))
        .times(&Factor::trig(kind(cos), T12, w0))
        .scaled(real(4.0 * w0))
}

fn t41(cos: bool, w0: f64, kappa: f64) -> Expr {
    let k = kind(cos);
    let a = Expr::unit(3)
        .times(&Factor::im_c(T14, kappa))
        .times(&Factor::full_c(T23, kappa))
        .times(&Factor::trig(k, T13, w0))
        .times(&Factor::trig(TrigKind::Sin, T24, w0));
    let b = Expr::unit(3)
        .times(&Factor::im_c(T13, kappa))
        .times(&Factor::full_c(T24, kappa))
        .times(&Factor::trig(k, T14, w0))
        .times(&Factor::trig(TrigKind::Sin, T23, w0));
    let c = Expr::unit(3)
        .times(&Factor::im_pair(T14, T23, kappa))
        .times(&Factor::trig(k, T12, w0))
        .times(&Factor::trig(TrigKind::Sin, T34, w0));
    a.plus(b).plus(c).scaled(real(-4.0 * w0 * w0))
}

fn t61(cos: bool, w0: f64, kappa: f64) -> Expr {
    Expr::unit(3)
        .times(&Factor::im_c(T12, kappa))
        .times(&Factor::im_c(T23, kappa))
        .times(&Factor::full_c(T34, kappa))
        .times(&Factor::trig(kind(cos), T14, w0))
        .scaled(real(8.0 * w0))
}

fn t63(cos: bool, w0: f64, kappa: f64) -> Expr {
    let k = kind(cos);
    let a = Expr::unit(3)
        .times(&Factor::im_c(T12, kappa))
        .times(&Factor::im_pair(T24, T34, kappa))
        .times(&Factor::trig(k, T13, w0));
    let b = Expr::unit(3)
        .times(&Factor::im_c(T23, kappa))
        .times(&Factor::im_pair(T14, T34, kappa))
        .times(&Factor::trig(k, T12, w0));
    let c = Expr::unit(3)
        .times(&Factor::im_c(T13, kappa))
        .times(&Factor::im_pair(T24, T34, kappa))
        .times(&Factor::trig(k, T12, w0));
    a.plus(b).plus(c).scaled(real(8.0 * w0))
}

/// Integrand for a named integral ("T21" … "T64").
pub fn t_integrand(name: &str, w0: f64, kappa: f64) -> Option<Expr> {
    Some(match name {
        "T21" => order2(true, w0, kappa),
        "T22" => order2(false, w0, kappa),
        "T31" => t31(true, w0, kappa),
        "T32" => t31(false, w0, kappa),
        "T33" => t33(true, w0, kappa),
        "T34" => t33(false, w0, kappa),
        "T41" => t41(true, w0, kappa),
        "T42" => t41(false, w0, kappa),
        "T61" => t61(true, w0, kappa),
        "T62" => t61(false, w0, kappa),
        "T63" => t63(true, w0, kappa),
        "T64" => t63(false, w0, kappa),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_builds_with_expected_gap_count() {
        for (name, gaps) in [("T21", 1), ("T34", 2), ("T42", 3), ("T64", 3)] {
            assert_eq!(t_integrand(name, 1.0, 0.05).unwrap().gaps, gaps);
        }
        assert!(t_integrand("T99", 1.0, 0.05).is_none());
    }

    #[test]
    fn every_integrand_has_temperature_dependent_terms() {
        for name in crate::coeffs::T_NAMES {
            let e = t_integrand(name, 0.7, 0.1).unwrap();
            assert!(e.terms.iter().any(|t| t.re_mask != 0), "{name}");
        }
    }
}
