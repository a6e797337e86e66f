//! Closed-form T-integrals, per-order coefficients A1..A4, aggregates and limits.
//!
//! Everything is evaluated in units where Ω = 1, so rates such as γ appear as
//! γ/Ω = ω̃0²Ω̃ and ω0 appears as ω̃0.

use crate::model::{thermal_occupation, ReducedParams};
use crate::special_fn::{coth, csch_sq, polygamma, SpecialFnError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoeffError {
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error("full coefficients need finite beta_Omega; use the low-temperature limits for T = 0")]
    ZeroTemperature,
    #[error("{0} must be > 0 for this quantity (got {1})")]
    Domain(&'static str, f64),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Temperature-dependent building blocks shared by the closed forms.
#[derive(Debug, Clone, Copy)]
pub struct ThermalPieces {
    pub coth: f64,
    pub n: f64,
    pub csch2: f64,
    pub i: f64,
    /// Ψ0 = ψ0(z/π) − Re ψ0(1 − iβω0/π)
    pub psi0_combo: f64,
    /// Im ψ1(1 − iβω0/π)
    pub im_psi1: f64,
    /// ψ1(z/π)
    pub psi1: f64,
    /// ψ2(z/π)
    pub psi2: f64,
}

impl ThermalPieces {
    pub fn new(p: &ReducedParams) -> Result<Self, CoeffError> {
        if !p.finite_temperature() {
            return Err(CoeffError::ZeroTemperature);
        }
        let z = p.z;
        let bw = p.beta_omega0();
        let arg = c(1.0, -bw / PI);
        let x = c(z / PI, 0.0);
        let re_psi0 = polygamma(0, arg)?.re;
        let psi0_z = polygamma(0, x)?.re;
        let psi0_combo = psi0_z - re_psi0;
        Ok(Self {
            coth: coth(bw)?,
            n: thermal_occupation(bw).map_err(|_| CoeffError::Domain("beta_omega0", bw))?,
            csch2: csch_sq(bw)?,
            i: -1.0 / z - 2.0 / PI * psi0_combo,
            psi0_combo,
            im_psi1: polygamma(1, arg)?.im,
            psi1: polygamma(1, x)?.re,
            psi2: polygamma(2, x)?.re,
        })
    }
}

/// I = −1/(βΩ) + (2/π)(Re ψ0(1 − iβω0/π) − ψ0(βΩ/π))
pub fn bath_integral_i(p: &ReducedParams) -> Result<f64, CoeffError> {
    if !p.finite_temperature() {
        return Err(CoeffError::ZeroTemperature);
    }
    let re_psi0 = polygamma(0, c(1.0, -p.beta_omega0() / PI))?.re;
    let psi0_z = polygamma(0, c(p.z / PI, 0.0))?.re;
    Ok(-1.0 / p.z + 2.0 / PI * (re_psi0 - psi0_z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TIntegralSet {
    pub t21: Complex64,
    pub t22: Complex64,
    pub t31: Complex64,
    pub t32: Complex64,
    pub t33: Complex64,
    pub t34: Complex64,
    pub t41: Complex64,
    pub t42: Complex64,
    pub t61: Complex64,
    pub t62: Complex64,
    pub t63: Complex64,
    pub t64: Complex64,
}

pub const T_NAMES: [&str; 12] = [
    "T21", "T22", "T31", "T32", "T33", "T34", "T41", "T42", "T61", "T62", "T63", "T64",
];

impl TIntegralSet {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            t21: z,
            t22: z,
            t31: z,
            t32: z,
            t33: z,
            t34: z,
            t41: z,
            t42: z,
            t61: z,
            t62: z,
            t63: z,
            t64: z,
        }
    }

    pub fn as_array(&self) -> [Complex64; 12] {
        [
            self.t21, self.t22, self.t31, self.t32, self.t33, self.t34, self.t41, self.t42, self.t61, self.t62,
            self.t63, self.t64,
        ]
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        T_NAMES.iter().position(|n| *n == name).map(|i| self.as_array()[i])
    }

    pub fn set(&mut self, name: &str, v: Complex64) {
        match name {
            "T21" => self.t21 = v,
            "T22" => self.t22 = v,
            "T31" => self.t31 = v,
            "T32" => self.t32 = v,
            "T33" => self.t33 = v,
            "T34" => self.t34 = v,
            "T41" => self.t41 = v,
            "T42" => self.t42 = v,
            "T61" => self.t61 = v,
            "T62" => self.t62 = v,
            "T63" => self.t63 = v,
            "T64" => self.t64 = v,
            _ => panic!("unknown T-integral {name}"),
        }
    }

    /// (T1^(n), T2^(n))
    pub fn order_sums(&self, order: u8) -> (Complex64, Complex64) {
        match order {
            2 => (self.t21, self.t22),
            3 => (self.t31 + self.t33, self.t32 + self.t34),
            4 => (self.t41 + self.t61 + self.t63, self.t42 + self.t62 + self.t64),
            _ => panic!("order must be 2, 3 or 4"),
        }
    }

    pub fn names_for_order(order: u8) -> &'static [&'static str] {
        match order {
            2 => &T_NAMES[0..2],
            3 => &T_NAMES[2..6],
            4 => &T_NAMES[6..12],
            _ => &[],
        }
    }
}

/// Closed forms of every T-integral in units Ω = 1.
pub fn t_closed_forms(p: &ReducedParams) -> Result<TIntegralSet, CoeffError> {
    let th = ThermalPieces::new(p)?;
    let w = p.omega0_tilde;
    let f = p.f();
    let dm = p.dm();
    let gw = p.gamma_over_omega0();
    let go = p.gamma_over_cutoff();
    let g = go;
    let b = p.z;
    let bw = p.beta_omega0();
    let (ct, i, cs) = (th.coth, th.i, th.csch2);
    let f2 = f * f;
    let f3 = f2 * f;

    let mut t = TIntegralSet::zero();
    t.t21 = c(f * g * ct, -f * w * dm);
    t.t22 = c(f * g * i, -f * g);
    t.t31 = c(-g * f2 * (dm * ct - gw * i), -w * f2 * (gw * gw - dm * dm));
    t.t32 = c(-g * f2 * (gw * ct + dm * i), 2.0 * g * dm * f2);
    t.t33 = c(-g * f * dm * (1.0 / bw + ct), 0.0);
    t.t34 = c(2.0 / PI * g * f * dm * th.psi0_combo, 0.0);
    t.t41 = c(
        -g * f3 * (0.5 * (dm - 5.0 * go) * ct + gw * i) - f2 * g * b * (g * th.im_psi1 / (PI * PI) - 0.5 * w * dm * cs),
        -g * g * f3 * (1.0 / w - w),
    );
    t.t42 = c(
        -g * g * f3 * (0.5 * (w - 1.0 / w) * ct + (1.0 + w * w) / b - 3.0 * i)
            - f2 * g * b * (g * (0.5 * cs - 2.0 / (PI * PI) * th.psi1) + w * dm * th.im_psi1 / (PI * PI)),
        -2.0 * f3 * g * g,
    );
    t.t61 = c(
        -f3 * g * dm * ((go - dm) * ct + 2.0 * gw * i),
        -f3 * dm * (w * dm * dm - 3.0 * g * gw),
    );
    t.t62 = c(
        -f3 * g * dm * ((go - dm) * i - 2.0 * gw * ct),
        -f3 * g * dm * (3.0 * dm - go),
    );
    t.t63 = c(-2.0 * f3 * g * dm * (-gw * i - dm * ct), 0.0);
    t.t64 = c(
        -2.0 * f3 * g * dm * (gw * ct - dm * i)
            - f * g
                * dm
                * (f / b * (3.0 * dm + go) + dm * b * (b / (PI * PI * PI) * th.psi2 - 4.0 * f / (PI * PI) * th.psi1)),
        0.0,
    );
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderCoeffs {
    pub order: u8,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl OrderCoeffs {
    pub fn zero(order: u8) -> Self {
        Self {
            order,
            a1: 0.0,
            a2: 0.0,
            a3: 0.0,
            a4: 0.0,
        }
    }

    /// A1 = Im T1/ω0, A2 = (Re T1 + Im T2)/ω0, A3 = Re T2/ω0, A4 = Im T2/ω0 (ω0 in units of Ω).
    pub fn from_t(order: u8, t1: Complex64, t2: Complex64, omega0_tilde: f64) -> Self {
        Self {
            order,
            a1: t1.im / omega0_tilde,
            a2: (t1.re + t2.im) / omega0_tilde,
            a3: t2.re / omega0_tilde,
            a4: t2.im / omega0_tilde,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }

    pub fn d_xx(&self) -> f64 {
        self.a2 - self.a4
    }

    pub fn d_xp(&self) -> f64 {
        self.a3
    }
}

pub fn second_order(p: &ReducedParams) -> Result<OrderCoeffs, CoeffError> {
    let th = ThermalPieces::new(p)?;
    let f = p.f();
    let gw = p.gamma_over_omega0();
    Ok(OrderCoeffs {
        order: 2,
        a1: -f * p.dm(),
        a2: 2.0 * f * gw * th.n,
        a3: f * gw * th.i,
        a4: -f * gw,
    })
}

pub fn third_order(p: &ReducedParams) -> Result<OrderCoeffs, CoeffError> {
    let th = ThermalPieces::new(p)?;
    let f = p.f();
    let f2 = f * f;
    let gw = p.gamma_over_omega0();
    let dm = p.dm();
    let ct = 1.0 + 2.0 * th.n;
    Ok(OrderCoeffs {
        order: 3,
        a1: -f2 * (gw * gw - dm * dm),
        a2: -f2 * gw * (dm * (1.0 + 1.0 / f) * ct - gw * th.i) + f * gw * dm * (2.0 * f - 1.0 / p.beta_omega0()),
        a3: -f2 * gw * (gw * ct - dm * (-th.i + 2.0 / PI / f * th.psi0_combo)),
        a4: 2.0 * f2 * gw * dm,
    })
}

pub fn fourth_order(p: &ReducedParams) -> Result<OrderCoeffs, CoeffError> {
    let th = ThermalPieces::new(p)?;
    let w = p.omega0_tilde;
    let f = p.f();
    let f2 = f * f;
    let f3 = f2 * f;
    let gw = p.gamma_over_omega0();
    let go = p.gamma_over_cutoff();
    let g = go;
    let dm = p.dm();
    let b = p.z;
    let ct = 1.0 + 2.0 * th.n;
    let pi2 = PI * PI;
    let a1 = -f3 * (gw * gw * (1.0 - 3.0 * dm) - go * go + dm * dm * dm);
    let a2 = -f3 * gw * ((-2.5 * go + dm * (0.5 + go - 3.0 * dm)) * ct + gw * th.i + 2.0 * go + dm * (3.0 * dm - go))
        - f2 * g * b * (gw * th.im_psi1 / pi2 - 0.5 * dm * th.csch2);
    // the (Ω/γ)(δm/m)² and (ω0/γ) pieces are multiplied through by γ so Ω̃ = 0 stays finite
    let a3 = -f3
        * gw
        * (0.5 * gw * (w * w - 1.0) * ct - th.i * (3.0 * go + dm * (3.0 * dm - go))
            + (dm * (3.0 * dm + go) / f + go * (1.0 + w * w)) / b)
        - f2 * b
            * gw
            * (g * (0.5 * th.csch2 - 2.0 / pi2 * th.psi1) - 4.0 / pi2 * dm * dm * th.psi1
                + w * dm / pi2 * (th.im_psi1 + b / (PI * f * w) * dm * th.psi2));
    let a4 = -f3 * gw * (2.0 * go + dm * (3.0 * dm - go));
    Ok(OrderCoeffs {
        order: 4,
        a1,
        a2,
        a3,
        a4,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MasterCoeffs {
    pub delta: f64,
    pub lambda: f64,
    pub d_xx: f64,
    pub d_xp: f64,
    pub per_order: [OrderCoeffs; 3],
}

impl MasterCoeffs {
    pub fn from_orders(per_order: [OrderCoeffs; 3]) -> Self {
        let mut m = Self {
            delta: 0.0,
            lambda: 0.0,
            d_xx: 0.0,
            d_xp: 0.0,
            per_order,
        };
        for o in per_order.iter() {
            m.delta += o.a1;
            m.lambda += o.a4;
            m.d_xx += o.a2 - o.a4;
            m.d_xp += o.a3;
        }
        m
    }

    /// Drift and diffusion set directly, with no per-order breakdown.
    pub fn from_totals(delta: f64, lambda: f64, d_xx: f64, d_xp: f64) -> Self {
        let mut o = OrderCoeffs::zero(2);
        o.a1 = delta;
        o.a4 = lambda;
        o.a2 = d_xx + lambda;
        o.a3 = d_xp;
        Self::from_orders([o, OrderCoeffs::zero(3), OrderCoeffs::zero(4)])
    }

    pub fn zero() -> Self {
        Self::from_orders([OrderCoeffs::zero(2), OrderCoeffs::zero(3), OrderCoeffs::zero(4)])
    }

    pub fn order(&self, n: u8) -> &OrderCoeffs {
        &self.per_order[(n - 2) as usize]
    }

    /// Keep only orders ≤ max_order.
    pub fn truncated(&self, max_order: u8) -> Self {
        let mut po = self.per_order;
        for o in po.iter_mut() {
            if o.order > max_order {
                *o = OrderCoeffs::zero(o.order);
            }
        }
        Self::from_orders(po)
    }
}

pub fn aggregate(p: &ReducedParams) -> Result<MasterCoeffs, CoeffError> {
    Ok(MasterCoeffs::from_orders([
        second_order(p)?,
        third_order(p)?,
        fourth_order(p)?,
    ]))
}

pub fn delta_compact(p: &ReducedParams) -> f64 {
    let w2 = p.omega0_tilde * p.omega0_tilde;
    let o = p.omega_tau_e;
    let f = p.f();
    -o * f * (1.0 + o * f * ((w2 - 1.0) + f * (o * (1.0 - 3.0 * w2) + w2 * (1.0 - w2))))
}

pub fn lambda_compact(p: &ReducedParams) -> f64 {
    let w = p.omega0_tilde;
    let w2 = w * w;
    let o = p.omega_tau_e;
    let f = p.f();
    -f * w * o * (1.0 + f * o * (-2.0 + f * (o * (3.0 - w2) + 2.0 * w2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionPair {
    pub order: u8,
    pub d_xx: f64,
    pub d_xp: f64,
}

/// Leading behaviour for z ≪ 1; every entry scales as 1/z.
pub fn high_t_limits(p: &ReducedParams) -> [DiffusionPair; 3] {
    let w = p.omega0_tilde;
    let w2 = w * w;
    let o = p.omega_tau_e;
    let z = p.z;
    let f = p.f();
    let f2 = f * f;
    let f3 = f2 * f;
    [
        DiffusionPair {
            order: 2,
            d_xx: f * o / z,
            d_xp: f * w * o / z,
        },
        DiffusionPair {
            order: 3,
            d_xx: -f2 * o * o / z * (3.0 + w2),
            d_xp: -2.0 * f2 * w * o * o / z * (2.0 + w2),
        },
        DiffusionPair {
            order: 4,
            d_xx: f3 * o * o / z * (3.0 * o + w2 * (2.0 - o)),
            d_xp: f3 * w * o * o / z * (6.0 * o + w2 * (3.0 + w2) * (1.0 + o)),
        },
    ]
}

/// Zero-temperature forms, used for z ≫ 1.
pub fn low_t_limits(p: &ReducedParams) -> Result<[DiffusionPair; 3], CoeffError> {
    let w = p.omega0_tilde;
    if !(w > 0.0) {
        return Err(CoeffError::Domain("omega0_tilde", w));
    }
    let w2 = w * w;
    let o = p.omega_tau_e;
    let f = p.f();
    let f2 = f * f;
    let f3 = f2 * f;
    let l = w.ln();
    Ok([
        DiffusionPair {
            order: 2,
            d_xx: f * w * o,
            d_xp: 2.0 / PI * f * w * o * l,
        },
        DiffusionPair {
            order: 3,
            d_xx: -f2 * w * o * o * (2.0 + w2 - 2.0 / PI * w * l),
            d_xp: -f2 * w * o * o * (w + 2.0 / PI * (2.0 + w2) * l),
        },
        DiffusionPair {
            order: 4,
            d_xx: -f3 * w * o * o * (0.5 - 3.0 * o + (o - 2.5) * w2 + w / PI * (1.0 + w2 + 2.0 * l)),
            d_xp: f3 / PI
                * w
                * o
                * o
                * (5.0 * o - 1.0
                    + w2 * w2 * (2.0 + o)
                    + (1.0 + 6.0 * o) * w2
                    + 2.0 * (3.0 * w2 + o * (3.0 - w2)) * l
                    + PI / 2.0 * w * (1.0 - w2)),
        },
    ])
}

/// Per-order (D_xx, D_xp) from the full coefficients.
pub fn diffusion_by_order(m: &MasterCoeffs) -> [DiffusionPair; 3] {
    let mut out = [DiffusionPair {
        order: 2,
        d_xx: 0.0,
        d_xp: 0.0,
    }; 3];
    for (k, o) in m.per_order.iter().enumerate() {
        out[k] = DiffusionPair {
            order: o.order,
            d_xx: o.d_xx(),
            d_xp: o.d_xp(),
        };
    }
    out
}
