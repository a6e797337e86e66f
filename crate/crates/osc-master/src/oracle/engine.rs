//! Ordered-time integrands as sums of exponentials over the gaps between
//! consecutive times, plus at most one Re⟨·⟩ factor per term.
//!
//! A term is `coeff · Π_g e^{−r_g x_g} · [Re C(Σ_{g∈S} x_g)]`. Integrating over the
//! gaps outside S is elementary; what remains is
//! `G(r_S) = ∫_{R+^k} e^{−r·x} Re C(Σx) dx`, evaluated by one of three routes.

use super::kernel::CorrelationKernel;
use super::{OracleError, QuadratureSpec};
use crate::quad::{self, integrate, integrate_to_infinity, neville_at_zero, richardson_halving, KahanSum, Tol};
use crate::special_fn::cot_minus_inv;
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };
const ONE: C = C { re: 1.0, im: 0.0 };
const I: C = C { re: 0.0, im: 1.0 };

pub const MAX_GAPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: C,
    pub rates: [C; MAX_GAPS],
    /// Bit set of gaps covered by the Re C factor; 0 when absent.
    pub re_mask: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub gaps: usize,
    pub terms: Vec<Term>,
}

/// Multiplicative factor: a short sum of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor(pub Vec<Term>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    Cos,
    Sin,
}

pub fn mask(gaps: &[usize]) -> u8 {
    gaps.iter().fold(0u8, |m, &g| m | (1 << g))
}

fn rates_on(m: u8, r: C) -> [C; MAX_GAPS] {
    let mut out = [ZERO; MAX_GAPS];
    for (g, slot) in out.iter_mut().enumerate() {
        if m & (1 << g) != 0 {
            *slot = r;
        }
    }
    out
}

impl Factor {
    /// Im C(S) = −κ e^{−S}.
    pub fn im_c(m: u8, kappa: f64) -> Self {
        Factor(vec![Term {
            coeff: C::new(-kappa, 0.0),
            rates: rates_on(m, ONE),
            re_mask: 0,
        }])
    }

    pub fn re_c(m: u8) -> Self {
        Factor(vec![Term {
            coeff: ONE,
            rates: [ZERO; MAX_GAPS],
            re_mask: m,
        }])
    }

    /// C(S) = Re C(S) + i Im C(S).
    pub fn full_c(m: u8, kappa: f64) -> Self {
        let mut v = Self::re_c(m).0;
        let mut im = Self::im_c(m, kappa).0;
        im[0].coeff *= I;
        v.append(&mut im);
        Factor(v)
    }

    /// cos or sin of w0·S split into e^{±i w0 S}.
    pub fn trig(kind: TrigKind, m: u8, w0: f64) -> Self {
        let plus = rates_on(m, C::new(0.0, -w0));
        let minus = rates_on(m, C::new(0.0, w0));
        let (cp, cm) = match kind {
            TrigKind::Cos => (C::new(0.5, 0.0), C::new(0.5, 0.0)),
            TrigKind::Sin => (C::new(0.0, -0.5), C::new(0.0, 0.5)),
        };
        Factor(vec![
            Term {
                coeff: cp,
                rates: plus,
                re_mask: 0,
            },
            Term {
                coeff: cm,
                rates: minus,
                re_mask: 0,
            },
        ])
    }

    /// Im[C(S1)·C(S2)] = Re C(S1)·Im C(S2) + Im C(S1)·Re C(S2).
    pub fn im_pair(m1: u8, m2: u8, kappa: f64) -> Self {
        let a = Expr::unit(MAX_GAPS)
            .times(&Self::re_c(m1))
            .times(&Self::im_c(m2, kappa));
        let b = Expr::unit(MAX_GAPS)
            .times(&Self::im_c(m1, kappa))
            .times(&Self::re_c(m2));
        Factor(a.terms.into_iter().chain(b.terms).collect())
    }
}

impl Expr {
    pub fn unit(gaps: usize) -> Self {
        assert!((1..=MAX_GAPS).contains(&gaps));
        Expr {
            gaps,
            terms: vec![Term {
                coeff: ONE,
                rates: [ZERO; MAX_GAPS],
                re_mask: 0,
            }],
        }
    }

    /// Product with a factor. Two Re C factors in one term are a construction bug.
    pub fn times(&self, f: &Factor) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * f.0.len());
        for t in &self.terms {
            for u in &f.0 {
                assert!(
                    t.re_mask == 0 || u.re_mask == 0,
                    "integrand with two Re C factors is not supported"
                );
                let mut rates = t.rates;
                for (r, d) in rates.iter_mut().zip(&u.rates) {
                    *r += d;
                }
                out.push(Term {
                    coeff: t.coeff * u.coeff,
                    rates,
                    re_mask: t.re_mask | u.re_mask,
                });
            }
        }
        Expr {
            gaps: self.gaps,
            terms: out,
        }
    }

    pub fn plus(mut self, other: Expr) -> Self {
        assert_eq!(self.gaps, other.gaps);
        self.terms.extend(other.terms);
        self
    }

    pub fn scaled(mut self, s: C) -> Self {
        for t in &mut self.terms {
            t.coeff *= s;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelTerm {
    pub outer: C,
    pub inner: Vec<C>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub elementary: C,
    pub kernels: Vec<KernelTerm>,
}

impl Reduced {
    fn max_rate(&self) -> f64 {
        self.kernels
            .iter()
            .flat_map(|k| k.inner.iter())
            .map(|r| r.norm())
            .fold(0.0, f64::max)
    }
}

/// Integrate out every gap not under Re C; `eps` is added to all rates.
pub fn reduce(e: &Expr, eps: f64) -> Result<Reduced, OracleError> {
    let mut elementary = KahanSum::default();
    let mut kernels: Vec<KernelTerm> = Vec::new();
    let mut index: HashMap<Vec<(u64, u64)>, usize> = HashMap::new();
    for t in &e.terms {
        if t.coeff == ZERO {
            continue;
        }
        let mut outer = t.coeff;
        let mut inner = Vec::new();
        for g in 0..e.gaps {
            let r = t.rates[g] + eps;
            if t.re_mask & (1 << g) != 0 {
                if r.re < 0.0 {
                    return Err(OracleError::NonDecaying(r));
                }
                inner.push(r);
            } else {
                if !(r.re > 0.0) {
                    return Err(OracleError::NonDecaying(r));
                }
                outer /= r;
            }
        }
        if inner.is_empty() {
            elementary.add(outer);
            continue;
        }
        inner.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let key: Vec<(u64, u64)> = inner.iter().map(|r| (r.re.to_bits(), r.im.to_bits())).collect();
        match index.get(&key) {
            Some(&i) => kernels[i].outer += outer,
            None => {
                index.insert(key, kernels.len());
                kernels.push(KernelTerm { outer, inner });
            }
        }
    }
    kernels.retain(|k| k.outer != ZERO);
    Ok(Reduced {
        elementary: elementary.value(),
        kernels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: C,
    pub error: f64,
}

fn prod_inv(inner: &[C], nu: C) -> C {
    inner.iter().fold(ONE, |p, r| p / (r + nu))
}

/// (F(ν) − F(1))/(1 − ν) for F(s) = Π 1/(r_i + s), telescoped.
fn prod_inv_divided(inner: &[C], nu: f64) -> C {
    let mut total = ZERO;
    for i in 0..inner.len() {
        let mut p = ONE;
        for r in &inner[..i] {
            p /= r + nu;
        }
        p /= (inner[i] + nu) * (inner[i] + 1.0);
        for r in &inner[i + 1..] {
            p /= r + 1.0;
        }
        total += p;
    }
    total
}

/// Matsubara route: Re C(S) = κ[cot z e^{−S} + Σ c_n e^{−ν_n S}] integrated term by term,
/// with the series tail removed by Richardson extrapolation.
pub fn eval_matsubara(red: &Reduced, z: f64, kappa: f64, q: &QuadratureSpec) -> Result<Estimate, OracleError> {
    if red.kernels.is_empty() {
        return Ok(Estimate {
            value: red.elementary,
            error: 0.0,
        });
    }
    let s_at = |nu: f64| -> C {
        let mut acc = KahanSum::default();
        for k in &red.kernels {
            acc.add(k.outer * prod_inv(&k.inner, C::new(nu, 0.0)));
        }
        acc.value()
    };
    let kstar = (z / PI).round();
    let paired = kstar >= 1.0 && (kstar * PI / z - 1.0).abs() < 0.5;
    let head = if paired {
        let kp = kstar * PI;
        let nu = kp / z;
        let mut dd = KahanSum::default();
        for k in &red.kernels {
            dd.add(k.outer * prod_inv_divided(&k.inner, nu));
        }
        s_at(1.0) * (1.0 / (kp + z) + cot_minus_inv(z - kp)) + dd.value() * (-2.0 * kp / (z * (kp + z)))
    } else {
        s_at(1.0) * (1.0 / z.tan())
    };
    let rmax = red.max_rate();
    let base = (q.matsubara_terms as f64)
        .max((20.0 * z * (rmax + 1.0) / PI).ceil())
        .max(2.0 * kstar + 2.0);
    if base > 5e7 {
        return Err(OracleError::Convergence(format!(
            "Matsubara series needs {base:e} terms"
        )));
    }
    let n0 = base as u64;
    let levels = 5;
    let mut partial = Vec::with_capacity(levels);
    let mut acc = KahanSum::default();
    let mut n = 1u64;
    for j in 0..levels {
        let upto = n0 << j;
        while n <= upto {
            if !(paired && n as f64 == kstar) {
                let nu = n as f64 * PI / z;
                let c = (2.0 / z) * nu / ((nu - 1.0) * (nu + 1.0));
                acc.add(s_at(nu) * c);
            }
            n += 1;
        }
        partial.push(acc.value());
    }
    let (tail_sum, err) = richardson_halving(&partial);
    let value = red.elementary + (head + tail_sum) * kappa;
    let roundoff = 64.0 * f64::EPSILON * (head.norm() + partial[levels - 1].norm()) * kappa;
    Ok(Estimate {
        value,
        error: err * kappa + roundoff,
    })
}

/// Frequency route at a fixed convergence factor ε (already folded into `red`).
fn eval_frequency_at(red: &Reduced, z: f64, kappa: f64, eps: f64, tol: Tol) -> Result<Estimate, OracleError> {
    if red.kernels.is_empty() {
        return Ok(Estimate {
            value: red.elementary,
            error: 0.0,
        });
    }
    let pref = 2.0 * kappa / PI;
    let h = |w: f64| -> C {
        let spectral = pref * (w / (z * w).tanh()) / (1.0 + w * w);
        let mut acc = ZERO;
        let s = C::new(0.0, w);
        for k in &red.kernels {
            acc += k.outer * (prod_inv(&k.inner, -s) + prod_inv(&k.inner, s));
        }
        acc * (0.5 * spectral)
    };
    let mut pts = vec![0.0, 1.0, 1.0 / z, 10.0 / z];
    for k in &red.kernels {
        for r in &k.inner {
            let c = r.im.abs();
            if c > 0.0 {
                pts.push(c);
                for m in [1.0, 4.0, 16.0] {
                    pts.push(c + m * eps);
                    if c - m * eps > 0.0 {
                        pts.push(c - m * eps);
                    }
                }
            }
        }
    }
    pts.retain(|x| x.is_finite() && *x >= 0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let top = pts.last().copied().unwrap_or(1.0).max(1.0);
    let w_max = 2.0 * top + 4.0;
    pts.push(w_max);
    let body = integrate(h, &pts, tol).map_err(OracleError::from)?;
    let tail = integrate_to_infinity(h, w_max, w_max, tol).map_err(OracleError::from)?;
    Ok(Estimate {
        value: red.elementary + body.value + tail.value,
        error: body.error + tail.error,
    })
}

/// Frequency route: swap ω and time integrals with convergence factor e^{−εt},
/// then extrapolate ε → 0 through ε_k = ε0·2^{−k}, k = 0..6.
pub fn eval_frequency(e: &Expr, z: f64, kappa: f64, q: &QuadratureSpec) -> Result<Estimate, OracleError> {
    let mu = 1.0f64.min(PI / z);
    let eps0 = 0.25 * mu;
    let tol = Tol::new(q.abs_tol * 1e-2, (q.rel_tol * 1e-2).max(1e-13));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut qerr = Vec::new();
    for k in 0..7 {
        let eps = eps0 / f64::from(1u32 << k);
        let red = reduce(e, eps)?;
        let est = eval_frequency_at(&red, z, kappa, eps, tol)?;
        xs.push(eps);
        ys.push(est.value);
        qerr.push(est.error);
    }
    let full = neville_at_zero(&xs, &ys);
    let fewer = neville_at_zero(&xs[..6], &ys[..6]);
    // amplification of per-ε errors by the extrapolation weights
    let mut amp = 0.0;
    for i in 0..xs.len() {
        let mut l = 1.0;
        for j in 0..xs.len() {
            if j != i {
                l *= xs[j] / (xs[j] - xs[i]);
            }
        }
        amp += l.abs() * qerr[i];
    }
    let error = (full - fewer).norm() + amp;
    let scale = full.norm();
    if error > q.abs_tol.max(q.extrapolation_rel_tol * scale) {
        return Err(OracleError::Extrapolation {
            value: full,
            residual: error,
        });
    }
    Ok(Estimate { value: full, error })
}

fn phi1(x: C) -> C {
    if x.norm() < 1e-3 {
        ONE + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))
    } else {
        (x.exp() - 1.0) / x
    }
}

fn mat_mul3(a: &[[C; 3]; 3], b: &[[C; 3]; 3]) -> [[C; 3]; 3] {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = ZERO;
            for k in 0..3 {
                s += a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// exp of a 3×3 complex matrix by scaling and squaring of a Taylor series.
fn expm3(a: &[[C; 3]; 3]) -> [[C; 3]; 3] {
    let norm = a
        .iter()
        .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(s);
    let mut x = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            x[i][j] = a[i][j] * scale;
        }
    }
    let mut result = [[ZERO; 3]; 3];
    let mut term = [[ZERO; 3]; 3];
    for i in 0..3 {
        result[i][i] = ONE;
        term[i][i] = ONE;
    }
    for k in 1..=18 {
        term = mat_mul3(&term, &x);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = mat_mul3(&result, &result);
    }
    result
}

/// ∫ over the simplex Σx = u of e^{−r·x}: the convolution of the exponentials.
pub fn simplex_kernel(inner: &[C], u: f64) -> C {
    match inner.len() {
        1 => (-inner[0] * u).exp(),
        2 => {
            let (a, b) = if inner[1].re >= inner[0].re {
                (inner[0], inner[1])
            } else {
                (inner[1], inner[0])
            };
            (-a * u).exp() * u * phi1(-(b - a) * u)
        }
        3 => {
            let mut m = [[ZERO; 3]; 3];
            for i in 0..3 {
                m[i][i] = -inner[i] * u;
            }
            m[0][1] = C::new(u, 0.0);
            m[1][2] = C::new(u, 0.0);
            expm3(&m)[0][2]
        }
        _ => unreachable!("at most three gaps"),
    }
}

/// Time route: ∫_0^U Re C(u)·K(u) du with K the summed simplex kernels.
pub fn eval_time(red: &Reduced, kernel: &CorrelationKernel, q: &QuadratureSpec) -> Result<Estimate, OracleError> {
    if red.kernels.is_empty() {
        return Ok(Estimate {
            value: red.elementary,
            error: 0.0,
        });
    }
    let z = kernel.params.z;
    let mu = 1.0f64.min(PI / z);
    let u_max = q.t_max_periods * 2.0 * PI / mu;
    let k_of = |u: f64| -> C {
        let mut acc = ZERO;
        for k in &red.kernels {
            acc += k.outer * simplex_kernel(&k.inner, u);
        }
        acc
    };
    let osc = red
        .kernels
        .iter()
        .flat_map(|k| k.inner.iter())
        .map(|r| r.im.abs())
        .fold(1.0, f64::max);
    let panel = (PI / osc).min(1.0);
    let n = ((u_max / panel).ceil() as usize).max(1);
    let mut pts: Vec<f64> = (0..=n).map(|j| u_max * j as f64 / n as f64).collect();
    // resolve the logarithmic onset near u = 0
    for extra in [1e-6, 1e-4, 1e-2] {
        let x = extra * panel;
        if x < pts[1] {
            pts.insert(1, x);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut failure = None;
    let tol = Tol::new(q.abs_tol, q.rel_tol);
    let r = integrate(
        |u| match kernel.re(u) {
            Ok(c) => k_of(u) * c,
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
                ZERO
            }
        },
        &pts,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let r = r.map_err(OracleError::from)?;
    let tail = kernel.re(u_max)?.abs()
        * red
            .kernels
            .iter()
            .map(|k| (k.outer * simplex_kernel(&k.inner, u_max)).norm())
            .sum::<f64>()
        / mu;
    if tail > q.abs_tol.max(q.rel_tol * r.value.norm()) {
        return Err(OracleError::TailBound {
            tail,
            abs_tol: q.abs_tol,
        });
    }
    Ok(Estimate {
        value: red.elementary + r.value,
        error: r.error + tail,
    })
}

impl From<quad::QuadError> for OracleError {
    fn from(e: quad::QuadError) -> Self {
        OracleError::Convergence(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn simplex_kernel_two_and_three_rates() {
        let r = [c(0.3, 1.0), c(1.2, -0.5), c(2.0, 0.25)];
        let u = 1.7;
        let direct2 = ((-r[0] * u).exp() - (-r[1] * u).exp()) / (r[1] - r[0]);
        assert!((simplex_kernel(&r[..2], u) - direct2).norm() < 1e-14);
        let mut direct3 = ZERO;
        for i in 0..3 {
            let mut d = ONE;
            for j in 0..3 {
                if j != i {
                    d *= r[j] - r[i];
                }
            }
            direct3 += (-r[i] * u).exp() / d;
        }
        assert!((simplex_kernel(&r, u) - direct3).norm() < 1e-13);
        // coincident rates: u² e^{−ru}/2
        let same = [c(0.5, 0.2); 3];
        let want = (-same[0] * u).exp() * (u * u / 2.0);
        assert!((simplex_kernel(&same, u) - want).norm() < 1e-13);
    }

    #[test]
    fn divided_product_matches_difference() {
        let inner = [c(0.4, -1.0), c(1.0, 0.0), c(0.0, 2.0)];
        let nu = 1.7;
        let want = (prod_inv(&inner, c(nu, 0.0)) - prod_inv(&inner, ONE)) / (1.0 - nu);
        assert!((prod_inv_divided(&inner, nu) - want).norm() < 1e-14);
    }

    #[test]
    fn reduce_merges_and_integrates_elementary_gaps() {
        let e = Expr::unit(2)
            .times(&Factor::im_c(mask(&[0]), 1.0))
            .times(&Factor::re_c(mask(&[1])));
        let red = reduce(&e, 0.0).unwrap();
        assert_eq!(red.kernels.len(), 1);
        assert!((red.kernels[0].outer - c(-1.0, 0.0)).norm() < 1e-15);
        let e2 = Expr::unit(1).times(&Factor::im_c(1, 2.0));
        assert!((reduce(&e2, 0.0).unwrap().elementary - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reduce_rejects_non_decaying_gap() {
        let e = Expr::unit(1).times(&Factor::trig(TrigKind::Cos, 1, 1.0));
        assert!(matches!(reduce(&e, 0.0), Err(OracleError::NonDecaying(_))));
    }

    #[test]
    fn trig_factor_reconstructs_cos_and_sin() {
        let w0: f64 = 0.8;
        let s: f64 = 1.3;
        for (kind, want) in [(TrigKind::Cos, (w0 * s).cos()), (TrigKind::Sin, (w0 * s).sin())] {
            let f = Factor::trig(kind, 1, w0);
            let v: C = f.0.iter().map(|t| t.coeff * (-t.rates[0] * s).exp()).sum();
            assert!((v - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm3(&[[ZERO; 3]; 3]);
        assert_eq!(e[0][0], ONE);
        assert_eq!(e[0][2], ZERO);
    }
}
