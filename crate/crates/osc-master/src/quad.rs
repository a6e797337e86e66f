//! Adaptive Gauss–Kronrod quadrature, semi-infinite maps, oscillatory tails,
//! Wynn's epsilon and Neville extrapolation.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: estimate {value}, error {error:e} after {evals} evaluations")]
    NotConverged { value: Complex64, error: f64, evals: usize },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Tol {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_segments: 200_000,
        }
    }

    pub fn with_max_segments(mut self, n: usize) -> Self {
        self.max_segments = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evals: usize,
}

// Gauss–Kronrod 10/21 abscissae and weights
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// One 21-point Kronrod panel: (estimate, |K21 − G10|).
pub fn gk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[10];
    let mut rg = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += s * WGK[j];
        if j % 2 == 1 {
            rg += s * WG[j / 2];
        }
    }
    let k = rk * h;
    let g = rg * h;
    (k, (k - g).norm())
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection over the intervals between consecutive `points`.
pub fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, points: &[f64], tol: Tol) -> Result<QuadResult, QuadError> {
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut evals = 0usize;
    let mut frozen_err = 0.0;
    let bad_x = std::cell::Cell::new(None);
    let mut g = |x: f64| {
        let v = f(x);
        if !(v.re.is_finite() && v.im.is_finite()) && bad_x.get().is_none() {
            bad_x.set(Some(x));
        }
        v
    };
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk21(&mut g, w[0], w[1]);
        evals += 21;
        total += v;
        err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    loop {
        if let Some(x) = bad_x.get() {
            return Err(QuadError::NonFinite(x));
        }
        let target = tol.abs.max(tol.rel * total.norm());
        if err <= target {
            // the running sums can cancel badly; confirm with a fresh sum
            total = heap.iter().fold(Complex64::new(0.0, 0.0), |s, x| s + x.value);
            err = heap.iter().map(|x| x.error).sum::<f64>() + frozen_err;
            if err <= tol.abs.max(tol.rel * total.norm()) {
                break;
            }
        }
        if heap.len() >= tol.max_segments {
            return Err(QuadError::NotConverged {
                value: total,
                error: err,
                evals,
            });
        }
        let seg = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let m = 0.5 * (seg.a + seg.b);
        if !(m > seg.a && m < seg.b) || (seg.b - seg.a) < 1e-14 * seg.a.abs().max(seg.b.abs()) {
            // cannot split further; keep its error and move on
            frozen_err += seg.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&mut g, seg.a, m);
        let (v2, e2) = gk21(&mut g, m, seg.b);
        evals += 42;
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: m,
            b: seg.b,
            value: v2,
            error: e2,
        });
        // re-sum occasionally to stop drift from the running updates
        if evals % 8400 == 0 {
            total = heap.iter().fold(Complex64::new(0.0, 0.0), |s, x| s + x.value);
            err = heap.iter().map(|x| x.error).sum::<f64>() + frozen_err;
        }
    }
    if let Some(x) = bad_x.get() {
        return Err(QuadError::NonFinite(x));
    }
    let value = heap.iter().fold(Complex64::new(0.0, 0.0), |s, x| s + x.value);
    let error = heap.iter().map(|x| x.error).sum::<f64>() + frozen_err;
    let target = tol.abs.max(tol.rel * value.norm());
    if error > target && frozen_err > target {
        return Err(QuadError::NotConverged { value, error, evals });
    }
    Ok(QuadResult { value, error, evals })
}

/// ∫_a^∞ f via x = a + s·t/(1 − t).
pub fn integrate_to_infinity<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    scale: f64,
    tol: Tol,
) -> Result<QuadResult, QuadError> {
    integrate(
        |t: f64| {
            let u = 1.0 - t;
            let x = a + scale * t / u;
            let jac = scale / (u * u);
            let v = f(x);
            if v.re == 0.0 && v.im == 0.0 {
                v
            } else {
                v * jac
            }
        },
        &[0.0, 0.5, 0.9, 0.99, 1.0],
        tol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// ∫_0^∞ g(x)·trig(k x) dx for g decaying like a power law: exact integration up to
/// `direct_to`, then half-period pieces between zeros summed with Wynn's epsilon.
pub fn fourier_to_infinity<F: FnMut(f64) -> f64>(
    mut g: F,
    k: f64,
    trig: Trig,
    direct_to: f64,
    tol: Tol,
) -> Result<QuadResult, QuadError> {
    let kernel = |x: f64| match trig {
        Trig::Cos => (k * x).cos(),
        Trig::Sin => (k * x).sin(),
    };
    let half = std::f64::consts::PI / k;
    let offset = match trig {
        Trig::Cos => 0.5 * half,
        Trig::Sin => 0.0,
    };
    // first zero at or beyond direct_to
    let n0 = ((direct_to - offset) / half).ceil().max(1.0);
    let start = offset + n0 * half;
    let n_direct = ((start / half).ceil() as usize).clamp(1, 400_000);
    let mut pts: Vec<f64> = (0..=n_direct).map(|j| start * j as f64 / n_direct as f64).collect();
    pts.dedup();
    let head = integrate(|x| Complex64::new(g(x) * kernel(x), 0.0), &pts, tol)?;
    let mut sums = Vec::new();
    let mut acc = 0.0;
    let mut err = head.error;
    let mut evals = head.evals;
    let mut last = f64::NAN;
    let piece_tol = Tol::new(tol.abs * 1e-3, tol.rel * 1e-2);
    for j in 0..200 {
        let a = start + j as f64 * half;
        let r = integrate(|x| Complex64::new(g(x) * kernel(x), 0.0), &[a, a + half], piece_tol)?;
        evals += r.evals;
        err += r.error;
        acc += r.value.re;
        sums.push(acc);
        if sums.len() >= 8 {
            let (v, e) = wynn_epsilon(&sums);
            let scale = (head.value.re + v).abs();
            if e <= tol.abs.max(tol.rel * scale) && (v - last).abs() <= tol.abs.max(tol.rel * scale) {
                return Ok(QuadResult {
                    value: Complex64::new(head.value.re + v, 0.0),
                    error: err + e,
                    evals,
                });
            }
            last = v;
        }
    }
    let (v, e) = wynn_epsilon(&sums);
    Err(QuadError::NotConverged {
        value: Complex64::new(head.value.re + v, 0.0),
        error: err + e,
        evals,
    })
}

/// Wynn's epsilon algorithm on partial sums; returns (limit, error estimate).
pub fn wynn_epsilon(s: &[f64]) -> (f64, f64) {
    let n = s.len();
    if n < 3 {
        let v = *s.last().unwrap_or(&0.0);
        return (v, f64::INFINITY);
    }
    // e[k] holds column k of the table for the current anti-diagonal
    let mut prev2: Vec<f64> = vec![0.0; n + 1];
    let mut prev: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut best_err = (s[n - 1] - s[n - 2]).abs();
    let mut col = 1;
    let mut evens: Vec<f64> = vec![s[n - 1]];
    while prev.len() > 1 {
        let mut next = Vec::with_capacity(prev.len() - 1);
        for i in 0..prev.len() - 1 {
            let d = prev[i + 1] - prev[i];
            let base = if col == 1 { 0.0 } else { prev2[i + 1] };
            if d == 0.0 || !d.is_finite() {
                next.push(f64::INFINITY);
            } else {
                next.push(base + 1.0 / d);
            }
        }
        if col % 2 == 0 {
            if let Some(&v) = next.last() {
                if v.is_finite() {
                    evens.push(v);
                }
            }
        }
        prev2 = prev;
        prev = next;
        col += 1;
        if prev.iter().any(|v| !v.is_finite()) {
            break;
        }
    }
    if evens.len() >= 2 {
        let m = evens.len();
        let cand = evens[m - 1];
        let e = (evens[m - 1] - evens[m - 2]).abs();
        if e < best_err {
            best = cand;
            best_err = e;
        }
        // also compare with the previous accelerated value
        for w in evens.windows(2) {
            let e = (w[1] - w[0]).abs();
            if e < best_err {
                best = w[1];
                best_err = e;
            }
        }
    }
    (best, best_err)
}

/// Neville evaluation at x = 0 of the interpolant through (x_i, y_i).
pub fn neville_at_zero(x: &[f64], y: &[Complex64]) -> Complex64 {
    let n = x.len();
    let mut p = y.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (x[i], x[i + m]);
            p[i] = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
        }
    }
    p[0]
}

/// Richardson extrapolation of S(N), S(2N), S(4N), … assuming S = S∞ + Σ c_k/N^k.
pub fn richardson_halving(s: &[Complex64]) -> (Complex64, f64) {
    let n = s.len();
    let mut t = s.to_vec();
    let mut prev_best = t[n - 1];
    let mut best = t[n - 1];
    for k in 1..n {
        let f = (2.0f64).powi(k as i32);
        for i in 0..n - k {
            t[i] = (t[i + 1] * f - t[i]) / (f - 1.0);
        }
        prev_best = best;
        best = t[n - k - 1];
    }
    (best, (best - prev_best).norm())
}

/// Neumaier-compensated complex sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl KahanSum {
    pub fn add(&mut self, v: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, v.re);
        neumaier(&mut self.im, &mut self.im_c, v.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn polynomial_exact_on_single_panel() {
        let r = integrate(|x| re(x.powi(7) - 3.0 * x), &[0.0, 2.0], Tol::new(1e-14, 1e-14)).unwrap();
        assert!((r.value.re - (256.0 / 8.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_at_endpoint() {
        let r = integrate(|x| re(x.ln()), &[0.0, 1.0], Tol::new(1e-13, 1e-13)).unwrap();
        assert!((r.value.re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x| re((-2.0 * x).exp()), 0.0, 1.0, Tol::new(1e-14, 1e-13)).unwrap();
        assert!((r.value.re - 0.5).abs() < 1e-13);
    }

    #[test]
    fn fourier_tail_with_wynn() {
        // ∫ x sin(kx)/(1+x²) dx = (π/2) e^{-k}
        for &k in &[0.3, 1.0, 4.0] {
            let r = fourier_to_infinity(|x| x / (1.0 + x * x), k, Trig::Sin, 5.0, Tol::new(1e-13, 1e-12)).unwrap();
            assert!(
                (r.value.re - PI / 2.0 * (-k).exp()).abs() < 1e-10,
                "k = {k}: {}",
                r.value.re
            );
        }
        // ∫ cos(kx)/(1+x²) dx = (π/2) e^{-k}
        let r = fourier_to_infinity(|x| 1.0 / (1.0 + x * x), 2.0, Trig::Cos, 3.0, Tol::new(1e-13, 1e-12)).unwrap();
        assert!((r.value.re - PI / 2.0 * (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = Vec::new();
        let mut acc = 0.0;
        for n in 1..=20 {
            acc += if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
            s.push(acc);
        }
        let (v, _) = wynn_epsilon(&s);
        assert!((v - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn neville_recovers_polynomial_at_zero() {
        let x: Vec<f64> = (0..5).map(|k| 0.1 / 2f64.powi(k)).collect();
        let y: Vec<Complex64> = x.iter().map(|&e| re(3.0 - 2.0 * e + 7.0 * e * e * e)).collect();
        assert!((neville_at_zero(&x, &y).re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_removes_inverse_powers() {
        let f = |n: f64| re(1.5 + 2.0 / n - 0.7 / (n * n) + 0.1 / (n * n * n));
        let s: Vec<Complex64> = (0..4).map(|k| f(10.0 * 2f64.powi(k))).collect();
        let (v, _) = richardson_halving(&s);
        assert!((v.re - 1.5).abs() < 1e-12);
    }
}
