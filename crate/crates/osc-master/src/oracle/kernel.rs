//! The bath pair correlation ⟨12⟩(t) in units ħ = m = Ω = 1:
//! C(t) = (Ω̃/π) ∫_0^∞ ω/(1+ω²) [coth(zω) cos ωt − i sin ωt] dω.

use super::OracleError;
use crate::model::ReducedParams;
use crate::quad::{fourier_to_infinity, integrate, Tol, Trig};
use crate::special_fn::cot_minus_inv;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationPolicy {
    /// Drude pole plus Matsubara exponentials with a logarithmic resummation.
    Matsubara,
    /// Direct oscillatory ω-quadrature.
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationKernel {
    pub params: ReducedParams,
    pub policy: CorrelationPolicy,
    pub rel_tol: f64,
}

// below this step rate the series tail is summed by Euler–Maclaurin
const EM_RATE: f64 = 0.02;

impl CorrelationKernel {
    pub fn new(params: ReducedParams, policy: CorrelationPolicy) -> Result<Self, OracleError> {
        if !params.z.is_finite() {
            return Err(OracleError::Unsupported(
                "correlation kernel needs a finite temperature".into(),
            ));
        }
        Ok(Self {
            params,
            policy,
            rel_tol: 1e-11,
        })
    }

    pub fn with_policy(mut self, policy: CorrelationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn kappa(&self) -> f64 {
        0.5 * self.params.omega_tau_e
    }

    /// Im C(u) for u > 0; exact.
    pub fn im(&self, u: f64) -> f64 {
        -self.kappa() * (-u).exp()
    }

    /// Re C(u) for u > 0 with the configured policy, falling back to the other.
    pub fn re(&self, u: f64) -> Result<f64, OracleError> {
        if !(u > 0.0) {
            return Err(OracleError::Singular(u));
        }
        let first = match self.policy {
            CorrelationPolicy::Matsubara => self.re_matsubara(u),
            CorrelationPolicy::Frequency => self.re_frequency(u),
        };
        match first {
            Ok(v) => Ok(v),
            Err(e1) => {
                let second = match self.policy {
                    CorrelationPolicy::Matsubara => self.re_frequency(u),
                    CorrelationPolicy::Frequency => self.re_matsubara(u),
                };
                second.map_err(|e2| OracleError::Convergence(format!("both policies failed: {e1}; {e2}")))
            }
        }
    }

    pub fn re_matsubara(&self, u: f64) -> Result<f64, OracleError> {
        let z = self.params.z;
        let kappa = self.kappa();
        if kappa == 0.0 {
            return Ok(0.0);
        }
        let p = PI / z;
        let a = p * u;
        let kstar = (z / PI).round();
        let paired = kstar >= 1.0 && (kstar * p - 1.0).abs() < 0.5;
        let eu = (-u).exp();
        let mut total = if paired {
            let kp = kstar * PI;
            let nu = kp / z;
            let x = (1.0 - nu) * u;
            let phi = if x.abs() < 1e-8 { 1.0 + 0.5 * x } else { x.exp_m1() / x };
            (1.0 / (kp + z) + cot_minus_inv(z - kp)) * eu
                - 2.0 * kp / (z * (kp + z)) * eu * u * phi
                - 2.0 / kp * (-nu * u).exp()
        } else {
            eu / z.tan()
        };
        // Σ 2/(kπ) e^{−kπu/z}
        total += -(2.0 / PI) * (-(-a).exp_m1()).ln();
        let k_min = (4.0 * z / PI).ceil().max(32.0).max(kstar + 1.0);
        let k_max = if a >= EM_RATE {
            (40.0 / a).ceil().max(k_min)
        } else {
            k_min
        };
        let mut rem = 0.0;
        let mut comp = 0.0;
        let mut k = k_max;
        while k >= 1.0 {
            if !(paired && k == kstar) {
                let nu = k * p;
                let term = (2.0 / z) * (-nu * u).exp() / (nu * (nu - 1.0) * (nu + 1.0));
                // Kahan, smallest terms first
                let y = term - comp;
                let t = rem + y;
                comp = (t - rem) - y;
                rem = t;
            }
            k -= 1.0;
        }
        total += rem;
        if a < EM_RATE {
            total += self.em_tail(u, k_max)?;
        }
        Ok(kappa * total)
    }

    // Σ_{k>K} (2/z) e^{−ν_k u}/(ν_k(ν_k²−1)) by the midpoint Euler–Maclaurin rule
    fn em_tail(&self, u: f64, k: f64) -> Result<f64, OracleError> {
        let z = self.params.z;
        let p = PI / z;
        let nu0 = p * (k + 0.5);
        if nu0 * u > 700.0 {
            return Ok(0.0);
        }
        // ∫_{ν0}^∞ e^{−νu}/(ν(ν²−1)) dν with ν = ν0/s
        let r = integrate(
            |s: f64| {
                let v = if s == 0.0 {
                    0.0
                } else {
                    (-u * nu0 / s).exp() * s / (nu0 * nu0 - s * s)
                };
                Complex64::new(v, 0.0)
            },
            &[0.0, 0.5, 0.9, 1.0],
            Tol::new(1e-18, 1e-13),
        )?;
        let integral = (2.0 / PI) * r.value.re;
        let h = (2.0 / z) * (-nu0 * u).exp() / (nu0 * (nu0 * nu0 - 1.0));
        let dlog = -p * u - p * (3.0 * nu0 * nu0 - 1.0) / (nu0 * (nu0 * nu0 - 1.0));
        Ok(integral + h * dlog / 24.0)
    }

    pub fn re_frequency(&self, u: f64) -> Result<f64, OracleError> {
        let z = self.params.z;
        let kappa = self.kappa();
        if kappa == 0.0 {
            return Ok(0.0);
        }
        let tol = Tol::new(1e-15, self.rel_tol * 0.1);
        // ∫ ω cos(ωu)/(1+ω²) dω, conditionally convergent
        let direct = (20.0f64).max(2.0 / u);
        let slow = fourier_to_infinity(|w| w / (1.0 + w * w), u, Trig::Cos, direct, tol)?;
        // ∫ ω (coth zω − 1) cos(ωu)/(1+ω²) dω, exponentially decaying
        let w_max = 40.0 / z;
        let half = PI / u;
        let n = ((w_max / half).ceil() as usize).clamp(8, 400_000);
        let mut pts: Vec<f64> = (0..=n).map(|j| w_max * j as f64 / n as f64).collect();
        for extra in [0.1 / z, 1.0 / z, 1.0] {
            if extra < w_max {
                pts.push(extra);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let fast = integrate(
            |w| {
                let bose = if w == 0.0 {
                    1.0 / z
                } else {
                    2.0 * w / (2.0 * z * w).exp_m1()
                };
                Complex64::new(bose * (w * u).cos() / (1.0 + w * w), 0.0)
            },
            &pts,
            tol,
        )?;
        Ok(2.0 * kappa / PI * (slow.value.re + fast.value.re))
    }

    /// Im C(u) by direct ω-quadrature, an independent check of the closed form.
    pub fn im_frequency(&self, u: f64) -> Result<f64, OracleError> {
        let kappa = self.kappa();
        if kappa == 0.0 {
            return Ok(0.0);
        }
        let tol = Tol::new(1e-15, self.rel_tol * 0.1);
        let r = fourier_to_infinity(|w| w / (1.0 + w * w), u, Trig::Sin, (20.0f64).max(2.0 / u), tol)?;
        Ok(-2.0 * kappa / PI * r.value.re)
    }

    /// Full correlation for u > 0.
    pub fn value(&self, u: f64) -> Result<Complex64, OracleError> {
        let re = self.re(u)?;
        let im = match self.policy {
            CorrelationPolicy::Matsubara => self.im(u),
            CorrelationPolicy::Frequency => self.im_frequency(u)?,
        };
        Ok(Complex64::new(re, im))
    }
}

/// ⟨12⟩(t); ⟨12⟩(−t) is the complex conjugate. Singular at t = 0.
pub fn pair_correlation(t: f64, k: &CorrelationKernel) -> Result<Complex64, OracleError> {
    if t == 0.0 || !t.is_finite() {
        return Err(OracleError::Singular(t));
    }
    let v = k.value(t.abs())?;
    Ok(if t < 0.0 { v.conj() } else { v })
}
