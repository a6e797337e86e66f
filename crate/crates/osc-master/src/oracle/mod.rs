//! Independent numerical evaluation of the bath correlation and every ordered-time
//! integral, used to check the closed forms.

pub mod engine;
pub mod integrals;
pub mod kernel;
pub mod nested;

pub use kernel::{pair_correlation, CorrelationKernel, CorrelationPolicy};

use crate::coeffs::{OrderCoeffs, TIntegralSet, T_NAMES};
use crate::model::ReducedParams;
use engine::{eval_frequency, eval_matsubara, eval_time, reduce, Estimate, Expr};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("truncation tail {tail:e} exceeds abs_tol {abs_tol:e}")]
    TailBound { tail: f64, abs_tol: f64 },
    #[error("ε-extrapolation residual {residual:e} too large (value {value})")]
    Extrapolation { value: Complex64, residual: f64 },
    #[error("pair correlation is singular at t = {0}")]
    Singular(f64),
    #[error("gap rate {0} does not decay")]
    NonDecaying(Complex64),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Term-by-term integration of the Matsubara expansion.
    Matsubara,
    /// 1D quadrature of Re C(u) against the exponential convolution kernel.
    TimeDomain,
    /// ω-quadrature with a convergence factor extrapolated to zero.
    FrequencyDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Time-domain truncation in units of 2π/min(1, π/z).
    pub t_max_periods: f64,
    /// Minimum number of Matsubara terms before extrapolating the tail.
    pub matsubara_terms: usize,
    pub method: Method,
    pub extrapolation_rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            t_max_periods: 8.0,
            matsubara_terms: 256,
            method: Method::Matsubara,
            extrapolation_rel_tol: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn with_method(mut self, m: Method) -> Self {
        self.method = m;
        self
    }

    pub fn with_rel_tol(mut self, t: f64) -> Self {
        self.rel_tol = t;
        self
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.rel_tol >= 1e-12) {
            return Err(OracleError::InvalidSpec(format!(
                "rel_tol {} below 1e-12",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(OracleError::InvalidSpec("abs_tol must be positive".into()));
        }
        if !(self.t_max_periods >= 1.0) {
            return Err(OracleError::InvalidSpec("t_max_periods must be at least 1".into()));
        }
        if self.matsubara_terms < 16 {
            return Err(OracleError::InvalidSpec("matsubara_terms must be at least 16".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: Complex64,
    pub error: f64,
}

impl From<Estimate> for OracleValue {
    fn from(e: Estimate) -> Self {
        Self {
            value: e.value,
            error: e.error,
        }
    }
}

/// Evaluates an arbitrary exponential-sum integrand with the method selected in the quadrature spec.
pub fn evaluate_expr(e: &Expr, k: &CorrelationKernel, q: &QuadratureSpec) -> Result<OracleValue, OracleError> {
    q.validate()?;
    let z = k.params.z;
    let kappa = k.kappa();
    let est = match q.method {
        Method::Matsubara => eval_matsubara(&reduce(e, 0.0)?, z, kappa, q)?,
        Method::TimeDomain => eval_time(&reduce(e, 0.0)?, k, q)?,
        Method::FrequencyDomain => eval_frequency(e, z, kappa, q)?,
    };
    Ok(est.into())
}

/// One named integral ("T21" … "T64").
pub fn t_oracle(name: &str, k: &CorrelationKernel, q: &QuadratureSpec) -> Result<OracleValue, OracleError> {
    let e = integrals::t_integrand(name, k.params.omega0_tilde, k.kappa())
        .ok_or_else(|| OracleError::Unsupported(format!("unknown integral {name}")))?;
    evaluate_expr(&e, k, q)
}

fn named<const N: usize>(
    names: [&str; N],
    k: &CorrelationKernel,
    q: &QuadratureSpec,
) -> Result<[OracleValue; N], OracleError> {
    let mut out = [OracleValue {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
    }; N];
    for (slot, name) in out.iter_mut().zip(names) {
        *slot = t_oracle(name, k, q)?;
    }
    Ok(out)
}

/// (T21, T22).
pub fn t2_oracle(k: &CorrelationKernel, q: &QuadratureSpec) -> Result<[OracleValue; 2], OracleError> {
    named(["T21", "T22"], k, q)
}

/// (T31, T32, T33, T34).
pub fn t3_oracle(k: &CorrelationKernel, q: &QuadratureSpec) -> Result<[OracleValue; 4], OracleError> {
    named(["T31", "T32", "T33", "T34"], k, q)
}

/// (T41, T42, T61, T62, T63, T64).
pub fn t4_oracle(k: &CorrelationKernel, q: &QuadratureSpec) -> Result<[OracleValue; 6], OracleError> {
    named(["T41", "T42", "T61", "T62", "T63", "T64"], k, q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub values: TIntegralSet,
    /// Error estimates in `T_NAMES` order; zero for integrals not evaluated.
    pub errors: [f64; 12],
}

impl OracleReport {
    pub fn error(&self, name: &str) -> Option<f64> {
        T_NAMES.iter().position(|n| *n == name).map(|i| self.errors[i])
    }
}

/// Evaluates every integral of the requested orders.
pub fn oracle_report(k: &CorrelationKernel, q: &QuadratureSpec, orders: &[u8]) -> Result<OracleReport, OracleError> {
    let mut values = TIntegralSet::zero();
    let mut errors = [0.0; 12];
    for &o in orders {
        for name in TIntegralSet::names_for_order(o) {
            let v = t_oracle(name, k, q)?;
            values.set(name, v.value);
            let i = T_NAMES.iter().position(|n| n == name).expect("known name");
            errors[i] = v.error;
        }
    }
    Ok(OracleReport { values, errors })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientOracle {
    pub per_order: [OrderCoeffs; 3],
    pub report: OracleReport,
}

/// Maps oracle integrals to A1..A4 for orders 2, 3 and 4.
pub fn coefficient_oracle(p: &ReducedParams, q: &QuadratureSpec) -> Result<CoefficientOracle, OracleError> {
    let k = CorrelationKernel::new(*p, CorrelationPolicy::Matsubara)?;
    let report = oracle_report(&k, q, &[2, 3, 4])?;
    let per_order = [2u8, 3, 4].map(|o| {
        let (t1, t2) = report.values.order_sums(o);
        OrderCoeffs::from_t(o, t1, t2, p.omega0_tilde)
    });
    Ok(CoefficientOracle { per_order, report })
}
