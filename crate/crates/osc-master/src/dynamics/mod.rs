//! Gaussian moment dynamics under the coefficient-parameterised master equation,
//! with a truncated number-basis generator as the independent arbiter.

pub mod fock;
pub mod integrator;

pub use fock::{fock_generator, fock_moment_check, FockGenerator, MomentCheckReport};
pub use integrator::StepControl;

use crate::coeffs::MasterCoeffs;
use crate::model::OscillatorSpec;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("step size collapsed to {h:e} at t = {t}")]
    Stiffness { t: f64, h: f64 },
    #[error("drift is not Hurwitz (λ = {lambda}, 1+Δ = {one_plus_delta}); no steady state")]
    NoSteadyState { lambda: f64, one_plus_delta: f64 },
    #[error("number basis needs at least 8 levels, got {0}")]
    Dimension(usize),
    #[error("population {population:e} in the top levels exceeds 1e-10")]
    Truncation { population: f64 },
    #[error("tolerances must be finite and at least 1e-12 (rtol {rtol:e}, atol {atol:e})")]
    InvalidTolerance { rtol: f64, atol: f64 },
    #[error("invalid time span [{t0}, {t1}]")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// First and symmetrised second moments; cov_xp = ⟨xp+px⟩/2 − ⟨x⟩⟨p⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_xx: f64,
    pub var_pp: f64,
    pub cov_xp: f64,
}

impl GaussianState {
    pub fn vacuum() -> Self {
        Self {
            mean_x: 0.0,
            mean_p: 0.0,
            var_xx: 0.5,
            var_pp: 0.5,
            cov_xp: 0.0,
        }
    }

    /// Thermal state of the unit oscillator with occupation n.
    pub fn thermal(n: f64) -> Self {
        Self {
            var_xx: n + 0.5,
            var_pp: n + 0.5,
            ..Self::vacuum()
        }
    }

    pub fn displaced(mut self, x: f64, p: f64) -> Self {
        self.mean_x = x;
        self.mean_p = p;
        self
    }

    pub fn heisenberg_indicator(&self) -> f64 {
        self.var_xx * self.var_pp - self.cov_xp * self.cov_xp
    }

    /// ⟨p²⟩/2m + K⟨x²⟩/2.
    pub fn energy(&self, osc: &OscillatorSpec) -> f64 {
        let x2 = self.var_xx + self.mean_x * self.mean_x;
        let p2 = self.var_pp + self.mean_p * self.mean_p;
        p2 / (2.0 * osc.mass) + 0.5 * osc.spring_constant() * x2
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let a = self.to_array();
        if a.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::InvalidState("non-finite moment".into()));
        }
        if !(self.var_xx > 0.0 && self.var_pp > 0.0) {
            return Err(DynamicsError::InvalidState("variances must be positive".into()));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.mean_x, self.mean_p, self.var_xx, self.var_pp, self.cov_xp]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            mean_x: a[0],
            mean_p: a[1],
            var_xx: a[2],
            var_pp: a[3],
            cov_xp: a[4],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Time derivatives of the five moments. The fields of the returned state are rates.
pub fn moment_rhs(s: &GaussianState, c: &MasterCoeffs, osc: &OscillatorSpec) -> GaussianState {
    let m = osc.mass;
    let w = osc.omega0;
    let k = osc.spring_constant();
    let kin = (1.0 + c.delta) / m;
    let damp = w * c.lambda;
    GaussianState {
        mean_x: kin * s.mean_p + damp * s.mean_x,
        mean_p: -k * s.mean_x,
        var_xx: 2.0 * kin * s.cov_xp + 2.0 * damp * s.var_xx + c.d_xx / m,
        var_pp: -2.0 * k * s.cov_xp,
        cov_xp: kin * s.var_pp - k * s.var_xx + damp * s.cov_xp - 0.5 * w * c.d_xp,
    }
}

/// Eigenvalues of the first-moment drift matrix as (re, im) pairs.
pub fn drift_eigenvalues(c: &MasterCoeffs, osc: &OscillatorSpec) -> [(f64, f64); 2] {
    let tr = osc.omega0 * c.lambda;
    let det = (1.0 + c.delta) * osc.omega0 * osc.omega0;
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(0.5 * (tr + r), 0.0), (0.5 * (tr - r), 0.0)]
    } else {
        let i = (-disc).sqrt();
        [(0.5 * tr, 0.5 * i), (0.5 * tr, -0.5 * i)]
    }
}

pub fn is_hurwitz(c: &MasterCoeffs, osc: &OscillatorSpec) -> bool {
    drift_eigenvalues(c, osc).iter().all(|(re, _)| *re < 0.0)
}

/// 1/|slowest decay rate|; infinite without damping.
pub fn relaxation_time(c: &MasterCoeffs, osc: &OscillatorSpec) -> f64 {
    let slow = drift_eigenvalues(c, osc)
        .iter()
        .map(|(re, _)| *re)
        .fold(f64::NEG_INFINITY, f64::max);
    if slow < 0.0 {
        -1.0 / slow
    } else {
        f64::INFINITY
    }
}

/// Fixed point of the moment flow: first moments zero, second moments from the 3×3 linear system.
pub fn steady_state(c: &MasterCoeffs, osc: &OscillatorSpec) -> Result<GaussianState, DynamicsError> {
    if !is_hurwitz(c, osc) {
        return Err(DynamicsError::NoSteadyState {
            lambda: c.lambda,
            one_plus_delta: 1.0 + c.delta,
        });
    }
    // rows: d var_xx, d var_pp, d cov in unknowns (var_xx, var_pp, cov)
    let m = osc.mass;
    let w = osc.omega0;
    let k = osc.spring_constant();
    let kin = (1.0 + c.delta) / m;
    let damp = w * c.lambda;
    let a = nalgebra::Matrix3::new(2.0 * damp, 0.0, 2.0 * kin, 0.0, 0.0, -2.0 * k, -k, kin, damp);
    let b = nalgebra::Vector3::new(-c.d_xx / m, 0.0, 0.5 * w * c.d_xp);
    let x = a.lu().solve(&b).ok_or(DynamicsError::NoSteadyState {
        lambda: c.lambda,
        one_plus_delta: 1.0 + c.delta,
    })?;
    Ok(GaussianState {
        mean_x: 0.0,
        mean_p: 0.0,
        var_xx: x[0],
        var_pp: x[1],
        cov_xp: x[2],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<GaussianState>,
    pub coeffs: MasterCoeffs,
}

pub const TRAJECTORY_HEADER: [&str; 7] = [
    "t",
    "mean_x",
    "mean_p",
    "var_xx",
    "var_pp",
    "cov_xp",
    "heisenberg_indicator",
];

impl MomentTrajectory {
    pub fn last(&self) -> Option<&GaussianState> {
        self.states.last()
    }

    pub fn min_heisenberg_indicator(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.heisenberg_indicator())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn energy_drift(&self, osc: &OscillatorSpec) -> f64 {
        let Some(first) = self.states.first() else {
            return 0.0;
        };
        let e0 = first.energy(osc);
        self.states
            .iter()
            .map(|s| (s.energy(osc) - e0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with the fixed column set, 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(TRAJECTORY_HEADER)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let row = [
                *t,
                s.mean_x,
                s.mean_p,
                s.var_xx,
                s.var_pp,
                s.cov_xp,
                s.heisenberg_indicator(),
            ];
            wr.write_record(row.iter().map(|v| fmt_sig17(*v)))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// `n` evenly spaced times covering [t0, t1] inclusive.
pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Integrates the moment ODEs over `t_span`, reporting the state at each of `times`
/// (strictly increasing, inside the span) by dense output.
pub fn evolve(
    s0: &GaussianState,
    c: &MasterCoeffs,
    osc: &OscillatorSpec,
    t_span: (f64, f64),
    step_ctl: StepControl,
    times: &[f64],
) -> Result<MomentTrajectory, DynamicsError> {
    s0.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(DynamicsError::InvalidSpan { t0, t1 });
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !(*t >= t0 && *t <= t1)) {
        return Err(DynamicsError::InvalidSpan { t0, t1 });
    }
    let ys = integrator::dopri5(
        |y| moment_rhs(&GaussianState::from_array(*y), c, osc).to_array(),
        s0.to_array(),
        t0,
        t1,
        times,
        step_ctl,
    )?;
    Ok(MomentTrajectory {
        times: times.to_vec(),
        states: ys.into_iter().map(GaussianState::from_array).collect(),
        coeffs: *c,
    })
}
