//! C ABI over `osc_master`.
//!
//! Every entry point returns an [`OscStatus`]; on failure the message is kept
//! per thread and can be copied out with [`osc_last_error`]. Parameter sets and
//! trajectories are opaque handles owned by the caller and released with their
//! matching `_free` function.

use osc_master::coeffs::{aggregate, t_closed_forms, MasterCoeffs, OrderCoeffs, TIntegralSet};
use osc_master::dynamics::{
    evolve, steady_state, uniform_times, DynamicsError, GaussianState, MomentTrajectory, StepControl,
};
use osc_master::model::{OscillatorSpec, ReducedParams};
use osc_master::oracle::{t_oracle, CorrelationKernel, CorrelationPolicy, Method, QuadratureSpec};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes; the non-zero values match the CLI exit codes where both exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscStatus {
    Ok = 0,
    Mismatch = 1,
    InvalidArgument = 2,
    Oracle = 3,
    Integrator = 5,
    NoSteadyState = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscMethod {
    Matsubara = 0,
    TimeDomain = 1,
    FrequencyDomain = 2,
}

impl From<OscMethod> for Method {
    fn from(m: OscMethod) -> Self {
        match m {
            OscMethod::Matsubara => Method::Matsubara,
            OscMethod::TimeDomain => Method::TimeDomain,
            OscMethod::FrequencyDomain => Method::FrequencyDomain,
        }
    }
}

/// Opaque (ω̃0, Ω̃, βΩ) triple.
pub struct OscParams(ReducedParams);

/// Opaque sampled moment trajectory.
pub struct OscTrajectory(MomentTrajectory);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OscOrderCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

/// Totals drive the dynamics; `orders[k]` holds order k + 2.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OscCoefficients {
    pub delta: f64,
    pub lambda: f64,
    pub d_xx: f64,
    pub d_xp: f64,
    pub orders: [OscOrderCoeffs; 3],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OscGaussianState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_xx: f64,
    pub var_pp: f64,
    pub cov_xp: f64,
}

impl From<GaussianState> for OscGaussianState {
    fn from(s: GaussianState) -> Self {
        Self {
            mean_x: s.mean_x,
            mean_p: s.mean_p,
            var_xx: s.var_xx,
            var_pp: s.var_pp,
            cov_xp: s.cov_xp,
        }
    }
}

impl From<OscGaussianState> for GaussianState {
    fn from(s: OscGaussianState) -> Self {
        Self {
            mean_x: s.mean_x,
            mean_p: s.mean_p,
            var_xx: s.var_xx,
            var_pp: s.var_pp,
            cov_xp: s.cov_xp,
        }
    }
}

impl From<&OrderCoeffs> for OscOrderCoeffs {
    fn from(c: &OrderCoeffs) -> Self {
        Self {
            a1: c.a1,
            a2: c.a2,
            a3: c.a3,
            a4: c.a4,
        }
    }
}

impl From<&MasterCoeffs> for OscCoefficients {
    fn from(m: &MasterCoeffs) -> Self {
        Self {
            delta: m.delta,
            lambda: m.lambda,
            d_xx: m.d_xx,
            d_xp: m.d_xp,
            orders: [
                (&m.per_order[0]).into(),
                (&m.per_order[1]).into(),
                (&m.per_order[2]).into(),
            ],
        }
    }
}

impl OscCoefficients {
    fn totals(&self) -> MasterCoeffs {
        MasterCoeffs::from_totals(self.delta, self.lambda, self.d_xx, self.d_xp)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

type Failure = (OscStatus, String);

fn fail(status: OscStatus, msg: impl ToString) -> Failure {
    (status, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<OscStatus, Failure>) -> OscStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => (s, String::new()),
        Ok(Err(e)) => e,
        Err(_) => (OscStatus::Panic, "internal panic".to_string()),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

fn dynamics_failure(e: DynamicsError) -> Failure {
    match e {
        DynamicsError::NoSteadyState { .. } => fail(OscStatus::NoSteadyState, e),
        DynamicsError::InvalidTolerance { .. } | DynamicsError::InvalidSpan { .. } | DynamicsError::InvalidState(_) => {
            fail(OscStatus::InvalidArgument, e)
        }
        _ => fail(OscStatus::Integrator, e),
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(OscStatus::NullPointer, format!("{name} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(OscStatus::NullPointer, format!("{name} is null")))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn osc_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn osc_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version"),
    };
    V.as_ptr()
}

/// Validates and stores a parameter set. `beta_omega` may be +inf.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn osc_params_new(
    omega0_tilde: f64,
    omega_tau_e: f64,
    beta_omega: f64,
    out: *mut *mut OscParams,
) -> OscStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let p = ReducedParams::new(omega0_tilde, omega_tau_e, beta_omega)
            .map_err(|e| fail(OscStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(OscParams(p)));
        Ok(OscStatus::Ok)
    })
}

/// # Safety
/// `p` must be null or a handle from [`osc_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn osc_params_free(p: *mut OscParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Closed-form coefficients summed through `max_order` (2..=4). Orders above
/// `max_order` are reported as zero.
///
/// # Safety
/// `p` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn osc_coefficients(p: *const OscParams, max_order: u8, out: *mut OscCoefficients) -> OscStatus {
    guard(|| {
        let p = deref(p, "params")?;
        let out = deref_mut(out, "out")?;
        if !(2..=4).contains(&max_order) {
            return Err(fail(
                OscStatus::InvalidArgument,
                format!("max_order {max_order} outside 2..=4"),
            ));
        }
        let m = aggregate(&p.0).map_err(|e| fail(OscStatus::InvalidArgument, e))?;
        *out = (&m.truncated(max_order)).into();
        Ok(OscStatus::Ok)
    })
}

/// Compares every closed-form integral of `order` with its quadrature oracle.
/// Writes the largest relative deviation and returns `Mismatch` if it exceeds `tol`.
///
/// # Safety
/// `p` must be a live handle and `max_rel` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn osc_verify(
    p: *const OscParams,
    order: u8,
    method: OscMethod,
    tol: f64,
    max_rel: *mut f64,
) -> OscStatus {
    guard(|| {
        let p = deref(p, "params")?;
        let max_rel = deref_mut(max_rel, "max_rel")?;
        if !(2..=4).contains(&order) || !(tol > 0.0 && tol.is_finite()) {
            return Err(fail(OscStatus::InvalidArgument, format!("order {order}, tol {tol}")));
        }
        let closed = t_closed_forms(&p.0).map_err(|e| fail(OscStatus::InvalidArgument, e))?;
        let k = CorrelationKernel::new(p.0, CorrelationPolicy::Matsubara)
            .map_err(|e| fail(OscStatus::InvalidArgument, e))?;
        let q = QuadratureSpec::default().with_method(method.into());
        let mut worst: f64 = 0.0;
        for name in TIntegralSet::names_for_order(order) {
            let o = t_oracle(name, &k, &q).map_err(|e| fail(OscStatus::Oracle, format!("{name}: {e}")))?;
            let c = closed.get(name).expect("known name");
            worst = worst.max((c - o.value).norm() / o.value.norm());
        }
        *max_rel = worst;
        if worst <= tol {
            Ok(OscStatus::Ok)
        } else {
            Err(fail(
                OscStatus::Mismatch,
                format!("max relative deviation {worst:e} exceeds {tol:e}"),
            ))
        }
    })
}

/// Integrates the moment equations (ħ = m = ω0 = 1) on `samples` uniform
/// times over [0, t_final].
///
/// # Safety
/// `c` and `s0` must be valid for reads and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn osc_evolve(
    c: *const OscCoefficients,
    s0: *const OscGaussianState,
    t_final: f64,
    samples: usize,
    rtol: f64,
    atol: f64,
    out: *mut *mut OscTrajectory,
) -> OscStatus {
    guard(|| {
        let c = deref(c, "coefficients")?.totals();
        let s0: GaussianState = (*deref(s0, "state")?).into();
        let out = deref_mut(out, "out")?;
        if samples < 2 {
            return Err(fail(OscStatus::InvalidArgument, "samples must be at least 2"));
        }
        s0.validate().map_err(dynamics_failure)?;
        let osc = OscillatorSpec::natural();
        let ctl = StepControl { rtol, atol };
        let tr = evolve(
            &s0,
            &c,
            &osc,
            (0.0, t_final),
            ctl,
            &uniform_times(0.0, t_final, samples),
        )
        .map_err(dynamics_failure)?;
        *out = Box::into_raw(Box::new(OscTrajectory(tr)));
        Ok(OscStatus::Ok)
    })
}

/// # Safety
/// `t` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn osc_trajectory_len(t: *const OscTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.times.len())
}

/// # Safety
/// `t` must be a live handle; `time` and `state` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn osc_trajectory_sample(
    t: *const OscTrajectory,
    index: usize,
    time: *mut f64,
    state: *mut OscGaussianState,
) -> OscStatus {
    guard(|| {
        let t = deref(t, "trajectory")?;
        let time = deref_mut(time, "time")?;
        let state = deref_mut(state, "state")?;
        let n = t.0.times.len();
        if index >= n {
            return Err(fail(
                OscStatus::InvalidArgument,
                format!("index {index} out of range (len {n})"),
            ));
        }
        *time = t.0.times[index];
        *state = t.0.states[index].into();
        Ok(OscStatus::Ok)
    })
}

/// Largest relative deviation of ⟨H⟩ from its initial value.
///
/// # Safety
/// `t` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn osc_trajectory_energy_drift(t: *const OscTrajectory, out: *mut f64) -> OscStatus {
    guard(|| {
        let t = deref(t, "trajectory")?;
        *deref_mut(out, "out")? = t.0.energy_drift(&OscillatorSpec::natural());
        Ok(OscStatus::Ok)
    })
}

/// # Safety
/// `t` must be null or a handle from [`osc_evolve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn osc_trajectory_free(t: *mut OscTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Fixed point of the moment equations, if the drift is stable.
///
/// # Safety
/// `c` must be valid for reads and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn osc_steady_state(c: *const OscCoefficients, out: *mut OscGaussianState) -> OscStatus {
    guard(|| {
        let c = deref(c, "coefficients")?.totals();
        let out = deref_mut(out, "out")?;
        *out = steady_state(&c, &OscillatorSpec::natural())
            .map_err(dynamics_failure)?
            .into();
        Ok(OscStatus::Ok)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn params(w: f64, o: f64, z: f64) -> *mut OscParams {
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { osc_params_new(w, o, z, &mut h) }, OscStatus::Ok);
        h
    }

    fn last_error() -> String {
        let mut buf = [0 as c_char; 256];
        let n = unsafe { osc_last_error(buf.as_mut_ptr(), buf.len()) };
        let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
        assert_eq!(n, s.len());
        s
    }

    #[test]
    fn coefficients_match_core() {
        let h = params(1.0, 0.1, 1.0);
        let mut c = OscCoefficients::default();
        assert_eq!(unsafe { osc_coefficients(h, 4, &mut c) }, OscStatus::Ok);
        let want = aggregate(&ReducedParams::new(1.0, 0.1, 1.0).unwrap()).unwrap();
        assert_eq!(c, OscCoefficients::from(&want));
        assert_eq!(unsafe { osc_coefficients(h, 2, &mut c) }, OscStatus::Ok);
        assert_eq!(c.orders[1], OscOrderCoeffs::default());
        assert_eq!(c.lambda, c.orders[0].a4);
        unsafe { osc_params_free(h) };
    }

    #[test]
    fn invalid_parameters_report_a_message() {
        let mut h = ptr::null_mut();
        assert_eq!(
            unsafe { osc_params_new(-1.0, 0.1, 1.0, &mut h) },
            OscStatus::InvalidArgument
        );
        assert!(h.is_null());
        assert!(last_error().contains("omega0_tilde"));
        assert_eq!(
            unsafe { osc_params_new(1.0, 0.1, 1.0, ptr::null_mut()) },
            OscStatus::NullPointer
        );
    }

    #[test]
    fn error_buffer_truncates() {
        unsafe { osc_params_new(f64::NAN, 0.1, 1.0, &mut ptr::null_mut()) };
        let mut buf = [1 as c_char; 8];
        let n = unsafe { osc_last_error(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 7);
        assert_eq!(buf[7], 0);
        assert_eq!(unsafe { osc_last_error(ptr::null_mut(), 0) }, n);
    }

    #[test]
    fn version_string() {
        let v = unsafe { CStr::from_ptr(osc_version()) }.to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
