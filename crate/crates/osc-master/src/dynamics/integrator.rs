//! Dormand–Prince 5(4) with Hairer's dense output.

use super::DynamicsError;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub const N: usize = 5;
type V = [f64; N];

fn axpy(y: &V, h: f64, terms: &[(f64, &V)]) -> V {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.rtol >= 1e-12 && self.atol >= 1e-12) || !self.rtol.is_finite() || !self.atol.is_finite() {
            return Err(DynamicsError::InvalidTolerance {
                rtol: self.rtol,
                atol: self.atol,
            });
        }
        Ok(())
    }
}

/// Integrates y' = f(y) from t0 and reports y at each requested time (sorted, within span).
pub fn dopri5<F: Fn(&V) -> V>(
    f: F,
    y0: V,
    t0: f64,
    t1: f64,
    outputs: &[f64],
    ctl: StepControl,
) -> Result<Vec<V>, DynamicsError> {
    ctl.validate()?;
    let span = t1 - t0;
    if !(span > 0.0) || !span.is_finite() {
        return Err(DynamicsError::InvalidSpan { t0, t1 });
    }
    let mut out = Vec::with_capacity(outputs.len());
    let mut next = 0;
    while next < outputs.len() && outputs[next] <= t0 {
        out.push(y0);
        next += 1;
    }
    let h_min = 1e-12 * span;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(&y);
    let scale = |a: &V, b: &V, i: usize| ctl.atol + ctl.rtol * a[i].abs().max(b[i].abs());
    // initial step from the derivative size
    let d0 = (0..N).map(|i| (y[i] / scale(&y, &y, i)).powi(2)).sum::<f64>().sqrt();
    let d1 = (0..N).map(|i| (k1[i] / scale(&y, &y, i)).powi(2)).sum::<f64>().sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span).max(h_min);
    let mut steps = 0usize;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        steps += 1;
        if steps > 50_000_000 {
            return Err(DynamicsError::Stiffness { t, h });
        }
        let k2 = f(&axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(&axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&axpy(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(&y_new);
        // every component within its own tolerance
        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err = err.max((e / scale(&y, &y_new, i)).abs());
        }
        if !err.is_finite() {
            h *= 0.2;
            if h < h_min {
                return Err(DynamicsError::Stiffness { t, h });
            }
            continue;
        }
        if err <= 1.0 {
            let t_new = t + h;
            while next < outputs.len() && outputs[next] <= t_new {
                let theta = (outputs[next] - t) / h;
                let mut yi = [0.0; N];
                for i in 0..N {
                    let r2 = y_new[i] - y[i];
                    let r3 = h * k1[i] - r2;
                    let r4 = r2 - h * k7[i] - r3;
                    let r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                    let th1 = 1.0 - theta;
                    yi[i] = y[i] + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)));
                }
                out.push(yi);
                next += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
        }
        let fac = if err == 0.0 {
            10.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
        };
        let h_next = h * if err <= 1.0 { fac } else { fac.min(1.0) };
        if h_next < h_min && t < t1 && t1 - t > h_min {
            return Err(DynamicsError::Stiffness { t, h: h_next });
        }
        h = h_next.max(h_min);
    }
    while next < outputs.len() {
        out.push(y);
        next += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_dense_output() {
        let ys = dopri5(
            |y| [-y[0], y[2], -y[1], 0.0, 1.0],
            [1.0, 0.0, 1.0, 2.0, 0.0],
            0.0,
            3.0,
            &[0.5, 1.234, 3.0],
            StepControl {
                rtol: 1e-12,
                atol: 1e-12,
            },
        )
        .unwrap();
        for (y, t) in ys.iter().zip([0.5f64, 1.234, 3.0]) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10);
            assert!((y[1] - t.sin()).abs() < 1e-10);
            assert!((y[2] - t.cos()).abs() < 1e-10);
            assert!((y[3] - 2.0).abs() < 1e-14);
            assert!((y[4] - t).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_tolerances_and_spans() {
        let f = |y: &V| *y;
        assert!(dopri5(
            f,
            [0.0; N],
            0.0,
            1.0,
            &[],
            StepControl {
                rtol: 1e-13,
                atol: 1e-12
            }
        )
        .is_err());
        assert!(dopri5(f, [0.0; N], 1.0, 1.0, &[], StepControl::default()).is_err());
    }

    #[test]
    fn stiff_problem_reports_stiffness() {
        let r = dopri5(
            |y| [-1e14 * y[0], 0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0, 0.0],
            0.0,
            1.0,
            &[1.0],
            StepControl::default(),
        );
        assert!(matches!(r, Err(DynamicsError::Stiffness { .. })));
    }
}
