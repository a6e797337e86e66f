//! The master equation as a linear map on dim × dim density matrices.

use super::{moment_rhs, DynamicsError, GaussianState};
use crate::coeffs::MasterCoeffs;
use crate::model::OscillatorSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;
type M = DMatrix<C>;

const I: C = C::new(0.0, 1.0);

struct Ladder {
    x: M,
    p: M,
    x2: M,
    p2: M,
}

// x = (a + a†)/√(2mω0), p = i√(mω0/2)(a† − a); squares built exactly, not as truncated products.
fn ladder(dim: usize, osc: &OscillatorSpec) -> Ladder {
    let mw = osc.mass * osc.omega0;
    let sx = (0.5 / mw).sqrt();
    let sp = (0.5 * mw).sqrt();
    let mut x = M::zeros(dim, dim);
    let mut p = M::zeros(dim, dim);
    let mut x2 = M::zeros(dim, dim);
    let mut p2 = M::zeros(dim, dim);
    for n in 0..dim {
        let nf = n as f64;
        x2[(n, n)] = C::new(sx * sx * (2.0 * nf + 1.0), 0.0);
        p2[(n, n)] = C::new(sp * sp * (2.0 * nf + 1.0), 0.0);
        if n + 1 < dim {
            let s = (nf + 1.0).sqrt();
            x[(n, n + 1)] = C::new(sx * s, 0.0);
            x[(n + 1, n)] = C::new(sx * s, 0.0);
            // ⟨n+1|a†|n⟩ = √(n+1)
            p[(n + 1, n)] = I * sp * s;
            p[(n, n + 1)] = -I * sp * s;
        }
        if n + 2 < dim {
            let s = ((nf + 1.0) * (nf + 2.0)).sqrt();
            x2[(n, n + 2)] = C::new(sx * sx * s, 0.0);
            x2[(n + 2, n)] = C::new(sx * sx * s, 0.0);
            p2[(n, n + 2)] = C::new(-sp * sp * s, 0.0);
            p2[(n + 2, n)] = C::new(-sp * sp * s, 0.0);
        }
    }
    Ladder { x, p, x2, p2 }
}

fn comm(a: &M, b: &M) -> M {
    a * b - b * a
}

fn anti(a: &M, b: &M) -> M {
    a * b + b * a
}

pub struct FockGenerator {
    pub dim: usize,
    pub coeffs: MasterCoeffs,
    pub osc: OscillatorSpec,
    ops: Ladder,
    h: M,
}

impl FockGenerator {
    pub fn x(&self) -> &M {
        &self.ops.x
    }

    pub fn p(&self) -> &M {
        &self.ops.p
    }

    pub fn hamiltonian(&self) -> &M {
        &self.h
    }

    /// −i[H,ρ] − (1/2m){iΔ[p²,ρ] + Dxx[p,[p,ρ]] + i m ω0 λ[p,{x,ρ}] + m ω0 Dxp[p,[x,ρ]]}.
    pub fn apply(&self, rho: &M) -> M {
        let c = &self.coeffs;
        let m = self.osc.mass;
        let mw = m * self.osc.omega0;
        let Ladder { x, p, p2, .. } = &self.ops;
        let mut bath = comm(p2, rho) * (I * c.delta);
        bath += comm(p, &comm(p, rho)) * C::new(c.d_xx, 0.0);
        bath += comm(p, &anti(x, rho)) * (I * mw * c.lambda);
        bath += comm(p, &comm(x, rho)) * C::new(mw * c.d_xp, 0.0);
        comm(&self.h, rho) * (-I) - bath * C::new(0.5 / m, 0.0)
    }

    /// Dense superoperator on column-stacked density matrices.
    pub fn matrix(&self) -> M {
        let d = self.dim;
        let mut out = M::zeros(d * d, d * d);
        let mut e = M::zeros(d, d);
        for col in 0..d {
            for row in 0..d {
                e[(row, col)] = C::new(1.0, 0.0);
                let img = self.apply(&e);
                e[(row, col)] = C::new(0.0, 0.0);
                let j = col * d + row;
                for (i, v) in img.iter().enumerate() {
                    out[(i, j)] = *v;
                }
            }
        }
        out
    }
}

pub fn fock_generator(c: &MasterCoeffs, osc: &OscillatorSpec, dim: usize) -> Result<FockGenerator, DynamicsError> {
    if dim < 8 {
        return Err(DynamicsError::Dimension(dim));
    }
    let ops = ladder(dim, osc);
    let h = &ops.p2 * C::new(0.5 / osc.mass, 0.0) + &ops.x2 * C::new(0.5 * osc.spring_constant(), 0.0);
    Ok(FockGenerator {
        dim,
        coeffs: *c,
        osc: *osc,
        ops,
        h,
    })
}

/// The Gaussian density matrix with the given moments, in the unit-oscillator number basis.
pub fn gaussian_density(s: &GaussianState, dim: usize) -> Result<M, DynamicsError> {
    s.validate()?;
    let nu2 = s.heisenberg_indicator();
    if nu2 < 0.25 * (1.0 - 1e-12) {
        return Err(DynamicsError::InvalidState(format!(
            "uncertainty product {nu2} below 1/4 has no density matrix"
        )));
    }
    let nu = nu2.sqrt();
    let big = 2 * dim + 40;
    let Ladder { x, p, .. } = ladder(big, &OscillatorSpec::natural());
    let id = M::identity(big, big);
    let dx = &x - &id * C::new(s.mean_x, 0.0);
    let dp = &p - &id * C::new(s.mean_p, 0.0);
    // Q = ½ rᵀ G r with G ∝ Σ⁻¹, symmetrised in the cross term
    let (gxx, gpp, gxp) = (s.var_pp / nu2, s.var_xx / nu2, -s.cov_xp / nu2);
    let q = (&dx * &dx * C::new(gxx, 0.0) + &dp * &dp * C::new(gpp, 0.0) + anti(&dx, &dp) * C::new(gxp, 0.0))
        * C::new(0.5, 0.0);
    let q = (&q + q.adjoint()) * C::new(0.5, 0.0);
    let eig = q.symmetric_eigen();
    let pure = nu - 0.5 < 1e-9;
    let scale = if pure {
        0.0
    } else {
        2.0 * nu * (2.0 * nu).recip().atanh()
    };
    let lo = eig.eigenvalues.min();
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| {
            if pure {
                if e == lo {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-(e - lo) * scale).exp()
            }
        })
        .collect();
    let v = &eig.eigenvectors;
    let mut rho = M::zeros(dim, dim);
    for (k, w) in weights.iter().enumerate() {
        if *w < 1e-300 {
            continue;
        }
        let col = v.column(k);
        for j in 0..dim {
            let cj = col[j].conj() * *w;
            for i in 0..dim {
                rho[(i, j)] += col[i] * cj;
            }
        }
    }
    let full: f64 = weights.iter().sum();
    Ok(rho / C::new(full, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheckReport {
    pub dim: usize,
    pub residual: f64,
    /// |Fock − moment_rhs| per moment (mean_x, mean_p, var_xx, var_pp, cov_xp).
    pub per_moment: [f64; 5],
    pub top_population: f64,
    pub trace_defect: f64,
}

fn tr_prod(a: &M, b: &M) -> C {
    let mut s = C::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Moment derivatives read off the number-basis generator against `moment_rhs`, in the unit frame.
pub fn fock_moment_check(s: &GaussianState, c: &MasterCoeffs, dim: usize) -> Result<MomentCheckReport, DynamicsError> {
    let osc = OscillatorSpec::natural();
    let gen = fock_generator(c, &osc, dim)?;
    let rho = gaussian_density(s, dim)?;
    let cut = dim - dim.div_ceil(10);
    let top: f64 = (cut..dim).map(|n| rho[(n, n)].re).sum();
    if top > 1e-10 {
        return Err(DynamicsError::Truncation { population: top });
    }
    let trace = rho.trace().re;
    let rho = rho / C::new(trace, 0.0);
    let l = gen.apply(&rho);
    let Ladder { x, p, x2, p2 } = &gen.ops;
    let sym = anti(x, p) * C::new(0.5, 0.0);
    let mx = tr_prod(x, &rho).re;
    let mp = tr_prod(p, &rho).re;
    let dx = tr_prod(x, &l).re;
    let dp = tr_prod(p, &l).re;
    let dxx = tr_prod(x2, &l).re - 2.0 * mx * dx;
    let dpp = tr_prod(p2, &l).re - 2.0 * mp * dp;
    let dxp = tr_prod(&sym, &l).re - mx * dp - mp * dx;
    let want = moment_rhs(s, c, &osc).to_array();
    let got = [dx, dp, dxx, dpp, dxp];
    let mut per_moment = [0.0; 5];
    for i in 0..5 {
        per_moment[i] = (got[i] - want[i]).abs();
    }
    Ok(MomentCheckReport {
        dim,
        residual: per_moment.iter().cloned().fold(0.0, f64::max),
        per_moment,
        top_population: top,
        trace_defect: l.trace().norm(),
    })
}
