use super::{causality_warning, exit, CliError, PointArgs, SCHEMA_VERSION};
use crate::coeffs::{t_closed_forms, TIntegralSet};
use crate::oracle::{t_oracle, CorrelationKernel, CorrelationPolicy, Method, QuadratureSpec};
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::io::Write;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Matsubara,
    Time,
    Frequency,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Matsubara => Method::Matsubara,
            MethodArg::Time => Method::TimeDomain,
            MethodArg::Frequency => Method::FrequencyDomain,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=4))]
    pub order: u8,
    /// Relative tolerance [default: 1e-8, 1e-6, 1e-4 for orders 2, 3, 4]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Oracle route [default: time for order 2, matsubara for 3, frequency for 4]
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub json: bool,
    /// Test hook: perturbs the named closed form by one part in 10³
    #[arg(long = "corrupt-formula", hide = true)]
    pub corrupt: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyLine {
    pub name: String,
    pub closed_re: f64,
    pub closed_im: f64,
    pub oracle_re: f64,
    pub oracle_im: f64,
    pub oracle_error: f64,
    pub rel_diff: f64,
    pub pass: bool,
}

pub fn default_tol(order: u8) -> f64 {
    match order {
        2 => 1e-8,
        3 => 1e-6,
        _ => 1e-4,
    }
}

pub fn default_method(order: u8) -> Method {
    match order {
        2 => Method::TimeDomain,
        3 => Method::Matsubara,
        _ => Method::FrequencyDomain,
    }
}

pub(super) fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let p = a.point.resolve()?;
    causality_warning(p.omega_tau_e, err);
    let tol = a.tol.unwrap_or(default_tol(a.order));
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive (got {tol})")));
    }
    let method = a.method.map(Method::from).unwrap_or(default_method(a.order));
    let mut closed = t_closed_forms(&p)?;
    if let Some(name) = &a.corrupt {
        let v = closed
            .get(name)
            .ok_or_else(|| CliError::Usage(format!("unknown integral {name}")))?;
        closed.set(name, v * 1.001);
    }
    let k = CorrelationKernel::new(p, CorrelationPolicy::Matsubara).map_err(|e| CliError::Usage(e.to_string()))?;
    let q = QuadratureSpec::default().with_method(method);
    let mut lines = Vec::new();
    for name in TIntegralSet::names_for_order(a.order) {
        let o = t_oracle(name, &k, &q).map_err(|e| CliError::Oracle(format!("{name}: {e}")))?;
        let c = closed.get(name).expect("known name");
        let diff = (c - o.value).norm();
        let rel = if o.value.norm() > 0.0 {
            diff / o.value.norm()
        } else {
            diff
        };
        lines.push(VerifyLine {
            name: name.to_string(),
            closed_re: c.re,
            closed_im: c.im,
            oracle_re: o.value.re,
            oracle_im: o.value.im,
            oracle_error: o.error,
            rel_diff: rel,
            pass: rel <= tol,
        });
    }
    let all = lines.iter().all(|l| l.pass);
    if a.json {
        let v = json!({
            "schema_version": SCHEMA_VERSION,
            "order": a.order,
            "tol": tol,
            "method": q.method,
            "params": {"omega0_tilde": p.omega0_tilde, "Omega_tau_e": p.omega_tau_e, "beta_Omega": p.z},
            "integrals": lines,
            "pass": all,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
    } else {
        writeln!(
            out,
            "order {} at ({}, {}, {}), method {:?}, tol {:e}",
            a.order, p.omega0_tilde, p.omega_tau_e, p.z, q.method, tol
        )?;
        for l in &lines {
            writeln!(
                out,
                "{:<4} closed {:>24.16e}{:+.16e}i  oracle {:>24.16e}{:+.16e}i  est.err {:.1e}  rel {:.2e}  {}",
                l.name,
                l.closed_re,
                l.closed_im,
                l.oracle_re,
                l.oracle_im,
                l.oracle_error,
                l.rel_diff,
                if l.pass { "PASS" } else { "FAIL" }
            )?;
        }
    }
    Ok(if all { exit::OK } else { exit::MISMATCH })
}
