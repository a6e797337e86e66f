//! The `osc-master` command line: coeffs, verify, sweep, dynamics.

mod dynamics_cmd;
mod sweep;
mod verify;

pub use sweep::{preset_grid, Preset, Quantity, SweepGrid, SweepRow};

use crate::coeffs::{aggregate, delta_compact, lambda_compact, CoeffError, MasterCoeffs};
use crate::model::{BathSpec, ModelError, ReducedParams, Temperature, TAU_E_ELECTRON};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::io::Write;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod exit {
    pub const OK: i32 = 0;
    pub const MISMATCH: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const ORACLE: i32 = 3;
    pub const IO: i32 = 4;
    pub const INTEGRATOR: i32 = 5;
    pub const NO_STEADY_STATE: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("oracle did not converge: {0}")]
    Oracle(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("integrator failed: {0}")]
    Integrator(String),
    #[error("{0}")]
    NoSteadyState(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Model(_) | CliError::Coeff(_) => exit::USAGE,
            CliError::Oracle(_) => exit::ORACLE,
            CliError::Io(_) => exit::IO,
            CliError::Integrator(_) => exit::INTEGRATOR,
            CliError::NoSteadyState(_) => exit::NO_STEADY_STATE,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "osc-master",
    version,
    about = "Master-equation coefficients for a charged oscillator in a Drude-cutoff blackbody bath"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-order A1..A4 and the aggregated Δ, λ, Dxx, Dxp at one point
    Coeffs(CoeffsArgs),
    /// Compare closed-form T-integrals against the quadrature oracle
    Verify(verify::VerifyArgs),
    /// Evaluate coefficients over a logarithmic grid and write CSV
    Sweep(sweep::SweepArgs),
    /// Integrate the Gaussian moment equations
    Dynamics(dynamics_cmd::DynamicsArgs),
}

/// Reduced parameters; βΩ may instead come from an SI temperature and cutoff.
#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// ω0/Ω
    #[arg(long = "omega0-tilde", default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega0_tilde: f64,
    /// Ω·τe [default: 0.1, or cutoff·τe with --cutoff-omega]
    #[arg(long = "Omega-tau-e", allow_negative_numbers = true)]
    pub omega_tau_e: Option<f64>,
    /// βΩ with β = ħ/(2 kB T) [default: 1]
    #[arg(long = "beta-Omega", conflicts_with = "temperature", allow_negative_numbers = true)]
    pub beta_omega: Option<f64>,
    /// Bath temperature in kelvin (needs --cutoff-omega)
    #[arg(long, requires = "cutoff_omega", allow_negative_numbers = true)]
    pub temperature: Option<f64>,
    /// Bath cutoff Ω in rad/s
    #[arg(long = "cutoff-omega", allow_negative_numbers = true)]
    pub cutoff_omega: Option<f64>,
}

impl PointArgs {
    pub fn resolve(&self) -> Result<ReducedParams, CliError> {
        let o = match (self.omega_tau_e, self.cutoff_omega) {
            (Some(o), _) => o,
            (None, Some(c)) => c * TAU_E_ELECTRON,
            (None, None) => 0.1,
        };
        let z = match (self.beta_omega, self.temperature, self.cutoff_omega) {
            (Some(z), _, _) => z,
            (None, Some(t), Some(c)) => {
                if !(t > 0.0) {
                    return Err(CliError::Usage(format!("--temperature must be > 0 (got {t})")));
                }
                BathSpec::new(c, TAU_E_ELECTRON, Temperature::Kelvin(t))?.beta_omega()
            }
            _ => 1.0,
        };
        if !z.is_finite() {
            return Err(CliError::Usage("--beta-Omega must be finite".into()));
        }
        Ok(ReducedParams::new(self.omega0_tilde, o, z)?)
    }
}

pub fn causality_warning(omega_tau_e: f64, err: &mut dyn Write) {
    if omega_tau_e > 1.0 {
        let _ = writeln!(
            err,
            "warning: Omega*tau_e = {omega_tau_e} exceeds causality bound Omega <= 1/tau_e; continuing"
        );
    }
}

#[derive(Debug, Clone, Args)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Machine-readable output
    #[arg(long)]
    pub json: bool,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn coeffs_json(p: &ReducedParams, m: &MasterCoeffs) -> serde_json::Value {
    let mut flat = serde_json::Map::new();
    for o in &m.per_order {
        for (i, v) in o.as_array().iter().enumerate() {
            flat.insert(format!("a{}_{}", i + 1, o.order), json!(v));
        }
        flat.insert(format!("d_xx_{}", o.order), json!(o.d_xx()));
        flat.insert(format!("d_xp_{}", o.order), json!(o.d_xp()));
    }
    let dc = delta_compact(p);
    let lc = lambda_compact(p);
    json!({
        "schema_version": SCHEMA_VERSION,
        "version": VERSION,
        "params": {
            "omega0_tilde": p.omega0_tilde,
            "Omega_tau_e": p.omega_tau_e,
            "beta_Omega": p.z,
        },
        "coefficients": flat,
        "totals": {
            "delta": m.delta,
            "lambda": m.lambda,
            "d_xx": m.d_xx,
            "d_xp": m.d_xp,
        },
        "compact": {
            "delta": dc,
            "lambda": lc,
            "delta_rel_diff": rel_diff(m.delta, dc),
            "lambda_rel_diff": rel_diff(m.lambda, lc),
        },
        "causality_exceeded": p.exceeds_causality(),
    })
}

fn cmd_coeffs(a: &CoeffsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let p = a.point.resolve()?;
    causality_warning(p.omega_tau_e, err);
    let m = aggregate(&p)?;
    if a.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&coeffs_json(&p, &m)).expect("json")
        )?;
        return Ok(exit::OK);
    }
    writeln!(
        out,
        "omega0_tilde = {}  Omega_tau_e = {}  beta_Omega = {}",
        p.omega0_tilde, p.omega_tau_e, p.z
    )?;
    writeln!(
        out,
        "{:>5} {:>24} {:>24} {:>24} {:>24}",
        "order", "A1", "A2", "A3", "A4"
    )?;
    for o in &m.per_order {
        writeln!(
            out,
            "{:>5} {:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e}",
            o.order, o.a1, o.a2, o.a3, o.a4
        )?;
    }
    writeln!(out, "delta  = {:.16e}", m.delta)?;
    writeln!(out, "lambda = {:.16e}", m.lambda)?;
    writeln!(out, "D_xx   = {:.16e}", m.d_xx)?;
    writeln!(out, "D_xp   = {:.16e}", m.d_xp)?;
    writeln!(
        out,
        "compact-form check: |delta| rel diff {:.3e}, |lambda| rel diff {:.3e}",
        rel_diff(m.delta, delta_compact(&p)),
        rel_diff(m.lambda, lambda_compact(&p))
    )?;
    Ok(exit::OK)
}

/// Parses and runs one invocation, writing to the given streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Coeffs(a) => cmd_coeffs(a, out, err),
        Command::Verify(a) => verify::cmd_verify(a, out, err),
        Command::Sweep(a) => sweep::cmd_sweep(a, out, err),
        Command::Dynamics(a) => dynamics_cmd::cmd_dynamics(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(
            std::iter::once("osc-master").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn coeffs_json_reference_point() {
        let (code, out, _) = call(&[
            "coeffs",
            "--omega0-tilde",
            "1",
            "--Omega-tau-e",
            "0.1",
            "--beta-Omega",
            "1",
            "--json",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert!((v["coefficients"]["a4_2"].as_f64().unwrap() + 0.05).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_is_all_zero() {
        let (code, out, _) = call(&["coeffs", "--Omega-tau-e", "0", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        for (_, x) in v["coefficients"].as_object().unwrap() {
            assert_eq!(x.as_f64().unwrap(), 0.0);
        }
    }

    #[test]
    fn causality_warning_on_stderr() {
        let (code, _, err) = call(&["coeffs", "--Omega-tau-e", "1.5"]);
        assert_eq!(code, 0);
        assert!(err.contains("exceeds causality bound"));
    }

    #[test]
    fn bad_flags_exit_two() {
        assert_eq!(call(&["coeffs", "--omega0-tilde", "-1"]).0, 2);
        assert_eq!(call(&["coeffs", "--omega0-tilde", "abc"]).0, 2);
        assert_eq!(call(&["coeffs", "--temperature", "300"]).0, 2);
        assert_eq!(call(&["nonsense"]).0, 2);
    }

    #[test]
    fn si_temperature_maps_to_beta_omega() {
        let p = PointArgs {
            omega0_tilde: 1.0,
            omega_tau_e: None,
            beta_omega: None,
            temperature: Some(300.0),
            cutoff_omega: Some(1e14),
        }
        .resolve()
        .unwrap();
        let want = crate::model::HBAR * 1e14 / (2.0 * crate::model::K_B * 300.0);
        assert!((p.z - want).abs() < 1e-14 * want);
        assert!((p.omega_tau_e - 1e14 * TAU_E_ELECTRON).abs() < 1e-20);
    }
}
