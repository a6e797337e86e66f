use super::{causality_warning, exit, CliError, PointArgs, SCHEMA_VERSION, VERSION};
use crate::coeffs::{aggregate, MasterCoeffs};
use crate::dynamics::{evolve, fmt_sig17, steady_state, uniform_times, DynamicsError, GaussianState, StepControl};
use crate::model::OscillatorSpec;
use clap::Args;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Args)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Highest perturbative order kept (2, 3 or 4)
    #[arg(long = "max-order", default_value_t = 4, value_parser = clap::value_parser!(u8).range(2..=4))]
    pub max_order: u8,
    /// Override Δ (any override zeroes the unset coefficients)
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long = "dxx", allow_negative_numbers = true)]
    pub d_xx: Option<f64>,
    #[arg(long = "dxp", allow_negative_numbers = true)]
    pub d_xp: Option<f64>,
    #[arg(long = "x0", default_value_t = 1.0, allow_negative_numbers = true)]
    pub mean_x: f64,
    #[arg(long = "p0", default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean_p: f64,
    #[arg(long = "var-xx", default_value_t = 0.5)]
    pub var_xx: f64,
    #[arg(long = "var-pp", default_value_t = 0.5)]
    pub var_pp: f64,
    #[arg(long = "cov-xp", default_value_t = 0.0, allow_negative_numbers = true)]
    pub cov_xp: f64,
    /// Final time in units of 1/ω0
    #[arg(long = "t-final", default_value_t = 100.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    /// Print the fixed point of the moment flow instead of integrating
    #[arg(long)]
    pub steady: bool,
    /// Trajectory CSV destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

impl DynamicsArgs {
    pub fn coeffs(&self, err: &mut dyn Write) -> Result<MasterCoeffs, CliError> {
        let overrides = [self.delta, self.lambda, self.d_xx, self.d_xp];
        if overrides.iter().any(Option::is_some) {
            let [d, l, xx, xp] = overrides.map(|v| v.unwrap_or(0.0));
            if [d, l, xx, xp].iter().any(|v| !v.is_finite()) {
                return Err(CliError::Usage("coefficients must be finite".into()));
            }
            return Ok(MasterCoeffs::from_totals(d, l, xx, xp));
        }
        let p = self.point.resolve()?;
        causality_warning(p.omega_tau_e, err);
        Ok(aggregate(&p)?.truncated(self.max_order))
    }

    pub fn state(&self) -> GaussianState {
        GaussianState {
            mean_x: self.mean_x,
            mean_p: self.mean_p,
            var_xx: self.var_xx,
            var_pp: self.var_pp,
            cov_xp: self.cov_xp,
        }
    }
}

fn state_json(s: &GaussianState) -> serde_json::Value {
    json!({
        "mean_x": s.mean_x,
        "mean_p": s.mean_p,
        "var_xx": s.var_xx,
        "var_pp": s.var_pp,
        "cov_xp": s.cov_xp,
        "heisenberg_indicator": s.heisenberg_indicator(),
    })
}

pub(super) fn cmd_dynamics(a: &DynamicsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let c = a.coeffs(err)?;
    let osc = OscillatorSpec::natural();
    if a.steady {
        let s = match steady_state(&c, &osc) {
            Ok(s) => s,
            Err(e @ DynamicsError::NoSteadyState { .. }) => return Err(CliError::NoSteadyState(e.to_string())),
            Err(e) => return Err(CliError::Integrator(e.to_string())),
        };
        if a.json {
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "steady_state": state_json(&s),
                "variance_ratio": s.var_xx / s.var_pp,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
        } else {
            writeln!(out, "steady state (first moments zero)")?;
            writeln!(out, "var_xx = {}", fmt_sig17(s.var_xx))?;
            writeln!(out, "var_pp = {}", fmt_sig17(s.var_pp))?;
            writeln!(out, "cov_xp = {}", fmt_sig17(s.cov_xp))?;
            writeln!(out, "var_xx/var_pp = {}", fmt_sig17(s.var_xx / s.var_pp))?;
            writeln!(out, "heisenberg_indicator = {}", fmt_sig17(s.heisenberg_indicator()))?;
        }
        return Ok(exit::OK);
    }
    if !(a.t_final > 0.0 && a.t_final.is_finite()) {
        return Err(CliError::Usage("--t-final must be positive".into()));
    }
    let s0 = a.state();
    s0.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let ctl = StepControl {
        rtol: a.rtol,
        atol: a.atol,
    };
    ctl.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let times = uniform_times(0.0, a.t_final, a.samples);
    let tr = evolve(&s0, &c, &osc, (0.0, a.t_final), ctl, &times).map_err(|e| CliError::Integrator(e.to_string()))?;
    let drift = tr.energy_drift(&osc);
    let hmin = tr.min_heisenberg_indicator();
    let footer = format!(
        "# osc-master {VERSION} energy_drift={} min_heisenberg_indicator={}",
        fmt_sig17(drift),
        fmt_sig17(hmin)
    );
    match &a.out {
        Some(path) => {
            let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(f);
            tr.write_csv(&mut w)?;
            writeln!(w, "{footer}")?;
            w.flush()?;
        }
        None if !a.json => {
            tr.write_csv(&mut *out)?;
            writeln!(out, "{footer}")?;
        }
        None => {}
    }
    if a.json {
        let v = json!({
            "schema_version": SCHEMA_VERSION,
            "coefficients": {"delta": c.delta, "lambda": c.lambda, "d_xx": c.d_xx, "d_xp": c.d_xp},
            "t_final": a.t_final,
            "samples": tr.times.len(),
            "final_state": tr.last().map(state_json),
            "energy_drift": drift,
            "min_heisenberg_indicator": hmin,
            "out": a.out.as_ref().map(|p| p.display().to_string()),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
    }
    if hmin < 0.25 {
        writeln!(err, "note: uncertainty product dropped to {hmin:.6e} (< 1/4)")?;
    }
    Ok(exit::OK)
}
