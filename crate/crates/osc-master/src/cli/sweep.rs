use super::{causality_warning, exit, CliError, SCHEMA_VERSION, VERSION};
use crate::coeffs::{aggregate, MasterCoeffs};
use crate::dynamics::fmt_sig17;
use crate::model::ReducedParams;
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Delta,
    Lambda,
    Dxx,
    Dxp,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Delta => "delta",
            Quantity::Lambda => "lambda",
            Quantity::Dxx => "dxx",
            Quantity::Dxp => "dxp",
        }
    }

    /// Total followed by orders 2, 3, 4.
    pub fn values(&self, m: &MasterCoeffs) -> [f64; 4] {
        let pick = |n: u8| {
            let o = m.order(n);
            match self {
                Quantity::Delta => o.a1,
                Quantity::Lambda => o.a4,
                Quantity::Dxx => o.d_xx(),
                Quantity::Dxp => o.d_xp(),
            }
        };
        let total = match self {
            Quantity::Delta => m.delta,
            Quantity::Lambda => m.lambda,
            Quantity::Dxx => m.d_xx,
            Quantity::Dxp => m.d_xp,
        };
        [total, pick(2), pick(3), pick(4)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Δ and λ with order ratios over ω̃0 ∈ [0.1, 10] × Ω̃ ∈ [1e-3, 0.9]
    Fig1,
    /// Δ and λ per order along ω̃0 at Ω̃ ∈ {1e-3, 0.1, 0.5}
    Fig2,
    /// Dxx contours at βΩ ∈ {0.01, 1, 100}; βΩ = 0.01 is the hot bath, whatever the figure's own panel labels say
    Fig3,
    /// Dxx and Dxp per order along ω̃0 at βΩ = 0.01 (high temperature)
    Fig4,
    /// Dxp contours at βΩ ∈ {0.01, 1, 100}; βΩ = 0.01 is the hot bath, as for fig3
    Fig5,
    /// Dxx and Dxp per order along ω̃0 at βΩ = 100 (low temperature)
    Fig6,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub omega0_tilde: Vec<f64>,
    pub omega_tau_e: Vec<f64>,
    pub z: Vec<f64>,
    pub quantities: Vec<Quantity>,
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

pub fn preset_grid(p: Preset, n: usize) -> SweepGrid {
    let w = log_space(0.1, 10.0, n);
    let contour = log_space(1e-3, 0.9, n);
    let lines = vec![1e-3, 0.1, 0.5];
    let temps = vec![0.01, 1.0, 100.0];
    use Quantity::*;
    let (o, z, q) = match p {
        Preset::Fig1 => (contour, vec![1.0], vec![Delta, Lambda]),
        Preset::Fig2 => (lines, vec![1.0], vec![Delta, Lambda]),
        Preset::Fig3 => (contour, temps, vec![Dxx]),
        Preset::Fig4 => (lines, vec![0.01], vec![Dxx, Dxp]),
        Preset::Fig5 => (contour, temps, vec![Dxp]),
        Preset::Fig6 => (lines, vec![100.0], vec![Dxx, Dxp]),
    };
    SweepGrid {
        omega0_tilde: w,
        omega_tau_e: o,
        z,
        quantities: q,
    }
}

fn check_axis(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Usage(format!("{name} axis is empty")));
    }
    if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(CliError::Usage(format!("{name} axis must be finite and positive")));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Usage(format!("{name} axis must be strictly increasing")));
    }
    Ok(())
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), CliError> {
        check_axis("omega0_tilde", &self.omega0_tilde)?;
        check_axis("Omega_tau_e", &self.omega_tau_e)?;
        check_axis("beta_Omega", &self.z)?;
        if self.quantities.is_empty() {
            return Err(CliError::Usage("no quantities requested".into()));
        }
        Ok(())
    }

    /// Points in output order: outer ω̃0, inner Ω̃, then z.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.omega0_tilde.len() * self.omega_tau_e.len() * self.z.len());
        for &w in &self.omega0_tilde {
            for &o in &self.omega_tau_e {
                for &z in &self.z {
                    out.push((w, o, z));
                }
            }
        }
        out
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["omega0_tilde".to_string(), "Omega_tau_e".into(), "beta_Omega".into()];
        for q in &self.quantities {
            let n = q.name();
            h.extend([
                n.to_string(),
                format!("{n}_2"),
                format!("{n}_3"),
                format!("{n}_4"),
                format!("{n}_ratio3"),
                format!("{n}_ratio4"),
            ]);
        }
        h.push("error".into());
        h
    }
}

pub const FAILED: &str = "failed";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega0_tilde: f64,
    pub omega_tau_e: f64,
    pub z: f64,
    /// Per quantity: total, orders 2..4, ratios 3/2 and 4/2. None on failure.
    pub values: Option<Vec<f64>>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn evaluate(w: f64, o: f64, z: f64, qs: &[Quantity]) -> Self {
        let mut row = SweepRow {
            omega0_tilde: w,
            omega_tau_e: o,
            z,
            values: None,
            error: None,
        };
        let m = match ReducedParams::new(w, o, z)
            .map_err(|e| e.to_string())
            .and_then(|p| aggregate(&p).map_err(|e| e.to_string()))
        {
            Ok(m) => m,
            Err(e) => {
                row.error = Some(e);
                return row;
            }
        };
        let mut vals = Vec::with_capacity(6 * qs.len());
        for q in qs {
            let [t, a, b, c] = q.values(&m);
            vals.extend([t, a, b, c, b / a, c / a]);
        }
        if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
            row.error = Some(format!("non-finite value in column {}", i + 3));
            return row;
        }
        row.values = Some(vals);
        row
    }

    pub fn record(&self, width: usize) -> Vec<String> {
        let mut r = vec![
            fmt_sig17(self.omega0_tilde),
            fmt_sig17(self.omega_tau_e),
            fmt_sig17(self.z),
        ];
        match &self.values {
            Some(v) => r.extend(v.iter().map(|x| fmt_sig17(*x))),
            None => r.extend(std::iter::repeat(FAILED.to_string()).take(width)),
        }
        r.push(self.error.clone().unwrap_or_default());
        r
    }
}

/// Evaluates every grid point in parallel; rows come back in grid order.
pub fn run_sweep(g: &SweepGrid) -> Vec<SweepRow> {
    g.points()
        .par_iter()
        .map(|&(w, o, z)| SweepRow::evaluate(w, o, z, &g.quantities))
        .collect()
}

pub fn write_sweep_csv<W: Write>(g: &SweepGrid, rows: &[SweepRow], label: &str, w: W) -> Result<(), CliError> {
    let mut w = w;
    writeln!(
        w,
        "# osc-master {VERSION} sweep schema_version={SCHEMA_VERSION} grid={label}"
    )?;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(g.header())?;
    let width = 6 * g.quantities.len();
    for r in rows {
        wr.write_record(r.record(width))?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Figure grid (64 × 64 by default)
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Points per logarithmic axis
    #[arg(long = "grid-n", default_value_t = 64)]
    pub grid_n: usize,
    #[arg(long = "omega0-min", default_value_t = 0.1)]
    pub omega0_min: f64,
    #[arg(long = "omega0-max", default_value_t = 10.0)]
    pub omega0_max: f64,
    #[arg(long = "Omega-min", default_value_t = 1e-3)]
    pub omega_min: f64,
    #[arg(long = "Omega-max", default_value_t = 0.9)]
    pub omega_max: f64,
    /// Comma-separated βΩ values
    #[arg(long = "beta-Omega", value_delimiter = ',', default_value = "1")]
    pub beta_omega: Vec<f64>,
    /// Comma-separated quantities; pass an empty string for none
    #[arg(long, value_delimiter = ',')]
    pub quantities: Option<Vec<String>>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a JSON summary (requires --out)
    #[arg(long, requires = "out")]
    pub json: bool,
}

fn parse_quantities(raw: &[String]) -> Result<Vec<Quantity>, CliError> {
    raw.iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| Quantity::from_str(s.trim(), true).map_err(|e| CliError::Usage(format!("quantity {s}: {e}"))))
        .collect()
}

impl SweepArgs {
    pub fn grid(&self) -> Result<(SweepGrid, String), CliError> {
        if self.grid_n == 0 {
            return Err(CliError::Usage("--grid-n must be positive".into()));
        }
        let (mut g, label) = match self.preset {
            Some(p) => (preset_grid(p, self.grid_n), p.name().to_string()),
            None => (
                SweepGrid {
                    omega0_tilde: log_space(self.omega0_min, self.omega0_max, self.grid_n),
                    omega_tau_e: log_space(self.omega_min, self.omega_max, self.grid_n),
                    z: self.beta_omega.clone(),
                    quantities: vec![Quantity::Delta, Quantity::Lambda, Quantity::Dxx, Quantity::Dxp],
                },
                "custom".to_string(),
            ),
        };
        if let Some(q) = &self.quantities {
            g.quantities = parse_quantities(q)?;
        }
        g.validate()?;
        Ok((g, label))
    }
}

pub(super) fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let (g, label) = a.grid()?;
    if let Some(max) = g.omega_tau_e.last() {
        causality_warning(*max, err);
    }
    let rows = run_sweep(&g);
    match &a.out {
        Some(path) => {
            let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_sweep_csv(&g, &rows, &label, std::io::BufWriter::new(f))?;
        }
        None => write_sweep_csv(&g, &rows, &label, &mut *out)?,
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if a.json {
        let v = json!({
            "schema_version": SCHEMA_VERSION,
            "grid": label,
            "out": a.out.as_ref().map(|p| p.display().to_string()),
            "rows": rows.len(),
            "failed": failed,
            "columns": g.header(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
    }
    if failed > 0 {
        writeln!(err, "warning: {failed} grid points failed; see the error column")?;
    }
    Ok(exit::OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_space_hits_endpoints() {
        let v = log_space(0.1, 10.0, 5);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[4], 10.0);
        assert!((v[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn presets_are_valid() {
        for p in [
            Preset::Fig1,
            Preset::Fig2,
            Preset::Fig3,
            Preset::Fig4,
            Preset::Fig5,
            Preset::Fig6,
        ] {
            let g = preset_grid(p, 64);
            g.validate().unwrap();
            assert_eq!(g.omega0_tilde.len(), 64);
        }
        assert_eq!(preset_grid(Preset::Fig3, 8).z, vec![0.01, 1.0, 100.0]);
    }

    #[test]
    fn order_is_outer_omega0_inner_coupling_then_z() {
        let g = SweepGrid {
            omega0_tilde: vec![1.0, 2.0],
            omega_tau_e: vec![0.1, 0.2],
            z: vec![1.0, 3.0],
            quantities: vec![Quantity::Delta],
        };
        let p = g.points();
        assert_eq!(p[0], (1.0, 0.1, 1.0));
        assert_eq!(p[1], (1.0, 0.1, 3.0));
        assert_eq!(p[2], (1.0, 0.2, 1.0));
        assert_eq!(p[4], (2.0, 0.1, 1.0));
    }

    #[test]
    fn failures_become_sentinels() {
        let r = SweepRow::evaluate(-1.0, 0.1, 1.0, &[Quantity::Delta]);
        assert!(r.values.is_none());
        let rec = r.record(6);
        assert_eq!(rec.len(), 3 + 6 + 1);
        assert!(rec[3..9].iter().all(|s| s == FAILED));
        assert!(!rec[9].is_empty());
    }

    #[test]
    fn empty_quantities_rejected() {
        let g = SweepGrid {
            omega0_tilde: vec![1.0],
            omega_tau_e: vec![0.1],
            z: vec![1.0],
            quantities: vec![],
        };
        assert!(g.validate().is_err());
    }
}
