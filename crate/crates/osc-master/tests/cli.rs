use std::path::Path;
use std::process::{Command, Output};

fn osc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osc-master"))
        .args(args)
        .output()
        .expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn small_sweep(out: &Path) -> Output {
    osc(&[
        "sweep",
        "--grid-n",
        "4",
        "--beta-Omega",
        "0.01,100",
        "--quantities",
        "delta,dxx",
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn sweep_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(code(&small_sweep(&a)), 0);
    assert_eq!(code(&small_sweep(&b)), 0);
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# osc-master"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], &["omega0_tilde", "Omega_tau_e", "beta_Omega"]);
    assert_eq!(*header.last().unwrap(), "error");
    assert_eq!(lines.count(), 4 * 4 * 2);
}

#[test]
fn sweep_rejects_empty_quantities() {
    assert_eq!(code(&osc(&["sweep", "--grid-n", "2", "--quantities", ""])), 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("x.csv");
    assert_eq!(code(&small_sweep(&bad)), 4);
}

#[test]
fn sweep_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let o = osc(&[
        "sweep",
        "--preset",
        "fig2",
        "--grid-n",
        "5",
        "--out",
        path.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["failed"], 0);
}

#[test]
fn coeffs_json_has_schema_version() {
    let o = osc(&["coeffs", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert!((v["coefficients"]["a4_2"].as_f64().unwrap() + 0.05).abs() < 1e-15);
}

#[test]
fn verify_passes_and_detects_a_corrupted_formula() {
    let ok = osc(&["verify", "--order", "2"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    let bad = osc(&["verify", "--order", "2", "--corrupt-formula", "T21"]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad)
        .lines()
        .any(|l| l.starts_with("T21") && l.ends_with("FAIL")));
}

#[test]
fn verify_json_reports_every_integral() {
    let o = osc(&["verify", "--order", "4", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["integrals"].as_array().unwrap().len(), 6);
}

#[test]
fn no_steady_state_without_damping() {
    let o = osc(&["dynamics", "--Omega-tau-e", "0", "--steady"]);
    assert_eq!(code(&o), 6);
    let o = osc(&["dynamics", "--lambda", "0.01", "--steady"]);
    assert_eq!(code(&o), 6);
}

#[test]
fn steady_state_json() {
    let o = osc(&["dynamics", "--steady", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert!(v["steady_state"]["var_xx"].as_f64().unwrap() > 0.5);
}

fn footer_value(text: &str, key: &str) -> f64 {
    let footer = text.lines().last().unwrap();
    assert!(footer.starts_with("# osc-master"));
    footer
        .split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

fn column(text: &str, i: usize) -> Vec<f64> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(i).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn closed_oscillator_conserves_energy() {
    let t = format!("{}", 200.0 * std::f64::consts::PI);
    let o = osc(&[
        "dynamics",
        "--Omega-tau-e",
        "0",
        "--t-final",
        &t,
        "--rtol",
        "1e-12",
        "--atol",
        "1e-12",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("t,mean_x,mean_p,var_xx,var_pp,cov_xp,heisenberg_indicator"));
    assert!(footer_value(&text, "energy_drift") < 1e-9);
    assert!(footer_value(&text, "min_heisenberg_indicator") >= 0.25 - 1e-12);
}

#[test]
fn damped_oscillator_envelope_decays() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let o = osc(&[
        "dynamics",
        "--Omega-tau-e",
        "0.3",
        "--t-final",
        "200",
        "--samples",
        "401",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let (x, p) = (column(&text, 1), column(&text, 2));
    let amp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a.hypot(*b)).collect();
    let quarter = amp.len() / 4;
    let peak = |s: &[f64]| s.iter().cloned().fold(0.0, f64::max);
    let windows: Vec<f64> = amp.chunks(quarter).map(peak).collect();
    for w in windows.windows(2) {
        assert!(w[1] < w[0], "{windows:?}");
    }
}

#[test]
fn invalid_initial_state_is_a_usage_error() {
    assert_eq!(code(&osc(&["dynamics", "--var-xx", "0", "--t-final", "1"])), 2);
}

#[test]
fn sub_heisenberg_state_runs_with_a_note() {
    let o = osc(&[
        "dynamics",
        "--var-xx",
        "0.1",
        "--var-pp",
        "0.1",
        "--t-final",
        "1",
        "--samples",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("uncertainty product"));
}
