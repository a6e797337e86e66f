use num_complex::Complex64;
use osc_master::coeffs::t_closed_forms;
use osc_master::model::ReducedParams;
use osc_master::oracle::nested::{factorized, nested_t3};
use osc_master::oracle::{t_oracle, CorrelationKernel, CorrelationPolicy, Method, QuadratureSpec};

fn kernel(w: f64, o: f64, z: f64) -> CorrelationKernel {
    CorrelationKernel::new(ReducedParams::new(w, o, z).unwrap(), CorrelationPolicy::Matsubara).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn separable_integrals_three_ways() {
    let k = kernel(1.0, 0.1, 1.0);
    let q = QuadratureSpec::default();
    let closed = t_closed_forms(&k.params).unwrap();
    for name in ["T31", "T32"] {
        let engine = t_oracle(name, &k, &q).unwrap().value;
        let fact = factorized(name, &k, &q).unwrap().value;
        let nest = nested_t3(name, &k, &q).unwrap().value;
        let want = closed.get(name).unwrap();
        assert!(rel(engine, want) < 1e-9, "{name} engine {engine} vs {want}");
        assert!(rel(fact, want) < 1e-7, "{name} factorized {fact} vs {want}");
        assert!(rel(nest, want) < 1e-6, "{name} nested {nest} vs {want}");
    }
    for name in ["T61", "T62"] {
        let engine = t_oracle(name, &k, &q).unwrap().value;
        let fact = factorized(name, &k, &q).unwrap().value;
        assert!(rel(fact, engine) < 1e-7, "{name}: {fact} vs {engine}");
    }
}

#[test]
fn nested_quadrature_agrees_with_engine_on_t33_integrand() {
    let k = kernel(0.8, 0.05, 2.0);
    let q = QuadratureSpec::default();
    for name in ["T33", "T34"] {
        let engine = t_oracle(name, &k, &q).unwrap().value;
        let nest = nested_t3(name, &k, &q).unwrap().value;
        assert!(rel(nest, engine) < 1e-6, "{name}: {nest} vs {engine}");
    }
}

#[test]
fn tolerance_halving_is_stable() {
    let k = kernel(0.4, 0.2, 3.0);
    for m in [Method::Matsubara, Method::TimeDomain, Method::FrequencyDomain] {
        let a = QuadratureSpec::default().with_method(m);
        let b = a.with_rel_tol(a.rel_tol / 2.0);
        for name in ["T21", "T22", "T31", "T32"] {
            let va = t_oracle(name, &k, &a).unwrap();
            let vb = t_oracle(name, &k, &b).unwrap();
            let bound = 10.0 * (va.error + vb.error) + 1e-12 * vb.value.norm();
            assert!((va.value - vb.value).norm() <= bound, "{m:?} {name}");
        }
    }
}

#[test]
fn doubling_the_time_horizon_changes_nothing() {
    let k = kernel(0.2, 0.1, 10.0);
    let a = QuadratureSpec::default().with_method(Method::TimeDomain);
    let b = QuadratureSpec {
        t_max_periods: 2.0 * a.t_max_periods,
        ..a
    };
    for name in ["T21", "T22", "T33"] {
        let va = t_oracle(name, &k, &a).unwrap().value;
        let vb = t_oracle(name, &k, &b).unwrap().value;
        assert!(rel(va, vb) < 1e-9, "{name}: {va} vs {vb}");
    }
}

#[test]
fn correlation_policies_agree_on_a_time_grid() {
    for z in [0.05, 1.0, 20.0] {
        let m = kernel(1.0, 0.3, z);
        let f = m.with_policy(CorrelationPolicy::Frequency);
        // an oscillatory ω-integral cannot resolve values far below the kernel scale
        let floor = 1e-12 * m.kappa();
        for i in 1..=50 {
            let t = i as f64;
            let a = m.re(t).unwrap();
            let b = f.re(t).unwrap();
            assert!((a - b).abs() <= 1e-8 * a.abs() + floor, "z = {z}, t = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn order_four_routes_agree() {
    let k = kernel(2.0, 0.3, 0.5);
    let m = QuadratureSpec::default();
    let f = m.with_method(Method::FrequencyDomain);
    let closed = t_closed_forms(&k.params).unwrap();
    for name in ["T41", "T42", "T61", "T62", "T63", "T64"] {
        let a = t_oracle(name, &k, &m).unwrap().value;
        let b = t_oracle(name, &k, &f).unwrap().value;
        let c = closed.get(name).unwrap();
        assert!(rel(a, c) < 1e-9, "{name} matsubara {a} vs {c}");
        assert!(rel(b, c) < 1e-6, "{name} frequency {b} vs {c}");
    }
}

#[test]
fn invalid_specs_rejected() {
    let k = kernel(1.0, 0.1, 1.0);
    let q = QuadratureSpec {
        t_max_periods: 0.5,
        ..QuadratureSpec::default()
    };
    assert!(t_oracle("T21", &k, &q).is_err());
    assert!(t_oracle("T99", &k, &QuadratureSpec::default()).is_err());
}
