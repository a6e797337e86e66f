use num_complex::Complex64;
use osc_master::special_fn::{coth, coth_partial_sum, csch_sq, polygamma, SpecialFnError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

type C = Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const ZETA3: f64 = 1.202_056_903_159_594_3;

fn grid(n: usize, seed: u64) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = C::new(rng.gen_range(-25.0..40.0), rng.gen_range(-30.0..30.0));
        let near_pole = z.re <= 0.5 && (z.re - z.re.round()).hypot(z.im) < 0.05;
        if !near_pole {
            out.push(z);
        }
    }
    out
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn digamma_recurrence_on_complex_grid() {
    for z in grid(100, 1) {
        let lhs = polygamma(0, z + 1.0).unwrap() - polygamma(0, z).unwrap();
        assert!(rel(lhs, z.inv()) <= 1e-12, "z = {z}: {lhs} vs {}", z.inv());
    }
}

#[test]
fn higher_polygamma_recurrences() {
    for z in grid(100, 2) {
        let d1 = polygamma(1, z + 1.0).unwrap() - polygamma(1, z).unwrap();
        assert!(rel(d1, -(z * z).inv()) <= 1e-10, "z = {z}");
        let d2 = polygamma(2, z + 1.0).unwrap() - polygamma(2, z).unwrap();
        assert!(rel(d2, 2.0 * (z * z * z).inv()) <= 1e-9, "z = {z}");
    }
}

#[test]
fn central_differences_match_next_order() {
    let h = 1e-5;
    for z in grid(60, 3) {
        if z.norm() < 0.5 {
            continue;
        }
        for n in 0..2u32 {
            let fd = (polygamma(n, z + h).unwrap() - polygamma(n, z - h).unwrap()) / (2.0 * h);
            let exact = polygamma(n + 1, z).unwrap();
            assert!(rel(fd, exact) <= 1e-6, "n = {n}, z = {z}: {fd} vs {exact}");
        }
    }
}

#[test]
fn conjugate_symmetry() {
    for z in grid(100, 4) {
        for n in 0..3u32 {
            let a = polygamma(n, z.conj()).unwrap();
            let b = polygamma(n, z).unwrap().conj();
            assert!((a - b).norm() <= 1e-15 * b.norm(), "n = {n}, z = {z}");
        }
    }
}

#[test]
fn known_values_at_one() {
    let one = C::new(1.0, 0.0);
    assert!((polygamma(0, one).unwrap().re + EULER_GAMMA).abs() < 1e-15);
    assert!((polygamma(1, one).unwrap().re - PI * PI / 6.0).abs() < 1e-14);
    assert!((polygamma(2, one).unwrap().re + 2.0 * ZETA3).abs() < 1e-14);
    assert_eq!(polygamma(1, C::new(3.7, 0.0)).unwrap().im, 0.0);
}

// Σ_k 1/(z+k)² directly to N, Euler–Maclaurin tail beyond
fn trigamma_series(z: C) -> C {
    let n = 200_000usize;
    let mut s = C::new(0.0, 0.0);
    for k in (0..n).rev() {
        let w = z + k as f64;
        s += (w * w).inv();
    }
    let w = z + n as f64;
    s + w.inv() + 0.5 * (w * w).inv() + (w * w * w).inv() / 6.0 - (w * w * w * w * w).inv() / 30.0
}

#[test]
fn trigamma_against_direct_series() {
    for z in [C::new(1.0, -0.5), C::new(0.3, 2.0), C::new(5.0, -7.0)] {
        let want = trigamma_series(z);
        let got = polygamma(1, z).unwrap();
        assert!(rel(got, want) < 1e-12, "z = {z}: {got} vs {want}");
    }
}

#[test]
fn poles_and_orders_rejected() {
    for x in [0.0, -1.0, -7.0] {
        assert!(matches!(polygamma(0, C::new(x, 0.0)), Err(SpecialFnError::Pole(_))));
    }
    assert!(matches!(polygamma(3, C::new(1.0, 0.0)), Err(SpecialFnError::Order(3))));
    assert!(polygamma(0, C::new(-2.5, 0.0)).is_ok());
}

#[test]
fn coth_partial_sums_increase_and_converge() {
    assert_eq!(coth_partial_sum(1.0, 0).unwrap(), 1.0);
    for x in [0.05, 1.0, 3.0, 40.0] {
        let c = coth(x).unwrap();
        let mut prev = 0.0;
        for n in [0u64, 1, 2, 5, 10, 100, 1000] {
            let s = coth_partial_sum(x, n).unwrap();
            assert!(s >= prev && s <= c, "x = {x}, n = {n}");
            prev = s;
        }
    }
    let s = coth_partial_sum(1.0, 1_000_000).unwrap();
    assert!((s - 1.0f64 / 1.0f64.tanh()).abs() < 1e-6);
    assert!(coth_partial_sum(0.0, 3).is_err());
}

#[test]
fn csch_squared_values() {
    let x = (1.0 + 2f64.sqrt()).ln();
    assert!((csch_sq(x).unwrap() - 1.0).abs() < 1e-14);
    let big = csch_sq(50.0).unwrap();
    assert!(big > 0.0 && (big / (4.0 * (-100.0f64).exp()) - 1.0).abs() < 1e-14);
    assert!((csch_sq(0.1).unwrap() - 1.0 / 0.1f64.sinh().powi(2)).abs() < 1e-12);
    // Laurent series 1/x² − 1/3 + x²/15 − 2x⁴/189 + x⁶/675
    let x2 = 0.01;
    let series = 1.0 / x2 - 1.0 / 3.0 + x2 / 15.0 - 2.0 * x2 * x2 / 189.0 + x2 * x2 * x2 / 675.0;
    assert!((csch_sq(0.1).unwrap() - series).abs() < 1e-9);
    assert!(csch_sq(0.0).is_err());
}
