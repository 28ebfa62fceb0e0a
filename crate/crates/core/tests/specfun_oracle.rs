use proptest::prelude::*;
use serde::Deserialize;
use sle_densities::specfun::{gamma, hyp2f1, log_gamma, recip_gamma, sinpi, HypParams, C};

#[derive(Deserialize)]
struct Case {
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    z: [f64; 2],
    value: [f64; 2],
}

fn cx(v: [f64; 2]) -> C {
    C::new(v[0], v[1])
}

#[test]
fn hyp2f1_matches_high_precision_corpus() {
    let cases: Vec<Case> =
        serde_json::from_str(include_str!("data/hyp2f1_oracle.json")).expect("corpus parses");
    let mut worst = (0.0f64, String::new());
    for case in &cases {
        let p = HypParams::new(cx(case.a), cx(case.b), cx(case.c));
        let want = cx(case.value);
        let got = hyp2f1(p, cx(case.z)).unwrap_or_else(|e| panic!("{p:?} at {:?}: {e}", case.z));
        let err = (got - want).norm() / want.norm().max(1e-300);
        if err > worst.0 {
            worst = (err, format!("{p:?} z={:?} got {got} want {want}", case.z));
        }
    }
    assert!(worst.0 <= 1e-11, "worst relative error {:.3e}: {}", worst.0, worst.1);
}

/// Hypergeometric-equation residual from a circle stencil.
fn hyp_residual(p: HypParams, z: C) -> f64 {
    let m = 24;
    let r = 2e-3;
    let mut d = [C::new(0.0, 0.0); 3];
    for j in 0..m {
        let w = C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
        let f = hyp2f1(p, z + w * r).unwrap();
        for (k, dk) in d.iter_mut().enumerate() {
            *dk += f * w.powi(-(k as i32));
        }
    }
    let fact = [1.0, 1.0, 2.0];
    for k in 0..3 {
        d[k] = d[k] * fact[k] / (m as f64 * r.powi(k as i32));
    }
    let one = C::new(1.0, 0.0);
    let terms = [z * (one - z) * d[2], (p.c - (p.a + p.b + one) * z) * d[1], -p.a * p.b * d[0]];
    let scale = terms.iter().map(|t| t.norm()).fold(d[0].norm(), f64::max);
    (terms[0] + terms[1] + terms[2]).norm() / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hyp2f1_solves_its_equation(
        a in -2.5f64..2.5, b in -2.5f64..2.5, c in 0.3f64..3.0,
        r in 0.05f64..0.9, t in -3.1f64..3.1,
    ) {
        let z = C::from_polar(r, t);
        let p = HypParams::real(a, b, c);
        prop_assert!(hyp_residual(p, z) < 1e-8);
    }

    #[test]
    fn kummer_routes_agree(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.5f64..3.0, t in 0.2f64..1.2) {
        // Pfaff: F(a,b;c;z) = (1−z)^(−a) F(a, c−b; c; z/(z−1)), and Euler.
        let z = C::from_polar(0.6, t);
        let one = C::new(1.0, 0.0);
        let direct = hyp2f1(HypParams::real(a, b, c), z).unwrap();
        let pfaff = (one - z).powf(-a) * hyp2f1(HypParams::real(a, c - b, c), z / (z - one)).unwrap();
        let euler = (one - z).powf(c - a - b) * hyp2f1(HypParams::real(c - a, c - b, c), z).unwrap();
        let scale = direct.norm().max(1e-300);
        prop_assert!((direct - pfaff).norm() <= 1e-10 * scale);
        prop_assert!((direct - euler).norm() <= 1e-10 * scale);
    }

    #[test]
    fn recip_gamma_inverts_gamma(r in 0.0f64..20.0, t in -3.15f64..3.15) {
        let z = C::from_polar(r, t);
        prop_assume!((z.re - z.re.round()).abs() > 1e-3 || z.im.abs() > 1e-3);
        let prod = recip_gamma(z) * log_gamma(z).unwrap().exp();
        prop_assert!((prod - 1.0).norm() < 1e-12);
    }

    #[test]
    fn reflection_formula(re in -6.0f64..6.0, im in -3.0f64..3.0) {
        let z = C::new(re, im);
        prop_assume!((re - re.round()).abs() > 1e-3 || im.abs() > 1e-3);
        let one = C::new(1.0, 0.0);
        let v = log_gamma(z).unwrap().exp() * log_gamma(one - z).unwrap().exp() * sinpi(z)
            / std::f64::consts::PI;
        prop_assert!((v - 1.0).norm() < 1e-11);
    }
}

#[test]
fn gamma_relative_accuracy_on_real_line() {
    // Γ(n) = (n−1)! and Γ(n + 1/2) = (2n)! √π / (4^n n!)
    let mut fact = 1.0f64;
    for n in 1..=40u32 {
        let g = gamma(C::new(n as f64, 0.0)).unwrap().re;
        assert!((g / fact - 1.0).abs() < 1e-13, "n = {n}");
        fact *= n as f64;
    }
    let mut half = std::f64::consts::PI.sqrt();
    for n in 0..30u32 {
        let g = gamma(C::new(n as f64 + 0.5, 0.0)).unwrap().re;
        assert!((g / half - 1.0).abs() < 1e-13, "n = {n}");
        half *= n as f64 + 0.5;
    }
}
