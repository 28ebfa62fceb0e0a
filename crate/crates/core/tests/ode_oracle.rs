//! The ODE engine as an oracle for every closed-form block.

use proptest::prelude::*;
use sle_densities::bpz_ode::{self, Order, Point};
use sle_densities::params::kac;
use sle_densities::solutions::{self, block, Family};
use sle_densities::{Complex64 as C, Error};

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Deterministic sample points in |ξ| ≤ 0.9, clear of every principal cut
/// met by the blocks (real axis, the circle |1 − ξ| = 1).
pub fn sample_points(n: usize) -> Vec<C> {
    let mut out = Vec::new();
    let mut k = 0u32;
    while out.len() < n {
        k += 1;
        // golden-angle spiral
        let r = 0.12 + 0.78 * ((k as f64 * 0.618_033_988_749_895) % 1.0);
        let phi = k as f64 * 2.399_963_229_728_653;
        let z = C::from_polar(r, phi);
        if z.im.abs() > 0.05 && ((1.0 - z).norm() - 1.0).abs() > 0.05 {
            out.push(z);
        }
    }
    out
}

#[test]
fn every_block_solves_its_equation() {
    for kappa in [5.3, 6.7] {
        for family in Family::ALL {
            let spec = family.equation(kappa).unwrap();
            for idx in 0..family.width() {
                for xi in sample_points(25) {
                    let f = |x: C| solutions::block_component(family, idx, x, kappa);
                    let r = bpz_ode::residual(&spec, f, xi).unwrap();
                    assert!(r < 1e-7, "{family:?}[{idx}] kappa={kappa} xi={xi}: residual {r}");
                }
            }
        }
    }
}

#[test]
fn residual_examples() {
    let kappa = 5.3;
    let spin = Family::Spin2nd.equation(kappa).unwrap();
    let r = bpz_ode::residual(&spin, |x| solutions::block_component(Family::Spin2nd, 0, x, kappa), re(0.3)).unwrap();
    assert!(r < 1e-7);

    let piv = Family::Pivotal3rd.equation(kappa).unwrap();
    let half = bpz_ode::residual(&piv, |x| block(Family::Pivotal3rd, x, kappa).map(|v| v[0]), re(0.3)).unwrap();
    assert!(half < 1e-7);
    // the exponent without the halving is not a solution
    let d51 = kac(5.0, 1.0, kappa);
    let full = bpz_ode::residual(&piv, |x| Ok((x * x / (1.0 - x)).powf(d51)), re(0.3)).unwrap();
    assert!(full > 1e-3, "full-exponent H residual {full}");

    let square = bpz_ode::residual(&piv, |x| Ok(x * x), C::new(0.3, 0.1)).unwrap();
    assert!(square > 1e-3);
}

#[test]
fn residual_flags_a_cut() {
    let kappa = 5.3;
    let spec = Family::Pair3rd.equation(kappa).unwrap();
    // h₁ has a principal cut along (0, 1)
    let r = bpz_ode::residual(&spec, |x| block(Family::Pair3rd, x, kappa).map(|v| v[0]), re(0.4));
    assert!(matches!(r, Err(Error::Cut(_))), "{r:?}");
}

#[test]
fn frobenius_matches_spin_block() {
    let kappa = 5.3;
    let spec = Family::Spin2nd.equation(kappa).unwrap();
    let s = bpz_ode::frobenius(&spec, Point::Zero, 0.0, 80).unwrap();
    let d31 = kac(3.0, 1.0, kappa);
    let g1 = solutions::block_component(Family::Spin2nd, 0, re(0.1), kappa).unwrap() / 2f64.powf(d31 / 2.0);
    assert!((s.eval(re(0.1)).unwrap() - g1).norm() < 1e-10);
}

#[test]
fn frobenius_matches_h1_up_to_normalisation() {
    let kappa = 5.3;
    let d31 = kac(3.0, 1.0, kappa);
    let spec = Family::Pair3rd.equation(kappa).unwrap();
    let s = bpz_ode::frobenius(&spec, Point::Zero, d31, 120).unwrap();
    let ratio = |x: C| block(Family::Pair3rd, x, kappa).unwrap()[0] / s.eval(x).unwrap();
    let a = ratio(C::new(0.1, 0.05));
    let b = ratio(C::new(0.02, 0.3));
    assert!((a - b).norm() < 1e-9 * a.norm());
    assert!((a.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn series_reproduces_its_leading_power() {
    let kappa = 6.7;
    let d31 = kac(3.0, 1.0, kappa);
    let spec = Family::Chordal2nd.equation(kappa).unwrap();
    let e = bpz_ode::indicial(&spec, Point::One)[1];
    let s = bpz_ode::frobenius(&spec, Point::One, e, 40).unwrap();
    for t in [1e-4, 1e-6] {
        let v = s.eval(re(1.0 - t)).unwrap();
        assert!((v / t.powf(e) - 1.0).norm() < 10.0 * t);
    }
    let s0 = bpz_ode::frobenius(&spec, Point::Zero, d31, 40).unwrap();
    assert!(matches!(s0.eval(re(0.7)), Err(Error::Domain(_))));
}

#[test]
fn transport_spin_block() {
    let kappa = 5.3;
    let spec = Family::Spin2nd.equation(kappa).unwrap();
    let g = |x: C| solutions::block_component(Family::Spin2nd, 0, x, kappa).unwrap();
    let s = bpz_ode::frobenius(&spec, Point::Zero, 0.0, 80).unwrap();
    let norm = g(re(0.1)) / s.eval(re(0.1)).unwrap();
    let init: Vec<C> = s.eval_derivs(re(0.1), 2).unwrap().iter().map(|v| v * norm).collect();
    let tr = bpz_ode::integrate(&spec, &init, &[re(0.1), re(0.5)]).unwrap();
    assert!((tr.values[1][0] - g(re(0.5))).norm() < 1e-9 * g(re(0.5)).norm());
    assert!(tr.error_estimate < 1e-10);
}

#[test]
fn transport_round_trip() {
    let spec = Family::Pair3rd.equation(5.3).unwrap();
    let init = [C::new(1.0, 0.2), C::new(-0.3, 0.5), C::new(2.0, -1.0)];
    let path = [re(0.1), C::new(0.5, 0.3), re(0.1)];
    let tr = bpz_ode::integrate(&spec, &init, &path).unwrap();
    for (a, b) in tr.values[2].iter().zip(init) {
        assert!((a - b).norm() < 1e-9 * b.norm().max(1.0));
    }
}

#[test]
fn transport_constant() {
    let spec = bpz_ode::build_spec(Order::Second, 0.0, 6.0).unwrap();
    let tr = bpz_ode::integrate(&spec, &[re(1.0), re(0.0)], &[re(0.2), C::new(0.7, 0.8), C::new(-2.0, 0.4)])
        .unwrap();
    for v in &tr.values {
        assert!((v[0] - 1.0).norm() < 1e-13 && v[1].norm() < 1e-12);
    }
}

#[test]
fn transport_refuses_singular_points() {
    let spec = bpz_ode::build_spec(Order::Second, 0.1, 6.0).unwrap();
    let r = bpz_ode::integrate(&spec, &[re(1.0), re(0.0)], &[re(-0.5), re(0.5)]);
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn frobenius_and_transport_agree_in_the_overlap() {
    for kappa in [5.3, 6.7] {
        let d31 = kac(3.0, 1.0, kappa);
        let spec = Family::Pair3rd.equation(kappa).unwrap();
        let s = bpz_ode::frobenius(&spec, Point::Zero, d31, 300).unwrap();
        let x0 = C::new(0.2, 0.1);
        let init = s.eval_derivs(x0, 3).unwrap();
        let path = [x0, C::new(0.35, 0.25), C::new(0.45, -0.1), C::new(-0.3, 0.3)];
        let tr = bpz_ode::integrate(&spec, &init, &path).unwrap();
        for (v, &x) in tr.values.iter().zip(&path) {
            let want = s.eval(x).unwrap();
            assert!((v[0] - want).norm() < 1e-8 * want.norm(), "kappa={kappa} xi={x}");
        }
    }
}

#[test]
fn third_order_solutions_are_independent() {
    for kappa in [5.3, 6.7, 3.3] {
        let d31 = kac(3.0, 1.0, kappa);
        let d51 = kac(5.0, 1.0, kappa);
        let spec = bpz_ode::build_spec(Order::Third, kac(1.0, 0.0, kappa), kappa).unwrap();
        let rows: Vec<Vec<C>> = [0.0, d31, d51]
            .iter()
            .map(|&r| bpz_ode::frobenius(&spec, Point::Zero, r, 300).unwrap().eval_derivs(re(0.5), 3).unwrap())
            .collect();
        let m = nalgebra_free_det(&rows);
        let scale: f64 = rows.iter().map(|r| r.iter().map(|v| v.norm()).fold(0.0, f64::max)).product();
        assert!(m.norm() > 1e-6 * scale, "kappa={kappa}: det {m}");
    }
}

fn nalgebra_free_det(m: &[Vec<C>]) -> C {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[test]
fn indicial_examples() {
    let kappa = 5.3;
    let d31 = kac(3.0, 1.0, kappa);
    let d51 = kac(5.0, 1.0, kappa);
    let two = bpz_ode::indicial(&bpz_ode::build_spec(Order::Second, 0.2, kappa).unwrap(), Point::Zero);
    assert!((two[0]).abs() < 1e-12 && (two[1] - d31).abs() < 1e-12);
    let three = bpz_ode::indicial(&bpz_ode::build_spec(Order::Third, 0.2, kappa).unwrap(), Point::Zero);
    for (g, w) in three.iter().zip([0.0, d31, d51]) {
        assert!((g - w).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn indicial_exponents_are_kac_dimensions(kappa in 0.5f64..12.0, d_o in -0.5f64..1.0) {
        let d31 = kac(3.0, 1.0, kappa);
        let d51 = kac(5.0, 1.0, kappa);
        let mut want2 = vec![0.0, d31];
        want2.sort_by(f64::total_cmp);
        let mut want3 = vec![0.0, d31, d51];
        want3.sort_by(f64::total_cmp);
        let got2 = bpz_ode::indicial(&bpz_ode::build_spec(Order::Second, d_o, kappa).unwrap(), Point::Zero);
        let got3 = bpz_ode::indicial(&bpz_ode::build_spec(Order::Third, d_o, kappa).unwrap(), Point::Zero);
        for (g, w) in got2.iter().zip(&want2).chain(got3.iter().zip(&want3)) {
            prop_assert!((g - w).abs() < 1e-12 * (1.0 + w.abs()), "{g} vs {w}");
        }
    }

    #[test]
    fn spin_product_identity(r in 0.05f64..0.95, phi in -3.1f64..3.1, kappa in 2.0f64..8.0) {
        let xi = C::from_polar(r, phi);
        prop_assume!(xi.im.abs() > 1e-3);
        let g = block(Family::Spin2nd, xi, kappa).unwrap();
        let d31 = kac(3.0, 1.0, kappa);
        let q = -(xi * xi) / (4.0 * (1.0 - xi));
        let prod = g[0] * g[1];
        prop_assert!((prod.norm() - q.norm().powf(d31 / 2.0)).abs() < 1e-12 * prod.norm().max(1e-300));
        // the full identity holds when the two arguments do not wrap
        let w = (2.0 - xi) / (2.0 * (1.0 - xi).sqrt());
        let total = (1.0 + w).arg() + (q / (1.0 + w)).arg();
        if total.abs() < std::f64::consts::PI - 1e-9 {
            prop_assert!((prod - q.powf(d31 / 2.0)).norm() < 1e-12 * prod.norm().max(1e-300));
        }
    }
}

/// Slope of ln|f| against ln|ξ| on the ladder |ξ| = 10⁻³…10⁻⁶, with a
/// linear correction term.
fn leading_power(f: impl Fn(C) -> C, dir: C) -> f64 {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for i in 0..=30 {
        let r = 10f64.powf(-3.0 - i as f64 / 10.0);
        let row = [1.0, r.ln(), r];
        let y = f(dir * r).norm().ln();
        for p in 0..3 {
            b[p] += row[p] * y;
            for q in 0..3 {
                a[p][q] += row[p] * row[q];
            }
        }
    }
    // Cramer's rule for the slope
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut m1 = a;
    for p in 0..3 {
        m1[p][1] = b[p];
    }
    det(&m1) / det(&a)
}

#[test]
fn leading_exponents_match_indicial() {
    let kappa = 5.3;
    let d31 = kac(3.0, 1.0, kappa);
    let d51 = kac(5.0, 1.0, kappa);
    let dir = C::from_polar(1.0, 0.7);
    let cases: [(Family, usize, f64); 4] =
        [(Family::Chordal2nd, 0, d31), (Family::Pair3rd, 0, d31), (Family::Pair3rd, 1, d51), (Family::Pivotal3rd, 0, d51)];
    for (family, idx, want) in cases {
        let got = leading_power(|x| block(family, x, kappa).unwrap()[idx], dir);
        assert!((got - want).abs() < 1e-4, "{family:?}[{idx}]: {got} vs {want}");
        let spec = family.equation(kappa).unwrap();
        let ind = bpz_ode::indicial(&spec, Point::Zero);
        assert!(ind.iter().any(|e| (e - want).abs() < 1e-12));
    }
    let g2 = leading_power(|x| block(Family::Spin2nd, x, kappa).unwrap()[1], dir);
    assert!((g2 - d31).abs() < 1e-4);
}

#[test]
fn lpp_block_at_four_is_an_arctangent() {
    // u·₂F₁(1/2, 1; 3/2; −u²) = arctan u
    for u in [-3.0, -0.4, 0.2, 1.0, 7.5] {
        let xi = re(2.0) / (1.0 + C::new(0.0, u));
        let v = block(Family::Lpp2nd, xi, 4.0).unwrap()[1];
        assert!((v - re(f64::atan(u))).norm() < 1e-12, "u={u}: {v}");
    }
}

#[test]
fn second_order_crossing() {
    let check = solutions::second_order_crossing_check(5.3, 10).unwrap();
    assert!((check.ratio - check.expected).abs() < 1e-8 * check.expected.abs(), "{check:?}");
    assert!(check.max_deviation < 1e-8);
    let c112 = solutions::c112(5.3).unwrap();
    assert!((check.expected.sqrt() - c112).abs() < 1e-10);
}

#[test]
fn third_order_crossing() {
    let check = solutions::third_order_crossing_check(5.3).unwrap();
    assert!((check.coefficients[2] - check.d1).abs() < 1e-6, "{check:?}");
    assert!(check.coefficients[0].abs() < 1e-8 && check.coefficients[1].abs() < 1e-8, "{check:?}");
    assert!((check.exponent - check.expected_exponent).abs() < 1e-3, "{check:?}");
}

#[test]
fn structure_constants_continuous_through_six() {
    let exact = solutions::structure_constants_kappa6();
    for k in [6.0 - 1e-4, 6.0 + 1e-4] {
        let s = solutions::structure_constants(k).unwrap();
        for (a, b) in [(exact.c112, s.c112), (exact.c222, s.c222), (exact.c224, s.c224)] {
            assert!((a - b).abs() < 1e-3 * a, "{k}: {a} vs {b}");
        }
    }
    let lim = solutions::structure_constants(6.0).unwrap();
    for (a, b) in [(exact.c112, lim.c112), (exact.c222, lim.c222), (exact.c224, lim.c224)] {
        assert!((a - b).abs() < 1e-6 * a);
    }
}

#[test]
fn c112_squared_is_the_crossing_combination() {
    for kappa in [4.5, 5.3, 6.7, 7.5, 3.3] {
        let c = solutions::c112(kappa).unwrap();
        let comb = solutions::crossing_combination(kappa).unwrap();
        assert!((c * c - comb).abs() < 1e-10 * comb.abs(), "{kappa}");
    }
}

#[test]
fn d1_is_c224_squared_at_six() {
    let t = solutions::third_order_crossing(6.0).unwrap();
    let c = solutions::c224(6.0).unwrap();
    assert!((t.d1 - c * c).abs() < 1e-10);
}

#[test]
fn f_matrix_trace_vanishes() {
    for kappa in [3.3, 4.5, 5.3, 6.0, 6.7, 7.9] {
        let f = solutions::crossing_f(kappa).unwrap();
        assert!((f[0][0] + f[1][1]).abs() < 1e-15);
    }
}
