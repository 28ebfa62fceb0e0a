//! Self-checks of the closed forms against the ODE engine and against their
//! own invariants. Shared by the command-line `verify` command and the
//! acceptance suite.

use crate::bpz_ode;
use crate::densities::{self, cross_ratio, density, DensityKind};
use crate::params::kac;
use crate::solutions::{self, Family};
use crate::{Complex64 as C, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable at this κ: a genuine pole or resonance.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Worst observed error, in the units of `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn measured(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        let status = if value <= tolerance { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, value, tolerance, detail: detail.into() }
    }

    fn from_result(name: &str, tolerance: f64, r: Result<(f64, String)>) -> Self {
        match r {
            Ok((value, detail)) => Check::measured(name, value, tolerance, detail),
            Err(e @ (Error::Pole(_) | Error::Resonance(_))) => Check {
                name: name.into(),
                status: Status::Skipped,
                value: f64::NAN,
                tolerance,
                detail: e.to_string(),
            },
            Err(e) => Check { name: name.into(), status: Status::Fail, value: f64::NAN, tolerance, detail: e.to_string() },
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Deterministic points in |ξ| ≤ 0.9 away from the real axis and from the
/// circle |1 − ξ| = 1.
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

/// Largest ODE residual of each block member over 25 sample points.
pub fn residuals(kappa: f64) -> Vec<Check> {
    let mut out = Vec::new();
    for family in Family::ALL {
        for idx in 0..family.width() {
            let name = format!("residual {family:?}[{idx}] kappa={kappa}");
            let r = family.equation(kappa).and_then(|spec| {
                let mut worst = (0.0, C::new(0.0, 0.0));
                for xi in sample_points(25) {
                    let r = bpz_ode::residual(&spec, |x| solutions::block_component(family, idx, x, kappa), xi)?;
                    if r > worst.0 {
                        worst = (r, xi);
                    }
                }
                Ok((worst.0, format!("worst at xi = {}", worst.1)))
            });
            out.push(Check::from_result(&name, 1e-7, r));
        }
    }
    out
}

/// |1 − ξ| = 1 and ξ²/(1 − ξ) real over random half-plane points.
pub fn geometry(n: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut circle, mut real) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let l = rng.gen_range(0.1..10.0);
        let z = C::new(rng.gen_range(-3.0..3.0) * l, rng.gen_range(1e-3..3.0) * l);
        match cross_ratio(l, z) {
            Ok(xi) => {
                circle = circle.max(((1.0 - xi).norm() - 1.0).abs());
                let q = xi * xi / (1.0 - xi);
                real = real.max(q.im.abs() / q.norm().max(1.0));
            }
            Err(e) => return vec![Check::from_result("geometry", 1e-13, Err(e))],
        }
    }
    vec![
        Check::measured("geometry |1-xi| = 1", circle, 1e-13, format!("{n} points")),
        Check::measured("geometry xi^2/(1-xi) real", real, 1e-13, format!("{n} points")),
    ]
}

/// Slope e of ln f = a + e ln y + b y over y = 10⁻²…10⁻⁵.
pub fn ladder_exponent(f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for i in 0..=30 {
        let y = 10f64.powf(-2.0 - i as f64 / 10.0);
        let row = [1.0, y.ln(), y];
        let v = f(y)?.ln();
        for p in 0..3 {
            rhs[p] += row[p] * v;
            for q in 0..3 {
                a[p][q] += row[p] * row[q];
            }
        }
    }
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut m1 = a;
    for p in 0..3 {
        m1[p][1] = rhs[p];
    }
    Ok(det(&m1) / det(&a))
}

/// Exponents of each density as the bulk point approaches the boundary,
/// inside and outside the anchor segment.
pub fn boundary_exponents(kappa: f64) -> Vec<Check> {
    let d31 = kac(3.0, 1.0, kappa);
    let d51 = kac(5.0, 1.0, kappa);
    let sigma = kac(0.0, 0.5, kappa);
    let d10 = kac(1.0, 0.0, kappa);
    let d20 = kac(2.0, 0.0, kappa);
    let cases = [
        (DensityKind::Rho110, 0.1, -2.0 * sigma),
        (DensityKind::Rho110, 0.8, d31 - 2.0 * sigma),
        (DensityKind::Rho112, 0.1, d31 - 2.0 * d10),
        (DensityKind::Rho220, -0.9, d31 - 2.0 * sigma),
        (DensityKind::Rho222Lower, 0.1, d31 - 2.0 * d10),
        (DensityKind::Rho222Lower, -0.8, d51 - 2.0 * d10),
        (DensityKind::Rho224, 0.2, d51 - 2.0 * d20),
        (DensityKind::Rho224, 1.3, d51 - 2.0 * d20),
    ];
    cases
        .iter()
        .map(|&(kind, x, want)| {
            let name = format!("boundary exponent {kind} x={x} kappa={kappa}");
            let r = ladder_exponent(|y| density(kind, 1.0, C::new(x, y), kappa))
                .map(|got| ((got - want).abs(), format!("fitted {got:.6}, expected {want:.6}")));
            Check::from_result(&name, 1e-3, r)
        })
        .collect()
}

/// Transported second- and third-order solutions against the closed-form
/// crossing data.
pub fn crossing(kappa: f64) -> Vec<Check> {
    let second = solutions::second_order_crossing_check(kappa, 10).map(|c| {
        let err = ((c.ratio - c.expected).abs() / c.expected.abs()).max(c.max_deviation);
        (err, format!("ratio {:.12}, expected {:.12}", c.ratio, c.expected))
    });
    let third = solutions::third_order_crossing_check(kappa);
    let third_exponent = third.clone().map(|c| {
        ((c.exponent - c.expected_exponent).abs(), format!("fitted {:.6}, expected {:.6}", c.exponent, c.expected_exponent))
    });
    let third_d1 = third.map(|c| {
        let err = (c.coefficients[2] - c.d1).abs().max(c.coefficients[0].abs()).max(c.coefficients[1].abs());
        (err, format!("coefficients {:?}, d1 {:.9}", c.coefficients, c.d1))
    });
    vec![
        Check::from_result(&format!("second-order crossing kappa={kappa}"), 1e-8, second),
        Check::from_result(&format!("third-order exponent kappa={kappa}"), 1e-3, third_exponent),
        Check::from_result(&format!("third-order d1 kappa={kappa}"), 1e-6, third_d1),
    ]
}

/// Reference values of the κ = 6 structure constants.
pub const KAPPA6_REFERENCE: [(&str, f64); 3] = [("C_112", 0.752361), ("C_222", 1.02993), ("C_224", 0.56785)];

/// κ = 6 structure constants: exact forms, the generic engine's limit, and
/// the Monte Carlo interval 1.030 ± 0.001 for C₂₂₂.
pub fn kappa6_constants() -> Vec<Check> {
    let exact = solutions::structure_constants_kappa6();
    let exact_vals = [exact.c112, exact.c222, exact.c224];
    let mut out: Vec<Check> = KAPPA6_REFERENCE
        .iter()
        .zip(exact_vals)
        .map(|(&(name, want), got)| {
            Check::measured(format!("kappa=6 exact {name}"), (got - want).abs(), 1e-5, format!("{got:.8} vs {want}"))
        })
        .collect();
    let limit = solutions::structure_constants(6.0);
    for (k, &(name, want)) in KAPPA6_REFERENCE.iter().enumerate() {
        let r = limit.clone().map(|s| {
            let got = [s.c112, s.c222, s.c224][k];
            ((got - want).abs(), format!("{got:.8} vs {want}"))
        });
        out.push(Check::from_result(&format!("kappa=6 limit {name}"), 1e-5, r));
    }
    out.push(Check::measured(
        "kappa=6 C_222 within 1.030 +- 0.001",
        (exact.c222 - 1.030).abs(),
        0.001,
        format!("{:.6}", exact.c222),
    ));
    out
}

/// Left passage: symmetry axis, boundary values and the κ = 4 reduction.
pub fn left_passage(kappa: f64) -> Vec<Check> {
    let axis = (|| {
        let mut worst = 0.0f64;
        for y in [1e-3, 0.5, 1.0, 7.0, 1e4] {
            worst = worst.max((densities::left_passage(C::new(0.0, y), kappa)? - 0.5).abs());
        }
        Ok((worst, "G(iy) - 1/2".to_string()))
    })();
    let limits = (|| {
        if kappa >= 8.0 {
            return Err(Error::Pole(format!("no boundary approach at kappa = {kappa} >= 8")));
        }
        let y: f64 = 1e-60;
        let tol = (10.0 * y.powf(8.0 / kappa - 1.0)).max(1e-14);
        let left = densities::left_passage(C::new(-1.0, y), kappa)?;
        let right = 1.0 - densities::left_passage(C::new(1.0, y), kappa)?;
        Ok((left.max(right) / tol, format!("at y = {y:e}, relative to {tol:e}")))
    })();
    let harmonic = (|| {
        let mut worst = 0.0f64;
        for k in 0..50 {
            let z = C::from_polar(0.3 + 0.1 * k as f64, PI * (k as f64 + 0.5) / 50.0);
            worst = worst.max((densities::left_passage(z, 4.0)? - (1.0 - z.arg() / PI)).abs());
        }
        Ok((worst, "kappa=4 against 1 - arg(z)/pi".to_string()))
    })();
    vec![
        Check::from_result(&format!("left passage on the axis kappa={kappa}"), 1e-15, axis),
        Check::from_result(&format!("left passage boundary values kappa={kappa}"), 1.0, limits),
        Check::from_result("left passage kappa=4 reduction", 1e-12, harmonic),
    ]
}

/// Scaling exponent of the Green's function.
pub fn greens_scaling(kappa: f64) -> Vec<Check> {
    let r = (|| {
        let z = C::new(0.3, 0.8);
        let (a, b) = (0.5f64, 3.0f64);
        let e = (densities::greens(z * b, kappa)? / densities::greens(z * a, kappa)?).ln() / (b / a).ln();
        let want = kappa / 8.0 - 1.0;
        Ok(((e - want).abs(), format!("fitted {e:.12}, expected {want:.12}")))
    })();
    vec![Check::from_result(&format!("greens scaling kappa={kappa}"), 1e-10, r)]
}

/// Value and derivative at r0 extrapolated from three points on one side.
fn one_sided(f: &dyn Fn(f64) -> Result<f64>, r0: f64, h: f64, dir: f64) -> Result<(f64, f64)> {
    let (f1, f2, f3) = (f(r0 + dir * h)?, f(r0 + 2.0 * dir * h)?, f(r0 + 3.0 * dir * h)?);
    Ok((3.0 * f1 - 3.0 * f2 + f3, dir * (-2.5 * f1 + 4.0 * f2 - 1.5 * f3) / h))
}

/// Reality of the lower-portion combination and its C¹ match across
/// |z| = L/2.
pub fn lower_portion(kappa: f64) -> Vec<Check> {
    let reality = densities::lower_sheet(kappa)
        .map(|s| (s.imag_residue.max(s.mismatch), format!("residue {:e}, mismatch {:e}", s.imag_residue, s.mismatch)));
    let smooth = (|| {
        let mut worst = 0.0f64;
        for alpha in [0.3, 0.9, 1.5, 2.4] {
            let dir = C::from_polar(1.0, alpha);
            let f = |r: f64| densities::lower_portion_shape(1.0, dir * r, kappa);
            let (vi, di) = one_sided(&f, 0.5, 1e-4, -1.0)?;
            let (vo, dout) = one_sided(&f, 0.5, 1e-4, 1.0)?;
            worst = worst.max((vi - vo).abs() / vo.abs()).max((di - dout).abs() / dout.abs().max(vo.abs()));
        }
        Ok((worst, "relative jump of value and radial derivative".to_string()))
    })();
    vec![
        Check::from_result(&format!("lower portion reality kappa={kappa}"), 1e-6, reality),
        Check::from_result(&format!("lower portion C1 kappa={kappa}"), 1e-5, smooth),
    ]
}

/// Every check at one κ, plus the κ-independent ones.
pub fn run(kappa: f64) -> Vec<Check> {
    let mut out = residuals(kappa);
    out.extend(geometry(10_000));
    out.extend(boundary_exponents(kappa));
    out.extend(crossing(kappa));
    out.extend(kappa6_constants());
    out.extend(left_passage(kappa));
    out.extend(greens_scaling(kappa));
    out.extend(lower_portion(kappa));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_are_skipped_not_failed() {
        let checks = crossing(6.0);
        assert_eq!(checks[0].status, Status::Pass, "{:?}", checks[0]);
        assert!(checks[1..].iter().all(|c| c.status == Status::Skipped));
    }

    #[test]
    fn measured_compares_against_tolerance() {
        assert!(Check::measured("a", 1.0, 2.0, "").passed());
        assert!(!Check::measured("a", f64::NAN, 2.0, "").passed());
        assert!(!Check::measured("a", 3.0, 2.0, "").passed());
    }
}
