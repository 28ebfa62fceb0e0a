//! One line per acceptance criterion, with its tolerance and time budget.
//! Exits nonzero if any criterion fails.

use sle_densities::densities::{self, left_passage};
use sle_densities::lattice_mc::{self, McConfig};
use sle_densities::verify::{self, Check, Status};
use sle_densities::Complex64 as C;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    ok: bool,
    detail: String,
}

fn from_checks(checks: &[Check]) -> Outcome {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c.status != Status::Pass)
        .map(|c| format!("{} [{:?}: {} > {}; {}]", c.name, c.status, c.value, c.tolerance, c.detail))
        .collect();
    let worst = checks.iter().map(|c| c.value / c.tolerance).fold(0.0, f64::max);
    if failed.is_empty() {
        Outcome { ok: true, detail: format!("{} checks, worst at {:.2e} of tolerance", checks.len(), worst) }
    } else {
        Outcome { ok: false, detail: failed.join("; ") }
    }
}

fn criterion(name: &str, budget: Duration, failures: &mut Vec<String>, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let ok = out.ok && in_time;
    let timing = if in_time { String::new() } else { format!(" over budget {budget:?}") };
    println!("{} {name}: {} ({:.2?}{timing})", if ok { "PASS" } else { "FAIL" }, out.detail, elapsed);
    if !ok {
        failures.push(name.to_string());
    }
}

fn structure_constants() -> Outcome {
    let checks: Vec<Check> = verify::kappa6_constants().into_iter().filter(|c| !c.name.contains("+-")).collect();
    from_checks(&checks)
}

fn monte_carlo_interval() -> Outcome {
    from_checks(&verify::kappa6_constants().into_iter().filter(|c| c.name.contains("+-")).collect::<Vec<_>>())
}

fn residual_suite() -> Outcome {
    let mut checks = verify::residuals(5.3);
    checks.extend(verify::residuals(6.7));
    let all_members = checks.len() == 2 * 8;
    let mut out = from_checks(&checks);
    out.ok &= all_members;
    out
}

fn crossing() -> Outcome {
    from_checks(&verify::crossing(5.3))
}

fn geometry() -> Outcome {
    from_checks(&verify::geometry(10_000))
}

fn boundary_exponents() -> Outcome {
    let mut checks = verify::boundary_exponents(6.0);
    checks.extend(verify::boundary_exponents(5.3));
    from_checks(&checks)
}

fn greens() -> Outcome {
    let mut checks = Vec::new();
    for kappa in [2.0, 4.0, 6.0, 7.5] {
        checks.extend(verify::greens_scaling(kappa));
    }
    let g = |z: C| densities::greens(z, 6.0).unwrap().ln();
    // Im z alone at fixed |z|, then |z| along a ray
    let (a, b) = (C::from_polar(1.0, 0.3), C::from_polar(1.0, 1.2));
    let e_im = (g(b) - g(a)) / (b.im / a.im).ln();
    let w = C::from_polar(1.0, PI / 4.0);
    let e_total = (g(w * 4.0) - g(w * 0.25)) / 16f64.ln();
    let pair = (e_im - 1.0 / 12.0).abs().max((e_total - e_im - (-1.0 / 3.0)).abs());
    let mut out = from_checks(&checks);
    out.ok &= pair < 1e-10;
    out.detail.push_str(&format!("; kappa=6 pair ({e_im:.12}, {:.12})", e_total - e_im));
    out
}

fn left_passage_limits() -> Outcome {
    let mut checks = Vec::new();
    for kappa in [2.0, 8.0 / 3.0, 4.0, 6.0, 7.0] {
        checks.extend(verify::left_passage(kappa));
    }
    let exact = [1e-3, 1.0, 1e3]
        .iter()
        .flat_map(|&y| [2.0, 6.0, 7.0].map(|k| left_passage(C::new(0.0, y), k).unwrap()))
        .all(|v| v == 0.5);
    let mut out = from_checks(&checks);
    out.ok &= exact;
    out.detail.push_str(if exact { "; G(iy) == 1/2 exactly" } else { "; G(iy) != 1/2" });
    out
}

fn mc_connectivity() -> Outcome {
    let l = 64.0;
    let config = McConfig::new(512, 256, (-0.5 * l, 0.5 * l), 20_240_601, 100_000);
    let mut probes = Vec::new();
    for y in [0.2, 0.4, 0.6, 0.8, 1.0] {
        for x in [-0.8, -0.4, 0.0, 0.4, 0.8] {
            probes.push(C::new(x * l, y * l));
        }
    }
    let est = match lattice_mc::sample_connectivity(&config, &probes) {
        Ok(e) => e,
        Err(e) => return Outcome { ok: false, detail: e.to_string() },
    };
    let formula: Vec<f64> =
        probes.iter().map(|&z| densities::density(densities::DensityKind::Rho110, l, z, 6.0).unwrap()).collect();
    match lattice_mc::fit_shape(&est, &formula) {
        Ok((c, rms)) => Outcome {
            ok: rms <= 0.05,
            detail: format!("rms relative error {:.4} (<= 0.05), constant {c:.5}, box 512x256, 1e5 samples", rms),
        },
        Err(e) => Outcome { ok: false, detail: e.to_string() },
    }
}

fn mc_left_passage() -> Outcome {
    let config = McConfig::new(512, 300, (0.0, 0.0), 20_240_602, 100_000);
    let r = config.exploration_radius() / 8.0;
    let probes: Vec<C> = [0.25, 0.5, 0.75].iter().map(|t| C::from_polar(r, t * PI)).collect();
    let est = match lattice_mc::trace_interface_lpp(&config, &probes) {
        Ok(e) => e,
        Err(e) => return Outcome { ok: false, detail: e.to_string() },
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for ((z, m), s) in probes.iter().zip(&est.means).zip(&est.std_errors) {
        let g = left_passage(*z, 6.0).unwrap();
        let dev = (m - g).abs();
        ok &= dev <= 0.02 * g && dev <= 3.0 * s && 3.0 * s <= 0.02 * g;
        parts.push(format!("arg {:.3}: {m:.4} +- {s:.4} vs {g:.4} ({:+.2}%)", z.arg(), 100.0 * (m - g) / g));
    }
    Outcome { ok, detail: format!("{}; |z| = {r:.2}, 1e5 traces", parts.join(", ")) }
}

fn union_find() -> Outcome {
    let config = McConfig::new(16, 16, (-3.0, 3.0), 11, 100);
    let same = (0..100).all(|idx| {
        let occ = lattice_mc::sample_configuration(&config, idx);
        lattice_mc::wired_connectivity(&config, &occ) == lattice_mc::wired_connectivity_bfs(&config, &occ)
    });
    Outcome { ok: same, detail: "100 random 16x16 configurations".into() }
}

fn lower_portion() -> Outcome {
    let mut checks = verify::lower_portion(8.0 / 3.0);
    checks.extend(verify::lower_portion(6.0));
    from_checks(&checks)
}

fn main() {
    let mut failures = Vec::new();
    let s = Duration::from_secs;
    criterion("structure constants at kappa = 6, exact and limit, 1e-5", s(1), &mut failures, structure_constants);
    criterion("C_222(6) inside 1.030 +- 0.001", s(1), &mut failures, monte_carlo_interval);
    criterion("ODE residuals < 1e-7, 25 points, kappa 5.3 and 6.7", s(30), &mut failures, residual_suite);
    criterion("crossing: second order 1e-8, third order exponent 1e-3 and d1 1e-6", s(60), &mut failures, crossing);
    criterion("geometry invariants to 1e-13 over 1e4 points", s(1), &mut failures, geometry);
    criterion("boundary exponent fits to 1e-3", s(10), &mut failures, boundary_exponents);
    criterion("Green's function scaling to 1e-10", s(1), &mut failures, greens);
    criterion("left passage: axis, boundary values, kappa = 4 to 1e-12", s(1), &mut failures, left_passage_limits);
    criterion("MC connectivity shape, rms <= 5%", s(600), &mut failures, mc_connectivity);
    criterion("MC left passage within 2%, 3 sigma", s(600), &mut failures, mc_left_passage);
    criterion("union-find equals BFS", s(1), &mut failures, union_find);
    criterion("lower portion reality 1e-6 and C1 1e-5, kappa 8/3 and 6", s(10), &mut failures, lower_portion);
    if !failures.is_empty() {
        println!("{} of 12 criteria failed", failures.len());
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
