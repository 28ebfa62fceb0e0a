//! Half-plane geometry, the anchored-cluster densities, the left-passage
//! probability and the SLE Green's function.
//!
//! Anchors sit at x₁ = −L/2 and x₂ = L/2. Every density has the form
//! C / (L^{2Δ_b} (2 Im z)^{2Δ_O}) · |block(ξ)|.

use crate::error::{Error, Result};
use crate::params::kac;
use crate::solutions::{self, gform_modulus};
use crate::specfun::{hyp2f1, recip_gamma, HypParams, Side, C};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Rho110,
    Rho112,
    Rho220,
    Rho222Lower,
    Rho224,
}

impl DensityKind {
    pub const ALL: [DensityKind; 5] =
        [DensityKind::Rho110, DensityKind::Rho112, DensityKind::Rho220, DensityKind::Rho222Lower, DensityKind::Rho224];

    pub fn name(self) -> &'static str {
        match self {
            DensityKind::Rho110 => "rho110",
            DensityKind::Rho112 => "rho112",
            DensityKind::Rho220 => "rho220",
            DensityKind::Rho222Lower => "rho222_lower",
            DensityKind::Rho224 => "rho224",
        }
    }

    /// (Δ_boundary, Δ_O).
    pub fn dimensions(self, kappa: f64) -> (f64, f64) {
        let d21 = kac(2.0, 1.0, kappa);
        let d31 = kac(3.0, 1.0, kappa);
        let sigma = kac(0.0, 0.5, kappa);
        let d10 = kac(1.0, 0.0, kappa);
        match self {
            DensityKind::Rho110 => (d21, sigma),
            DensityKind::Rho112 => (d21, d10),
            DensityKind::Rho220 => (d31, sigma),
            DensityKind::Rho222Lower => (d31, d10),
            DensityKind::Rho224 => (d31, kac(2.0, 0.0, kappa)),
        }
    }

    /// How the overall constant is fixed.
    pub fn normalization(self) -> &'static str {
        match self {
            DensityKind::Rho110 => "C_110 = 1, unit two-point coefficient",
            DensityKind::Rho112 => "C_112 from the crossing combination",
            DensityKind::Rho220 => "C_222",
            DensityKind::Rho222Lower => "C_222 with unit boundary OPE coefficient of the h1 channel",
            DensityKind::Rho224 => "C_224 = sqrt(d1)",
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DensityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DensityKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown density kind '{s}'")))
    }
}

fn check_point(l: f64, z: C) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Domain(format!("L must be positive, got {l}")));
    }
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("z = {z} is not in the open upper half-plane")));
    }
    Ok(())
}

/// ξ = (x₁ − x₂)(z − z̄)/((x₁ − z)(x₂ − z̄)).
pub fn cross_ratio(l: f64, z: C) -> Result<C> {
    check_point(l, z)?;
    let d = (-0.5 * l - z) * (0.5 * l - z.conj());
    Ok(-l * C::new(0.0, 2.0 * z.im) / d)
}

fn kappa_ok(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("kappa must be positive, got {kappa}")))
    }
}

/// Density of `kind` at z for anchors ±L/2.
pub fn density(kind: DensityKind, l: f64, z: C, kappa: f64) -> Result<f64> {
    kappa_ok(kappa)?;
    check_point(l, z)?;
    let ctx = Context::new(kind, kappa)?;
    ctx.eval(l, z)
}

/// Per-κ data shared by every point of a grid.
struct Context {
    kind: DensityKind,
    kappa: f64,
    constant: f64,
    sheet: Option<LowerSheet>,
}

impl Context {
    fn new(kind: DensityKind, kappa: f64) -> Result<Self> {
        let (constant, sheet) = match kind {
            DensityKind::Rho110 => (1.0, None),
            DensityKind::Rho112 => (solutions::c112(kappa)?, None),
            DensityKind::Rho220 => (solutions::c222(kappa)?, None),
            DensityKind::Rho224 => (solutions::c224(kappa)?, None),
            DensityKind::Rho222Lower => {
                let sheet = lower_sheet(kappa)?;
                (solutions::c222(kappa)? / sheet.c1.norm(), Some(sheet))
            }
        };
        Ok(Context { kind, kappa, constant, sheet })
    }

    fn eval(&self, l: f64, z: C) -> Result<f64> {
        check_point(l, z)?;
        let kappa = self.kappa;
        let (db, d_o) = self.kind.dimensions(kappa);
        let pref = self.constant / (l.powf(2.0 * db) * (2.0 * z.im).powf(2.0 * d_o));
        let xi = cross_ratio(l, z)?;
        let d31 = kac(3.0, 1.0, kappa);
        let block = match self.kind {
            DensityKind::Rho110 => spin_physical(l, z, xi)?.powf(d31 / 2.0),
            DensityKind::Rho112 | DensityKind::Rho220 => gform_modulus(xi, d31),
            DensityKind::Rho224 => gform_modulus(xi, kac(5.0, 1.0, kappa)),
            DensityKind::Rho222Lower => {
                let sheet = self.sheet.as_ref().expect("lower sheet is set for rho222_lower");
                sheet.eval(l, z, xi, kappa)?
            }
        };
        Ok(pref * block)
    }
}

/// 1 + cos(θ/2) on the physical sheet, where 1 − ξ = e^{iθ}; the sign of
/// the square root flips across |z| = L/2.
fn spin_physical(l: f64, z: C, xi: C) -> Result<f64> {
    let inside = z.norm_sqr() < 0.25 * l * l;
    let one = C::new(1.0, 0.0);
    let w = if (xi - 2.0).norm() == 0.0 { C::new(0.0, 0.0) } else { (2.0 - xi) / (2.0 * (one - xi).sqrt()) };
    let v = if inside {
        1.0 + w
    } else if w.norm() == 0.0 {
        one
    } else {
        // 1 − w = −ξ²/(4(1 − ξ))/(1 + w)
        -(xi * xi) / (4.0 * (one - xi)) / (1.0 + w)
    };
    Ok(v.norm())
}

/// Sheet choice making the lower-portion combination real and continuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerSheet {
    /// Factors applied to the closed-form c₁, c₂.
    pub s1: C,
    pub s2: C,
    /// Effective constants s₁c₁, s₂c₂.
    pub c1: C,
    pub c2: C,
    /// Constant phase of h₂ on the outer part of the physical locus.
    pub phase: f64,
    pub imag_residue: f64,
    pub mismatch: f64,
}

const REALITY_TOL: f64 = 1e-6;

/// Searches factors i^m·e^{2πinΔ₍3,1₎} (m = 0..3, n = −1..1) on the closed-form
/// c₁, c₂ for the choice making c₁h₁ + c₂h₂ a constant phase times a real
/// function inside |z| < L/2 and continuous with h₂ outside.
pub fn lower_sheet(kappa: f64) -> Result<LowerSheet> {
    let (c1p, c2p) = solutions::lower_constants(kappa)?;
    let d31 = kac(3.0, 1.0, kappa);
    let locus = |theta: f64| 1.0 - C::from_polar(1.0, theta);
    let outer = solutions::pair(locus(2.0), kappa, None)?[1];
    let phase = outer.arg();
    let rot = C::from_polar(1.0, -phase);
    let inner: Vec<Vec<C>> =
        [-0.3, -1.0, -2.0, -2.8].iter().map(|&t| solutions::pair(locus(t), kappa, None)).collect::<Result<_>>()?;
    let up = solutions::pair(C::new(2.0, 0.0), kappa, Some(Side::Above))?;
    let down = solutions::pair(C::new(2.0, 0.0), kappa, Some(Side::Below))?[1];

    let mut factors = Vec::new();
    for n in -1..=1 {
        for m in 0..4 {
            factors.push(C::new(0.0, 1.0).powi(m) * C::from_polar(1.0, 2.0 * PI * n as f64 * d31));
        }
    }
    let mut best: Option<LowerSheet> = None;
    for &s1 in &factors {
        for &s2 in &factors {
            let (c1, c2) = (s1 * c1p, s2 * c2p);
            let imag_residue = inner
                .iter()
                .map(|h| {
                    let v = (c1 * h[0] + c2 * h[1]) * rot;
                    v.im.abs() / v.norm()
                })
                .fold(0.0, f64::max);
            let mismatch = (c1 * up[0] + c2 * up[1] - down).norm() / down.norm();
            let cand = LowerSheet { s1, s2, c1, c2, phase, imag_residue, mismatch };
            let score = |s: &LowerSheet| s.imag_residue + s.mismatch;
            if best.as_ref().map_or(true, |b| score(&cand) < score(b)) {
                best = Some(cand);
            }
        }
    }
    let best = best.expect("non-empty sheet set");
    if best.imag_residue > REALITY_TOL || best.mismatch > REALITY_TOL {
        return Err(Error::Reality(format!(
            "no sheet makes the lower portion real at kappa = {kappa} (residue {:e}, mismatch {:e})",
            best.imag_residue, best.mismatch
        )));
    }
    Ok(best)
}

impl LowerSheet {
    /// Real value of the combination at ξ, checked for reality.
    fn raw(&self, l: f64, z: C, xi: C, kappa: f64) -> Result<f64> {
        let inside = z.norm_sqr() < 0.25 * l * l;
        let side = if inside { Side::Above } else { Side::Below };
        let real_cut = xi.im == 0.0 && xi.re > 1.0;
        let h = solutions::pair(xi, kappa, real_cut.then_some(side))?;
        let v = if inside { self.c1 * h[0] + self.c2 * h[1] } else { h[1] } * C::from_polar(1.0, -self.phase);
        if v.norm() > 0.0 && v.im.abs() > REALITY_TOL * v.norm() {
            return Err(Error::Reality(format!("lower portion has imaginary residue {:e} at z = {z}", v.im.abs() / v.norm())));
        }
        Ok(v.re)
    }

    fn eval(&self, l: f64, z: C, xi: C, kappa: f64) -> Result<f64> {
        Ok(self.raw(l, z, xi, kappa)?.abs())
    }
}

/// Lower-portion density without its overall constant:
/// (2 Im z)^{−2Δ₍1,0₎} L^{−2Δ₍3,1₎} times the real combination, sign kept.
pub fn lower_portion_shape(l: f64, z: C, kappa: f64) -> Result<f64> {
    kappa_ok(kappa)?;
    let sheet = lower_sheet(kappa)?;
    lower_shape_with(&sheet, l, z, kappa)
}

fn lower_shape_with(sheet: &LowerSheet, l: f64, z: C, kappa: f64) -> Result<f64> {
    let xi = cross_ratio(l, z)?;
    let (db, d_o) = DensityKind::Rho222Lower.dimensions(kappa);
    Ok(sheet.raw(l, z, xi, kappa)? / (l.powf(2.0 * db) * (2.0 * z.im).powf(2.0 * d_o)))
}

/// Batch version of [`lower_portion_shape`] sharing one sheet search.
pub fn lower_portion_shapes(l: f64, zs: &[C], kappa: f64) -> Result<Vec<f64>> {
    kappa_ok(kappa)?;
    let sheet = lower_sheet(kappa)?;
    zs.iter().map(|&z| lower_shape_with(&sheet, l, z, kappa)).collect()
}

/// Probability that the chordal SLE_κ from 0 to ∞ passes to the left of z.
pub fn left_passage(z: C, kappa: f64) -> Result<f64> {
    kappa_ok(kappa)?;
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("z = {z} is not in the open upper half-plane")));
    }
    let b = 4.0 / kappa;
    let k = recip_gamma(C::new(b - 0.5, 0.0)).re / (recip_gamma(C::new(b, 0.0)).re * PI.sqrt());
    if k == 0.0 {
        return Ok(0.5);
    }
    // u = i(ξ − 2)/ξ with ξ = 2i Im z / z
    let u = -z.re / z.im;
    let f = hyp2f1(HypParams::real(0.5, b, 1.5), C::new(-u * u, 0.0))?;
    Ok((0.5 - k * u * f.re).clamp(0.0, 1.0))
}

/// Chordal SLE_κ Green's function, normalised to 1 at z = i.
pub fn greens(z: C, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 8.0) {
        return Err(Error::Domain(format!("Green's function needs 0 < kappa < 8, got {kappa}")));
    }
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("z = {z} is not in the open upper half-plane")));
    }
    Ok(z.im.powf((kappa - 8.0).powi(2) / (8.0 * kappa)) * z.norm().powf(1.0 - 8.0 / kappa))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Region {
    /// Cell-centre abscissae and ordinates of an nx × ny sampling.
    pub fn axes(&self, nx: usize, ny: usize) -> (Vec<f64>, Vec<f64>) {
        let centres = |a: f64, b: f64, n: usize| (0..n).map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64).collect();
        (centres(self.xmin, self.xmax, nx), centres(self.ymin, self.ymax, ny))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub kind: DensityKind,
    pub kappa: f64,
    pub l: f64,
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major, rows of constant y: values[j * nx + i] at (xs[i], ys[j]).
    pub values: Vec<f64>,
    /// Points whose evaluation failed; they hold NaN.
    pub error_count: usize,
}

/// Samples a density at cell centres of `region`. Rows are evaluated in
/// parallel; the output does not depend on the worker count.
pub fn grid_eval(kind: DensityKind, kappa: f64, l: f64, region: Region, nx: usize, ny: usize) -> Result<DensityGrid> {
    kappa_ok(kappa)?;
    if nx == 0 || ny == 0 {
        return Err(Error::Invalid("grid needs at least one point per axis".into()));
    }
    if !(region.ymin >= 0.0 && region.ymax > region.ymin && region.xmax > region.xmin) {
        return Err(Error::Domain(format!("region {region:?} is not inside the upper half-plane")));
    }
    let ctx = Context::new(kind, kappa)?;
    let (xs, ys) = region.axes(nx, ny);
    let rows: Vec<Vec<f64>> = ys
        .par_iter()
        .map(|&y| xs.iter().map(|&x| ctx.eval(l, C::new(x, y)).unwrap_or(f64::NAN)).collect())
        .collect();
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let error_count = values.iter().filter(|v| !v.is_finite()).count();
    Ok(DensityGrid { kind, kappa, l, region, nx, ny, xs, ys, values, error_count })
}
