//! Closed-form solution blocks in the cross-ratio, crossing matrices,
//! crossing coefficients and boundary structure constants.

use crate::bpz_ode::{self, BpzSpec, Order, Point};
use crate::error::{Error, Result};
use crate::params::kac;
use crate::specfun::{cospi, hyp2f1, hyp2f1_side, recip_gamma, sinpi, HypParams, Side, C};
use serde::Serialize;
use std::f64::consts::PI;

/// Solution families with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Spin2nd,
    Chordal2nd,
    Lpp2nd,
    Pair3rd,
    Pivotal3rd,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Spin2nd, Family::Chordal2nd, Family::Lpp2nd, Family::Pair3rd, Family::Pivotal3rd];

    /// The BPZ equation each family solves.
    pub fn equation(self, kappa: f64) -> Result<BpzSpec> {
        let (order, delta_o) = match self {
            Family::Spin2nd => (Order::Second, kac(0.0, 0.5, kappa)),
            Family::Chordal2nd => (Order::Second, kac(1.0, 0.0, kappa)),
            Family::Lpp2nd => (Order::Second, 0.0),
            Family::Pair3rd => (Order::Third, kac(1.0, 0.0, kappa)),
            Family::Pivotal3rd => (Order::Third, kac(2.0, 0.0, kappa)),
        };
        bpz_ode::build_spec(order, delta_o, kappa)
    }
}

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

fn on_negative_axis(w: C) -> bool {
    w.re < 0.0 && w.im.abs() <= 1e-14 * w.re.abs()
}

fn principal_pow(base: C, p: f64, what: &str) -> Result<C> {
    if on_negative_axis(base) {
        return Err(Error::Cut(format!("{what}: base {base} on the negative real axis")));
    }
    if base == re(0.0) {
        return if p > 0.0 {
            Ok(re(0.0))
        } else if p == 0.0 {
            Ok(re(1.0))
        } else {
            Err(Error::Singular(format!("{what}: zero base with exponent {p}")))
        };
    }
    Ok(base.powf(p))
}

fn real_cut(xi: C) -> bool {
    xi.im == 0.0 && xi.re > 1.0
}

/// (2 − ξ)/(2√(1 − ξ)) on the principal sheet.
fn spin_w(xi: C) -> Result<C> {
    if xi.im == 0.0 && xi.re == 2.0 {
        return Ok(re(0.0));
    }
    if real_cut(xi) {
        return Err(Error::Cut(format!("spin block at real xi = {} > 1", xi.re)));
    }
    if xi == re(1.0) {
        return Err(Error::Singular("spin block at xi = 1".into()));
    }
    Ok((2.0 - xi) / (2.0 * (1.0 - xi).sqrt()))
}

/// Closed-form solutions of `family` at ξ, principal branches throughout.
///
/// spin2nd → (g₁, g₂); chordal2nd → (G); lpp2nd → (1, u·₂F₁(1/2, 4/κ; 3/2; −u²));
/// pair3rd → (h₁, h₂); pivotal3rd → (H).
pub fn block(family: Family, xi: C, kappa: f64) -> Result<Vec<C>> {
    if family == Family::Pair3rd {
        check_kappa(kappa)?;
        return pair(xi, kappa, None);
    }
    (0..family.width()).map(|i| block_component(family, i, xi, kappa)).collect()
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("kappa must be positive, got {kappa}")))
    }
}

impl Family {
    /// Number of closed forms returned by [`block`].
    pub fn width(self) -> usize {
        match self {
            Family::Spin2nd | Family::Lpp2nd | Family::Pair3rd => 2,
            Family::Chordal2nd | Family::Pivotal3rd => 1,
        }
    }
}

/// One member of [`block`]; only that member's cuts apply.
pub fn block_component(family: Family, index: usize, xi: C, kappa: f64) -> Result<C> {
    check_kappa(kappa)?;
    if index >= family.width() {
        return Err(Error::Invalid(format!("{family:?} has {} members", family.width())));
    }
    let d31 = kac(3.0, 1.0, kappa);
    let d51 = kac(5.0, 1.0, kappa);
    match (family, index) {
        (Family::Spin2nd, _) => {
            let w = spin_w(xi)?;
            let plus = 1.0 + w;
            if index == 0 {
                return principal_pow(plus, d31 / 2.0, "g1");
            }
            // 1 − w = (1 − w²)/(1 + w) with 1 − w² = −ξ²/(4(1 − ξ)), free of cancellation
            let minus = if w == re(0.0) { re(1.0) } else { -(xi * xi) / (4.0 * (1.0 - xi)) / plus };
            principal_pow(minus, d31 / 2.0, "g2")
        }
        (Family::Chordal2nd, _) => gform(xi, d31),
        (Family::Pivotal3rd, _) => gform(xi, d51),
        (Family::Lpp2nd, 0) => Ok(re(1.0)),
        (Family::Lpp2nd, _) => {
            if xi == re(0.0) {
                return Err(Error::Singular("lpp block at xi = 0".into()));
            }
            let u = C::new(0.0, 1.0) * (xi - 2.0) / xi;
            let f = hyp2f1(HypParams::real(0.5, 4.0 / kappa, 1.5), -u * u)?;
            Ok(u * f)
        }
        (Family::Pair3rd, i) => Ok(pair(xi, kappa, None)?[i]),
    }
}

/// (ξ²/(1 − ξ))^{Δ/2}.
fn gform(xi: C, delta: f64) -> Result<C> {
    if xi == re(1.0) {
        return Err(Error::Singular("block at xi = 1".into()));
    }
    principal_pow(xi * xi / (1.0 - xi), delta / 2.0, "G")
}

/// (h₁, h₂) with an optional side of the hypergeometric cut for real ξ > 1.
pub fn pair(xi: C, kappa: f64, side: Option<Side>) -> Result<Vec<C>> {
    if xi == re(0.0) || xi == re(1.0) {
        return Err(Error::Singular(format!("pair block at xi = {xi}")));
    }
    let d31 = kac(3.0, 1.0, kappa);
    let d51 = kac(5.0, 1.0, kappa);
    let e = 8.0 / kappa;
    let f1 = hyp2f1_side(HypParams::real(1.0 - e, 1.0 - e, 2.0 - 2.0 * e), xi, side)?;
    let f2 = hyp2f1_side(HypParams::real(e, e, 2.0 * e), xi, side)?;
    let h1 = principal_pow(xi / (xi - 1.0), d31, "h1")? * f1;
    let h2 = principal_pow(xi, d51, "h2")? * principal_pow(xi - 1.0, 1.0 - e, "h2")? * f2;
    Ok(vec![h1, h2])
}

/// |(ξ²/(1 − ξ))^{Δ/2}|, independent of the branch.
pub fn gform_modulus(xi: C, delta: f64) -> f64 {
    (xi.norm_sqr() / (1.0 - xi).norm()).powf(delta / 2.0)
}

/// Tracks the distance of every singular factor from its nearest pole so
/// that removable singularities can be evaluated as limits.
struct Factors {
    gap: f64,
}

impl Factors {
    fn new() -> Self {
        Factors { gap: f64::INFINITY }
    }

    fn gamma(&mut self, x: f64) -> f64 {
        let n = x.round();
        if n <= 0.0 {
            self.gap = self.gap.min((x - n).abs());
        }
        1.0 / recip_gamma(re(x)).re
    }

    fn rgamma(&mut self, x: f64) -> f64 {
        recip_gamma(re(x)).re
    }

    /// csc(πx)
    fn cscpi(&mut self, x: f64) -> f64 {
        self.gap = self.gap.min((x - x.round()).abs());
        1.0 / sinpi(re(x)).re
    }

    /// sec(πx)
    fn secpi(&mut self, x: f64) -> f64 {
        let y = x - 0.5;
        self.gap = self.gap.min((y - y.round()).abs());
        1.0 / cospi(re(x)).re
    }
}

const POLE_GAP: f64 = 1e-7;
const LIMIT_EPS: f64 = 1e-6;

/// Evaluates f at κ, or as the symmetric limit κ(1 ± ε) with one Richardson
/// step when a factor sits on a pole. Non-cancelling poles are errors.
fn removable<F: Fn(f64, &mut Factors) -> f64>(kappa: f64, what: &str, f: F) -> Result<f64> {
    let mut fac = Factors::new();
    let direct = f(kappa, &mut fac);
    if fac.gap > POLE_GAP && direct.is_finite() {
        return Ok(direct);
    }
    let sym = |eps: f64| -> Result<f64> {
        let up = f(kappa * (1.0 + eps), &mut Factors::new());
        let dn = f(kappa * (1.0 - eps), &mut Factors::new());
        let avg = 0.5 * (up + dn);
        if !avg.is_finite() || (up - dn).abs() > 1e-3 * avg.abs().max(1e-300) {
            return Err(Error::Pole(format!("{what} has a pole at kappa = {kappa}")));
        }
        Ok(avg)
    };
    let a = sym(LIMIT_EPS)?;
    let b = sym(0.5 * LIMIT_EPS)?;
    Ok((4.0 * b - a) / 3.0)
}

fn radical(sq: f64, what: &str) -> Result<f64> {
    if sq >= 0.0 {
        Ok(sq.sqrt())
    } else if sq > -1e-12 {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand(format!("{what}² = {sq}")))
    }
}

/// Second-order crossing matrix for Δ_O = Δ₍2,1₎.
pub fn crossing_f(kappa: f64) -> Result<[[f64; 2]; 2]> {
    let b = 4.0 / kappa;
    let c = cospi(re(b)).re;
    if c.abs() < 1e-12 {
        return Err(Error::Pole(format!("sec(pi beta^2) diverges at kappa = {kappa}")));
    }
    let g = |x: f64| -> Result<f64> {
        let r = recip_gamma(re(x)).re;
        if r == 0.0 {
            Err(Error::Pole(format!("gamma({x}) in the crossing matrix")))
        } else {
            Ok(1.0 / r)
        }
    };
    let rg = |x: f64| recip_gamma(re(x)).re;
    let f11 = -0.5 / c;
    let f22 = 0.5 / c;
    let f12 = g(1.0 - 2.0 * b)? * g(2.0 - 2.0 * b)? * rg(2.0 - 3.0 * b) * rg(1.0 - b);
    let f21 = g(2.0 * b)? * g(2.0 * b - 1.0)? * rg(b) * rg(3.0 * b - 1.0);
    Ok([[f11, f12], [f21, f22]])
}

/// F₁₂ − F₁₁F₂₂/F₂₁, the square of C₁,₁;₂.
pub fn crossing_combination(kappa: f64) -> Result<f64> {
    let f = crossing_f(kappa)?;
    if f[1][0] == 0.0 {
        return Err(Error::Pole(format!("F21 vanishes at kappa = {kappa}")));
    }
    Ok(f[0][1] - f[0][0] * f[1][1] / f[1][0])
}

fn c112_sq(k: f64, f: &mut Factors) -> f64 {
    PI * (f.cscpi(4.0 / k) + f.cscpi(12.0 / k)) * f.gamma(1.0 - 8.0 / k) * f.gamma(2.0 - 8.0 / k)
        * f.rgamma(2.0 - 12.0 / k)
        * f.rgamma(1.0 - 4.0 / k).powi(2)
        * f.rgamma(4.0 / k)
}

/// c₂ in closed form; C₂,₂;₂² = −c₂.
fn c2_raw(k: f64, f: &mut Factors) -> f64 {
    PI * (f.cscpi(8.0 / k) + f.cscpi(16.0 / k)) * f.secpi(8.0 / k) * f.gamma(2.0 - 8.0 / k) * f.gamma(4.0 / k)
        * f.gamma((k - 8.0) / k)
        * f.gamma(2.0 * (k - 6.0) / k)
        * f.rgamma(8.0 / k).powi(2)
        * f.rgamma(2.0 * (k - 8.0) / k).powi(2)
        * f.rgamma((k - 4.0) / k).powi(2)
        / 2.0
}

fn c3_raw(k: f64, f: &mut Factors) -> f64 {
    -(k - 8.0) * f.secpi(8.0 / k) * f.gamma(20.0 / k - 1.0) * f.gamma(2.0 * (k - 6.0) / k)
        * f.rgamma(12.0 / k)
        * f.rgamma((k - 4.0) / k)
        / (2.0 * (k - 16.0))
}

fn d1_raw(k: f64, f: &mut Factors) -> f64 {
    let c8 = cospi(re(8.0 / k)).re;
    let c16 = cospi(re(16.0 / k)).re;
    let den = 2.0 * c8 + 2.0 * c16 + 1.0;
    f.gap = f.gap.min(den.abs());
    (k - 8.0) * (2.0 * c8 + 1.0).powi(2) * f.gamma((k - 12.0) / k) * f.gamma(2.0 * (k - 6.0) / k)
        * f.rgamma(2.0 - 20.0 / k)
        * f.rgamma((k - 4.0) / k)
        / ((k - 16.0) * den)
}

/// C₁,₁;₂.
pub fn c112(kappa: f64) -> Result<f64> {
    radical(removable(kappa, "C112^2", c112_sq)?, "C112")
}

/// C₂,₂;₂.
pub fn c222(kappa: f64) -> Result<f64> {
    radical(-removable(kappa, "c2", c2_raw)?, "C222")
}

/// C₂,₂;₄ = √d₁.
pub fn c224(kappa: f64) -> Result<f64> {
    radical(removable(kappa, "d1", d1_raw)?, "C224")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureConstants {
    pub kappa: f64,
    #[serde(rename = "C_110")]
    pub c110: f64,
    #[serde(rename = "C_112")]
    pub c112: f64,
    #[serde(rename = "C_222")]
    pub c222: f64,
    #[serde(rename = "C_224")]
    pub c224: f64,
}

pub fn structure_constants(kappa: f64) -> Result<StructureConstants> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    Ok(StructureConstants { kappa, c110: 1.0, c112: c112(kappa)?, c222: c222(kappa)?, c224: c224(kappa)? })
}

/// Exact specialisations at κ = 6 (percolation).
pub fn structure_constants_kappa6() -> StructureConstants {
    let g = |x: f64| 1.0 / recip_gamma(re(x)).re;
    let c112 = (-g(-1.0 / 3.0)).sqrt() / g(1.0 / 3.0);
    let c222 = (-96.0 * PI.powf(3.5) / (g(-2.0 / 3.0) * g(1.0 / 6.0).powi(3) * g(1.0 / 3.0).powi(2))).sqrt();
    let c224 = 2f64.powf(1.5) * 3f64.powf(-1.25) * (PI / 5.0).sqrt();
    StructureConstants { kappa: 6.0, c110: 1.0, c112, c222, c224 }
}

/// Third-order crossing coefficients and the lower-portion constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThirdOrderCrossing {
    pub c2: f64,
    /// None where the closed form has a pole (κ = 6).
    pub c3: Option<f64>,
    pub d1: f64,
    pub lower_c1: C,
    pub lower_c2: C,
}

pub fn third_order_crossing(kappa: f64) -> Result<ThirdOrderCrossing> {
    let c8 = cospi(re(8.0 / kappa)).re;
    if c8.abs() < 1e-8 {
        return Err(Error::Pole(format!("cos(8 pi / kappa) vanishes at kappa = {kappa}")));
    }
    let c2 = removable(kappa, "c2", c2_raw)?;
    let c3 = match removable(kappa, "c3", c3_raw) {
        Ok(v) => Some(v),
        Err(Error::Pole(_)) => None,
        Err(e) => return Err(e),
    };
    let d1 = removable(kappa, "d1", d1_raw)?;
    let (lower_c1, lower_c2) = lower_constants(kappa)?;
    Ok(ThirdOrderCrossing { c2, c3, d1, lower_c1, lower_c2 })
}

/// Lower-portion constants c₁, c₂ in closed form, before the sheet choice.
pub fn lower_constants(kappa: f64) -> Result<(C, C)> {
    let k = kappa;
    let c8 = cospi(re(8.0 / k)).re;
    if c8.abs() < 1e-8 {
        return Err(Error::Pole(format!("cos(8 pi / kappa) vanishes at kappa = {kappa}")));
    }
    let rg8 = recip_gamma(re(8.0 / k)).re;
    let g16 = 1.0 / recip_gamma(re(16.0 / k)).re;
    let phase1 = C::new(cospi(re(-16.0 / k)).re, sinpi(re(-16.0 / k)).re);
    let phase2 = C::new(cospi(re(-24.0 / k)).re, sinpi(re(-24.0 / k)).re);
    let c1 = phase1 * (2.0 * PI * k / (k - 16.0)) * g16 * g16 * rg8.powi(4);
    Ok((c1, phase2 / c8))
}

/// Result of the second-order transport check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingCheck {
    pub ratio: f64,
    pub max_deviation: f64,
    pub expected: f64,
}

const FROBENIUS_TERMS: usize = 400;

/// Builds g₁⁽⁰⁾ − (F₁₁/F₂₁)g₂⁽⁰⁾ from Frobenius series at 0 of the Δ_O = Δ₍2,1₎
/// equation, transports it towards ξ = 1 and compares it with the
/// Frobenius-at-1 solution of exponent 2/κ at `n_points` points in [0.55, 0.95].
pub fn second_order_crossing_check(kappa: f64, n_points: usize) -> Result<CrossingCheck> {
    let spec = bpz_ode::build_spec(Order::Second, kac(2.0, 1.0, kappa), kappa)?;
    let d31 = kac(3.0, 1.0, kappa);
    let f = crossing_f(kappa)?;
    let g1 = bpz_ode::frobenius(&spec, Point::Zero, 0.0, FROBENIUS_TERMS)?;
    let g2 = bpz_ode::frobenius(&spec, Point::Zero, d31, FROBENIUS_TERMS)?;
    let at1 = bpz_ode::frobenius(&spec, Point::One, 2.0 / kappa, FROBENIUS_TERMS)?;
    let x0 = re(0.4);
    let a = g1.eval_derivs(x0, 2)?;
    let b = g2.eval_derivs(x0, 2)?;
    let w = f[0][0] / f[1][0];
    let init: Vec<C> = a.iter().zip(&b).map(|(p, q)| p - w * q).collect();
    let n = n_points.max(2);
    let mut path = vec![x0];
    path.extend((0..n).map(|i| re(0.55 + 0.4 * i as f64 / (n - 1) as f64)));
    let tr = bpz_ode::integrate(&spec, &init, &path)?;
    let ratios: Vec<f64> = tr.values[1..]
        .iter()
        .zip(&path[1..])
        .map(|(v, &x)| Ok((v[0] / at1.eval(x)?).re))
        .collect::<Result<_>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_deviation = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max) / mean.abs();
    Ok(CrossingCheck { ratio: mean, max_deviation, expected: crossing_combination(kappa)? })
}

/// Result of the third-order transport check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThirdOrderCheck {
    /// Coefficients of H on the Frobenius-at-1 basis, ordered by exponent.
    pub coefficients: [f64; 3],
    pub d1: f64,
    /// Fitted power of (1 − ξ)^{2Δ₍3,1₎}·H as ξ → 1.
    pub exponent: f64,
    pub expected_exponent: f64,
}

fn solve3(m: [[C; 3]; 3], v: [C; 3]) -> Result<[C; 3]> {
    let det = |m: &[[C; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.norm() == 0.0 {
        return Err(Error::Singular("singular 3x3 system".into()));
    }
    let mut out = [re(0.0); 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut mj = m;
        for i in 0..3 {
            mj[i][j] = v[i];
        }
        *o = det(&mj) / d;
    }
    Ok(out)
}

/// Forms H = h₁ + c₂h₂ + c₃h₃ from Frobenius series at 0 of the Δ_O = Δ₍3,1₎
/// third-order equation, decomposes it on the Frobenius basis at 1 and
/// fits its leading power on ξ = 1 − 10⁻²…1 − 10⁻³ after transport.
pub fn third_order_crossing_check(kappa: f64) -> Result<ThirdOrderCheck> {
    let d31 = kac(3.0, 1.0, kappa);
    let d51 = kac(5.0, 1.0, kappa);
    let spec = bpz_ode::build_spec(Order::Third, d31, kappa)?;
    let cr = third_order_crossing(kappa)?;
    let c3 = cr.c3.ok_or_else(|| Error::Pole(format!("c3 diverges at kappa = {kappa}")))?;
    let at0: Vec<_> = [0.0, d31, d51]
        .iter()
        .map(|&r| bpz_ode::frobenius(&spec, Point::Zero, r, FROBENIUS_TERMS))
        .collect::<Result<_>>()?;
    let exps1 = [-2.0 * d31, -d31, d51 - 2.0 * d31];
    let at1: Vec<_> = exps1
        .iter()
        .map(|&r| bpz_ode::frobenius(&spec, Point::One, r, FROBENIUS_TERMS))
        .collect::<Result<_>>()?;
    let weights = [1.0, cr.c2, c3];
    let x0 = re(0.5);
    let mut h = [re(0.0); 3];
    for (s, wt) in at0.iter().zip(weights) {
        for (hj, v) in h.iter_mut().zip(s.eval_derivs(x0, 3)?) {
            *hj += wt * v;
        }
    }
    let mut m = [[re(0.0); 3]; 3];
    for (j, s) in at1.iter().enumerate() {
        for (i, v) in s.eval_derivs(x0, 3)?.into_iter().enumerate() {
            m[i][j] = v;
        }
    }
    let coef = solve3(m, h)?;

    let ts: Vec<f64> = (0..=20).map(|i| 10f64.powf(-2.0 - i as f64 / 20.0)).collect();
    let mut path = vec![x0];
    path.extend(ts.iter().map(|t| re(1.0 - t)));
    let tr = bpz_ode::integrate(&spec, &h, &path)?;
    // ln|t^{2Δ₍3,1₎}H| = a + e·ln t + b·t
    let rows: Vec<[f64; 3]> = ts.iter().map(|&t| [1.0, t.ln(), t]).collect();
    let ys: Vec<f64> =
        tr.values[1..].iter().zip(&ts).map(|(v, &t)| (v[0].norm() * t.powf(2.0 * d31)).ln()).collect();
    let fit = least_squares3(&rows, &ys)?;
    Ok(ThirdOrderCheck {
        coefficients: [coef[0].re, coef[1].re, coef[2].re],
        d1: cr.d1,
        exponent: fit[1],
        expected_exponent: d51,
    })
}

fn least_squares3(rows: &[[f64; 3]], ys: &[f64]) -> Result<[f64; 3]> {
    let mut a = [[re(0.0); 3]; 3];
    let mut b = [re(0.0); 3];
    for (r, y) in rows.iter().zip(ys) {
        for i in 0..3 {
            b[i] += r[i] * y;
            for j in 0..3 {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    let x = solve3(a, b)?;
    Ok([x[0].re, x[1].re, x[2].re])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_at_two() {
        let g = block(Family::Spin2nd, re(2.0), 6.0).unwrap();
        assert!((g[0] - 1.0).norm() < 1e-15);
        assert!(matches!(block(Family::Spin2nd, re(3.0), 6.0), Err(Error::Cut(_))));
    }

    #[test]
    fn crossing_f_at_six() {
        let f = crossing_f(6.0).unwrap();
        assert!((f[0][0] - 1.0).abs() < 1e-13);
        assert!((f[1][1] + 1.0).abs() < 1e-13);
        assert_eq!(f[0][1], 0.0);
        assert!(matches!(crossing_f(8.0), Err(Error::Pole(_))));
    }

    #[test]
    fn lower_c2_at_six() {
        let (_, c2) = lower_constants(6.0).unwrap();
        assert!((c2 - re(-2.0)).norm() < 1e-13);
    }

    #[test]
    fn kappa6_constants() {
        let exact = structure_constants_kappa6();
        assert!((exact.c112 - 0.752_361).abs() < 1e-6);
        assert!((exact.c222 - 1.029_93).abs() < 1e-5);
        assert!((exact.c224 - 0.567_85).abs() < 1e-5);
        let lim = structure_constants(6.0).unwrap();
        for (a, b) in [(exact.c112, lim.c112), (exact.c222, lim.c222), (exact.c224, lim.c224)] {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn c222_pole_at_saw() {
        assert!(matches!(c222(8.0 / 3.0), Err(Error::Pole(_)) | Err(Error::NegativeRadicand(_))));
        assert!(matches!(c222(2.5), Err(Error::NegativeRadicand(_))));
    }

    #[test]
    fn c3_diverges_at_six() {
        assert_eq!(third_order_crossing(6.0).unwrap().c3, None);
    }
}
