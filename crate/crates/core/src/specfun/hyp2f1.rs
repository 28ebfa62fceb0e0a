use super::{digamma, gamma, near_integer, nonpositive_integer, recip_gamma, C};
use crate::error::{Error, Result};

/// Parameters (a, b; c) of ₂F₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub a: C,
    pub b: C,
    pub c: C,
}

impl HypParams {
    pub fn new(a: C, b: C, c: C) -> Self {
        HypParams { a, b, c }
    }

    pub fn real(a: f64, b: f64, c: f64) -> Self {
        HypParams::new(C::new(a, 0.0), C::new(b, 0.0), C::new(c, 0.0))
    }

    fn shifted(&self) -> Self {
        HypParams::new(self.a + 1.0, self.b + 1.0, self.c + 1.0)
    }
}

/// Which side of the cut [1, ∞) a real argument is approached from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

/// Radius of the disk where the Maclaurin series is summed directly.
const SAFE: f64 = 0.75;
/// c − a − b (or a − b) closer than this to an integer selects the log formulas.
const INT_TOL: f64 = 1e-9;
/// Between INT_TOL and this, the generic connection formulas cancel badly.
const NEAR_INT: f64 = 1e-3;
/// Snap tolerance for recognising terminating series and poles of c.
const SNAP: f64 = 1e-12;
const MAX_TERMS: usize = 20_000;

/// Principal-branch ₂F₁(a, b; c; z) for z off the cut [1, ∞).
pub fn hyp2f1(p: HypParams, z: C) -> Result<C> {
    hyp2f1_side(p, z, None)
}

/// ₂F₁ with an optional side for real z > 1.
pub fn hyp2f1_side(p: HypParams, z: C, side: Option<Side>) -> Result<C> {
    let poly = terminating_degree(&p);
    if let Some(pc) = nonpositive_integer(p.c, SNAP) {
        match poly {
            Some(m) if m <= -pc => {}
            _ => return Err(Error::Pole(format!("c = {pc} is a non-positive integer"))),
        }
    }
    if z == C::new(0.0, 0.0) {
        return Ok(C::new(1.0, 0.0));
    }
    if let Some(m) = poly {
        return Ok(poly_sum(&p, m, z));
    }
    if z.im == 0.0 && z.re >= 1.0 {
        if z.re == 1.0 {
            return gauss_sum(&p);
        }
        return match side {
            None => Err(Error::Cut(format!("z = {} lies on [1, inf)", z.re))),
            Some(s) => side_value(&p, z, s),
        };
    }
    off_cut(&p, z)
}

fn terminating_degree(p: &HypParams) -> Option<i64> {
    [p.a, p.b]
        .iter()
        .filter_map(|&x| nonpositive_integer(x, SNAP))
        .map(|n| -n)
        .min()
}

fn poly_sum(p: &HypParams, m: i64, z: C) -> C {
    // The terminating parameter is snapped to its exact integer value.
    let other = if nonpositive_integer(p.a, SNAP) == Some(-m) { p.b } else { p.a };
    let t = -(m as f64);
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..m {
        let nf = n as f64;
        term *= (t + nf) * (other + nf) / ((p.c + nf) * (nf + 1.0)) * z;
        sum += term;
    }
    sum
}

fn gauss_sum(p: &HypParams) -> Result<C> {
    let s = p.c - p.a - p.b;
    if s.re <= 0.0 {
        return Err(Error::Pole("z = 1 with Re(c - a - b) <= 0".into()));
    }
    Ok(gamma(p.c)? * gamma(s)? * recip_gamma(p.c - p.a) * recip_gamma(p.c - p.b))
}

/// Sum of the Maclaurin series; the caller guarantees |z| < 1.
fn maclaurin(p: &HypParams, z: C) -> Result<C> {
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (p.a + nf) * (p.b + nf) / ((p.c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == C::new(0.0, 0.0) {
            return Ok(sum);
        }
        if term.norm() <= 1e-16 * sum.norm() {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Accuracy(format!("2F1 series did not converge at z = {z}")))
}

/// Series in a small argument, honouring terminating parameters.
fn inner(p: &HypParams, w: C) -> Result<C> {
    match terminating_degree(p) {
        Some(m) => Ok(poly_sum(p, m, w)),
        None => maclaurin(p, w),
    }
}

#[derive(Debug, Clone, Copy)]
enum Route {
    Pfaff,
    OneMinus,
    Inverse,
    PfaffOneMinus,
    PfaffInverse,
}

fn off_cut(p: &HypParams, z: C) -> Result<C> {
    if z.norm() <= SAFE {
        return maclaurin(p, z);
    }
    let one = C::new(1.0, 0.0);
    let mut routes = [
        ((z / (z - one)).norm(), Route::Pfaff),
        ((one - z).norm(), Route::OneMinus),
        ((one / z).norm(), Route::Inverse),
        ((one / (one - z)).norm(), Route::PfaffOneMinus),
        (((z - one) / z).norm(), Route::PfaffInverse),
    ];
    routes.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (modulus, route) in routes {
        if modulus > SAFE {
            break;
        }
        match apply_route(p, z, route) {
            Ok(v) => return Ok(v),
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    continuation(p, z)
}

fn apply_route(p: &HypParams, z: C, route: Route) -> Result<C> {
    let one = C::new(1.0, 0.0);
    let pfaff = HypParams::new(p.a, p.c - p.b, p.c);
    let w = z / (z - one);
    let pre = (one - z).powc(-p.a);
    match route {
        Route::Pfaff => Ok(pre * inner(&pfaff, w)?),
        Route::OneMinus => one_minus(p, z),
        Route::Inverse => inverse(p, z),
        Route::PfaffOneMinus => Ok(pre * one_minus(&pfaff, w)?),
        Route::PfaffInverse => Ok(pre * inverse(&pfaff, w)?),
    }
}

/// Connection to the exponents at z = 1, including the integer c − a − b case.
fn one_minus(p: &HypParams, z: C) -> Result<C> {
    if let Some(m) = terminating_degree(p) {
        return Ok(poly_sum(p, m, z));
    }
    let one = C::new(1.0, 0.0);
    let s = p.c - p.a - p.b;
    let y = one - z;
    match near_integer(s, INT_TOL) {
        Some(m) if m < 0 => {
            // Euler transformation flips the sign of c − a − b.
            let e = HypParams::new(p.c - p.a, p.c - p.b, p.c);
            Ok(y.powc(s) * one_minus(&e, z)?)
        }
        Some(m) => one_minus_log(p, y, m as usize),
        None => {
            if near_integer(s, NEAR_INT).is_some() {
                return Err(Error::Degenerate("c - a - b close to an integer".into()));
            }
            let gc = gamma(p.c)?;
            let t1 = gc * gamma(s)? * recip_gamma(p.c - p.a) * recip_gamma(p.c - p.b)
                * inner(&HypParams::new(p.a, p.b, one - s), y)?;
            let t2 = y.powc(s) * gc * gamma(-s)? * recip_gamma(p.a) * recip_gamma(p.b)
                * inner(&HypParams::new(p.c - p.a, p.c - p.b, one + s), y)?;
            Ok(t1 + t2)
        }
    }
}

/// c = a + b + m with integer m ≥ 0; y = 1 − z.
fn one_minus_log(p: &HypParams, y: C, m: usize) -> Result<C> {
    let (a, b) = (p.a, p.b);
    let mf = m as f64;
    let ln_y = y.ln();
    let gab = gamma(a + b + mf)?;
    let mut finite = C::new(0.0, 0.0);
    if m > 0 {
        let mut term = C::new(1.0, 0.0);
        for n in 0..m {
            let nf = n as f64;
            finite += term;
            term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * y;
        }
        finite *= gamma(C::new(mf, 0.0))? * gab * recip_gamma(a + mf) * recip_gamma(b + mf);
    }
    // Digamma values are advanced by ψ(x + 1) = ψ(x) + 1/x.
    let mut psi_n1 = digamma(C::new(1.0, 0.0))?;
    let mut psi_nm1 = digamma(C::new(mf + 1.0, 0.0))?;
    let mut psi_a = digamma(a + mf)?;
    let mut psi_b = digamma(b + mf)?;
    // (a+m)_n (b+m)_n / (n! (n+m)!) y^n
    let mut coef = C::new(1.0, 0.0) / factorial(m);
    let mut sum = C::new(0.0, 0.0);
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let bracket = if m == 0 {
            2.0 * psi_n1 - psi_a - psi_b - ln_y
        } else {
            ln_y - psi_n1 - psi_nm1 + psi_a + psi_b
        };
        let term = coef * bracket;
        sum += term;
        if term.norm() <= 1e-16 * sum.norm() {
            small += 1;
            if small == 3 {
                let series = if m == 0 {
                    gab * recip_gamma(a) * recip_gamma(b) * sum
                } else {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    -gab * recip_gamma(a) * recip_gamma(b) * sign * y.powu(m as u32) * sum
                };
                return Ok(finite + series);
            }
        } else {
            small = 0;
        }
        coef *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * y;
        psi_n1 += 1.0 / (nf + 1.0);
        psi_nm1 += 1.0 / (nf + mf + 1.0);
        psi_a += 1.0 / (a + mf + nf);
        psi_b += 1.0 / (b + mf + nf);
    }
    Err(Error::Accuracy("logarithmic 2F1 series did not converge".into()))
}

fn factorial(m: usize) -> C {
    C::new((1..=m).map(|k| k as f64).product::<f64>(), 0.0)
}

/// Connection to the exponents at infinity; needs a − b off the integers.
fn inverse(p: &HypParams, z: C) -> Result<C> {
    if let Some(m) = terminating_degree(p) {
        return Ok(poly_sum(p, m, z));
    }
    let one = C::new(1.0, 0.0);
    let (a, b, c) = (p.a, p.b, p.c);
    if near_integer(a - b, NEAR_INT).is_some() {
        return Err(Error::Degenerate("a - b close to an integer".into()));
    }
    let w = one / z;
    let gc = gamma(c)?;
    let t1 = gc * gamma(b - a)? * recip_gamma(b) * recip_gamma(c - a)
        * (-z).powc(-a)
        * inner(&HypParams::new(a, a - c + one, a - b + one), w)?;
    let t2 = gc * gamma(a - b)? * recip_gamma(a) * recip_gamma(c - b)
        * (-z).powc(-b)
        * inner(&HypParams::new(b, b - c + one, b - a + one), w)?;
    Ok(t1 + t2)
}

/// Value and derivative near the origin, where the Maclaurin series is safe.
fn seed(p: &HypParams, z0: C) -> Result<(C, C)> {
    let f = maclaurin(p, z0)?;
    let d = p.a * p.b / p.c * inner(&p.shifted(), z0)?;
    Ok((f, d))
}

/// Analytic continuation by Taylor stepping of the hypergeometric equation.
fn continuation(p: &HypParams, z: C) -> Result<C> {
    let z0 = z * (0.5 / z.norm());
    let (mut f, mut d) = seed(p, z0)?;
    let one = C::new(1.0, 0.0);
    let mut path = vec![z0];
    if segment_distance(z0, z, one) < 0.3 {
        let s = if z.im < 0.0 { -1.0 } else { 1.0 };
        path.push(C::new(1.0, 0.5 * s));
    }
    path.push(z);
    for win in path.windows(2) {
        let (mut cur, target) = (win[0], win[1]);
        loop {
            let rem = target - cur;
            let len = rem.norm();
            if len == 0.0 {
                break;
            }
            let hmax = 0.5 * cur.norm().min((one - cur).norm());
            if hmax < 1e-14 {
                return Err(Error::StepUnderflow(format!("2F1 continuation near {cur}")));
            }
            let h = if len <= hmax { rem } else { rem * (hmax / len) };
            let (nf, nd) = taylor_step(p, cur, f, d, h)?;
            f = nf;
            d = nd;
            cur = if len <= hmax { target } else { cur + h };
        }
    }
    Ok(f)
}

fn segment_distance(a: C, b: C, p: C) -> f64 {
    let ab = b - a;
    let t = ((p - a) * ab.conj()).re / ab.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// One Taylor step of z(1−z)w'' + (c − (a+b+1)z)w' − ab w = 0 from z0 by h.
fn taylor_step(p: &HypParams, z0: C, f: C, d: C, h: C) -> Result<(C, C)> {
    let one = C::new(1.0, 0.0);
    let aa = z0 * (one - z0);
    let bb = one - 2.0 * z0;
    let cc = p.c - (p.a + p.b + one) * z0;
    let dd = -(p.a + p.b + one);
    let ab = p.a * p.b;
    let (mut w0, mut w1) = (f, d);
    let mut hp = C::new(1.0, 0.0);
    let mut val = w0 + w1 * h;
    let mut der = w1;
    let mut small = 0;
    for n in 0..2000usize {
        let nf = n as f64;
        let w2 = -((bb * nf + cc) * (nf + 1.0) * w1 + (dd * nf - nf * (nf - 1.0) - ab) * w0)
            / (aa * (nf + 1.0) * (nf + 2.0));
        // hp = h^(n+1) before update
        hp *= h;
        let tv = w2 * hp * h;
        let td = w2 * (nf + 2.0) * hp;
        val += tv;
        der += td;
        if tv.norm() <= 1e-17 * val.norm() && td.norm() <= 1e-17 * der.norm().max(val.norm()) {
            small += 1;
            if small == 3 {
                return Ok((val, der));
            }
        } else {
            small = 0;
        }
        w0 = w1;
        w1 = w2;
    }
    Err(Error::Accuracy("2F1 Taylor step did not converge".into()))
}

/// Boundary value on the cut, reached from the requested side.
fn side_value(p: &HypParams, z: C, side: Side) -> Result<C> {
    let delta = 0.5 * (z.re - 1.0);
    let s = match side {
        Side::Above => 1.0,
        Side::Below => -1.0,
    };
    let z0 = C::new(z.re, s * delta);
    let f = off_cut(p, z0)?;
    let d = p.a * p.b / p.c * off_cut(&p.shifted(), z0)?;
    let (v, _) = taylor_step(p, z0, f, d, z - z0)?;
    Ok(v)
}
