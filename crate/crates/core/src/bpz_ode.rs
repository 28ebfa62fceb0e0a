//! Independent ODE engine for the second- and third-order BPZ equations in
//! the cross-ratio ξ.
//!
//! Both equations are multiplied through to polynomial coefficients
//! Σ_k P_k(ξ) f⁽ᵏ⁾ = 0. One local-series recursion serves the Frobenius
//! expansions at ξ = 0, 1 and the Taylor steps of the path integrator.

use crate::error::{Error, Result};
use crate::params::kac;
use crate::specfun::C;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Second,
    Third,
}

impl Order {
    pub fn degree(self) -> usize {
        match self {
            Order::Second => 2,
            Order::Third => 3,
        }
    }
}

/// Regular singular points where Frobenius expansions are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Point {
    Zero,
    One,
}

impl Point {
    fn location(self) -> f64 {
        match self {
            Point::Zero => 0.0,
            Point::One => 1.0,
        }
    }

    /// Sign s in ξ = point + s·t; the local variable at 1 is t = 1 − ξ.
    fn sign(self) -> f64 {
        match self {
            Point::Zero => 1.0,
            Point::One => -1.0,
        }
    }
}

/// One BPZ equation instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpzSpec {
    pub order: Order,
    pub delta_o: f64,
    pub beta_sq: f64,
}

pub fn build_spec(order: Order, delta_o: f64, kappa: f64) -> Result<BpzSpec> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    Ok(BpzSpec { order, delta_o, beta_sq: 4.0 / kappa })
}

type Poly = Vec<C>;

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

fn poly_mul(a: &[C], b: &[C]) -> Poly {
    let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// q(t) = p(center + scale·t).
fn compose(p: &[C], center: C, scale: C) -> Poly {
    let lin = [center, scale];
    let mut out = vec![C::new(0.0, 0.0)];
    for &c in p.iter().rev() {
        out = poly_mul(&out, &lin);
        out[0] += c;
    }
    out
}

fn poly_eval(p: &[C], x: C) -> C {
    p.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Falling factorial x(x−1)…(x−k+1).
fn falling(x: C, k: usize) -> C {
    (0..k).fold(C::new(1.0, 0.0), |acc, i| acc * (x - i as f64))
}

impl BpzSpec {
    pub fn kappa(&self) -> f64 {
        4.0 / self.beta_sq
    }

    pub fn delta_21(&self) -> f64 {
        kac(2.0, 1.0, self.kappa())
    }

    pub fn delta_31(&self) -> f64 {
        kac(3.0, 1.0, self.kappa())
    }

    /// Coefficients of the equation, lowest derivative first:
    /// [Q, P, 1] for f'' + P f' + Q f = 0, and [δ, γ, β, α] for the third order.
    pub fn coefficients(&self, xi: C) -> Result<Vec<C>> {
        if xi == re(0.0) || xi == re(1.0) {
            return Err(Error::Singular(format!("coefficients at xi = {xi}")));
        }
        let one = re(1.0);
        let d_o = self.delta_o;
        Ok(match self.order {
            Order::Second => {
                let d21 = self.delta_21();
                let p = (2.0 + 4.0 * d21 * (xi - 2.0) - 4.0 * xi) / (3.0 * xi * (one - xi));
                let q = -(4.0 * d21 + 2.0) * d_o / (3.0 * (one - xi) * (one - xi));
                vec![q, p, one]
            }
            Order::Third => {
                let d = self.delta_31();
                let alpha = xi * xi * (xi - 1.0) * (xi - 1.0);
                let beta = 2.0 * xi * (xi - 1.0) * (2.0 * xi - 1.0 - d * (xi - 2.0));
                let gamma = 3.0 * d * (d - 1.0) - (3.0 * d - 1.0) * (d - 2.0) * xi
                    + ((d - 1.0) * (d - 2.0) - 2.0 * d_o * (d + 1.0)) * xi * xi;
                let delta = 2.0 * d_o * d * (d + 1.0) * xi * (xi - 2.0) / (xi - 1.0);
                vec![delta, gamma, beta, alpha]
            }
        })
    }

    /// Polynomial coefficients P_k as products of factors, so that shifting
    /// to a singular point produces exact zeros.
    fn factors(&self) -> Vec<Vec<Poly>> {
        let x = vec![re(0.0), re(1.0)];
        let one_minus = vec![re(1.0), re(-1.0)];
        let minus_one = vec![re(-1.0), re(1.0)];
        let d_o = self.delta_o;
        match self.order {
            Order::Second => {
                let d21 = self.delta_21();
                vec![
                    vec![vec![re(-(4.0 * d21 + 2.0) * d_o)], x.clone()],
                    vec![one_minus.clone(), vec![re(2.0 - 8.0 * d21), re(4.0 * d21 - 4.0)]],
                    vec![vec![re(3.0)], x, one_minus.clone(), one_minus],
                ]
            }
            Order::Third => {
                let d = self.delta_31();
                let gamma = vec![
                    re(3.0 * d * (d - 1.0)),
                    re(-(3.0 * d - 1.0) * (d - 2.0)),
                    re((d - 1.0) * (d - 2.0) - 2.0 * d_o * (d + 1.0)),
                ];
                vec![
                    vec![vec![re(2.0 * d_o * d * (d + 1.0))], x.clone(), vec![re(-2.0), re(1.0)]],
                    vec![gamma, minus_one.clone()],
                    vec![
                        vec![re(2.0)],
                        x.clone(),
                        minus_one.clone(),
                        minus_one.clone(),
                        vec![re(2.0 * d - 1.0), re(2.0 - d)],
                    ],
                    vec![x.clone(), x, minus_one.clone(), minus_one.clone(), minus_one],
                ]
            }
        }
    }

    /// The equation in the local variable t with ξ = center + scale·t.
    fn local(&self, center: C, scale: C) -> LocalOde {
        let polys: Vec<Poly> = self
            .factors()
            .iter()
            .enumerate()
            .map(|(k, fs)| {
                let mut p = vec![re(1.0)];
                for f in fs {
                    p = poly_mul(&p, &compose(f, center, scale));
                }
                // d/dξ = scale⁻¹ d/dt
                let s = scale.powi(-(k as i32));
                p.iter().map(|c| c * s).collect()
            })
            .collect();
        LocalOde::new(polys)
    }
}

/// Σ_k p_k(t) dᵏf/dtᵏ = 0 around t = 0.
#[derive(Debug, Clone)]
struct LocalOde {
    p: Vec<Poly>,
    smin: i64,
    max_shift: usize,
}

impl LocalOde {
    fn new(p: Vec<Poly>) -> Self {
        let mut smin = i64::MAX;
        let mut smax = i64::MIN;
        for (k, pk) in p.iter().enumerate() {
            for (j, c) in pk.iter().enumerate() {
                if *c != re(0.0) {
                    smin = smin.min(j as i64 - k as i64);
                    smax = smax.max(j as i64 - k as i64);
                }
            }
        }
        LocalOde { p, smin, max_shift: (smax - smin) as usize }
    }

    fn order(&self) -> usize {
        self.p.len() - 1
    }

    /// Coefficient multiplying a_m in the equation for t^(m + r + smin + shift).
    fn ind(&self, x: C, shift: usize) -> C {
        let mut acc = re(0.0);
        for (k, pk) in self.p.iter().enumerate() {
            let j = k as i64 + self.smin + shift as i64;
            if j >= 0 && (j as usize) < pk.len() && pk[j as usize] != re(0.0) {
                acc += pk[j as usize] * falling(x, k);
            }
        }
        acc
    }

    /// Indicial polynomial I(x) = ind(x, 0) as coefficients in x.
    fn indicial_poly(&self) -> Poly {
        let mut out = vec![re(0.0); self.order() + 1];
        for (k, pk) in self.p.iter().enumerate() {
            let j = k as i64 + self.smin;
            if j < 0 || j as usize >= pk.len() {
                continue;
            }
            // falling factorial x(x−1)…(x−k+1) as a polynomial
            let mut ff = vec![re(1.0)];
            for i in 0..k {
                ff = poly_mul(&ff, &[re(-(i as f64)), re(1.0)]);
            }
            for (i, c) in ff.iter().enumerate() {
                out[i] += pk[j as usize] * c;
            }
        }
        out
    }

    /// Next series coefficient a_N, N = a.len(), for exponent r.
    fn next(&self, r: C, a: &[C]) -> Result<C> {
        let n = a.len();
        let lo = n.saturating_sub(self.max_shift);
        let mut s = re(0.0);
        for (m, am) in a.iter().enumerate().skip(lo) {
            s += self.ind(re(m as f64) + r, n - m) * am;
        }
        let d = self.ind(re(n as f64) + r, 0);
        if d.norm() < 1e-300 {
            return Err(Error::Resonance(format!("indicial polynomial vanishes at shift {n}")));
        }
        Ok(-s / d)
    }
}

/// Roots of a small polynomial (ascending coefficients) by Durand–Kerner.
fn poly_roots(p: &[C]) -> Vec<C> {
    let mut p: Vec<C> = p.to_vec();
    while p.len() > 1 && p.last().map_or(false, |c| c.norm() == 0.0) {
        p.pop();
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let lead = p[deg];
    let monic: Vec<C> = p.iter().map(|c| c / lead).collect();
    let mut z: Vec<C> = (0..deg).map(|k| C::new(0.4, 0.9).powu(k as u32)).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut den = re(1.0);
            for j in 0..deg {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = poly_eval(&monic, z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-16 {
            break;
        }
    }
    // Newton polish on the original polynomial.
    let dp: Poly = p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = poly_eval(&dp, *zi);
            if d.norm() > 0.0 {
                *zi -= poly_eval(&p, *zi) / d;
            }
        }
    }
    z
}

/// Indicial exponents at ξ = 0 or ξ = 1, sorted, computed from the
/// coefficient polynomials.
pub fn indicial(spec: &BpzSpec, point: Point) -> Vec<f64> {
    let local = spec.local(re(point.location()), re(point.sign()));
    let mut roots: Vec<f64> = poly_roots(&local.indicial_poly()).iter().map(|z| z.re).collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Frobenius solution (ξ − point)^exponent · Σ a_n t^n with a_0 = 1, where
/// t = ξ at 0 and t = 1 − ξ at 1.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub point: Point,
    pub exponent: f64,
    pub coefficients: Vec<C>,
    /// Guaranteed-accuracy radius in t.
    pub radius: f64,
    /// Estimated truncation error at the edge of the radius, relative to a_0.
    pub tail_bound: f64,
}

pub const FROBENIUS_RADIUS: f64 = 0.5;

pub fn frobenius(spec: &BpzSpec, point: Point, exponent: f64, n_terms: usize) -> Result<SeriesSolution> {
    let local = spec.local(re(point.location()), re(point.sign()));
    let roots = poly_roots(&local.indicial_poly());
    let root = roots
        .iter()
        .min_by(|a, b| (*a - exponent).norm().total_cmp(&(*b - exponent).norm()))
        .copied()
        .ok_or_else(|| Error::Invalid("empty indicial polynomial".into()))?;
    if (root - exponent).norm() > 1e-8 * (1.0 + exponent.abs()) {
        return Err(Error::Invalid(format!("{exponent} is not an indicial exponent (roots {roots:?})")));
    }
    for (i, ri) in roots.iter().enumerate() {
        for rj in roots.iter().skip(i + 1) {
            let d = (ri - rj).re;
            if (d - d.round()).abs() < 1e-9 && (ri - rj).im.abs() < 1e-9 {
                return Err(Error::Resonance(format!(
                    "indicial exponents {} and {} differ by an integer",
                    ri.re, rj.re
                )));
            }
        }
    }
    let r = re(exponent);
    let mut a = vec![re(1.0)];
    while a.len() < n_terms.max(2) {
        let next = local.next(r, &a)?;
        a.push(next);
    }
    let n = a.len();
    let edge = FROBENIUS_RADIUS;
    let tail_bound = 2.0 * a[n - 1].norm().max(a[n - 2].norm() * edge) * edge.powi(n as i32 - 1);
    Ok(SeriesSolution { point, exponent, coefficients: a, radius: edge, tail_bound })
}

impl SeriesSolution {
    fn local_variable(&self, xi: C) -> Result<C> {
        let t = (xi - self.point.location()) * self.point.sign();
        if t.norm() > self.radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "xi = {xi} outside the Frobenius radius {} around {}",
                self.radius,
                self.point.location()
            )));
        }
        Ok(t)
    }

    pub fn eval(&self, xi: C) -> Result<C> {
        Ok(self.eval_derivs(xi, 1)?[0])
    }

    /// f, df/dξ, …, up to `count` entries.
    pub fn eval_derivs(&self, xi: C, count: usize) -> Result<Vec<C>> {
        let t = self.local_variable(xi)?;
        let s = self.point.sign();
        let r = re(self.exponent);
        if t == re(0.0) {
            let mut out = vec![re(0.0); count];
            if self.exponent == 0.0 {
                out[0] = self.coefficients[0];
                for (j, o) in out.iter_mut().enumerate().skip(1) {
                    if j < self.coefficients.len() {
                        let fact: f64 = (1..=j).map(|i| i as f64).product();
                        *o = self.coefficients[j] * fact * s.powi(j as i32);
                    }
                }
            } else if self.exponent < 0.0 {
                return Err(Error::Singular("negative exponent at its expansion point".into()));
            }
            return Ok(out);
        }
        let tr = t.powc(r);
        let mut out = vec![re(0.0); count];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = re(0.0);
            let mut tp = t.powi(-(j as i32));
            for (n, an) in self.coefficients.iter().enumerate() {
                acc += an * falling(re(n as f64) + r, j) * tp;
                tp *= t;
            }
            *o = acc * tr * s.powi(j as i32);
        }
        Ok(out)
    }
}

/// Values (f, f', …) at every vertex of an integration path.
#[derive(Debug, Clone)]
pub struct Transport {
    pub values: Vec<Vec<C>>,
    /// Accumulated relative truncation estimate.
    pub error_estimate: f64,
}

const MIN_CLEARANCE: f64 = 1e-3;

fn distance_to_singular(z: C) -> f64 {
    z.norm().min((z - 1.0).norm())
}

fn segment_clearance(a: C, b: C) -> f64 {
    let ab = b - a;
    [re(0.0), re(1.0)]
        .iter()
        .map(|&p| {
            let t = if ab.norm_sqr() == 0.0 { 0.0 } else { (((p - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0) };
            (a + ab * t - p).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Transports initial data (f, f', …) at `path[0]` along the polyline by
/// adaptive Taylor-series stepping.
pub fn integrate(spec: &BpzSpec, initial: &[C], path: &[C]) -> Result<Transport> {
    let order = spec.order.degree();
    if initial.len() != order {
        return Err(Error::Invalid(format!("need {order} initial values, got {}", initial.len())));
    }
    if path.is_empty() {
        return Err(Error::Invalid("empty path".into()));
    }
    for w in path.windows(2) {
        if segment_clearance(w[0], w[1]) < MIN_CLEARANCE {
            return Err(Error::Domain(format!("path segment {} -> {} passes a singular point", w[0], w[1])));
        }
    }
    if distance_to_singular(path[0]) < MIN_CLEARANCE {
        return Err(Error::Domain("path starts at a singular point".into()));
    }
    let mut state = initial.to_vec();
    let mut values = vec![state.clone()];
    let mut err = 0.0;
    for w in path.windows(2) {
        let (mut cur, target) = (w[0], w[1]);
        let mut h_limit = f64::INFINITY;
        while cur != target {
            let rem = target - cur;
            let hmax = (0.5 * distance_to_singular(cur)).min(h_limit);
            let len = rem.norm();
            let h = if len <= hmax { rem } else { rem * (hmax / len) };
            if h.norm() < 1e-12 {
                return Err(Error::StepUnderflow(format!("at xi = {cur}")));
            }
            match taylor_step(spec, cur, &state, h) {
                Ok((next, e)) => {
                    state = next;
                    err += e;
                    cur = if h == rem { target } else { cur + h };
                    h_limit = f64::INFINITY;
                }
                Err(Error::Accuracy(_)) => h_limit = 0.5 * h.norm(),
                Err(e) => return Err(e),
            }
        }
        values.push(state.clone());
    }
    Ok(Transport { values, error_estimate: err })
}

fn taylor_step(spec: &BpzSpec, center: C, state: &[C], h: C) -> Result<(Vec<C>, f64)> {
    let order = state.len();
    let local = spec.local(center, re(1.0));
    let mut a: Vec<C> = Vec::with_capacity(128);
    let mut fact = 1.0;
    for (j, v) in state.iter().enumerate() {
        if j > 0 {
            fact *= j as f64;
        }
        a.push(v / fact);
    }
    let mut out = vec![re(0.0); order];
    // contributions of the initial coefficients
    for (n, an) in a.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate().take(n + 1) {
            *o += an * falling(re(n as f64), j) * h.powi((n - j) as i32);
        }
    }
    let mut small = 0;
    while a.len() < 400 {
        let next = local.next(re(0.0), &a)?;
        a.push(next);
        let n = a.len() - 1;
        let mut biggest = 0.0f64;
        for (j, o) in out.iter_mut().enumerate() {
            let term = next * falling(re(n as f64), j) * h.powi((n - j) as i32);
            *o += term;
            biggest = biggest.max(term.norm() / o.norm().max(1e-300));
        }
        if biggest < 1e-17 {
            small += 1;
            if small == 3 {
                return Ok((out, biggest));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Accuracy("Taylor step did not converge".into()))
}

const STENCIL_POINTS: usize = 24;

fn stencil_derivatives<F: Fn(C) -> Result<C>>(f: &F, xi: C, rho: f64, count: usize) -> Result<Vec<C>> {
    let m = STENCIL_POINTS;
    let mut d = vec![re(0.0); count];
    for j in 0..m {
        let w = C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
        let v = f(xi + w * rho)?;
        let mut wk = re(1.0);
        let winv = w.conj();
        for dk in d.iter_mut() {
            *dk += v * wk;
            wk *= winv;
        }
    }
    let mut fact = 1.0;
    for (k, dk) in d.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *dk *= fact / (m as f64 * rho.powi(k as i32));
    }
    Ok(d)
}

/// |L[f](ξ)| normalised by the largest of its terms. Derivatives come from
/// interpolation on a circle of points around ξ; a mismatch between two
/// radii, or between the circle mean and f(ξ), flags a branch cut.
pub fn residual<F: Fn(C) -> Result<C>>(spec: &BpzSpec, f: F, xi: C) -> Result<f64> {
    let dist = distance_to_singular(xi);
    if dist < 1e-2 {
        return Err(Error::Singular(format!("residual too close to a singular point at {xi}")));
    }
    let coef = spec.coefficients(xi)?;
    let n = coef.len();
    let rho = (5e-3f64).min(0.1 * dist);
    let wide = stencil_derivatives(&f, xi, rho, n)?;
    let narrow = stencil_derivatives(&f, xi, 0.5 * rho, n)?;
    let centre = f(xi)?;
    let terms: Vec<C> = coef.iter().zip(&wide).map(|(c, d)| c * d).collect();
    // rounding floor of the stencil derivatives
    let fmax = wide[0].norm().max(centre.norm());
    let mut fact = 1.0;
    let mut floor = 0.0;
    for (k, c) in coef.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        floor += c.norm() * fact * fmax * 1e-10 / (0.5 * rho).powi(k as i32);
    }
    let scale = terms.iter().map(|t| t.norm()).fold(floor, f64::max);
    let mismatch = coef
        .iter()
        .zip(wide.iter().zip(&narrow))
        .map(|(c, (a, b))| (c * (a - b)).norm())
        .fold(0.0, f64::max);
    if mismatch > 1e-6 * scale || (wide[0] - centre).norm() > 1e-8 * centre.norm().max(1e-300) {
        return Err(Error::Cut(format!("stencil around {xi} straddles a branch cut")));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(terms.iter().sum::<C>().norm() / scale)
}
