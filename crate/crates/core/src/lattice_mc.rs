//! Critical site percolation on the triangular lattice: connectivity to a
//! wired boundary interval and exploration-path left passage.
//!
//! Sites sit in offset rows: site (i, j) is at
//! x = (i − W/2 + (j mod 2)/2)·a, y = (j + 1/2)(√3/2)·a, so the real axis
//! runs between row 0 and the virtual boundary row −1.

use crate::error::{Error, Result};
use crate::specfun::C;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;
/// Probes keep this many sites from the left, right and top edges.
const EDGE_MARGIN: i64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub box_width: usize,
    pub box_height: usize,
    /// Lattice unit in continuum coordinates.
    pub spacing: f64,
    /// Boundary segment [a, b] of row 0 forced occupied.
    pub wired_interval: (f64, f64),
    pub p: f64,
    pub seed: u64,
    pub n_samples: usize,
}

impl McConfig {
    pub fn new(box_width: usize, box_height: usize, wired_interval: (f64, f64), seed: u64, n_samples: usize) -> Self {
        McConfig { box_width, box_height, spacing: 1.0, wired_interval, p: 0.5, seed, n_samples }
    }

    fn validate(&self) -> Result<()> {
        if self.box_width < 2 || self.box_height < 2 {
            return Err(Error::Invalid(format!("box {}x{} is too small", self.box_width, self.box_height)));
        }
        if self.p != 0.5 {
            return Err(Error::Invalid(format!("site percolation is critical at p = 1/2, got {}", self.p)));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::Invalid("spacing must be positive".into()));
        }
        let half = 0.5 * self.box_width as f64 * self.spacing;
        let (a, b) = self.wired_interval;
        if !(a <= b && a >= -half && b <= half) {
            return Err(Error::Invalid(format!("wired interval [{a}, {b}] is not inside the box")));
        }
        if self.n_samples == 0 {
            return Err(Error::Invalid("need at least one sample".into()));
        }
        Ok(())
    }

    pub fn site_position(&self, i: usize, j: usize) -> (f64, f64) {
        let x = (i as f64 - 0.5 * self.box_width as f64 + 0.5 * (j & 1) as f64) * self.spacing;
        (x, (j as f64 + 0.5) * SQRT3_2 * self.spacing)
    }

    /// Radius of the largest half-disk about the origin that fits in the box
    /// with one site to spare.
    pub fn exploration_radius(&self) -> f64 {
        let half = 0.5 * self.box_width as f64 * self.spacing;
        let top = self.box_height as f64 * SQRT3_2 * self.spacing;
        half.min(top) - 2.0 * self.spacing
    }

    /// Nearest site to z, or a probe-outside error.
    pub fn nearest_site(&self, z: C) -> Result<(usize, usize)> {
        let (w, h) = (self.box_width as i64, self.box_height as i64);
        let jc = (z.im / (SQRT3_2 * self.spacing) - 0.5).round() as i64;
        let mut best: Option<(f64, i64, i64)> = None;
        for j in jc - 1..=jc + 1 {
            let ic = (z.re / self.spacing + 0.5 * w as f64 - 0.5 * (j & 1) as f64).round() as i64;
            for i in ic - 1..=ic + 1 {
                let x = (i as f64 - 0.5 * w as f64 + 0.5 * (j & 1) as f64) * self.spacing;
                let y = (j as f64 + 0.5) * SQRT3_2 * self.spacing;
                let d = (x - z.re).powi(2) + (y - z.im).powi(2);
                if best.map_or(true, |b| d < b.0) {
                    best = Some((d, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("candidate sites");
        if z.im <= 0.0 || j < 0 || i < EDGE_MARGIN || i >= w - EDGE_MARGIN || j >= h - EDGE_MARGIN {
            return Err(Error::ProbeOutside(format!("probe {z} is outside the box or within {EDGE_MARGIN} sites of an edge")));
        }
        Ok((i as usize, j as usize))
    }

    fn wired_columns(&self) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = self.wired_interval;
        (0..self.box_width).filter(move |&i| {
            let (x, _) = self.site_position(i, 0);
            x >= a && x <= b
        })
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

/// Frequencies at probe points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub probes: Vec<[f64; 2]>,
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl McEstimate {
    fn from_counts(probes: &[C], counts: &[u64], n: usize, seed: u64) -> Self {
        let nf = n as f64;
        let means: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
        let std_errors = means
            .iter()
            .map(|&m| if n > 1 { (m * (1.0 - m) * nf / (nf - 1.0)).sqrt() / nf.sqrt() } else { 0.0 })
            .collect();
        McEstimate { probes: probes.iter().map(|z| [z.re, z.im]).collect(), means, std_errors, n_samples: n, seed }
    }

    pub fn probe_points(&self) -> Vec<C> {
        self.probes.iter().map(|p| C::new(p[0], p[1])).collect()
    }
}

/// Neighbours of (i, j) on the triangular lattice in offset rows.
pub fn neighbours(i: i64, j: i64) -> [(i64, i64); 6] {
    if j & 1 == 0 {
        [(i - 1, j), (i + 1, j), (i - 1, j - 1), (i, j - 1), (i - 1, j + 1), (i, j + 1)]
    } else {
        [(i - 1, j), (i + 1, j), (i, j - 1), (i + 1, j - 1), (i, j + 1), (i + 1, j + 1)]
    }
}

/// One occupation sample: row-major occupancy with the wired sites set.
pub fn sample_configuration(config: &McConfig, index: usize) -> Vec<bool> {
    let mut occ = vec![false; config.box_width * config.box_height];
    fill_configuration(config, index, &mut occ);
    occ
}

fn fill_configuration(config: &McConfig, index: usize, occ: &mut [bool]) {
    let mut rng = config.rng(index);
    for chunk in occ.chunks_mut(64) {
        let bits = rng.next_u64();
        for (k, o) in chunk.iter_mut().enumerate() {
            *o = bits >> k & 1 == 1;
        }
    }
    for i in config.wired_columns() {
        occ[i] = true;
    }
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    fn reset(&mut self) {
        for (k, p) in self.parent.iter_mut().enumerate() {
            *p = k as u32;
        }
        self.size.fill(1);
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let g = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = g;
            x = g;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] { (ra, rb) } else { (rb, ra) };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

fn union_sites(config: &McConfig, occ: &[bool], uf: &mut UnionFind) -> u32 {
    let (w, h) = (config.box_width, config.box_height);
    let root = (w * h) as u32;
    for j in 0..h {
        for i in 0..w {
            let s = j * w + i;
            if !occ[s] {
                continue;
            }
            // earlier neighbours: left, and the two below
            let mut prev = [(i as i64 - 1, j as i64), (0, 0), (0, 0)];
            let nb = neighbours(i as i64, j as i64);
            prev[1] = nb[2];
            prev[2] = nb[3];
            for (ni, nj) in prev {
                if ni >= 0 && nj >= 0 && (ni as usize) < w {
                    let t = nj as usize * w + ni as usize;
                    if occ[t] {
                        uf.union(s as u32, t as u32);
                    }
                }
            }
        }
    }
    for i in config.wired_columns() {
        uf.union(i as u32, root);
    }
    root
}

/// Which sites connect to the wired interval, by union-find.
pub fn wired_connectivity(config: &McConfig, occ: &[bool]) -> Vec<bool> {
    let n = config.box_width * config.box_height;
    let mut uf = UnionFind::new(n + 1);
    let root = union_sites(config, occ, &mut uf);
    let r = uf.find(root);
    (0..n).map(|s| occ[s] && uf.find(s as u32) == r).collect()
}

/// Which sites connect to the wired interval, by breadth-first search.
pub fn wired_connectivity_bfs(config: &McConfig, occ: &[bool]) -> Vec<bool> {
    let (w, h) = (config.box_width, config.box_height);
    let mut seen = vec![false; w * h];
    let mut queue: std::collections::VecDeque<(i64, i64)> = config.wired_columns().map(|i| (i as i64, 0)).collect();
    for &(i, _) in &queue {
        seen[i as usize] = true;
    }
    while let Some((i, j)) = queue.pop_front() {
        for (ni, nj) in neighbours(i, j) {
            if ni < 0 || nj < 0 || ni >= w as i64 || nj >= h as i64 {
                continue;
            }
            let t = nj as usize * w + ni as usize;
            if occ[t] && !seen[t] {
                seen[t] = true;
                queue.push_back((ni, nj));
            }
        }
    }
    seen
}

/// Frequency with which each probe's nearest site belongs to a cluster
/// touching the wired interval.
pub fn sample_connectivity(config: &McConfig, probes: &[C]) -> Result<McEstimate> {
    config.validate()?;
    let sites: Vec<usize> = probes
        .iter()
        .map(|&z| config.nearest_site(z).map(|(i, j)| j * config.box_width + i))
        .collect::<Result<_>>()?;
    let n = config.box_width * config.box_height;
    let np = sites.len();
    let counts = (0..config.n_samples)
        .into_par_iter()
        .fold(
            || (vec![false; n], UnionFind::new(n + 1), vec![0u64; np]),
            |(mut occ, mut uf, mut counts), idx| {
                fill_configuration(config, idx, &mut occ);
                uf.reset();
                let root = union_sites(config, &occ, &mut uf);
                let r = uf.find(root);
                for (c, &s) in counts.iter_mut().zip(&sites) {
                    if occ[s] && uf.find(s as u32) == r {
                        *c += 1;
                    }
                }
                (occ, uf, counts)
            },
        )
        .map(|(_, _, c)| c)
        .reduce(|| vec![0u64; np], add_counts);
    Ok(McEstimate::from_counts(probes, &counts, config.n_samples, config.seed))
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Axial hex directions in counter-clockwise order.
const DIRS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Lazily coloured hexes of one exploration; generation stamps avoid
/// clearing between samples. The domain is the half-disk of radius
/// `radius` centred at the origin, with black boundary hexes for x < 0 and
/// white ones for x > 0.
struct Explorer {
    width: usize,
    spacing: f64,
    radius_sq: f64,
    colour: Vec<bool>,
    stamp: Vec<u32>,
    generation: u32,
    bits: u64,
    nbits: u32,
}

impl Explorer {
    fn new(config: &McConfig) -> Self {
        let n = config.box_width * config.box_height;
        let radius = config.exploration_radius();
        Explorer {
            width: config.box_width,
            spacing: config.spacing,
            radius_sq: radius * radius,
            colour: vec![false; n],
            stamp: vec![0; n],
            generation: 0,
            bits: 0,
            nbits: 0,
        }
    }

    fn centre(&self, q: i64, r: i64) -> (f64, f64) {
        let a = self.spacing;
        ((q as f64 + 0.5 * r as f64) * a, (r as f64 + 0.5) * SQRT3_2 * a)
    }

    /// Whether (q, r) is a boundary hex on the arc.
    fn on_arc(&self, q: i64, r: i64) -> bool {
        let (x, y) = self.centre(q, r);
        r >= 0 && x * x + y * y > self.radius_sq
    }

    /// Colour of a hex (true = black/occupied).
    fn colour(&mut self, rng: &mut ChaCha8Rng, q: i64, r: i64) -> Result<bool> {
        if r == -1 {
            // Dobrushin boundary: black left of the origin
            return Ok(2 * q - 1 < 0);
        }
        if r < -1 {
            return Err(Error::PathExit(format!("exploration reached row {r} below the boundary")));
        }
        if self.on_arc(q, r) {
            return Ok(self.centre(q, r).0 < 0.0);
        }
        let i = q + self.width as i64 / 2 + r.div_euclid(2);
        let k = r as usize * self.width + i as usize;
        if self.stamp[k] != self.generation {
            if self.nbits == 0 {
                self.bits = rng.next_u64();
                self.nbits = 64;
            }
            self.colour[k] = self.bits & 1 == 1;
            self.bits >>= 1;
            self.nbits -= 1;
            self.stamp[k] = self.generation;
        }
        Ok(self.colour[k])
    }

    /// Midpoints of the interface edges from the origin to the point where
    /// the black and white arcs meet.
    fn trace(&mut self, config: &McConfig, index: usize) -> Result<Vec<(f64, f64)>> {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        self.nbits = 0;
        let mut rng = config.rng(index);
        let mid = |ex: &Self, b: (i64, i64), w: (i64, i64)| {
            let (p, s) = (ex.centre(b.0, b.1), ex.centre(w.0, w.1));
            (0.5 * (p.0 + s.0), 0.5 * (p.1 + s.1))
        };
        let mut b = (0i64, -1i64);
        let mut k = 0usize;
        let mut path = vec![mid(self, b, (1, -1))];
        let limit = 64 * config.box_width * config.box_height;
        for _ in 0..limit {
            let d = DIRS[(k + 1) % 6];
            let next = (b.0 + d.0, b.1 + d.1);
            if self.colour(&mut rng, next.0, next.1)? {
                b = next;
                k = (k + 5) % 6;
            } else {
                k = (k + 1) % 6;
            }
            let w = (b.0 + DIRS[k].0, b.1 + DIRS[k].1);
            path.push(mid(self, b, w));
            if self.on_arc(b.0, b.1) && self.on_arc(w.0, w.1) {
                return Ok(path);
            }
        }
        Err(Error::PathExit("exploration did not reach the end of the arc".into()))
    }
}

/// Interface path of one sample, as edge midpoints in continuum coordinates.
pub fn trace_path(config: &McConfig, index: usize) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    Explorer::new(config).trace(config, index)
}

/// Whether the path passes to the left of the probe: the parity of crossings
/// of the vertical ray from the probe down into the boundary row, flipped for
/// probes right of the origin. Points with x equal to the probe's count as
/// left of the ray, so the ray sits just right of the probe.
pub fn passes_left(path: &[(f64, f64)], probe: C) -> bool {
    let (px, py) = (probe.re, probe.im);
    let mut odd = false;
    for s in path.windows(2) {
        let ((x1, y1), (x2, y2)) = (s[0], s[1]);
        if (x1 <= px) != (x2 <= px) {
            // edges along the boundary row sit at y = 0 and still block the ray
            let y = y1 + (y2 - y1) * (px - x1) / (x2 - x1);
            if y < py {
                odd = !odd;
            }
        }
    }
    (px >= 0.0) != odd
}

/// Left-passage frequencies of the exploration path in the half-disk of
/// radius `exploration_radius`, run from the origin between black (x < 0)
/// and white (x > 0) boundary hexes.
pub fn trace_interface_lpp(config: &McConfig, probes: &[C]) -> Result<McEstimate> {
    config.validate()?;
    let radius = config.exploration_radius();
    let reach = probes.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if 8.0 * reach > radius {
        return Err(Error::ProbeOutside(format!(
            "probes up to |z| = {reach} need an exploration radius of at least {}, got {radius}",
            8.0 * reach
        )));
    }
    for &z in probes {
        config.nearest_site(z)?;
    }
    let np = probes.len();
    let counts = (0..config.n_samples)
        .into_par_iter()
        .fold(
            || (Explorer::new(config), Ok(vec![0u64; np])),
            |(mut ex, acc): (Explorer, Result<Vec<u64>>), idx| {
                let acc = acc.and_then(|mut counts| {
                    let path = ex.trace(config, idx)?;
                    for (c, &z) in counts.iter_mut().zip(probes) {
                        if passes_left(&path, z) {
                            *c += 1;
                        }
                    }
                    Ok(counts)
                });
                (ex, acc)
            },
        )
        .map(|(_, c)| c)
        .reduce(|| Ok(vec![0u64; np]), |a, b| Ok(add_counts(a?, b?)))?;
    Ok(McEstimate::from_counts(probes, &counts, config.n_samples, config.seed))
}

/// Least-squares constant c minimising Σ(mean − c·f)²/σ², and the RMS of
/// the relative residuals (mean − c·f)/(c·f).
pub fn fit_shape(estimate: &McEstimate, formula: &[f64]) -> Result<(f64, f64)> {
    if estimate.means.len() != formula.len() || estimate.std_errors.len() != formula.len() {
        return Err(Error::Invalid(format!(
            "{} estimates against {} formula values",
            estimate.means.len(),
            formula.len()
        )));
    }
    if formula.is_empty() {
        return Err(Error::Degenerate("no points to fit".into()));
    }
    if formula.iter().any(|&f| !(f > 0.0) || !f.is_finite()) {
        return Err(Error::Invalid("formula values must be positive".into()));
    }
    if estimate.means.iter().all(|&m| m == 0.0) {
        return Err(Error::Degenerate("all estimates are zero".into()));
    }
    // zero standard errors (frequencies of exactly 0 or 1) take the smallest positive one
    let floor = estimate.std_errors.iter().copied().filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1.0 };
    let (mut num, mut den) = (0.0, 0.0);
    for ((&m, &s), &f) in estimate.means.iter().zip(&estimate.std_errors).zip(formula) {
        let w = 1.0 / s.max(floor).powi(2);
        num += w * m * f;
        den += w * f * f;
    }
    let c = num / den;
    let rms = (estimate.means.iter().zip(formula).map(|(&m, &f)| ((m - c * f) / (c * f)).powi(2)).sum::<f64>()
        / formula.len() as f64)
        .sqrt();
    Ok((c, rms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_site_round_trip() {
        let cfg = McConfig::new(64, 64, (-4.0, 4.0), 1, 1);
        let (x, y) = cfg.site_position(30, 11);
        assert_eq!(cfg.nearest_site(C::new(x + 0.1, y - 0.1)).unwrap(), (30, 11));
        assert!(matches!(cfg.nearest_site(C::new(-31.0, 10.0)), Err(Error::ProbeOutside(_))));
        assert!(matches!(cfg.nearest_site(C::new(0.0, 60.0)), Err(Error::ProbeOutside(_))));
    }

    #[test]
    fn neighbour_relation_is_symmetric() {
        for j in 0..4 {
            for i in 0..4 {
                for (ni, nj) in neighbours(i, j) {
                    assert!(neighbours(ni, nj).contains(&(i, j)));
                }
            }
        }
    }

    #[test]
    fn neighbours_are_at_unit_distance() {
        let cfg = McConfig::new(16, 16, (0.0, 0.0), 0, 1);
        let (x, y) = cfg.site_position(5, 6);
        for (ni, nj) in neighbours(5, 6) {
            let (a, b) = cfg.site_position(ni as usize, nj as usize);
            assert!(((a - x).hypot(b - y) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn crossing_parity() {
        // up from the origin, a hook to the left, then over the top to the right
        let path = [(0.0, -0.4), (0.0, 1.0), (-3.0, 1.0), (-3.0, 5.0), (3.0, 5.0), (3.0, 20.0)];
        assert!(passes_left(&path, C::new(1.0, 2.0)));
        assert!(passes_left(&path, C::new(-1.0, 2.0)));
        assert!(!passes_left(&path, C::new(1.0, 8.0)));
        assert!(!passes_left(&path, C::new(-5.0, 2.0)));
        assert!(passes_left(&path, C::new(5.0, 30.0)));
    }

    #[test]
    fn boundary_run_blocks_the_ray() {
        // along the boundary row under the probe, then up to its right
        let path = [(0.0, -0.4), (0.25, 0.0), (4.0, 0.0), (4.0, 10.0)];
        assert!(!passes_left(&path, C::new(2.0, 1.0)));
        assert!(passes_left(&path, C::new(5.0, 1.0)));
        assert!(!passes_left(&path, C::new(-1.0, 1.0)));
    }
}
