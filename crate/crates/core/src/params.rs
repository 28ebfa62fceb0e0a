//! Model kinematics: the κ ↔ β² ↔ n ↔ Q ↔ c maps, Kac dimensions and
//! degenerate fusion rules.
//!
//! κ is the only stored quantity; everything else is computed from it.

use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Dilute,
    Boundary,
    Dense,
}

/// Coupled parameter set of the loop model / SLE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    kappa: f64,
}

impl ModelParams {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta_sq(&self) -> f64 {
        4.0 / self.kappa
    }

    /// Loop fugacity, only defined for 2 ≤ κ ≤ 8.
    pub fn n(&self) -> Option<f64> {
        (2.0..=8.0)
            .contains(&self.kappa)
            .then(|| -2.0 * (4.0 * PI / self.kappa).cos())
    }

    /// Cluster weight Q = n².
    pub fn q(&self) -> Option<f64> {
        self.n().map(|n| n * n)
    }

    pub fn central_charge(&self) -> f64 {
        let b2 = self.beta_sq();
        13.0 - 6.0 * b2 - 6.0 / b2
    }

    pub fn phase(&self) -> Phase {
        if self.kappa < 4.0 {
            Phase::Dilute
        } else if self.kappa > 4.0 {
            Phase::Dense
        } else {
            Phase::Boundary
        }
    }
}

pub fn model_from_kappa(kappa: f64) -> Result<ModelParams> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    Ok(ModelParams { kappa })
}

/// Kac index pair (r, s). Fractional indices are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KacLabel {
    pub r: f64,
    pub s: f64,
}

impl KacLabel {
    pub const fn new(r: f64, s: f64) -> Self {
        KacLabel { r, s }
    }
}

/// Δ₍r,s₎ = P₍r,s₎² − P₍1,1₎² with P₍r,s₎ = (rβ − s/β)/2.
///
/// Expanded so that no square root of β² is taken.
pub fn delta_rs(label: KacLabel, beta_sq: f64) -> f64 {
    let p2 = |r: f64, s: f64| (r * r * beta_sq - 2.0 * r * s + s * s / beta_sq) / 4.0;
    p2(label.r, label.s) - p2(1.0, 1.0)
}

/// Δ₍r,s₎ as a function of κ.
pub fn kac(r: f64, s: f64, kappa: f64) -> f64 {
    delta_rs(KacLabel::new(r, s), 4.0 / kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    /// Cluster-insertion operator σ.
    Spin,
    /// Bulk ℓ-leg operator ψ_ℓ.
    BulkLeg,
    /// Boundary ℓ-leg operator φ_ℓ.
    BoundaryLeg,
}

pub fn op_dimension(kind: OpKind, legs: u32, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let l = legs as f64;
    Ok(match kind {
        OpKind::Spin => 0.5 - 1.0 / kappa - 3.0 * kappa / 64.0,
        OpKind::BulkLeg => {
            if legs % 2 == 1 {
                return Err(Error::Domain(format!("bulk leg count must be even, got {legs}")));
            }
            (4.0 * l * l - (kappa - 4.0).powi(2)) / (16.0 * kappa)
        }
        OpKind::BoundaryLeg => l * (l + 2.0) / kappa - l / 2.0,
    })
}

/// Kac label carrying the same dimension as `op_dimension(kind, legs, ·)`.
pub fn op_label(kind: OpKind, legs: u32) -> KacLabel {
    match kind {
        OpKind::Spin => KacLabel::new(0.0, 0.5),
        OpKind::BulkLeg => KacLabel::new(legs as f64 / 2.0, 0.0),
        OpKind::BoundaryLeg => KacLabel::new(legs as f64 + 1.0, 1.0),
    }
}

/// Leg counts produced by fusing an m-leg and an n-leg boundary operator.
pub fn fusion_legs(m: u32, n: u32) -> Vec<u32> {
    let lo = m.abs_diff(n);
    (0..=m.min(n)).map(|p| lo + 2 * p).collect()
}
