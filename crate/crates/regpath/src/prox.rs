//! Closed-form proximal operators for weighted l1 norms.
//!
//! `soft_threshold(v, c)` is the exact minimizer of
//! `c*||u||_1 + 0.5*||u - v||^2`, applied coordinatewise. Entries exactly at
//! the threshold map to zero, which maximizes sparsity.

use crate::error::{Error, Result};
use crate::param::ParamVector;

/// Weight/step pair for the scaled l1 prox; the effective threshold is
/// `weight * step`.
#[derive(Debug, Clone, Copy)]
pub struct ProxSpec {
    pub weight: f64,
    pub step: f64,
}

impl ProxSpec {
    pub fn new(weight: f64, step: f64) -> Result<Self> {
        if !(weight >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prox weight must be >= 0, got {weight}"
            )));
        }
        if !(step >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prox step must be >= 0, got {step}"
            )));
        }
        if !(weight * step).is_finite() {
            return Err(Error::NonFinite("prox weight * step".into()));
        }
        Ok(Self { weight, step })
    }
}

pub fn soft_threshold_scalar(v: f64, c: f64) -> f64 {
    if v > c {
        v - c
    } else if v < -c {
        v + c
    } else {
        0.0
    }
}

/// Coordinatewise soft threshold with level `c >= 0`. Panics on `c < 0`.
pub fn soft_threshold(v: &ParamVector, c: f64) -> ParamVector {
    assert!(c >= 0.0, "soft_threshold requires c >= 0, got {c}");
    ParamVector::new(v.iter().map(|&x| soft_threshold_scalar(x, c)).collect())
}

/// Prox of `spec.weight * ||.||_1` with step `spec.step`, i.e.
/// `soft_threshold(theta, weight * step)`.
pub fn prox_scaled_l1(theta: &ParamVector, spec: ProxSpec) -> ParamVector {
    soft_threshold(theta, spec.weight * spec.step)
}
