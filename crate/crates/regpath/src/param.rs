//! Flat parameter vectors, the universal optimization variable.
//!
//! `ParamVector` wraps a `Vec<f64>` with a fixed dimension. All entries are
//! finite; every binary operation requires matching dimensions and panics
//! otherwise (shape mismatches are programmer errors, not recoverable
//! conditions).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    /// Panics if any entry is non-finite.
    pub fn new(values: Vec<f64>) -> Self {
        assert!(
            values.iter().all(|v| v.is_finite()),
            "ParamVector entries must be finite"
        );
        Self { values }
    }

    /// Checked constructor for values coming from external input.
    pub fn try_new(values: Vec<f64>, context: &str) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(context.to_string()));
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self::new((0..dim).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_dim(&self, other: &Self, op: &str) {
        assert_eq!(
            self.len(),
            other.len(),
            "ParamVector dimension mismatch in {op}"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_dim(other, "add");
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_dim(other, "sub");
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.values.iter().map(|a| a * c).collect())
    }

    /// `self + c * other`, the workhorse of every iterative update.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.check_dim(other, "axpy");
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.check_dim(other, "dot");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
