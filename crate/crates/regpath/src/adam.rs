//! Adam optimizer with bias correction, used by the gradient predictor and
//! the weighted-sum baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::ParamVector;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "adam lr must be > 0, got {}",
                self.lr
            )));
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "adam {name} must lie in (0,1), got {v}"
                )));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "adam epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// First/second moment state; one instance per optimization run.
#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(cfg: AdamConfig, dim: usize) -> Self {
        Self {
            cfg,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    /// One update `theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, theta: &ParamVector, grad: &ParamVector) -> Result<ParamVector> {
        assert_eq!(theta.len(), self.m.len(), "adam state dimension mismatch");
        assert_eq!(grad.len(), self.m.len(), "adam gradient dimension mismatch");
        self.t += 1;
        let b1 = self.cfg.beta1;
        let b2 = self.cfg.beta2;
        let bc1 = 1.0 - b1.powi(self.t as i32);
        let bc2 = 1.0 - b2.powi(self.t as i32);
        let mut out = Vec::with_capacity(theta.len());
        for i in 0..theta.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g;
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            out.push(theta[i] - self.cfg.lr * m_hat / (v_hat.sqrt() + self.cfg.epsilon));
        }
        ParamVector::try_new(out, "adam update")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_matches_hand_formula() {
        // f1 = 0.5 theta^2 at theta = 2: gradient g = 2
        let cfg = AdamConfig::with_lr(0.01);
        let mut state = AdamState::new(cfg, 1);
        let theta = ParamVector::new(vec![2.0]);
        let grad = ParamVector::new(vec![2.0]);
        let next = state.step(&theta, &grad).unwrap();
        // bias-corrected first step: m_hat = g, v_hat = g^2
        let expect = 2.0 - 0.01 * 2.0 / ((2.0_f64 * 2.0).sqrt() + 1e-8);
        assert!((next[0] - expect).abs() <= 1e-15);
        assert!((next[0] - 1.99).abs() <= 1e-6);
    }

    #[test]
    fn descends_convex_quadratic() {
        let cfg = AdamConfig::with_lr(0.05);
        let mut state = AdamState::new(cfg, 1);
        let mut theta = ParamVector::new(vec![2.0]);
        let f = |t: f64| 0.5 * t * t;
        let f0 = f(theta[0]);
        for _ in 0..100 {
            let grad = ParamVector::new(vec![theta[0]]);
            theta = state.step(&theta, &grad).unwrap();
        }
        assert!(f(theta[0]) < f0);
    }

    #[test]
    fn zero_gradient_keeps_theta() {
        let mut state = AdamState::new(AdamConfig::default(), 3);
        let theta = ParamVector::new(vec![1.0, -2.0, 3.0]);
        let next = state.step(&theta, &ParamVector::zeros(3)).unwrap();
        assert_eq!(next.as_slice(), theta.as_slice());
    }

    #[test]
    fn config_validation() {
        assert!(AdamConfig::with_lr(0.0).validate().is_err());
        assert!(AdamConfig {
            beta1: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AdamConfig::default().validate().is_ok());
    }
}
