//! LASSO as a bi-objective problem: `f1 = 0.5*||A theta - b||^2` against
//! `g2 = weight * ||theta||_1`. The convex ground truth for validating the
//! solvers.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::param::ParamVector;
use crate::problem::{BatchSpec, BiObjectiveProblem, EvalCounters};

pub struct LassoProblem {
    a: Matrix,
    b: Vec<f64>,
    l1_weight: f64,
    counters: EvalCounters,
}

impl LassoProblem {
    pub fn new(a: Matrix, b: Vec<f64>, l1_weight: f64) -> Self {
        assert_eq!(a.rows(), b.len(), "row count of A must match b");
        assert!(l1_weight >= 0.0, "l1 weight must be nonnegative");
        Self {
            a,
            b,
            l1_weight,
            counters: EvalCounters::new(),
        }
    }

    /// Weight defaulting to `1/cols`, the scaling used throughout.
    pub fn with_default_weight(a: Matrix, b: Vec<f64>) -> Self {
        let w = 1.0 / a.cols() as f64;
        Self::new(a, b, w)
    }

    pub fn design(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    fn residual(&self, theta: &ParamVector, rows: Option<&[usize]>) -> (Vec<f64>, Vec<usize>) {
        match rows {
            None => {
                let mut r = self.a.matvec(theta);
                for (ri, bi) in r.iter_mut().zip(&self.b) {
                    *ri -= bi;
                }
                (r, (0..self.a.rows()).collect())
            }
            Some(idx) => {
                let r = idx
                    .iter()
                    .map(|&i| {
                        let row = self.a.row(i);
                        let dot: f64 = row.iter().zip(theta.iter()).map(|(a, t)| a * t).sum();
                        dot - self.b[i]
                    })
                    .collect();
                (r, idx.to_vec())
            }
        }
    }

    fn check_theta(&self, theta: &ParamVector) -> Result<()> {
        if theta.len() != self.a.cols() {
            return Err(Error::DimensionMismatch {
                context: "lasso".into(),
                expected: self.a.cols(),
                actual: theta.len(),
            });
        }
        Ok(())
    }
}

impl BiObjectiveProblem for LassoProblem {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn train_len(&self) -> usize {
        self.a.rows()
    }

    fn eval_f1(&self, theta: &ParamVector, batch: BatchSpec) -> Result<f64> {
        self.check_theta(theta)?;
        let rows = match batch {
            BatchSpec::Full => None,
            BatchSpec::Rows(idx) => Some(idx),
        };
        let (r, idx) = self.residual(theta, rows);
        // subset sums are rescaled to keep the estimator unbiased
        let scale = self.a.rows() as f64 / idx.len() as f64;
        Ok(0.5 * scale * r.iter().map(|v| v * v).sum::<f64>())
    }

    fn grad_f1(&self, theta: &ParamVector, batch: BatchSpec) -> Result<ParamVector> {
        self.check_theta(theta)?;
        let (grad, touched) = match batch {
            BatchSpec::Full => {
                let (r, _) = self.residual(theta, None);
                (self.a.t_matvec(&r), self.a.rows())
            }
            BatchSpec::Rows(idx) => {
                let (r, _) = self.residual(theta, Some(idx));
                let scale = self.a.rows() as f64 / idx.len() as f64;
                let mut out = vec![0.0; self.a.cols()];
                for (&i, ri) in idx.iter().zip(&r) {
                    for (j, aij) in self.a.row(i).iter().enumerate() {
                        out[j] += scale * aij * ri;
                    }
                }
                (ParamVector::new(out), idx.len())
            }
        };
        self.counters.bump_gradient(touched as u64);
        if !grad.is_finite() {
            return Err(Error::NonFinite("lasso gradient".into()));
        }
        Ok(grad)
    }

    fn l1_weight(&self) -> f64 {
        self.l1_weight
    }

    fn counters(&self) -> &EvalCounters {
        &self.counters
    }
}

/// Seeded random instance: `A` (rows x cols) standard normal,
/// `b = A theta_sparse + noise_scale * N(0, I)`, with `nnz` nonzero entries
/// in `theta_sparse` drawn standard normal.
pub fn random_lasso_instance(
    rows: usize,
    cols: usize,
    nnz: usize,
    noise_scale: f64,
    seed: u64,
) -> (Matrix, Vec<f64>, ParamVector) {
    assert!(nnz <= cols);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 {
        // Box-Muller; both uniforms strictly inside (0,1)
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };

    let data: Vec<f64> = (0..rows * cols).map(|_| normal()).collect();
    let a = Matrix::from_vec(rows, cols, data);

    let mut support: Vec<usize> = (0..cols).collect();
    // seeded partial shuffle picks the support
    let mut rng2 = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e3779b97f4a7c15));
    for i in 0..nnz {
        let j = rng2.gen_range(i..cols);
        support.swap(i, j);
    }
    let mut theta = vec![0.0; cols];
    for &j in &support[..nnz] {
        theta[j] = normal();
    }
    let theta = ParamVector::new(theta);

    let mut b = a.matvec(&theta);
    for bi in b.iter_mut() {
        *bi += noise_scale * normal();
    }
    (a, b, theta)
}
