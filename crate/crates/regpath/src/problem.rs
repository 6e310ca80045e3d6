//! The bi-objective problem abstraction every solver consumes.
//!
//! Problems bundle a smooth objective `f1` (value + gradient) with the
//! non-smooth sparsity objective `g2 = weight * ||theta||_1` (value + prox).
//! Evaluation with [`BatchSpec::Full`] is deterministic and repeatable;
//! [`BatchSpec::Rows`] selects a subset of training rows for stochastic
//! gradients.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::front::ParetoPoint;
use crate::param::ParamVector;
use crate::prox;

/// Which samples an objective evaluation sees.
#[derive(Debug, Clone, Copy)]
pub enum BatchSpec<'a> {
    /// The entire training set.
    Full,
    /// A subset of training rows, by index.
    Rows(&'a [usize]),
}

/// Cumulative work counters, shared by all solvers.
///
/// `gradient_evals` counts gradient computations (a fused value+gradient pass
/// counts once), `prox_evals` counts proximal-operator applications, and
/// `samples_touched` counts data rows visited by gradient evaluations.
#[derive(Debug, Default)]
pub struct EvalCounters {
    gradient_evals: AtomicU64,
    prox_evals: AtomicU64,
    samples_touched: AtomicU64,
}

impl EvalCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bump_gradient(&self, samples: u64) {
        self.gradient_evals.fetch_add(1, Ordering::Relaxed);
        self.samples_touched.fetch_add(samples, Ordering::Relaxed);
    }

    pub fn bump_prox(&self) {
        self.prox_evals.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> Budget {
        Budget {
            gradient_evals: self.gradient_evals.load(Ordering::Relaxed),
            prox_evals: self.prox_evals.load(Ordering::Relaxed),
            samples_touched: self.samples_touched.load(Ordering::Relaxed),
        }
    }
}

/// A snapshot of [`EvalCounters`], used for equal-budget comparisons.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub gradient_evals: u64,
    pub prox_evals: u64,
    pub samples_touched: u64,
}

impl Budget {
    /// Work done since an earlier snapshot.
    pub fn since(&self, earlier: &Budget) -> Budget {
        Budget {
            gradient_evals: self.gradient_evals - earlier.gradient_evals,
            prox_evals: self.prox_evals - earlier.prox_evals,
            samples_touched: self.samples_touched - earlier.samples_touched,
        }
    }
}

/// One smooth objective (value + gradient) plus the scaled l1 objective
/// (value + prox). Implementations must bump [`EvalCounters`] on every
/// gradient and prox evaluation.
pub trait BiObjectiveProblem {
    fn dim(&self) -> usize;

    /// Number of training rows minibatch indices may address.
    fn train_len(&self) -> usize;

    /// Training loss on the given batch. Full-batch values are deterministic.
    fn eval_f1(&self, theta: &ParamVector, batch: BatchSpec) -> Result<f64>;

    fn grad_f1(&self, theta: &ParamVector, batch: BatchSpec) -> Result<ParamVector>;

    /// Fused value + gradient; override when one pass computes both.
    fn value_grad_f1(&self, theta: &ParamVector, batch: BatchSpec) -> Result<(f64, ParamVector)> {
        let g = self.grad_f1(theta, batch)?;
        let v = self.eval_f1(theta, batch)?;
        Ok((v, g))
    }

    /// Coefficient of the l1 norm in `g2` (e.g. `1/dim`).
    fn l1_weight(&self) -> f64;

    fn eval_g2(&self, theta: &ParamVector) -> f64 {
        self.l1_weight() * theta.norm_l1()
    }

    /// Prox of `step * g2`; with `step = 0` this is the identity.
    fn prox_g2(&self, theta: &ParamVector, step: f64) -> ParamVector {
        self.counters().bump_prox();
        prox::soft_threshold(theta, self.l1_weight() * step)
    }

    fn counters(&self) -> &EvalCounters;

    /// Full-batch evaluation of both objectives at `theta`. Supervised
    /// problems override this to attach accuracy and test metrics.
    fn evaluate_point(&self, theta: &ParamVector, index: usize) -> Result<ParetoPoint> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "evaluate".into(),
                expected: self.dim(),
                actual: theta.len(),
            });
        }
        let f1 = self.eval_f1(theta, BatchSpec::Full)?;
        if !f1.is_finite() {
            return Err(Error::NonFinite("objective f1".into()));
        }
        let g2 = self.eval_g2(theta);
        if !g2.is_finite() {
            return Err(Error::NonFinite("objective g2".into()));
        }
        Ok(ParetoPoint {
            theta: theta.clone(),
            f1_train: f1,
            g2,
            l1_unscaled: theta.norm_l1(),
            f1_test: None,
            acc_train: None,
            acc_test: None,
            index,
            grad_evals_cum: self.counters().snapshot().gradient_evals,
        })
    }
}

/// Optional test-set metrics for supervised problems.
pub trait SupervisedEval {
    fn train_accuracy(&self, theta: &ParamVector) -> Result<f64>;
    fn test_loss(&self, theta: &ParamVector) -> Result<Option<f64>>;
    fn test_accuracy(&self, theta: &ParamVector) -> Result<Option<f64>>;
}

/// Evaluates both objectives at `theta` on the full training set and returns
/// a front point. `index` is the point's position along the path.
pub fn evaluate(
    problem: &dyn BiObjectiveProblem,
    theta: &ParamVector,
    index: usize,
) -> Result<ParetoPoint> {
    problem.evaluate_point(theta, index)
}

/// [`evaluate`] plus supervised train/test metrics.
pub fn evaluate_supervised<P>(problem: &P, theta: &ParamVector, index: usize) -> Result<ParetoPoint>
where
    P: BiObjectiveProblem + SupervisedEval,
{
    let mut point = evaluate(problem, theta, index)?;
    point.acc_train = Some(problem.train_accuracy(theta)?);
    point.f1_test = problem.test_loss(theta)?;
    point.acc_test = problem.test_accuracy(theta)?;
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Matrix;
    use crate::problems::LassoProblem;

    #[test]
    fn zero_theta_has_zero_g2() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let p = LassoProblem::new(a, vec![1.0, 1.0], 0.5);
        let pt = evaluate(&p, &ParamVector::zeros(2), 0).unwrap();
        assert_eq!(pt.g2, 0.0);
    }

    #[test]
    fn identity_lasso_known_values() {
        // A = I2, b = (1,1), theta = (1,1): residual vanishes, g2 = |1|+|1| over 2
        let a = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let p = LassoProblem::new(a, vec![1.0, 1.0], 0.5);
        let pt = evaluate(&p, &ParamVector::new(vec![1.0, 1.0]), 0).unwrap();
        assert_eq!(pt.f1_train, 0.0);
        assert_eq!(pt.g2, 1.0);
        assert_eq!(pt.l1_unscaled, 2.0);
    }

    #[test]
    fn random_lasso_matches_naive_triple_loop() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (m, n) = (6, 4);
        let data: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let theta = ParamVector::from_fn(n, |_| rng.gen_range(-1.0..1.0));

        // independent recomputation of 0.5*||A theta - b||^2 by naive loops
        let mut acc = 0.0;
        for i in 0..m {
            let mut ri = -b[i];
            for j in 0..n {
                ri += data[i * n + j] * theta[j];
            }
            acc += 0.5 * ri * ri;
        }

        let p = LassoProblem::new(Matrix::from_vec(m, n, data), b, 0.25);
        let pt = evaluate(&p, &theta, 0).unwrap();
        assert!((pt.f1_train - acc).abs() <= 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_hard_error() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let p = LassoProblem::new(a, vec![1.0, 1.0], 0.5);
        let err = evaluate(&p, &ParamVector::zeros(3), 0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn full_batch_evaluation_is_bit_identical() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let p = LassoProblem::new(a, vec![0.3, -0.7], 0.5);
        let theta = ParamVector::new(vec![0.11, -0.22]);
        let p1 = evaluate(&p, &theta, 0).unwrap();
        let p2 = evaluate(&p, &theta, 0).unwrap();
        assert_eq!(p1.f1_train.to_bits(), p2.f1_train.to_bits());
        assert_eq!(p1.g2.to_bits(), p2.g2.to_bits());
    }

    #[test]
    fn budget_counts_gradients_and_prox() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let p = LassoProblem::new(a, vec![1.0, 1.0], 0.5);
        let theta = ParamVector::zeros(2);
        let before = p.counters().snapshot();
        let _ = p.grad_f1(&theta, BatchSpec::Full).unwrap();
        let _ = p.prox_g2(&theta, 0.1);
        let after = p.counters().snapshot().since(&before);
        assert_eq!(after.gradient_evals, 1);
        assert_eq!(after.prox_evals, 1);
        assert_eq!(after.samples_touched, 2);
    }
}
