//! Weighted-sum scalarization with Adam, and the ISTA oracle used as convex
//! ground truth.
//!
//! The weighted-sum baseline minimizes `lambda * f1 + (1 - lambda) * g2` by
//! plain Adam, handling the l1 term through its subgradient (zero at zero).
//! The prox-accurate convex reference for LASSO instances is `ista_oracle`,
//! which certifies its output through the KKT conditions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adam::{AdamConfig, AdamState};
use crate::data::MinibatchCursor;
use crate::error::{Error, Result};
use crate::front::{Direction, FrontArchive};
use crate::mat::Matrix;
use crate::param::ParamVector;
use crate::problem::{BatchSpec, BiObjectiveProblem};
use crate::prox::soft_threshold;

#[derive(Debug, Clone)]
pub struct WsConfig {
    /// Number of equidistant weights in [0,1], both endpoints included.
    pub n_lambda: usize,
    pub iters_per_lambda: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Start each weight from the previous solution instead of a fresh init.
    pub warm_start: bool,
    pub sample_mode: crate::continuation::SampleMode,
}

impl WsConfig {
    pub fn new(n_lambda: usize, iters_per_lambda: usize) -> Self {
        Self {
            n_lambda,
            iters_per_lambda,
            adam: AdamConfig::default(),
            seed: 0,
            warm_start: false,
            sample_mode: crate::continuation::SampleMode::FullBatch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lambda == 0 || self.iters_per_lambda == 0 {
            return Err(Error::InvalidArgument(
                "n_lambda and iters_per_lambda must be >= 1".into(),
            ));
        }
        self.adam.validate()
    }

    /// The weight grid: `{0}` for a single point, else `j/(n-1)`.
    pub fn lambda_grid(&self) -> Vec<f64> {
        if self.n_lambda == 1 {
            return vec![0.0];
        }
        (0..self.n_lambda)
            .map(|j| j as f64 / (self.n_lambda - 1) as f64)
            .collect()
    }
}

/// Runs `iters` Adam steps on `lambda * f1 + (1-lambda) * g2`, using the
/// l1 subgradient `weight * sign(theta)` for the non-smooth term.
pub fn ws_solve(
    problem: &dyn BiObjectiveProblem,
    lambda1: f64,
    theta0: &ParamVector,
    iters: usize,
    adam: AdamConfig,
    mut mode: crate::mpg::BatchMode,
) -> Result<ParamVector> {
    if !(0.0..=1.0).contains(&lambda1) {
        return Err(Error::InvalidArgument(format!(
            "lambda must lie in [0,1], got {lambda1}"
        )));
    }
    adam.validate()?;
    let w = problem.l1_weight();
    let mut state = AdamState::new(adam, theta0.len());
    let mut theta = theta0.clone();
    let mut f1_init: Option<f64> = None;
    for k in 1..=iters {
        let rows = match &mut mode {
            crate::mpg::BatchMode::Full => None,
            crate::mpg::BatchMode::Minibatch(draw) => Some(draw()),
        };
        let spec = rows.as_deref().map_or(BatchSpec::Full, BatchSpec::Rows);
        let (f1, grad_f1) = problem.value_grad_f1(&theta, spec)?;
        let init = *f1_init.get_or_insert(f1);
        if f1 > 1e6 * init.max(1e-12) {
            return Err(Error::Divergence(format!(
                "weighted-sum F1 = {f1} at iter {k} exceeds 1e6 x initial value {init}"
            )));
        }
        let grad = ParamVector::from_fn(theta.len(), |i| {
            lambda1 * grad_f1[i] + (1.0 - lambda1) * w * theta[i].signum_or_zero()
        });
        theta = state.step(&theta, &grad)?;
    }
    Ok(theta)
}

trait SignumOrZero {
    fn signum_or_zero(self) -> f64;
}

impl SignumOrZero for f64 {
    fn signum_or_zero(self) -> f64 {
        if self == 0.0 {
            0.0
        } else {
            self.signum()
        }
    }
}

/// Sweeps the equidistant weight grid, solving each scalarization from a
/// fresh seeded init (or warm-started when configured), and returns the
/// archive labeled "ws". Per-weight failures are skipped and reported on
/// stderr; the sweep continues.
pub fn ws_sweep(
    problem: &dyn BiObjectiveProblem,
    cfg: &WsConfig,
    init: &dyn Fn(u64) -> ParamVector,
) -> Result<FrontArchive> {
    cfg.validate()?;
    let mut cursor = match cfg.sample_mode {
        crate::continuation::SampleMode::FullBatch => None,
        crate::continuation::SampleMode::Minibatch { batch_size } => Some(MinibatchCursor::new(
            problem.train_len(),
            batch_size.min(problem.train_len()),
            cfg.seed,
        )),
    };
    let mut archive = FrontArchive::new();
    let mut warm: Option<ParamVector> = None;
    for (j, lambda) in cfg.lambda_grid().into_iter().enumerate() {
        let theta0 = match (&warm, cfg.warm_start) {
            (Some(t), true) => t.clone(),
            _ => init(cfg.seed.wrapping_add(j as u64)),
        };
        let solved = match &mut cursor {
            None => ws_solve(
                problem,
                lambda,
                &theta0,
                cfg.iters_per_lambda,
                cfg.adam,
                crate::mpg::BatchMode::Full,
            ),
            Some(cur) => {
                let mut draw = || cur.next_rows();
                ws_solve(
                    problem,
                    lambda,
                    &theta0,
                    cfg.iters_per_lambda,
                    cfg.adam,
                    crate::mpg::BatchMode::Minibatch(&mut draw),
                )
            }
        };
        match solved {
            Ok(theta) => {
                warm = Some(theta.clone());
                let point = problem.evaluate_point(&theta, archive.len())?;
                archive.push(point, Direction::WeightedSum);
            }
            Err(e) => {
                eprintln!("ws_sweep: lambda = {lambda} failed: {e}");
            }
        }
    }
    Ok(archive)
}

/// Largest eigenvalue of `A^T A` by power iteration, for ISTA step sizing.
pub fn spectral_norm_ata(a: &Matrix, iters: usize, seed: u64) -> f64 {
    use rand::Rng;
    let n = a.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = ParamVector::from_fn(n, |_| rng.gen_range(-1.0..1.0_f64));
    let mut eig = 0.0;
    for _ in 0..iters {
        let av = a.matvec(&v);
        let atav = a.t_matvec(&av);
        let norm = atav.norm();
        if norm == 0.0 {
            return 0.0;
        }
        eig = norm / v.norm();
        v = atav.scale(1.0 / norm);
    }
    eig
}

/// ISTA on `0.5*||A theta - b||^2 + lambda1 * ||theta||_1` until the
/// successive-iterate change drops below `tol`. `step` defaults to
/// `1/||A^T A||_2` (power-iteration estimate). Returns the certified
/// minimizer of the convex scalarization.
pub fn ista_oracle(
    a: &Matrix,
    b: &[f64],
    lambda1: f64,
    step: Option<f64>,
    tol: f64,
) -> Result<ParamVector> {
    ista_oracle_from(a, b, lambda1, step, tol, None)
}

/// [`ista_oracle`] with an optional warm start.
pub fn ista_oracle_from(
    a: &Matrix,
    b: &[f64],
    lambda1: f64,
    step: Option<f64>,
    tol: f64,
    theta0: Option<&ParamVector>,
) -> Result<ParamVector> {
    if lambda1 < 0.0 {
        return Err(Error::InvalidArgument("lambda must be >= 0".into()));
    }
    let l = spectral_norm_ata(a, 100, 0);
    let step = step.unwrap_or_else(|| if l > 0.0 { 1.0 / l } else { 1.0 });
    if l > 0.0 && step > 1.0 / l * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "ISTA step {step} exceeds 1/||A^T A|| = {}",
            1.0 / l
        )));
    }
    let mut theta = theta0.cloned().unwrap_or_else(|| ParamVector::zeros(a.cols()));
    for _ in 0..1_000_000usize {
        let mut r = a.matvec(&theta);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= bi;
        }
        let grad = a.t_matvec(&r);
        let next = soft_threshold(&theta.axpy(-step, &grad), step * lambda1);
        let change = next.sub(&theta).norm();
        theta = next;
        if change <= tol {
            return Ok(theta);
        }
    }
    Err(Error::NoConvergence(format!(
        "ISTA did not reach tol {tol} within 1e6 iterations"
    )))
}

/// Max KKT violation of the LASSO optimality conditions at `theta`:
/// `|A^T(A theta - b)_i + lambda * sign(theta_i)|` on the support and
/// `max(0, |A^T(A theta - b)_i| - lambda)` off it.
pub fn lasso_kkt_residual(a: &Matrix, b: &[f64], lambda1: f64, theta: &ParamVector) -> f64 {
    let mut r = a.matvec(theta);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    let grad = a.t_matvec(&r);
    let mut worst = 0.0_f64;
    for i in 0..theta.len() {
        let v = if theta[i] != 0.0 {
            (grad[i] + lambda1 * theta[i].signum()).abs()
        } else {
            (grad[i].abs() - lambda1).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::predictor_gradient;
    use crate::problems::{random_lasso_instance, LassoProblem};

    #[test]
    fn lambda_grid_cases() {
        assert_eq!(WsConfig::new(1, 10).lambda_grid(), vec![0.0]);
        assert_eq!(WsConfig::new(3, 10).lambda_grid(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn pure_loss_limit_approaches_minimizer() {
        // f1 = 0.5 (theta-1)^2: lambda = 1 is plain Adam on the loss
        let p = LassoProblem::new(Matrix::from_vec(1, 1, vec![1.0]), vec![1.0], 1.0);
        let theta0 = ParamVector::zeros(1);
        let out = ws_solve(
            &p,
            1.0,
            &theta0,
            2000,
            AdamConfig::with_lr(0.05),
            crate::mpg::BatchMode::Full,
        )
        .unwrap();
        assert!((out[0] - 1.0).abs() <= 1e-2, "theta = {}", out[0]);
    }

    #[test]
    fn pure_sparsity_limit_shrinks_to_zero() {
        let p = LassoProblem::new(Matrix::from_vec(1, 1, vec![1.0]), vec![1.0], 1.0);
        let theta0 = ParamVector::new(vec![0.8]);
        let out = ws_solve(
            &p,
            0.0,
            &theta0,
            3000,
            AdamConfig::with_lr(0.01),
            crate::mpg::BatchMode::Full,
        )
        .unwrap();
        assert!(out[0].abs() <= 0.05, "theta = {}", out[0]);
    }

    #[test]
    fn ws_lambda1_equals_gradient_predictor() {
        let (a, b, _) = random_lasso_instance(10, 6, 2, 0.01, 3);
        let p = LassoProblem::with_default_weight(a, b);
        let theta0 = ParamVector::from_fn(6, |i| 0.1 * i as f64);
        let adam = AdamConfig::with_lr(0.02);
        let ws = ws_solve(&p, 1.0, &theta0, 50, adam, crate::mpg::BatchMode::Full).unwrap();
        let pred =
            predictor_gradient(&theta0, &p, 50, adam, crate::mpg::BatchMode::Full).unwrap();
        for i in 0..6 {
            assert_eq!(ws[i].to_bits(), pred[i].to_bits());
        }
    }

    #[test]
    fn ista_identity_least_squares() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let b = vec![0.7, -0.3];
        let out = ista_oracle(&a, &b, 0.0, None, 1e-12).unwrap();
        assert!((out[0] - 0.7).abs() <= 1e-9);
        assert!((out[1] + 0.3).abs() <= 1e-9);
    }

    #[test]
    fn ista_full_shrinkage_above_lambda_max() {
        let (a, b, _) = random_lasso_instance(8, 5, 2, 0.01, 7);
        let atb = a.t_matvec(&b);
        let lambda_max = atb.max_abs();
        let out = ista_oracle(&a, &b, lambda_max * 1.01, None, 1e-12).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn ista_satisfies_kkt() {
        let (a, b, _) = random_lasso_instance(20, 10, 3, 0.01, 0);
        let out = ista_oracle(&a, &b, 0.1, None, 1e-12).unwrap();
        let kkt = lasso_kkt_residual(&a, &b, 0.1, &out);
        assert!(kkt <= 1e-8, "KKT residual {kkt}");
    }

    #[test]
    fn ws_matches_ista_optimum_at_half() {
        let (a, b, _) = random_lasso_instance(20, 10, 3, 0.01, 5);
        let w = 0.1; // l1 weight 1/10
        let p = LassoProblem::new(a.clone(), b.clone(), w);
        // lambda = 0.5: scaled objective equals 0.5*(f1 + g2); the LASSO
        // coefficient of the equivalent problem is w
        let oracle = ista_oracle(&a, &b, w, None, 1e-12).unwrap();
        let oracle_obj = 0.5
            * (p.eval_f1(&oracle, BatchSpec::Full).unwrap() + p.eval_g2(&oracle));
        // subgradient steps stall at an lr-sized neighborhood, so anneal the
        // learning rate in stages, warm-starting each stage
        let mut theta = ParamVector::zeros(10);
        for lr in [0.01, 1e-4, 1e-6] {
            theta = ws_solve(
                &p,
                0.5,
                &theta,
                20_000,
                AdamConfig::with_lr(lr),
                crate::mpg::BatchMode::Full,
            )
            .unwrap();
        }
        let ws_obj =
            0.5 * (p.eval_f1(&theta, BatchSpec::Full).unwrap() + p.eval_g2(&theta));
        assert!(
            ws_obj - oracle_obj <= 1e-6,
            "ws {ws_obj} vs oracle {oracle_obj}"
        );
        assert!(ws_obj - oracle_obj >= -1e-9, "oracle must be the minimum");
    }

    #[test]
    fn ws_divergence_guard_fires() {
        // absurd learning rate on a steep quadratic: Adam runs off
        let p = LassoProblem::new(Matrix::from_vec(1, 1, vec![100.0]), vec![1.0], 0.01);
        let err = ws_solve(
            &p,
            1.0,
            &ParamVector::new(vec![1e-4]),
            5_000,
            AdamConfig::with_lr(1e3),
            crate::mpg::BatchMode::Full,
        );
        assert!(matches!(err, Err(crate::error::Error::Divergence(_))), "{err:?}");
    }

    #[test]
    fn sweep_is_deterministic_and_labeled() {
        let (a, b, _) = random_lasso_instance(10, 6, 2, 0.01, 2);
        let run = || {
            let p = LassoProblem::with_default_weight(a.clone(), b.clone());
            let cfg = WsConfig {
                adam: AdamConfig::with_lr(0.05),
                ..WsConfig::new(5, 100)
            };
            let init = |seed: u64| {
                use rand::prelude::*;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                ParamVector::from_fn(6, |_| rng.gen_range(-0.01..0.01))
            };
            ws_sweep(&p, &cfg, &init).unwrap()
        };
        let a1 = run();
        let a2 = run();
        assert_eq!(a1.len(), 5);
        for (p1, p2) in a1.points().iter().zip(a2.points()) {
            assert_eq!(p1.f1_train.to_bits(), p2.f1_train.to_bits());
        }
        assert!(a1.labels().iter().all(|l| *l == Direction::WeightedSum));
    }
}
