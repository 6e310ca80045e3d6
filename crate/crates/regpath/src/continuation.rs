//! Predictor-corrector traversal of the front.
//!
//! A run first converges to an initial front point with the proximal-gradient
//! corrector, then walks the front leg by leg: a cheap predictor move (Adam
//! or plain gradient steps on the loss to move toward lower loss, repeated
//! shrinkage to move toward higher sparsity), followed by a corrector solve
//! back onto the front. Every accepted point is evaluated full-batch and
//! appended with its direction label.

use crate::adam::{AdamConfig, AdamState};
use crate::data::MinibatchCursor;
use crate::error::{Error, Result};
use crate::front::{Direction, FrontArchive};
use crate::mpg::{mpg_solve, BatchMode, SolverConfig};
use crate::param::ParamVector;
use crate::problem::{BatchSpec, BiObjectiveProblem};
use crate::prox;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegDirection {
    TowardLoss,
    TowardSparsity,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    FullBatch,
    Minibatch { batch_size: usize },
}

#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    /// Total number of accepted points, the initial point included.
    pub n_cont: usize,
    pub predictor_iters: usize,
    pub corrector_iters: usize,
    pub init_iters: usize,
    /// Corrector step size `h`; also the default predictor step.
    pub eta: f64,
    pub direction: LegDirection,
    pub adam: AdamConfig,
    /// Abort a leg when |front slope| between consecutive accepted points
    /// exceeds this. Off by default.
    pub slope_stop: Option<f64>,
    pub seed: u64,
    /// Plain gradient-descent predictor (step `eta`) instead of Adam.
    pub plain_gd: bool,
    /// Shrink-predictor applications per step; defaults to `predictor_iters`.
    pub shrink_iters: Option<usize>,
    /// Shrink-predictor step size; defaults to `eta`.
    pub shrink_eta: Option<f64>,
    /// Corrector stop tolerance on ||d||; defaults to `1e-6 * sqrt(dim)`.
    pub direction_tol: Option<f64>,
    /// Point split (sparsity leg, loss leg) for `Both`; defaults to an even
    /// split of `n_cont - 1` with the remainder on the loss leg.
    pub both_split: Option<(usize, usize)>,
    pub sample_mode: SampleMode,
}

impl ContinuationConfig {
    pub fn new(n_cont: usize, eta: f64, direction: LegDirection) -> Self {
        Self {
            n_cont,
            predictor_iters: 7,
            corrector_iters: 20,
            init_iters: 100,
            eta,
            direction,
            adam: AdamConfig::default(),
            slope_stop: None,
            seed: 0,
            plain_gd: false,
            shrink_iters: None,
            shrink_eta: None,
            direction_tol: None,
            both_split: None,
            sample_mode: SampleMode::FullBatch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_cont", self.n_cont),
            ("predictor_iters", self.predictor_iters),
            ("corrector_iters", self.corrector_iters),
            ("init_iters", self.init_iters),
        ] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be >= 1")));
            }
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eta must be > 0, got {}",
                self.eta
            )));
        }
        self.adam.validate()?;
        if let Some(s) = self.slope_stop {
            if !(s > 0.0) {
                return Err(Error::InvalidArgument("slope_stop must be > 0".into()));
            }
        }
        if let Some((a, b)) = self.both_split {
            if a + b > self.n_cont.saturating_sub(1) {
                return Err(Error::InvalidArgument(format!(
                    "both_split {a}+{b} exceeds n_cont-1 = {}",
                    self.n_cont - 1
                )));
            }
        }
        if let SampleMode::Minibatch { batch_size } = self.sample_mode {
            if batch_size == 0 {
                return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
            }
        }
        Ok(())
    }

    fn solver_config(&self, dim: usize, max_iter: usize) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.eta, max_iter, dim);
        if let Some(tol) = self.direction_tol {
            cfg.direction_tol = tol;
        }
        cfg
    }
}

/// Applies `iters` Adam updates on the smooth objective only.
pub fn predictor_gradient(
    theta: &ParamVector,
    problem: &dyn BiObjectiveProblem,
    iters: usize,
    adam: AdamConfig,
    mut mode: BatchMode,
) -> Result<ParamVector> {
    adam.validate()?;
    let mut state = AdamState::new(adam, theta.len());
    let mut th = theta.clone();
    for _ in 0..iters {
        let rows = match &mut mode {
            BatchMode::Full => None,
            BatchMode::Minibatch(draw) => Some(draw()),
        };
        let spec = rows.as_deref().map_or(BatchSpec::Full, BatchSpec::Rows);
        let grad = problem.grad_f1(&th, spec)?;
        th = state.step(&th, &grad)?;
    }
    Ok(th)
}

/// Plain gradient-descent predictor with fixed step `eta`.
pub fn predictor_gradient_plain(
    theta: &ParamVector,
    problem: &dyn BiObjectiveProblem,
    iters: usize,
    eta: f64,
    mut mode: BatchMode,
) -> Result<ParamVector> {
    let mut th = theta.clone();
    for _ in 0..iters {
        let rows = match &mut mode {
            BatchMode::Full => None,
            BatchMode::Minibatch(draw) => Some(draw()),
        };
        let spec = rows.as_deref().map_or(BatchSpec::Full, BatchSpec::Rows);
        let grad = problem.grad_f1(&th, spec)?;
        th = ParamVector::try_new(
            th.axpy(-eta, &grad).into_vec(),
            "gradient predictor update",
        )?;
    }
    Ok(th)
}

/// Applies the scaled-l1 prox `iters` times with step `eta`.
pub fn predictor_shrink(theta: &ParamVector, eta: f64, iters: usize, weight: f64) -> ParamVector {
    let mut th = theta.clone();
    for _ in 0..iters {
        th = prox::soft_threshold(&th, eta.max(0.0) * weight);
    }
    th
}

fn solve_corrector(
    problem: &dyn BiObjectiveProblem,
    theta: &ParamVector,
    cfg: &SolverConfig,
    cursor: &mut Option<MinibatchCursor>,
) -> Result<crate::mpg::MpgOutcome> {
    match cursor {
        None => mpg_solve(problem, theta, cfg, BatchMode::Full),
        Some(cur) => {
            let mut draw = || cur.next_rows();
            mpg_solve(problem, theta, cfg, BatchMode::Minibatch(&mut draw))
        }
    }
}

fn run_predictor(
    problem: &dyn BiObjectiveProblem,
    theta: &ParamVector,
    cfg: &ContinuationConfig,
    leg: Direction,
    cursor: &mut Option<MinibatchCursor>,
) -> Result<ParamVector> {
    match leg {
        Direction::TowardSparsity => {
            let iters = cfg.shrink_iters.unwrap_or(cfg.predictor_iters);
            let step = cfg.shrink_eta.unwrap_or(cfg.eta);
            let mut th = theta.clone();
            for _ in 0..iters {
                th = problem.prox_g2(&th, step);
            }
            Ok(th)
        }
        Direction::TowardLoss => {
            let run = |mode: BatchMode| -> Result<ParamVector> {
                if cfg.plain_gd {
                    predictor_gradient_plain(theta, problem, cfg.predictor_iters, cfg.eta, mode)
                } else {
                    predictor_gradient(theta, problem, cfg.predictor_iters, cfg.adam, mode)
                }
            };
            match cursor {
                None => run(BatchMode::Full),
                Some(cur) => {
                    let mut draw = || cur.next_rows();
                    run(BatchMode::Minibatch(&mut draw))
                }
            }
        }
        _ => unreachable!("legs are loss or sparsity"),
    }
}

/// Runs Algorithm-2 style continuation and returns the archive of accepted
/// points. On corrector divergence the current leg is abandoned, keeping the
/// points accepted so far.
pub fn continuation_run(
    problem: &dyn BiObjectiveProblem,
    theta_init: &ParamVector,
    cfg: &ContinuationConfig,
) -> Result<FrontArchive> {
    continuation_run_traced(problem, theta_init, cfg).map(|(archive, _)| archive)
}

/// [`continuation_run`] plus the concatenated per-iteration trace of every
/// corrector solve (the initial solve included).
pub fn continuation_run_traced(
    problem: &dyn BiObjectiveProblem,
    theta_init: &ParamVector,
    cfg: &ContinuationConfig,
) -> Result<(FrontArchive, crate::mpg::Trace)> {
    cfg.validate()?;
    let dim = problem.dim();
    let mut cursor = match cfg.sample_mode {
        SampleMode::FullBatch => None,
        SampleMode::Minibatch { batch_size } => Some(MinibatchCursor::new(
            problem.train_len(),
            batch_size.min(problem.train_len()),
            cfg.seed,
        )),
    };

    let mut archive = FrontArchive::new();
    let mut trace = crate::mpg::Trace::default();

    // initial point: corrector from the raw initialization
    let init_solver = cfg.solver_config(dim, cfg.init_iters);
    let out = solve_corrector(problem, theta_init, &init_solver, &mut cursor)?;
    trace.extend(out.trace);
    let theta0 = out.theta;
    archive.push(problem.evaluate_point(&theta0, 0)?, Direction::Initial);

    let budget = cfg.n_cont - 1;
    let legs: Vec<(Direction, usize)> = match cfg.direction {
        LegDirection::TowardLoss => vec![(Direction::TowardLoss, budget)],
        LegDirection::TowardSparsity => vec![(Direction::TowardSparsity, budget)],
        LegDirection::Both => {
            let (s, l) = cfg.both_split.unwrap_or((budget / 2, budget - budget / 2));
            vec![(Direction::TowardSparsity, s), (Direction::TowardLoss, l)]
        }
    };

    let corrector_solver = cfg.solver_config(dim, cfg.corrector_iters);
    for (leg, points) in legs {
        let mut theta = theta0.clone();
        let mut prev = archive.points()[0].clone();
        for _ in 0..points {
            let predicted = run_predictor(problem, &theta, cfg, leg, &mut cursor)?;
            let corrected = match solve_corrector(problem, &predicted, &corrector_solver, &mut cursor)
            {
                Ok(out) => {
                    trace.extend(out.trace);
                    out.theta
                }
                Err(Error::Divergence(msg)) => {
                    eprintln!("continuation: {leg:?} leg aborted: {msg}");
                    break;
                }
                Err(e) => return Err(e),
            };
            let point = problem.evaluate_point(&corrected, archive.len())?;
            let stop = match cfg.slope_stop {
                None => false,
                Some(threshold) => {
                    let dg2 = point.g2 - prev.g2;
                    let df1 = point.f1_train - prev.f1_train;
                    dg2 == 0.0 || (df1 / dg2).abs() > threshold
                }
            };
            prev = point.clone();
            archive.push(point, leg);
            theta = corrected;
            if stop {
                break;
            }
        }
    }

    debug_assert!(archive.len() <= cfg.n_cont);
    Ok((archive, trace))
}
