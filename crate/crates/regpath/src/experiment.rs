//! Config-driven experiment runs and front comparisons.
//!
//! A run is described by a TOML file (schema below), validated before any
//! compute. Artifacts land in a timestamped directory under `out_dir`:
//! `front.csv` (normative column order: index, direction, f1_train,
//! g2_scaled, l1_unscaled, f1_test, acc_train, acc_test, grad_evals_cum),
//! `trace.csv` (solver iterations), `metrics.json`, and
//! `resolved_config.toml` with every default materialized — re-running from
//! the resolved copy reproduces the run bit-exactly in deterministic mode.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adam::AdamConfig;
use crate::baselines::{ws_sweep, WsConfig};
use crate::continuation::{
    continuation_run_traced, ContinuationConfig, LegDirection, SampleMode,
};
use crate::data::{load_iris, load_mnist, split, SplitSpec};
use crate::error::{Error, Result};
use crate::front::{Direction, FrontArchive, ParetoPoint};
use crate::metrics::{cross_dominance, hypervolume_2d, max_gap, ReferencePoint};
use crate::mpg::Trace;
use crate::nn::MlpArchitecture;
use crate::param::ParamVector;
use crate::problem::{BiObjectiveProblem, Budget};
use crate::problems::{random_lasso_instance, LassoProblem, MlpProblem};

pub const FRONT_CSV_HEADER: &str =
    "index,direction,f1_train,g2_scaled,l1_unscaled,f1_test,acc_train,acc_test,grad_evals_cum";

// ---------------------------------------------------------------------------
// config schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_precision")]
    pub precision: String,
    pub problem: ProblemSection,
    #[serde(default)]
    pub mode: ModeSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub paths: PathsSection,
    pub method: MethodSection,
}

fn default_precision() -> String {
    "double".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: String, // "lasso" | "mlp"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nnz: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>, // "iris" | "mnist"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arch: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_limit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_weight: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub kind: String, // "deterministic" | "stochastic"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
}

impl Default for ModeSection {
    fn default() -> Self {
        Self {
            kind: "deterministic".into(),
            batch_size: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub train_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    /// Entries are i.i.d. uniform(-scale, scale).
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            scale: 1e-2,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iris: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mnist_images: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mnist_labels: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mnist_test_images: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mnist_test_labels: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    pub kind: String, // "continuation" | "ws"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuation: Option<ContinuationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ws: Option<WsSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationSection {
    pub n_cont: usize,
    pub predictor_iters: usize,
    pub corrector_iters: usize,
    pub init_iters: usize,
    pub eta: f64,
    pub direction: String, // "toward_loss" | "toward_sparsity" | "both"
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub plain_gd: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shrink_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shrink_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_sparsity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_loss: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WsSection {
    pub n_lambda: usize,
    pub iters_per_lambda: usize,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub warm_start: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| Error::io(path.as_ref().display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Schema validation with field-path diagnostics.
    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, msg: String| Err(Error::Config(format!("{path}: {msg}")));

        if self.precision != "double" {
            return fail("precision", format!("only \"double\" is supported, got \"{}\"", self.precision));
        }

        match self.problem.kind.as_str() {
            "lasso" => {
                if self.problem.rows.is_none() || self.problem.cols.is_none() {
                    return fail("problem", "kind \"lasso\" requires rows and cols".into());
                }
                for (name, set) in [
                    ("dataset", self.problem.dataset.is_some()),
                    ("arch", self.problem.arch.is_some()),
                    ("train_limit", self.problem.train_limit.is_some()),
                ] {
                    if set {
                        return fail(
                            &format!("problem.{name}"),
                            "only valid for kind \"mlp\"".into(),
                        );
                    }
                }
            }
            "mlp" => {
                if self.problem.dataset.is_none() || self.problem.arch.is_none() {
                    return fail("problem", "kind \"mlp\" requires dataset and arch".into());
                }
                let ds = self.problem.dataset.as_deref().unwrap();
                if ds != "iris" && ds != "mnist" {
                    return fail("problem.dataset", format!("expected \"iris\" or \"mnist\", got \"{ds}\""));
                }
                for (name, set) in [
                    ("rows", self.problem.rows.is_some()),
                    ("cols", self.problem.cols.is_some()),
                    ("nnz", self.problem.nnz.is_some()),
                    ("noise", self.problem.noise.is_some()),
                    ("instance_seed", self.problem.instance_seed.is_some()),
                ] {
                    if set {
                        return fail(
                            &format!("problem.{name}"),
                            "only valid for kind \"lasso\"".into(),
                        );
                    }
                }
                MlpArchitecture::new(self.problem.arch.clone().unwrap())
                    .map_err(|e| Error::Config(format!("problem.arch: {e}")))?;
            }
            other => {
                return fail("problem.kind", format!("expected \"lasso\" or \"mlp\", got \"{other}\""));
            }
        }

        match self.mode.kind.as_str() {
            "deterministic" => {
                if self.mode.batch_size.is_some() {
                    return fail("mode.batch_size", "only valid for kind \"stochastic\"".into());
                }
            }
            "stochastic" => {
                if self.mode.batch_size.map_or(true, |b| b == 0) {
                    return fail("mode.batch_size", "stochastic mode requires batch_size >= 1".into());
                }
            }
            other => {
                return fail("mode.kind", format!("expected \"deterministic\" or \"stochastic\", got \"{other}\""));
            }
        }

        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return fail("split.train_fraction", format!("must lie in (0,1), got {}", self.split.train_fraction));
        }
        if self.init.scale < 0.0 {
            return fail("init.scale", format!("must be >= 0, got {}", self.init.scale));
        }

        match self.method.kind.as_str() {
            "continuation" => {
                let c = self.method.continuation.as_ref().ok_or_else(|| {
                    Error::Config("method.continuation: section required for kind \"continuation\"".into())
                })?;
                if self.method.ws.is_some() {
                    return fail("method.ws", "not valid for kind \"continuation\"".into());
                }
                self.continuation_config(c)?
                    .validate()
                    .map_err(|e| Error::Config(format!("method.continuation: {e}")))?;
            }
            "ws" => {
                let w = self.method.ws.as_ref().ok_or_else(|| {
                    Error::Config("method.ws: section required for kind \"ws\"".into())
                })?;
                if self.method.continuation.is_some() {
                    return fail("method.continuation", "not valid for kind \"ws\"".into());
                }
                if w.n_lambda == 0 || w.iters_per_lambda == 0 {
                    return fail("method.ws", "n_lambda and iters_per_lambda must be >= 1".into());
                }
                w.adam.validate().map_err(|e| Error::Config(format!("method.ws.adam: {e}")))?;
            }
            other => {
                return fail("method.kind", format!("expected \"continuation\" or \"ws\", got \"{other}\""));
            }
        }
        Ok(())
    }

    /// Copy with every default materialized, so the run is reproducible from
    /// the resolved file alone.
    pub fn resolved(&self, seed_override: Option<u64>, out_override: Option<&Path>) -> Self {
        let mut cfg = self.clone();
        if let Some(seed) = seed_override {
            cfg.seed = seed;
        }
        if let Some(out) = out_override {
            cfg.paths.out_dir = Some(out.to_path_buf());
        }
        cfg.split.seed.get_or_insert(cfg.seed);
        cfg.init.seed.get_or_insert(cfg.seed);
        if cfg.problem.kind == "lasso" {
            cfg.problem.instance_seed.get_or_insert(cfg.seed);
            cfg.problem.nnz.get_or_insert(3);
            if cfg.problem.noise.is_none() {
                cfg.problem.noise = Some(0.01);
            }
            if cfg.problem.l1_weight.is_none() {
                cfg.problem.l1_weight = Some(1.0 / cfg.problem.cols.unwrap() as f64);
            }
        }
        if cfg.problem.kind == "mlp" && cfg.problem.l1_weight.is_none() {
            let arch = MlpArchitecture::new(cfg.problem.arch.clone().unwrap()).unwrap();
            cfg.problem.l1_weight = Some(1.0 / crate::nn::mlp_param_count(&arch) as f64);
        }
        if cfg.paths.out_dir.is_none() {
            cfg.paths.out_dir = Some(PathBuf::from("runs"));
        }
        cfg
    }

    fn sample_mode(&self) -> SampleMode {
        match self.mode.kind.as_str() {
            "stochastic" => SampleMode::Minibatch {
                batch_size: self.mode.batch_size.unwrap_or(64),
            },
            _ => SampleMode::FullBatch,
        }
    }

    fn continuation_config(&self, c: &ContinuationSection) -> Result<ContinuationConfig> {
        let direction = match c.direction.as_str() {
            "toward_loss" => LegDirection::TowardLoss,
            "toward_sparsity" => LegDirection::TowardSparsity,
            "both" => LegDirection::Both,
            other => {
                return Err(Error::Config(format!(
                    "method.continuation.direction: expected \"toward_loss\", \"toward_sparsity\" or \"both\", got \"{other}\""
                )))
            }
        };
        let both_split = match (c.split_sparsity, c.split_loss) {
            (Some(s), Some(l)) => Some((s, l)),
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "method.continuation: split_sparsity and split_loss must be set together".into(),
                ))
            }
        };
        Ok(ContinuationConfig {
            n_cont: c.n_cont,
            predictor_iters: c.predictor_iters,
            corrector_iters: c.corrector_iters,
            init_iters: c.init_iters,
            eta: c.eta,
            direction,
            adam: c.adam,
            slope_stop: c.slope_stop,
            seed: self.seed,
            plain_gd: c.plain_gd,
            shrink_iters: c.shrink_iters,
            shrink_eta: c.shrink_eta,
            direction_tol: c.direction_tol,
            both_split,
            sample_mode: self.sample_mode(),
        })
    }
}

// ---------------------------------------------------------------------------
// front CSV (normative schema)

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_front_csv<W: Write>(archive: &FrontArchive, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{FRONT_CSV_HEADER}")?;
    for (p, label) in archive.iter() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            p.index,
            label.label(),
            p.f1_train,
            p.g2,
            p.l1_unscaled,
            fmt_opt(p.f1_test),
            fmt_opt(p.acc_train),
            fmt_opt(p.acc_test),
            p.grad_evals_cum
        )?;
    }
    Ok(())
}

pub fn read_front_csv(path: impl AsRef<Path>) -> Result<FrontArchive> {
    let path_str = path.as_ref().display().to_string();
    let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::DataFormat {
        path: path_str.clone(),
        line: 1,
        msg: "empty file".into(),
    })?;
    if header.trim() != FRONT_CSV_HEADER {
        let expected: Vec<&str> = FRONT_CSV_HEADER.split(',').collect();
        let found: Vec<&str> = header.trim().split(',').collect();
        let missing: Vec<&&str> = expected.iter().filter(|c| !found.contains(c)).collect();
        let extra: Vec<&&str> = found.iter().filter(|c| !expected.contains(c)).collect();
        return Err(Error::DataFormat {
            path: path_str,
            line: 1,
            msg: format!("header mismatch; missing columns {missing:?}, unexpected {extra:?}"),
        });
    }
    let mut archive = FrontArchive::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::DataFormat {
                path: path_str.clone(),
                line: line_no,
                msg: format!("expected 9 columns, found {}", fields.len()),
            });
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::DataFormat {
                path: path_str.clone(),
                line: line_no,
                msg: format!("cannot parse {what} from '{s}'"),
            })
        };
        let parse_opt = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.trim().is_empty() {
                Ok(None)
            } else {
                parse_f(s, what).map(Some)
            }
        };
        let point = ParetoPoint {
            theta: ParamVector::zeros(0),
            f1_train: parse_f(fields[2], "f1_train")?,
            g2: parse_f(fields[3], "g2_scaled")?,
            l1_unscaled: parse_f(fields[4], "l1_unscaled")?,
            f1_test: parse_opt(fields[5], "f1_test")?,
            acc_train: parse_opt(fields[6], "acc_train")?,
            acc_test: parse_opt(fields[7], "acc_test")?,
            index: fields[0].trim().parse().map_err(|_| Error::DataFormat {
                path: path_str.clone(),
                line: line_no,
                msg: format!("cannot parse index from '{}'", fields[0]),
            })?,
            grad_evals_cum: fields[8].trim().parse().unwrap_or(0),
        };
        archive.push_preserving_index(point, Direction::parse(fields[1].trim())?);
    }
    Ok(archive)
}

// ---------------------------------------------------------------------------
// run

pub struct RunOptions {
    pub config_path: PathBuf,
    pub out_override: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub quiet: bool,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub archive: FrontArchive,
}

/// Distinguishes validation failures (exit 2) from runtime failures (exit 3).
#[derive(Debug)]
pub enum RunFailure {
    Validation(Error),
    Runtime(Error),
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunFailure::Validation(e) => write!(f, "validation failure: {e}"),
            RunFailure::Runtime(e) => write!(f, "runtime failure: {e}"),
        }
    }
}

#[derive(Serialize)]
struct MetricsReport {
    points: usize,
    nondominated_points: usize,
    reference: Option<ReferencePoint>,
    hypervolume: Option<f64>,
    max_gap: Option<f64>,
    f1_train_min: f64,
    f1_train_max: f64,
    g2_min: f64,
    g2_max: f64,
    best_acc_train: Option<f64>,
    best_acc_test: Option<f64>,
    budget: Budget,
    notes: Vec<String>,
}

fn build_problem(cfg: &ExperimentConfig) -> Result<Box<dyn ProblemHandle>> {
    match cfg.problem.kind.as_str() {
        "lasso" => {
            let rows = cfg.problem.rows.unwrap();
            let cols = cfg.problem.cols.unwrap();
            let (a, b, _) = random_lasso_instance(
                rows,
                cols,
                cfg.problem.nnz.unwrap_or(3).min(cols),
                cfg.problem.noise.unwrap_or(0.01),
                cfg.problem.instance_seed.unwrap_or(cfg.seed),
            );
            let w = cfg.problem.l1_weight.unwrap_or(1.0 / cols as f64);
            Ok(Box::new(LassoHandle {
                problem: LassoProblem::new(a, b, w),
            }))
        }
        "mlp" => {
            let arch = MlpArchitecture::new(cfg.problem.arch.clone().unwrap())?;
            let full = match cfg.problem.dataset.as_deref().unwrap() {
                "iris" => {
                    let path = cfg.paths.iris.as_ref().ok_or_else(|| {
                        Error::Config("paths.iris: required for dataset \"iris\"".into())
                    })?;
                    load_iris(path)?
                }
                _ => {
                    let imgs = cfg.paths.mnist_images.as_ref().ok_or_else(|| {
                        Error::Config("paths.mnist_images: required for dataset \"mnist\"".into())
                    })?;
                    let lbls = cfg.paths.mnist_labels.as_ref().ok_or_else(|| {
                        Error::Config("paths.mnist_labels: required for dataset \"mnist\"".into())
                    })?;
                    let mut ds = load_mnist(imgs, lbls)?;
                    if let (Some(ti), Some(tl)) =
                        (&cfg.paths.mnist_test_images, &cfg.paths.mnist_test_labels)
                    {
                        ds = ds.concat(load_mnist(ti, tl)?)?;
                    }
                    ds
                }
            };
            let spec = SplitSpec::new(
                cfg.split.train_fraction,
                cfg.split.seed.unwrap_or(cfg.seed),
            )?;
            let (mut train, test) = split(&full, spec);
            if let Some(limit) = cfg.problem.train_limit {
                if limit < train.len() {
                    let keep: Vec<usize> = (0..limit).collect();
                    train = crate::data::Dataset {
                        name: train.name.clone(),
                        features: train.features.select_rows(&keep),
                        labels: train.labels[..limit].to_vec(),
                        n_classes: train.n_classes,
                        normalization_tag: train.normalization_tag.clone(),
                    };
                }
            }
            let w = cfg
                .problem
                .l1_weight
                .unwrap_or(1.0 / crate::nn::mlp_param_count(&arch) as f64);
            Ok(Box::new(MlpHandle {
                problem: MlpProblem::with_weight(arch, train, Some(test), w)?,
            }))
        }
        _ => unreachable!("validated earlier"),
    }
}

/// Uniform access to the concrete problems for the runner.
trait ProblemHandle {
    fn as_bi(&self) -> &dyn BiObjectiveProblem;
    fn init_theta(&self, scale: f64, seed: u64) -> ParamVector;
}

struct LassoHandle {
    problem: LassoProblem,
}

impl ProblemHandle for LassoHandle {
    fn as_bi(&self) -> &dyn BiObjectiveProblem {
        &self.problem
    }

    fn init_theta(&self, scale: f64, seed: u64) -> ParamVector {
        uniform_init(self.problem.dim(), scale, seed)
    }
}

struct MlpHandle {
    problem: MlpProblem,
}

impl ProblemHandle for MlpHandle {
    fn as_bi(&self) -> &dyn BiObjectiveProblem {
        &self.problem
    }

    fn init_theta(&self, scale: f64, seed: u64) -> ParamVector {
        crate::nn::mlp_init(self.problem.arch(), scale, seed)
    }
}

fn uniform_init(dim: usize, scale: f64, seed: u64) -> ParamVector {
    if scale == 0.0 {
        return ParamVector::zeros(dim);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ParamVector::from_fn(dim, |_| rng.gen_range(-scale..scale))
}

fn unique_run_dir(base: &Path, stem: &str) -> PathBuf {
    let mut dir = base.join(stem);
    let mut k = 1;
    while dir.exists() {
        k += 1;
        dir = base.join(format!("{stem}-{k}"));
    }
    dir
}

fn metrics_of(archive: &FrontArchive, budget: Budget, notes: Vec<String>) -> MetricsReport {
    let filtered = crate::front::front_filter_nondominated(archive);
    let agg = |f: &dyn Fn(&ParetoPoint) -> f64, init: f64, pick: &dyn Fn(f64, f64) -> f64| {
        archive.points().iter().map(|p| f(p)).fold(init, |a, b| pick(a, b))
    };
    let reference = ReferencePoint::shared(&[archive]).ok();
    let hypervolume = reference
        .as_ref()
        .and_then(|r| hypervolume_2d(archive, r).ok());
    MetricsReport {
        points: archive.len(),
        nondominated_points: filtered.len(),
        reference,
        hypervolume,
        max_gap: max_gap(archive).ok(),
        f1_train_min: agg(&|p| p.f1_train, f64::INFINITY, &f64::min),
        f1_train_max: agg(&|p| p.f1_train, f64::NEG_INFINITY, &f64::max),
        g2_min: agg(&|p| p.g2, f64::INFINITY, &f64::min),
        g2_max: agg(&|p| p.g2, f64::NEG_INFINITY, &f64::max),
        best_acc_train: archive
            .points()
            .iter()
            .filter_map(|p| p.acc_train)
            .fold(None, |a: Option<f64>, b| Some(a.map_or(b, |x| x.max(b)))),
        best_acc_test: archive
            .points()
            .iter()
            .filter_map(|p| p.acc_test)
            .fold(None, |a: Option<f64>, b| Some(a.map_or(b, |x| x.max(b)))),
        budget,
        notes,
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Loads, validates, resolves, executes, and writes artifacts. Validation
/// errors surface before anything is written.
pub fn run(opts: &RunOptions) -> std::result::Result<RunArtifacts, RunFailure> {
    let cfg = ExperimentConfig::from_path(&opts.config_path).map_err(RunFailure::Validation)?;
    let cfg = cfg.resolved(opts.seed_override, opts.out_override.as_deref());
    cfg.validate().map_err(RunFailure::Validation)?;

    let out_dir = cfg.paths.out_dir.clone().unwrap();
    let stamp = chrono::Utc::now().format("%Y%m%d-%H%M%S");
    let stem = format!("{stamp}-{}-{}", cfg.problem.kind, cfg.method.kind);
    let dir = unique_run_dir(&out_dir, &stem);
    fs::create_dir_all(&dir)
        .map_err(|e| RunFailure::Runtime(Error::io(dir.display().to_string(), e)))?;

    let resolved_toml = cfg.to_toml_string().map_err(RunFailure::Runtime)?;
    write_file(&dir.join("resolved_config.toml"), resolved_toml.as_bytes())
        .map_err(RunFailure::Runtime)?;

    match execute(&cfg, &dir) {
        Ok(archive) => {
            if !opts.quiet {
                println!(
                    "run complete: {} points -> {}",
                    archive.len(),
                    dir.display()
                );
            }
            Ok(RunArtifacts { dir, archive })
        }
        Err(e) => {
            let report = serde_json::json!({
                "error": e.to_string(),
                "partial_artifacts": true,
            });
            let _ = write_file(
                &dir.join("error_report.json"),
                serde_json::to_string_pretty(&report).unwrap().as_bytes(),
            );
            Err(RunFailure::Runtime(e))
        }
    }
}

fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<FrontArchive> {
    let handle = build_problem(cfg)?;
    let problem = handle.as_bi();
    let before = problem.counters().snapshot();
    let theta0 = handle.init_theta(cfg.init.scale, cfg.init.seed.unwrap_or(cfg.seed));

    let mut notes = Vec::new();
    let (archive, trace) = match cfg.method.kind.as_str() {
        "continuation" => {
            let section = cfg.method.continuation.as_ref().unwrap();
            let ccfg = cfg.continuation_config(section)?;
            continuation_run_traced(problem, &theta0, &ccfg)?
        }
        _ => {
            let section = cfg.method.ws.as_ref().unwrap();
            let wcfg = WsConfig {
                n_lambda: section.n_lambda,
                iters_per_lambda: section.iters_per_lambda,
                adam: section.adam,
                seed: cfg.seed,
                warm_start: section.warm_start,
                sample_mode: cfg.sample_mode(),
            };
            let scale = cfg.init.scale;
            let dim = problem.dim();
            let handle_ref = handle.as_ref();
            let init = move |seed: u64| -> ParamVector {
                let _ = dim;
                handle_ref.init_theta(scale, seed)
            };
            let archive = ws_sweep(problem, &wcfg, &init)?;
            notes.push("ws runs produce no proximal-gradient trace".into());
            (archive, Trace::default())
        }
    };

    let mut front_csv = Vec::new();
    write_front_csv(&archive, &mut front_csv)
        .map_err(|e| Error::io("front.csv buffer".to_string(), e))?;
    write_file(&dir.join("front.csv"), &front_csv)?;

    let mut trace_csv = Vec::new();
    trace
        .write_csv(&mut trace_csv)
        .map_err(|e| Error::io("trace.csv buffer".to_string(), e))?;
    write_file(&dir.join("trace.csv"), &trace_csv)?;

    let budget = problem.counters().snapshot().since(&before);
    let report = metrics_of(&archive, budget, notes);
    write_file(
        &dir.join("metrics.json"),
        serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Config(e.to_string()))?
            .as_bytes(),
    )?;
    Ok(archive)
}

// ---------------------------------------------------------------------------
// compare

#[derive(Debug, Serialize)]
pub struct FrontStats {
    pub path: String,
    pub points: usize,
    pub nondominated_in_union: usize,
    pub dominated_by_other: usize,
    pub hypervolume: f64,
    pub max_gap: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub reference: ReferencePoint,
    pub a: FrontStats,
    pub b: FrontStats,
}

/// Shared-reference hypervolume, max-gap, and dominance counts for two
/// exported fronts.
pub fn compare(front_a: impl AsRef<Path>, front_b: impl AsRef<Path>) -> Result<CompareReport> {
    let a = read_front_csv(front_a.as_ref())?;
    let b = read_front_csv(front_b.as_ref())?;
    let reference = ReferencePoint::shared(&[&a, &b])?;
    let x = cross_dominance(&a, &b);
    Ok(CompareReport {
        reference,
        a: FrontStats {
            path: front_a.as_ref().display().to_string(),
            points: a.len(),
            nondominated_in_union: x.a_nondominated_in_union,
            dominated_by_other: x.a_dominated_by_b,
            hypervolume: hypervolume_2d(&a, &reference)?,
            max_gap: max_gap(&a).ok(),
        },
        b: FrontStats {
            path: front_b.as_ref().display().to_string(),
            points: b.len(),
            nondominated_in_union: x.b_nondominated_in_union,
            dominated_by_other: x.b_dominated_by_a,
            hypervolume: hypervolume_2d(&b, &reference)?,
            max_gap: max_gap(&b).ok(),
        },
    })
}

/// Runs [`compare`] and writes the JSON report.
pub fn compare_to_json(
    front_a: impl AsRef<Path>,
    front_b: impl AsRef<Path>,
    out_json: impl AsRef<Path>,
) -> Result<CompareReport> {
    let report = compare(front_a, front_b)?;
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    write_file(out_json.as_ref(), text.as_bytes())?;
    Ok(report)
}
