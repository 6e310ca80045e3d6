//! MLP classification as a bi-objective problem: cross-entropy training loss
//! against the scaled l1 norm of the weights.

use crate::error::{Error, Result};
use crate::nn::{self, MlpArchitecture};
use crate::param::ParamVector;
use crate::problem::{BatchSpec, BiObjectiveProblem, EvalCounters, SupervisedEval};
use crate::data::Dataset;

pub struct MlpProblem {
    arch: MlpArchitecture,
    train: Dataset,
    test: Option<Dataset>,
    l1_weight: f64,
    counters: EvalCounters,
}

impl MlpProblem {
    /// Weight defaults to `1/param_count`, the scaling of the sparsity
    /// objective used throughout.
    pub fn new(arch: MlpArchitecture, train: Dataset, test: Option<Dataset>) -> Result<Self> {
        let n = nn::mlp_param_count(&arch);
        Self::with_weight(arch, train, test, 1.0 / n as f64)
    }

    pub fn with_weight(
        arch: MlpArchitecture,
        train: Dataset,
        test: Option<Dataset>,
        l1_weight: f64,
    ) -> Result<Self> {
        if train.feature_dim() != arch.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "mlp input layer vs dataset features".into(),
                expected: arch.input_dim(),
                actual: train.feature_dim(),
            });
        }
        if train.n_classes > arch.output_dim() {
            return Err(Error::InvalidArgument(format!(
                "dataset has {} classes but the output layer has {} units",
                train.n_classes,
                arch.output_dim()
            )));
        }
        if let Some(t) = &test {
            if t.feature_dim() != arch.input_dim() {
                return Err(Error::DimensionMismatch {
                    context: "mlp input layer vs test features".into(),
                    expected: arch.input_dim(),
                    actual: t.feature_dim(),
                });
            }
        }
        Ok(Self {
            arch,
            train,
            test,
            l1_weight,
            counters: EvalCounters::new(),
        })
    }

    pub fn arch(&self) -> &MlpArchitecture {
        &self.arch
    }

    pub fn train_set(&self) -> &Dataset {
        &self.train
    }

    pub fn test_set(&self) -> Option<&Dataset> {
        self.test.as_ref()
    }

    fn rows_of(batch: BatchSpec<'_>) -> Option<&[usize]> {
        match batch {
            BatchSpec::Full => None,
            BatchSpec::Rows(idx) => Some(idx),
        }
    }
}

impl BiObjectiveProblem for MlpProblem {
    fn dim(&self) -> usize {
        nn::mlp_param_count(&self.arch)
    }

    fn train_len(&self) -> usize {
        self.train.len()
    }

    fn eval_f1(&self, theta: &ParamVector, batch: BatchSpec) -> Result<f64> {
        nn::loss_on(
            &self.arch,
            theta,
            &self.train.features,
            &self.train.labels,
            Self::rows_of(batch),
        )
    }

    fn grad_f1(&self, theta: &ParamVector, batch: BatchSpec) -> Result<ParamVector> {
        Ok(self.value_grad_f1(theta, batch)?.1)
    }

    fn value_grad_f1(&self, theta: &ParamVector, batch: BatchSpec) -> Result<(f64, ParamVector)> {
        let rows = Self::rows_of(batch);
        let touched = rows.map_or(self.train.len(), |r| r.len());
        let out = nn::loss_and_grad_on(
            &self.arch,
            theta,
            &self.train.features,
            &self.train.labels,
            rows,
        )?;
        self.counters.bump_gradient(touched as u64);
        Ok(out)
    }

    fn l1_weight(&self) -> f64 {
        self.l1_weight
    }

    fn counters(&self) -> &EvalCounters {
        &self.counters
    }

    fn evaluate_point(
        &self,
        theta: &ParamVector,
        index: usize,
    ) -> Result<crate::front::ParetoPoint> {
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
        Ok(crate::front::ParetoPoint {
            theta: theta.clone(),
            f1_train: f1,
            g2: self.eval_g2(theta),
            l1_unscaled: theta.norm_l1(),
            f1_test: self.test_loss(theta)?,
            acc_train: Some(self.train_accuracy(theta)?),
            acc_test: self.test_accuracy(theta)?,
            index,
            grad_evals_cum: self.counters.snapshot().gradient_evals,
        })
    }
}

impl SupervisedEval for MlpProblem {
    fn train_accuracy(&self, theta: &ParamVector) -> Result<f64> {
        nn::accuracy_on(
            &self.arch,
            theta,
            &self.train.features,
            &self.train.labels,
            None,
        )
    }

    fn test_loss(&self, theta: &ParamVector) -> Result<Option<f64>> {
        match &self.test {
            None => Ok(None),
            Some(t) => Ok(Some(nn::loss_on(
                &self.arch,
                theta,
                &t.features,
                &t.labels,
                None,
            )?)),
        }
    }

    fn test_accuracy(&self, theta: &ParamVector) -> Result<Option<f64>> {
        match &self.test {
            None => Ok(None),
            Some(t) => Ok(Some(nn::accuracy_on(
                &self.arch,
                theta,
                &t.features,
                &t.labels,
                None,
            )?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{load_iris, split, SplitSpec};
    use crate::problem::evaluate_supervised;

    fn iris_problem() -> MlpProblem {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
        let ds = load_iris(path).unwrap();
        let (train, test) = split(&ds, SplitSpec::new(0.8, 0).unwrap());
        let arch = MlpArchitecture::new(vec![4, 4, 4, 3]).unwrap();
        MlpProblem::new(arch, train, Some(test)).unwrap()
    }

    #[test]
    fn supervised_point_has_test_metrics() {
        let p = iris_problem();
        let theta = ParamVector::zeros(p.dim());
        let pt = evaluate_supervised(&p, &theta, 0).unwrap();
        assert!(pt.f1_test.is_some());
        assert!(pt.acc_train.is_some());
        assert!(pt.acc_test.is_some());
        // zero logits: loss is ln(3) on both views
        assert!((pt.f1_train - 3.0_f64.ln()).abs() <= 1e-12);
        assert!((pt.f1_test.unwrap() - 3.0_f64.ln()).abs() <= 1e-12);
        assert_eq!(pt.g2, 0.0);
    }

    #[test]
    fn minibatch_gradient_counts_rows() {
        let p = iris_problem();
        let theta = ParamVector::zeros(p.dim());
        let before = p.counters().snapshot();
        let rows: Vec<usize> = (0..32).collect();
        let _ = p.grad_f1(&theta, BatchSpec::Rows(&rows)).unwrap();
        let after = p.counters().snapshot().since(&before);
        assert_eq!(after.gradient_evals, 1);
        assert_eq!(after.samples_touched, 32);
    }

    #[test]
    fn architecture_dataset_mismatch_rejected() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
        let ds = load_iris(path).unwrap();
        let arch = MlpArchitecture::new(vec![5, 4, 3]).unwrap();
        assert!(MlpProblem::new(arch, ds, None).is_err());
    }
}
