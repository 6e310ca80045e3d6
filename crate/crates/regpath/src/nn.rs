//! Dense multilayer perceptron with hand-written backprop: ReLU hidden
//! layers, identity logits, softmax cross-entropy loss.
//!
//! Parameters are flattened layer by layer, weights (row-major, out x in)
//! before biases. The ReLU subgradient at exactly zero is fixed to 0, so
//! dead units stay dead and evaluation is deterministic. Losses are batch
//! means, accumulated in f64.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::param::ParamVector;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpArchitecture {
    layer_sizes: Vec<usize>,
}

impl MlpArchitecture {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidArgument(
                "architecture needs at least input and output layers".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArgument("layer sizes must be >= 1".into()));
        }
        Ok(Self { layer_sizes })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }
}

/// Exact flat parameter count: sum of `in*out + out` over consecutive pairs.
pub fn mlp_param_count(arch: &MlpArchitecture) -> usize {
    arch.layer_sizes()
        .windows(2)
        .map(|w| w[0] * w[1] + w[1])
        .sum()
}

/// I.i.d. uniform(-scale, scale) init, deterministic per seed. Weights and
/// biases share the scheme.
pub fn mlp_init(arch: &MlpArchitecture, scale: f64, seed: u64) -> ParamVector {
    assert!(scale >= 0.0, "init scale must be nonnegative");
    let n = mlp_param_count(arch);
    if scale == 0.0 {
        return ParamVector::zeros(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ParamVector::from_fn(n, |_| rng.gen_range(-scale..scale))
}

/// A materialized minibatch.
#[derive(Debug, Clone)]
pub struct Batch {
    pub inputs: Matrix,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn new(inputs: Matrix, labels: Vec<usize>) -> Self {
        assert_eq!(inputs.rows(), labels.len(), "batch size mismatch");
        Self { inputs, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Borrowed offsets of one layer's weights and biases inside the flat vector.
struct LayerView<'a> {
    w: &'a [f64],
    b: &'a [f64],
    rows: usize,
    cols: usize,
}

fn layer_views<'a>(arch: &MlpArchitecture, theta: &'a [f64]) -> Vec<LayerView<'a>> {
    let mut views = Vec::with_capacity(arch.num_layers());
    let mut off = 0;
    for w in arch.layer_sizes().windows(2) {
        let (rows, cols) = (w[1], w[0]);
        let wlen = rows * cols;
        views.push(LayerView {
            w: &theta[off..off + wlen],
            b: &theta[off + wlen..off + wlen + rows],
            rows,
            cols,
        });
        off += wlen + rows;
    }
    views
}

fn check_theta(arch: &MlpArchitecture, theta: &ParamVector) -> Result<()> {
    let expect = mlp_param_count(arch);
    if theta.len() != expect {
        return Err(Error::DimensionMismatch {
            context: "mlp parameters".into(),
            expected: expect,
            actual: theta.len(),
        });
    }
    Ok(())
}

fn row_of<'a>(inputs: &'a Matrix, rows: Option<&[usize]>, k: usize) -> &'a [f64] {
    match rows {
        None => inputs.row(k),
        Some(idx) => inputs.row(idx[k]),
    }
}

fn batch_len(inputs: &Matrix, rows: Option<&[usize]>) -> usize {
    rows.map_or(inputs.rows(), |r| r.len())
}

/// Stable log-sum-exp of logits with max subtraction; returns (lse, max).
fn log_sum_exp(z: &[f64]) -> (f64, f64) {
    let zmax = z.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let s: f64 = z.iter().map(|&v| (v - zmax).exp()).sum();
    (s.ln() + zmax, zmax)
}

/// Mean softmax cross-entropy over the selected rows; forward pass only.
pub fn loss_on(
    arch: &MlpArchitecture,
    theta: &ParamVector,
    inputs: &Matrix,
    labels: &[usize],
    rows: Option<&[usize]>,
) -> Result<f64> {
    check_theta(arch, theta)?;
    let views = layer_views(arch, theta.as_slice());
    let n = batch_len(inputs, rows);
    if n == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let mut total = 0.0;
    let mut act = Vec::new();
    for k in 0..n {
        let x = row_of(inputs, rows, k);
        let label = match rows {
            None => labels[k],
            Some(idx) => labels[idx[k]],
        };
        let z = forward(&views, x, &mut act)?;
        let (lse, _) = log_sum_exp(z);
        total += lse - z[label];
    }
    let loss = total / n as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite("cross-entropy loss".into()));
    }
    Ok(loss)
}

/// Runs the forward pass through `views`, storing post-activations in `act`
/// (layer by layer, re-used buffer). Returns the final logits slice.
fn forward<'a>(views: &[LayerView], x: &[f64], act: &'a mut Vec<Vec<f64>>) -> Result<&'a [f64]> {
    act.clear();
    act.push(x.to_vec());
    let last = views.len() - 1;
    for (l, v) in views.iter().enumerate() {
        let prev = &act[l];
        debug_assert_eq!(prev.len(), v.cols);
        let mut z = Vec::with_capacity(v.rows);
        for r in 0..v.rows {
            let wrow = &v.w[r * v.cols..(r + 1) * v.cols];
            let mut s = v.b[r];
            for (wi, ai) in wrow.iter().zip(prev) {
                s += wi * ai;
            }
            if !s.is_finite() {
                return Err(Error::NonFinite("pre-activation".into()));
            }
            // hidden layers use ReLU; the last layer emits raw logits
            z.push(if l < last { s.max(0.0) } else { s });
        }
        act.push(z);
    }
    Ok(act.last().unwrap())
}

/// Mean cross-entropy and its exact gradient via reverse-mode accumulation.
pub fn loss_and_grad_on(
    arch: &MlpArchitecture,
    theta: &ParamVector,
    inputs: &Matrix,
    labels: &[usize],
    rows: Option<&[usize]>,
) -> Result<(f64, ParamVector)> {
    check_theta(arch, theta)?;
    let views = layer_views(arch, theta.as_slice());
    let n = batch_len(inputs, rows);
    if n == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let num_layers = views.len();
    let mut grad = vec![0.0; theta.len()];
    let mut total = 0.0;
    let inv_n = 1.0 / n as f64;

    // per-sample forward + backward; activations kept per layer
    let mut act: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let x = row_of(inputs, rows, k);
        let label = match rows {
            None => labels[k],
            Some(idx) => labels[idx[k]],
        };
        if label >= arch.output_dim() {
            return Err(Error::InvalidArgument(format!(
                "label {label} out of range for {} classes",
                arch.output_dim()
            )));
        }
        let z = forward(&views, x, &mut act)?;
        let (lse, zmax) = log_sum_exp(z);
        total += lse - z[label];

        // delta at the output: (softmax - onehot) / n
        let denom: f64 = z.iter().map(|&v| (v - zmax).exp()).sum();
        let mut delta: Vec<f64> = z
            .iter()
            .map(|&v| (v - zmax).exp() / denom * inv_n)
            .collect();
        delta[label] -= inv_n;

        // reverse pass
        let mut off_end = theta.len();
        for l in (0..num_layers).rev() {
            let v = &views[l];
            let wlen = v.rows * v.cols;
            let off = off_end - wlen - v.rows;
            let prev = &act[l];
            // bias gradient
            for r in 0..v.rows {
                grad[off + wlen + r] += delta[r];
            }
            // weight gradient: delta outer prev
            for r in 0..v.rows {
                let d = delta[r];
                if d != 0.0 {
                    let gw = &mut grad[off + r * v.cols..off + (r + 1) * v.cols];
                    for (g, a) in gw.iter_mut().zip(prev) {
                        *g += d * a;
                    }
                }
            }
            if l > 0 {
                // propagate through W^T, then the ReLU mask of layer l-1
                let mut next = vec![0.0; v.cols];
                for r in 0..v.rows {
                    let d = delta[r];
                    if d != 0.0 {
                        let wrow = &v.w[r * v.cols..(r + 1) * v.cols];
                        for (nj, wj) in next.iter_mut().zip(wrow) {
                            *nj += d * wj;
                        }
                    }
                }
                // act[l] holds ReLU outputs of layer l-1; derivative is 0 at 0
                for (nj, aj) in next.iter_mut().zip(&act[l]) {
                    if *aj <= 0.0 {
                        *nj = 0.0;
                    }
                }
                delta = next;
            }
            off_end = off;
        }
    }

    let loss = total * inv_n;
    if !loss.is_finite() {
        return Err(Error::NonFinite("cross-entropy loss".into()));
    }
    Ok((loss, ParamVector::try_new(grad, "mlp gradient")?))
}

pub fn loss_and_grad(
    arch: &MlpArchitecture,
    theta: &ParamVector,
    batch: &Batch,
) -> Result<(f64, ParamVector)> {
    loss_and_grad_on(arch, theta, &batch.inputs, &batch.labels, None)
}

/// Fraction of argmax-correct predictions, ties broken toward the lowest
/// class index.
pub fn accuracy_on(
    arch: &MlpArchitecture,
    theta: &ParamVector,
    inputs: &Matrix,
    labels: &[usize],
    rows: Option<&[usize]>,
) -> Result<f64> {
    check_theta(arch, theta)?;
    let views = layer_views(arch, theta.as_slice());
    let n = batch_len(inputs, rows);
    if n == 0 {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let mut correct = 0usize;
    let mut act = Vec::new();
    for k in 0..n {
        let x = row_of(inputs, rows, k);
        let label = match rows {
            None => labels[k],
            Some(idx) => labels[idx[k]],
        };
        let z = forward(&views, x, &mut act)?;
        let mut arg = 0;
        for (j, &v) in z.iter().enumerate() {
            if v > z[arg] {
                arg = j;
            }
        }
        if arg == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / n as f64)
}

pub fn accuracy(arch: &MlpArchitecture, theta: &ParamVector, batch: &Batch) -> Result<f64> {
    accuracy_on(arch, theta, &batch.inputs, &batch.labels, None)
}

/// Smallest absolute hidden-layer pre-activation over the selected rows.
/// Used to reject finite-difference probes near ReLU kinks.
pub fn min_preactivation_abs(
    arch: &MlpArchitecture,
    theta: &ParamVector,
    inputs: &Matrix,
    rows: Option<&[usize]>,
) -> Result<f64> {
    check_theta(arch, theta)?;
    let views = layer_views(arch, theta.as_slice());
    let n = batch_len(inputs, rows);
    let last = views.len() - 1;
    let mut min_abs = f64::INFINITY;
    let mut act = Vec::new();
    for k in 0..n {
        let x = row_of(inputs, rows, k);
        act.clear();
        act.push(x.to_vec());
        for (l, v) in views.iter().enumerate() {
            let prev = &act[l];
            let mut z = Vec::with_capacity(v.rows);
            for r in 0..v.rows {
                let wrow = &v.w[r * v.cols..(r + 1) * v.cols];
                let mut s = v.b[r];
                for (wi, ai) in wrow.iter().zip(prev) {
                    s += wi * ai;
                }
                if l < last {
                    min_abs = min_abs.min(s.abs());
                    z.push(s.max(0.0));
                } else {
                    z.push(s);
                }
            }
            act.push(z);
        }
    }
    Ok(min_abs)
}
