use ndarray::{s, Array1, Array2, Array3, Axis};
use rand::Rng;
use rand_distr::Uniform;

use super::params::{ParamSet, Tensor, TensorMut};
use crate::error::{Error, Result};
use crate::pixel::RngState;

/// Half-width of the seeded uniform initialization range.
pub const INIT_RANGE: f64 = 0.1;

pub(crate) fn uniform_array2(rng: &mut RngState, rows: usize, cols: usize) -> Array2<f64> {
    let dist = Uniform::new_inclusive(-INIT_RANGE, INIT_RANGE).expect("valid range");
    Array2::from_shape_simple_fn((rows, cols), || rng.inner_mut().sample(dist))
}

/// Affine map on row vectors: `y = x W + b`, with `W` of shape `d_in x d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        Linear {
            weight: Array2::zeros((d_in, d_out)),
            bias: Array1::zeros(d_out),
        }
    }

    pub fn identity(d: usize) -> Self {
        Linear {
            weight: Array2::eye(d),
            bias: Array1::zeros(d),
        }
    }

    pub fn random(d_in: usize, d_out: usize, rng: &mut RngState) -> Self {
        let weight = uniform_array2(rng, d_in, d_out);
        let bias = uniform_array2(rng, 1, d_out).remove_axis(Axis(0));
        Linear { weight, bias }
    }

    pub fn d_in(&self) -> usize {
        self.weight.nrows()
    }

    pub fn d_out(&self) -> usize {
        self.weight.ncols()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.weight) + &self.bias
    }

    /// Returns parameter gradients and the gradient with respect to `x`.
    pub fn backward(&self, x: &Array2<f64>, grad_out: &Array2<f64>) -> (Linear, Array2<f64>) {
        let grads = Linear {
            // x.t() is column-major, and so can be the product
            weight: x.t().dot(grad_out).as_standard_layout().into_owned(),
            bias: grad_out.sum_axis(Axis(0)),
        };
        (grads, grad_out.dot(&self.weight.t()))
    }

    pub(crate) fn push_tensors<'a>(&'a self, prefix: &str, out: &mut Vec<Tensor<'a>>) {
        out.push(Tensor::new(format!("{prefix}.weight"), self.d_in(), self.d_out(), &self.weight));
        out.push(Tensor::new(format!("{prefix}.bias"), 1, self.d_out(), &self.bias));
    }

    pub(crate) fn push_tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        let (r, c) = self.weight.dim();
        out.push(TensorMut::new(format!("{prefix}.weight"), r, c, &mut self.weight));
        out.push(TensorMut::new(format!("{prefix}.bias"), 1, c, &mut self.bias));
    }
}

impl ParamSet for Linear {
    fn tensors(&self) -> Vec<Tensor<'_>> {
        let mut out = Vec::new();
        self.push_tensors("linear", &mut out);
        out
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = Vec::new();
        self.push_tensors_mut("linear", &mut out);
        out
    }
}

/// Per-channel `k x k` spatial filter (`weights[channel, row, col]`), `k` odd.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthwiseKernel {
    pub weights: Array3<f64>,
}

impl DepthwiseKernel {
    pub fn new(weights: Array3<f64>) -> Result<Self> {
        let (_, kh, kw) = weights.dim();
        if kh != kw || kh % 2 == 0 {
            return Err(Error::Shape(format!("depthwise kernel must be odd and square, got {kh}x{kw}")));
        }
        Ok(DepthwiseKernel { weights })
    }

    pub fn zeros(channels: usize, size: usize) -> Self {
        DepthwiseKernel {
            weights: Array3::zeros((channels, size, size)),
        }
    }

    /// Center tap 1, all others 0.
    pub fn identity(channels: usize, size: usize) -> Self {
        let mut k = Self::zeros(channels, size);
        k.weights.slice_mut(s![.., size / 2, size / 2]).fill(1.0);
        k
    }

    pub fn random(channels: usize, size: usize, rng: &mut RngState) -> Self {
        let flat = uniform_array2(rng, channels, size * size);
        DepthwiseKernel {
            weights: flat.into_shape_with_order((channels, size, size)).expect("shape matches"),
        }
    }

    pub fn channels(&self) -> usize {
        self.weights.dim().0
    }

    pub fn size(&self) -> usize {
        self.weights.dim().1
    }

    pub(crate) fn push_tensor<'a>(&'a self, name: &str, out: &mut Vec<Tensor<'a>>) {
        let k = self.size();
        out.push(Tensor::new(name.to_string(), self.channels(), k * k, &self.weights));
    }

    pub(crate) fn push_tensor_mut<'a>(&'a mut self, name: &str, out: &mut Vec<TensorMut<'a>>) {
        let (c, k, _) = self.weights.dim();
        out.push(TensorMut::new(name.to_string(), c, k * k, &mut self.weights));
    }
}

fn check_depthwise(x: &Array2<f64>, rows: usize, cols: usize, kernel: &DepthwiseKernel) -> Result<()> {
    let (n, d) = x.dim();
    if rows * cols != n {
        return Err(Error::Shape(format!("layout {rows}x{cols} does not hold {n} tokens")));
    }
    if kernel.channels() != d {
        return Err(Error::Shape(format!(
            "kernel has {} channels, tokens have {d}",
            kernel.channels()
        )));
    }
    let (_, kh, kw) = kernel.weights.dim();
    if kh != kw || kh % 2 == 0 {
        return Err(Error::Shape(format!("depthwise kernel must be odd and square, got {kh}x{kw}")));
    }
    Ok(())
}

/// Visits every `(output token, input token, tap row, tap col)` pair inside the zero-padded grid.
fn for_each_tap(rows: usize, cols: usize, k: usize, mut f: impl FnMut(usize, usize, usize, usize)) {
    let half = (k / 2) as isize;
    for r in 0..rows {
        for c in 0..cols {
            for a in 0..k {
                let rr = r as isize + a as isize - half;
                if rr < 0 || rr >= rows as isize {
                    continue;
                }
                for b in 0..k {
                    let cc = c as isize + b as isize - half;
                    if cc < 0 || cc >= cols as isize {
                        continue;
                    }
                    f(r * cols + c, rr as usize * cols + cc as usize, a, b);
                }
            }
        }
    }
}

/// Zero-padded, stride-1, shape-preserving per-channel convolution of tokens on their grid.
pub(crate) fn depthwise_forward(
    x: &Array2<f64>,
    rows: usize,
    cols: usize,
    kernel: &DepthwiseKernel,
) -> Result<Array2<f64>> {
    check_depthwise(x, rows, cols, kernel)?;
    let d = x.ncols();
    let mut out = Array2::zeros(x.dim());
    for_each_tap(rows, cols, kernel.size(), |o, i, a, b| {
        for ch in 0..d {
            out[[o, ch]] += kernel.weights[[ch, a, b]] * x[[i, ch]];
        }
    });
    Ok(out)
}

/// Gradients of the depthwise convolution with respect to the kernel and the input.
pub(crate) fn depthwise_backward(
    x: &Array2<f64>,
    rows: usize,
    cols: usize,
    kernel: &DepthwiseKernel,
    grad_out: &Array2<f64>,
) -> (DepthwiseKernel, Array2<f64>) {
    let d = x.ncols();
    let mut gk = DepthwiseKernel::zeros(d, kernel.size());
    let mut gx = Array2::zeros(x.dim());
    for_each_tap(rows, cols, kernel.size(), |o, i, a, b| {
        for ch in 0..d {
            gk.weights[[ch, a, b]] += grad_out[[o, ch]] * x[[i, ch]];
            gx[[i, ch]] += grad_out[[o, ch]] * kernel.weights[[ch, a, b]];
        }
    });
    (gk, gx)
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Backward of row-wise softmax given its output `p` and upstream gradient.
pub(crate) fn softmax_rows_backward(p: &Array2<f64>, grad_p: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(p.dim());
    for ((pr, gr), mut or) in p.rows().into_iter().zip(grad_p.rows()).zip(out.rows_mut()) {
        let dot: f64 = pr.iter().zip(gr.iter()).map(|(a, b)| a * b).sum();
        for ((o, pv), gv) in or.iter_mut().zip(pr.iter()).zip(gr.iter()) {
            *o = pv * (gv - dot);
        }
    }
    out
}

/// Scaled dot-product attention `softmax(q k^T / sqrt(d)) v`; returns `(weights, output)`.
pub fn scaled_dot_attention(
    q: &Array2<f64>,
    k: &Array2<f64>,
    v: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>) {
    let scale = 1.0 / (q.ncols() as f64).sqrt();
    let weights = softmax_rows(&(q.dot(&k.t()) * scale));
    let out = weights.dot(v);
    (weights, out)
}

/// Backward of [`scaled_dot_attention`]; returns gradients for `(q, k, v)`.
pub(crate) fn scaled_dot_attention_backward(
    q: &Array2<f64>,
    k: &Array2<f64>,
    v: &Array2<f64>,
    weights: &Array2<f64>,
    grad_out: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let scale = 1.0 / (q.ncols() as f64).sqrt();
    let grad_v = weights.t().dot(grad_out);
    let grad_w = grad_out.dot(&v.t());
    let grad_logits = softmax_rows_backward(weights, &grad_w) * scale;
    let grad_q = grad_logits.dot(k);
    let grad_k = grad_logits.t().dot(q);
    (grad_q, grad_k, grad_v)
}
