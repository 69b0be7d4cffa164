use std::path::Path;

use ndarray::{Array1, Array2, Axis};

use super::layers::{scaled_dot_attention, scaled_dot_attention_backward, uniform_array2, Linear};
use super::params::{assign_from_tensors, read_tensors, tensor_shape, ParamSet, Tensor, TensorMut};
use super::TokenSeq;
use crate::error::{Error, Result};
use crate::pixel::RngState;

/// Single-query attention block with a residual connection:
/// `x + (softmax(q K^T / sqrt(d)) V) W_o + b_o`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionBlock {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub out: Linear,
}

struct BlockCache {
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    weights: Array2<f64>,
    attended: Array2<f64>,
}

impl AttentionBlock {
    fn zeros(d: usize) -> Self {
        AttentionBlock {
            q: Linear::zeros(d, d),
            k: Linear::zeros(d, d),
            v: Linear::zeros(d, d),
            out: Linear::zeros(d, d),
        }
    }

    fn random(d: usize, rng: &mut RngState) -> Self {
        AttentionBlock {
            q: Linear::random(d, d, rng),
            k: Linear::random(d, d, rng),
            v: Linear::random(d, d, rng),
            out: Linear::random(d, d, rng),
        }
    }

    fn forward(&self, x: &Array2<f64>, ctx: &Array2<f64>) -> (Array2<f64>, BlockCache) {
        let q = self.q.forward(x);
        let k = self.k.forward(ctx);
        let v = self.v.forward(ctx);
        let (weights, attended) = scaled_dot_attention(&q, &k, &v);
        let y = x + &self.out.forward(&attended);
        (y, BlockCache { q, k, v, weights, attended })
    }

    /// Accumulates parameter gradients into `acc`; returns gradients for `(x, ctx)`.
    fn backward(
        &self,
        x: &Array2<f64>,
        ctx: &Array2<f64>,
        cache: &BlockCache,
        grad_y: &Array2<f64>,
        acc: &mut AttentionBlock,
    ) -> (Array2<f64>, Array2<f64>) {
        let (g_out, g_att) = self.out.backward(&cache.attended, grad_y);
        let (gq, gk, gv) = scaled_dot_attention_backward(&cache.q, &cache.k, &cache.v, &cache.weights, &g_att);
        let (g_ql, gx_q) = self.q.backward(x, &gq);
        let (g_kl, gc_k) = self.k.backward(ctx, &gk);
        let (g_vl, gc_v) = self.v.backward(ctx, &gv);
        for (a, g) in [
            (&mut acc.out, g_out),
            (&mut acc.q, g_ql),
            (&mut acc.k, g_kl),
            (&mut acc.v, g_vl),
        ] {
            a.weight += &g.weight;
            a.bias += &g.bias;
        }
        (grad_y + &gx_q, gc_k + gc_v)
    }

    fn push_tensors<'a>(&'a self, prefix: &str, out: &mut Vec<Tensor<'a>>) {
        self.q.push_tensors(&format!("{prefix}.q"), out);
        self.k.push_tensors(&format!("{prefix}.k"), out);
        self.v.push_tensors(&format!("{prefix}.v"), out);
        self.out.push_tensors(&format!("{prefix}.out"), out);
    }

    fn push_tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        self.q.push_tensors_mut(&format!("{prefix}.q"), out);
        self.k.push_tensors_mut(&format!("{prefix}.k"), out);
        self.v.push_tensors_mut(&format!("{prefix}.v"), out);
        self.out.push_tensors_mut(&format!("{prefix}.out"), out);
    }
}

/// Score prediction module: a learnable score token attends to the search
/// region, then to the initial target, and a three-layer perceptron with a
/// sigmoid maps the result to a confidence in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpmParams {
    pub score_token: Array1<f64>,
    pub search_block: AttentionBlock,
    pub target_block: AttentionBlock,
    /// `d -> hidden -> hidden -> 1`, ReLU between layers.
    pub mlp: [Linear; 3],
}

impl SpmParams {
    pub fn zeros(d: usize, hidden: usize) -> Self {
        SpmParams {
            score_token: Array1::zeros(d),
            search_block: AttentionBlock::zeros(d),
            target_block: AttentionBlock::zeros(d),
            mlp: [Linear::zeros(d, hidden), Linear::zeros(hidden, hidden), Linear::zeros(hidden, 1)],
        }
    }

    /// Seeded uniform initialization in `[-0.1, 0.1]`.
    pub fn random(d: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = RngState::new(seed);
        SpmParams {
            score_token: uniform_array2(&mut rng, 1, d).remove_axis(Axis(0)),
            search_block: AttentionBlock::random(d, &mut rng),
            target_block: AttentionBlock::random(d, &mut rng),
            mlp: [
                Linear::random(d, hidden, &mut rng),
                Linear::random(hidden, hidden, &mut rng),
                Linear::random(hidden, 1, &mut rng),
            ],
        }
    }

    pub fn d(&self) -> usize {
        self.score_token.len()
    }

    pub fn hidden(&self) -> usize {
        self.mlp[0].d_out()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let map = read_tensors(path)?;
        let (_, d) = tensor_shape(&map, "score_token", path)?;
        let (_, hidden) = tensor_shape(&map, "mlp0.weight", path)?;
        let mut p = SpmParams::zeros(d, hidden);
        assign_from_tensors(&mut p, map, path)?;
        Ok(p)
    }
}

impl ParamSet for SpmParams {
    fn tensors(&self) -> Vec<Tensor<'_>> {
        let mut out = vec![Tensor::new("score_token".into(), 1, self.d(), &self.score_token)];
        self.search_block.push_tensors("search_block", &mut out);
        self.target_block.push_tensors("target_block", &mut out);
        for (i, l) in self.mlp.iter().enumerate() {
            l.push_tensors(&format!("mlp{i}"), &mut out);
        }
        out
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let d = self.score_token.len();
        let mut out = vec![TensorMut::new("score_token".into(), 1, d, &mut self.score_token)];
        self.search_block.push_tensors_mut("search_block", &mut out);
        self.target_block.push_tensors_mut("target_block", &mut out);
        for (i, l) in self.mlp.iter_mut().enumerate() {
            l.push_tensors_mut(&format!("mlp{i}"), &mut out);
        }
        out
    }
}

/// Forward intermediates of [`spm_score_forward`].
pub struct SpmCache {
    x0: Array2<f64>,
    h1: Array2<f64>,
    h2: Array2<f64>,
    block1: BlockCache,
    block2: BlockCache,
    pre: [Array2<f64>; 3],
    act: [Array2<f64>; 2],
    score: f64,
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_spm(s: &SpmParams, search_roi: &TokenSeq, initial_target: &TokenSeq) -> Result<()> {
    let d = s.d();
    if search_roi.d() != d || initial_target.d() != d {
        return Err(Error::Shape(format!(
            "score token has dim {d}, search tokens {}, target tokens {}",
            search_roi.d(),
            initial_target.d()
        )));
    }
    let blocks_ok = [&s.search_block, &s.target_block].iter().all(|b| {
        [&b.q, &b.k, &b.v, &b.out]
            .iter()
            .all(|l| l.d_in() == d && l.d_out() == d && l.bias.len() == d)
    });
    let h = s.hidden();
    let mlp_ok = s.mlp[0].d_in() == d
        && s.mlp[1].d_in() == h
        && s.mlp[1].d_out() == h
        && s.mlp[2].d_in() == h
        && s.mlp[2].d_out() == 1
        && s.mlp.iter().all(|l| l.bias.len() == l.d_out());
    if !blocks_ok || !mlp_ok {
        return Err(Error::Shape("inconsistent score module parameters".into()));
    }
    Ok(())
}

pub fn spm_score_forward(s: &SpmParams, search_roi: &TokenSeq, initial_target: &TokenSeq) -> Result<SpmCache> {
    check_spm(s, search_roi, initial_target)?;
    let x0 = s.score_token.clone().insert_axis(Axis(0));
    let (h1, block1) = s.search_block.forward(&x0, search_roi.tokens());
    let (h2, block2) = s.target_block.forward(&h1, initial_target.tokens());
    let p0 = s.mlp[0].forward(&h2);
    let a0 = relu(&p0);
    let p1 = s.mlp[1].forward(&a0);
    let a1 = relu(&p1);
    let p2 = s.mlp[2].forward(&a1);
    let z = p2[[0, 0]];
    if !z.is_finite() {
        return Err(Error::Numeric("score logit is not finite".into()));
    }
    // keep the score strictly inside (0, 1) even when the logistic saturates in f64
    let score = sigmoid(z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
    Ok(SpmCache {
        x0,
        h1,
        h2,
        block1,
        block2,
        pre: [p0, p1, p2],
        act: [a0, a1],
        score,
    })
}

impl SpmCache {
    pub fn score(&self) -> f64 {
        self.score
    }
}

/// Template confidence in `(0, 1)`.
pub fn spm_score(s: &SpmParams, search_roi: &TokenSeq, initial_target: &TokenSeq) -> Result<f64> {
    spm_score_forward(s, search_roi, initial_target).map(|c| c.score)
}

/// Gradients of a scalar loss with respect to the score module parameters and its inputs.
#[derive(Debug, Clone)]
pub struct SpmGrads {
    pub params: SpmParams,
    pub search_roi: Array2<f64>,
    pub initial_target: Array2<f64>,
}

/// Backpropagates `d loss / d score` through the module.
pub fn spm_score_backward(
    s: &SpmParams,
    search_roi: &TokenSeq,
    initial_target: &TokenSeq,
    cache: &SpmCache,
    grad_score: f64,
) -> SpmGrads {
    let mut acc = SpmParams::zeros(s.d(), s.hidden());
    let gz = grad_score * cache.score * (1.0 - cache.score);
    let mut g = Array2::from_elem((1, 1), gz);
    let inputs = [&cache.h2, &cache.act[0], &cache.act[1]];
    for layer in (0..3).rev() {
        if layer < 2 {
            // through the ReLU that produced act[layer]
            let mask = cache.pre[layer].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            g = g * mask;
        }
        let (gl, gx) = s.mlp[layer].backward(inputs[layer], &g);
        acc.mlp[layer] = gl;
        g = gx;
    }
    let (g_h1, g_target) = s
        .target_block
        .backward(&cache.h1, initial_target.tokens(), &cache.block2, &g, &mut acc.target_block);
    let (g_x0, g_roi) = s
        .search_block
        .backward(&cache.x0, search_roi.tokens(), &cache.block1, &g_h1, &mut acc.search_block);
    acc.score_token = g_x0.remove_axis(Axis(0));
    SpmGrads {
        params: acc,
        search_roi: g_roi,
        initial_target: g_target,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(n: usize, d: usize, seed: u64) -> TokenSeq {
        let mut rng = RngState::new(seed);
        TokenSeq::from_rows(uniform_array2(&mut rng, n, d) * 10.0).unwrap()
    }

    #[test]
    fn score_in_open_unit_interval_and_repeatable() {
        let p = SpmParams::random(4, 6, 3);
        let (roi, tgt) = (seq(5, 4, 1), seq(3, 4, 2));
        let a = spm_score(&p, &roi, &tgt).unwrap();
        assert!(a > 0.0 && a < 1.0);
        assert_eq!(a, spm_score(&p, &roi, &tgt).unwrap());
    }

    #[test]
    fn saturating_logits_stay_inside_interval() {
        let mut p = SpmParams::random(2, 3, 3);
        p.mlp[2].bias[0] = 30.0;
        let s = spm_score(&p, &seq(2, 2, 1), &seq(2, 2, 2)).unwrap();
        assert!(s < 1.0 && s > 0.99);
        p.mlp[2].bias[0] = -30.0;
        let s = spm_score(&p, &seq(2, 2, 1), &seq(2, 2, 2)).unwrap();
        assert!(s > 0.0 && s < 0.01);
        p.mlp[2].bias[0] = 800.0;
        let s = spm_score(&p, &seq(2, 2, 1), &seq(2, 2, 2)).unwrap();
        assert!(s > 0.0 && s < 1.0);
        p.mlp[2].bias[0] = -800.0;
        let s = spm_score(&p, &seq(2, 2, 1), &seq(2, 2, 2)).unwrap();
        assert!(s > 0.0 && s < 1.0);
    }

    #[test]
    fn shape_errors() {
        let p = SpmParams::random(4, 6, 3);
        assert!(matches!(spm_score(&p, &seq(5, 3, 1), &seq(3, 4, 2)), Err(Error::Shape(_))));
    }
}
