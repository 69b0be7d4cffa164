use ndarray::Array2;
use serde::Serialize;

use super::attention::{mixed_attention_backward, mixed_attention_forward, MamParams};
use super::loss::{giou_loss_grad, l1_giou_loss, l1_giou_loss_grad, score_loss, score_loss_grad, LossWeights};
use super::params::ParamSet;
use super::spm::{spm_score_backward, spm_score_forward, SpmParams};
use super::TokenSeq;
use crate::error::{Error, Result};
use crate::metrics::{giou, BoundingBox};

/// Relative errors use `max(|analytic|, |numeric|, REL_FLOOR)` as the denominator.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheckConfig {
    pub epsilon: f64,
    pub tolerance: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            epsilon: 1e-5,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub checked: usize,
    /// Coordinates skipped because the function has a kink within `epsilon`.
    pub skipped: Vec<usize>,
    pub max_rel_error: f64,
    pub worst_index: Option<usize>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.tolerance
    }
}

/// Compares `analytic` against central finite differences of `f` at `x0`.
pub fn grad_check(
    x0: &[f64],
    analytic: &[f64],
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    cfg: &GradCheckConfig,
    skip: impl Fn(usize) -> bool,
) -> Result<GradCheckReport> {
    if cfg.epsilon.is_nan() || cfg.epsilon <= 0.0 {
        return Err(Error::Param(format!("epsilon must be > 0, got {}", cfg.epsilon)));
    }
    if x0.len() != analytic.len() {
        return Err(Error::Shape(format!(
            "{} parameters but {} analytic gradients",
            x0.len(),
            analytic.len()
        )));
    }
    let mut x = x0.to_vec();
    let mut report = GradCheckReport {
        checked: 0,
        skipped: Vec::new(),
        max_rel_error: 0.0,
        worst_index: None,
        tolerance: cfg.tolerance,
    };
    for i in 0..x.len() {
        if skip(i) {
            report.skipped.push(i);
            continue;
        }
        x[i] = x0[i] + cfg.epsilon;
        let up = f(&x)?;
        x[i] = x0[i] - cfg.epsilon;
        let down = f(&x)?;
        x[i] = x0[i];
        let numeric = (up - down) / (2.0 * cfg.epsilon);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
        report.checked += 1;
        if report.worst_index.is_none() || rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_index = Some(i);
        }
    }
    Ok(report)
}

/// Checks mixed-attention parameter gradients on the scalar `sum(G_t * out_t) + sum(G_s * out_s)`.
pub fn check_mixed_attention(
    target: &TokenSeq,
    search: &TokenSeq,
    params: &MamParams,
    upstream_target: &Array2<f64>,
    upstream_search: &Array2<f64>,
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    let (_, _, cache) = mixed_attention_forward(target, search, params)?;
    let grads = mixed_attention_backward(target, search, params, &cache, upstream_target, upstream_search)?;
    let x0 = params.flatten();
    let mut probe = params.clone();
    grad_check(
        &x0,
        &grads.params.flatten(),
        |x| {
            probe.assign(x);
            let (ot, os, _) = mixed_attention_forward(target, search, &probe)?;
            Ok((ot.tokens() * upstream_target).sum() + (os.tokens() * upstream_search).sum())
        },
        cfg,
        |_| false,
    )
}

/// Checks score-module gradients of `score_loss(spm_score(..), label)`.
pub fn check_spm_score(
    params: &SpmParams,
    search_roi: &TokenSeq,
    initial_target: &TokenSeq,
    label: u8,
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    let cache = spm_score_forward(params, search_roi, initial_target)?;
    let g = score_loss_grad(cache.score(), label)?;
    let grads = spm_score_backward(params, search_roi, initial_target, &cache, g);
    let mut probe = params.clone();
    grad_check(
        &params.flatten(),
        &grads.params.flatten(),
        |x| {
            probe.assign(x);
            score_loss(spm_score_forward(&probe, search_roi, initial_target)?.score(), label)
        },
        cfg,
        |_| false,
    )
}

fn box_from(x: &[f64]) -> Result<BoundingBox> {
    BoundingBox::new(x[0], x[1], x[2], x[3])
}

/// Checks the gradient of the full localization loss with respect to the predicted box.
pub fn check_l1_giou_loss(
    pred: &BoundingBox,
    gt: &BoundingBox,
    w: &LossWeights,
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    let g = l1_giou_loss_grad(pred, gt, w, cfg.epsilon)?;
    grad_check(
        &pred.as_array(),
        &g.grad,
        |x| l1_giou_loss(&box_from(x)?, gt, w),
        cfg,
        |i| g.kinks[i],
    )
}

/// Checks the gradient of the GIoU term `1 - GIoU(gt, pred)` alone.
pub fn check_giou_term(pred: &BoundingBox, gt: &BoundingBox, cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let g = giou_loss_grad(pred, gt, cfg.epsilon)?;
    grad_check(
        &pred.as_array(),
        &g.grad,
        |x| Ok(1.0 - giou(gt, &box_from(x)?)?),
        cfg,
        |i| g.kinks[i],
    )
}

pub fn check_score_loss(p: f64, label: u8, cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    grad_check(
        &[p],
        &[score_loss_grad(p, label)?],
        |x| score_loss(x[0], label),
        cfg,
        |_| false,
    )
}
