use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{giou, BoundingBox};

/// Weights of the L1 and GIoU terms of the localization loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_l1: f64,
    pub lambda_giou: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_l1: 5.0,
            lambda_giou: 2.0,
        }
    }
}

/// `lambda_l1 * sum |pred - gt|` over `(x, y, w, h)` plus `lambda_giou * (1 - GIoU(gt, pred))`.
pub fn l1_giou_loss(pred: &BoundingBox, gt: &BoundingBox, w: &LossWeights) -> Result<f64> {
    let l1: f64 = pred
        .as_array()
        .iter()
        .zip(gt.as_array())
        .map(|(p, g)| (p - g).abs())
        .sum();
    Ok(w.lambda_l1 * l1 + w.lambda_giou * (1.0 - giou(gt, pred)?))
}

/// Binary cross-entropy `-[y ln p + (1 - y) ln(1 - p)]`, defined for `0 < p < 1`.
pub fn score_loss(p: f64, y: u8) -> Result<f64> {
    check_score_args(p, y)?;
    let y = y as f64;
    Ok(-(y * p.ln() + (1.0 - y) * (1.0 - p).ln()))
}

/// `d score_loss / d p`.
pub fn score_loss_grad(p: f64, y: u8) -> Result<f64> {
    check_score_args(p, y)?;
    let y = y as f64;
    Ok(-y / p + (1.0 - y) / (1.0 - p))
}

fn check_score_args(p: f64, y: u8) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Param(format!("confidence must lie strictly in (0, 1), got {p}")));
    }
    if y > 1 {
        return Err(Error::Param(format!("label must be 0 or 1, got {y}")));
    }
    Ok(())
}

/// Gradient of the localization loss with respect to the predicted `(x, y, w, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGradient {
    pub grad: [f64; 4],
    /// Coordinates within `tol` of a point where the loss is not differentiable
    /// (an L1 zero crossing or a min/max switch inside the GIoU term).
    pub kinks: [bool; 4],
}

/// Edge-space partials of one axis of `1 - GIoU`: returns `d/d(lo)`, `d/d(hi)` of
/// intersection length, hull length, and kink flags for `(lo, hi)`.
struct AxisTerms {
    inter: f64,
    hull: f64,
    d_inter: [f64; 2],
    d_hull: [f64; 2],
    kink: [bool; 2],
}

fn axis_terms(p_lo: f64, p_hi: f64, g_lo: f64, g_hi: f64, tol: f64) -> AxisTerms {
    let lo = p_lo.max(g_lo);
    let hi = p_hi.min(g_hi);
    let inter = (hi - lo).max(0.0);
    let overlapping = hi - lo > 0.0;
    let d_inter = [
        if overlapping && p_lo > g_lo { -1.0 } else { 0.0 },
        if overlapping && p_hi < g_hi { 1.0 } else { 0.0 },
    ];
    let hull = p_hi.max(g_hi) - p_lo.min(g_lo);
    let d_hull = [
        if p_lo < g_lo { -1.0 } else { 0.0 },
        if p_hi > g_hi { 1.0 } else { 0.0 },
    ];
    let near_empty = (hi - lo).abs() <= tol;
    let kink = [
        (p_lo - g_lo).abs() <= tol || near_empty,
        (p_hi - g_hi).abs() <= tol || near_empty,
    ];
    AxisTerms {
        inter,
        hull,
        d_inter,
        d_hull,
        kink,
    }
}

/// Analytic gradient of `1 - GIoU(gt, pred)` with respect to the predicted `(x, y, w, h)`.
pub fn giou_loss_grad(pred: &BoundingBox, gt: &BoundingBox, tol: f64) -> Result<BoxGradient> {
    giou(gt, pred)?;
    let ax = axis_terms(pred.x, pred.right(), gt.x, gt.right(), tol);
    let ay = axis_terms(pred.y, pred.bottom(), gt.y, gt.bottom(), tol);

    let inter = ax.inter * ay.inter;
    let union = pred.area() + gt.area() - inter;
    let hull = ax.hull * ay.hull;

    // partials w.r.t. the edges [x1, x2, y1, y2]
    let d_inter = [
        ax.d_inter[0] * ay.inter,
        ax.d_inter[1] * ay.inter,
        ay.d_inter[0] * ax.inter,
        ay.d_inter[1] * ax.inter,
    ];
    let d_area = [-pred.h, pred.h, -pred.w, pred.w];
    let d_hull = [
        ax.d_hull[0] * ay.hull,
        ax.d_hull[1] * ay.hull,
        ay.d_hull[0] * ax.hull,
        ay.d_hull[1] * ax.hull,
    ];
    let mut d_edges = [0.0; 4];
    for e in 0..4 {
        let d_union = d_area[e] - d_inter[e];
        // GIoU = I/U - 1 + U/C
        let d_giou = d_inter[e] / union - inter * d_union / (union * union) + d_union / hull
            - union * d_hull[e] / (hull * hull);
        d_edges[e] = -d_giou;
    }
    let edge_kinks = [ax.kink[0], ax.kink[1], ay.kink[0], ay.kink[1]];
    Ok(BoxGradient {
        // x moves both x-edges, w only the far one
        grad: [
            d_edges[0] + d_edges[1],
            d_edges[2] + d_edges[3],
            d_edges[1],
            d_edges[3],
        ],
        kinks: [
            edge_kinks[0] || edge_kinks[1],
            edge_kinks[2] || edge_kinks[3],
            edge_kinks[1],
            edge_kinks[3],
        ],
    })
}

/// Analytic gradient of [`l1_giou_loss`] with respect to the predicted box.
pub fn l1_giou_loss_grad(
    pred: &BoundingBox,
    gt: &BoundingBox,
    w: &LossWeights,
    tol: f64,
) -> Result<BoxGradient> {
    let g = giou_loss_grad(pred, gt, tol)?;
    let mut out = BoxGradient {
        grad: [0.0; 4],
        kinks: g.kinks,
    };
    for (i, (p, t)) in pred.as_array().iter().zip(gt.as_array()).enumerate() {
        let diff = p - t;
        let sign = if diff > 0.0 { 1.0 } else if diff < 0.0 { -1.0 } else { 0.0 };
        out.grad[i] = w.lambda_l1 * sign + w.lambda_giou * g.grad[i];
        out.kinks[i] |= diff.abs() <= tol;
    }
    Ok(out)
}
