//! Toy-scale tracking machinery: mixed attention over template and search
//! tokens, the localization and score losses with analytic gradients, the
//! score-gated template update, and a classical NCC baseline tracker.

mod attention;
mod gradcheck;
mod layers;
mod loss;
mod ncc;
mod params;
mod spm;
mod template;
mod tokens;

pub use self::attention::{
    depthwise_projection, mixed_attention, mixed_attention_backward, mixed_attention_forward, MamCache,
    MamGrads, MamParams, DEFAULT_KERNEL_SIZE,
};
pub use self::gradcheck::{
    check_giou_term, check_l1_giou_loss, check_mixed_attention, check_score_loss, check_spm_score,
    grad_check, GradCheckConfig, GradCheckReport, REL_FLOOR,
};
pub use self::layers::{scaled_dot_attention, softmax_rows, DepthwiseKernel, Linear, INIT_RANGE};
pub use self::loss::{
    giou_loss_grad, l1_giou_loss, l1_giou_loss_grad, score_loss, score_loss_grad, BoxGradient, LossWeights,
};
pub use self::ncc::{ncc_track, NccConfig, NccTracker};
pub use self::params::{
    params_to_string, parse_tensors, save_params, ParamSet, Tensor, TensorMap, TensorMut, PARAMS_HEADER,
};
pub use self::spm::{spm_score, spm_score_backward, spm_score_forward, AttentionBlock, SpmCache, SpmGrads, SpmParams};
pub use self::template::{update_template, TemplateState, ACCEPT_THRESHOLD};
pub use self::tokens::TokenSeq;
