use super::TokenSeq;

/// Online templates scoring below this confidence are rejected.
pub const ACCEPT_THRESHOLD: f64 = 0.5;

/// Fixed first-frame template plus the current online template.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateState {
    initial: TokenSeq,
    online: TokenSeq,
    last_confidence: Option<f64>,
}

impl TemplateState {
    pub fn new(initial: TokenSeq) -> Self {
        TemplateState {
            online: initial.clone(),
            initial,
            last_confidence: None,
        }
    }

    pub fn initial(&self) -> &TokenSeq {
        &self.initial
    }

    pub fn online(&self) -> &TokenSeq {
        &self.online
    }

    /// Confidence of the most recently accepted online template.
    pub fn last_confidence(&self) -> Option<f64> {
        self.last_confidence
    }
}

/// Replaces the online template when `confidence >= 0.5`; otherwise returns the
/// state unchanged. The initial template is never touched.
pub fn update_template(state: &TemplateState, candidate: &TokenSeq, confidence: f64) -> TemplateState {
    if confidence >= ACCEPT_THRESHOLD {
        TemplateState {
            initial: state.initial.clone(),
            online: candidate.clone(),
            last_confidence: Some(confidence),
        }
    } else {
        state.clone()
    }
}
