//! Score prediction and the confidence-gated template update.

use ndarray::Array2;
use nightbench::tracker::{
    check_spm_score, score_loss, spm_score, update_template, GradCheckConfig, SpmParams, TemplateState, TokenSeq,
};

fn tokens(n: usize, d: usize, seed: f64) -> TokenSeq {
    TokenSeq::from_rows(Array2::from_shape_fn((n, d), |(i, j)| ((i + 2 * j) as f64 + seed).cos())).unwrap()
}

fn main() -> nightbench::Result<()> {
    let d = 4;
    let spm = SpmParams::random(d, 8, 3);
    let initial = tokens(4, d, 0.0);
    let roi = tokens(9, d, 0.5);

    let p = spm_score(&spm, &roi, &initial)?;
    println!("score {p:.4}, loss vs positive {:.4}, vs negative {:.4}", score_loss(p, 1)?, score_loss(p, 0)?);

    let r = check_spm_score(&spm, &roi, &initial, 1, &GradCheckConfig::default())?;
    println!("score-module gradient check: {} params, max rel error {:.2e}", r.checked, r.max_rel_error);

    let mut state = TemplateState::new(initial.clone());
    for (i, conf) in [0.49, 0.5, 0.51, 0.1].into_iter().enumerate() {
        let candidate = tokens(4, d, i as f64 + 1.0);
        state = update_template(&state, &candidate, conf);
        println!(
            "confidence {conf:.2}: online template {}, initial untouched: {}",
            if state.online() == &candidate { "replaced" } else { "kept" },
            state.initial() == &initial
        );
    }
    Ok(())
}
