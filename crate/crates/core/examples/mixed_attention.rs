//! Forward pass of the mixed attention module and a finite-difference check
//! of its hand-written backward pass.

use ndarray::Array2;
use nightbench::tracker::{
    check_mixed_attention, mixed_attention_forward, GradCheckConfig, MamParams, TokenSeq,
};

fn grid(rows: usize, cols: usize, d: usize, phase: f64) -> TokenSeq {
    let t = Array2::from_shape_fn((rows * cols, d), |(i, j)| ((i * d + j) as f64 * 0.37 + phase).sin());
    TokenSeq::new(t, rows, cols).expect("valid tokens")
}

fn main() -> nightbench::Result<()> {
    let d = 4;
    let target = grid(2, 2, d, 0.0);
    let search = grid(3, 3, d, 1.0);
    let params = MamParams::random(d, 3, 11);

    let (out_t, out_s, cache) = mixed_attention_forward(&target, &search, &params)?;
    println!("target {:?} -> {:?}", target.tokens().dim(), out_t.tokens().dim());
    println!("search {:?} -> {:?}", search.tokens().dim(), out_s.tokens().dim());
    println!(
        "target queries attend over {} keys; first row sums to {:.12}",
        cache.weights_target.ncols(),
        cache.weights_target.row(0).sum()
    );

    let ut = Array2::from_elem(out_t.tokens().dim(), 1.0);
    let us = Array2::from_shape_fn(out_s.tokens().dim(), |(i, j)| (i as f64 - j as f64) * 0.1);
    let report = check_mixed_attention(&target, &search, &params, &ut, &us, &GradCheckConfig::default())?;
    println!(
        "gradient check over {} parameters: max relative error {:.2e} ({})",
        report.checked,
        report.max_rel_error,
        if report.passed() { "ok" } else { "FAILED" }
    );
    Ok(())
}
