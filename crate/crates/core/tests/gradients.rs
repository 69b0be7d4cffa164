mod common;

use common::*;
use ndarray::Array2;
use nightbench::metrics::BoundingBox;
use nightbench::tracker::{
    check_giou_term, check_l1_giou_loss, check_mixed_attention, check_score_loss, check_spm_score, grad_check,
    l1_giou_loss, l1_giou_loss_grad, mixed_attention_backward, mixed_attention_forward, score_loss, score_loss_grad,
    spm_score_backward, spm_score_forward, GradCheckConfig, LossWeights, MamParams, ParamSet, SpmParams, TokenSeq,
};
use rand::Rng;

fn cfg() -> GradCheckConfig {
    GradCheckConfig::default()
}

fn with_tokens(like: &TokenSeq, flat: &[f64]) -> TokenSeq {
    let (r, c) = like.layout();
    TokenSeq::new(Array2::from_shape_vec(like.tokens().dim(), flat.to_vec()).unwrap(), r, c).unwrap()
}

#[test]
fn mixed_attention_parameter_gradients() {
    let mut r = rng(10);
    for seed in 0..5 {
        let d = r.random_range(2..=4);
        let (t, s) = random_streams(&mut r, d);
        let p = MamParams::random(d, 3, seed);
        let ut = random_upstream(&mut r, t.n(), d);
        let us = random_upstream(&mut r, s.n(), d);
        let rep = check_mixed_attention(&t, &s, &p, &ut, &us, &cfg()).unwrap();
        assert!(rep.passed(), "seed {seed}: {rep:?}");
        assert_eq!(rep.checked, p.num_params());
    }
}

#[test]
fn mixed_attention_input_gradients() {
    let mut r = rng(11);
    let d = 3;
    let (t, s) = (random_tokens(&mut r, 2, 2, d), random_tokens(&mut r, 3, 2, d));
    let p = MamParams::random(d, 3, 4);
    let ut = random_upstream(&mut r, t.n(), d);
    let us = random_upstream(&mut r, s.n(), d);
    let (_, _, cache) = mixed_attention_forward(&t, &s, &p).unwrap();
    let g = mixed_attention_backward(&t, &s, &p, &cache, &ut, &us).unwrap();
    let objective = |t: &TokenSeq, s: &TokenSeq| {
        let (ot, os, _) = mixed_attention_forward(t, s, &p)?;
        Ok((ot.tokens() * &ut).sum() + (os.tokens() * &us).sum())
    };
    let rt = grad_check(
        t.tokens().as_slice().unwrap(),
        g.target.as_slice().unwrap(),
        |x| objective(&with_tokens(&t, x), &s),
        &cfg(),
        |_| false,
    )
    .unwrap();
    let rs = grad_check(
        s.tokens().as_slice().unwrap(),
        g.search.as_slice().unwrap(),
        |x| objective(&t, &with_tokens(&s, x)),
        &cfg(),
        |_| false,
    )
    .unwrap();
    assert!(rt.passed(), "{rt:?}");
    assert!(rs.passed(), "{rs:?}");
}

#[test]
fn spm_parameter_gradients() {
    let mut r = rng(12);
    for seed in 0..5 {
        let mut s = SpmParams::random(3, 6, seed);
        s.mlp[2].weight.mapv_inplace(|v| v * 10.0);
        let roi = random_tokens(&mut r, 3, 3, 3);
        let tgt = random_tokens(&mut r, 2, 2, 3);
        for label in [0, 1] {
            let rep = check_spm_score(&s, &roi, &tgt, label, &cfg()).unwrap();
            assert!(rep.passed(), "seed {seed} label {label}: {rep:?}");
        }
    }
}

#[test]
fn spm_input_gradients() {
    let mut r = rng(13);
    let s = SpmParams::random(3, 5, 2);
    let roi = random_tokens(&mut r, 2, 3, 3);
    let tgt = random_tokens(&mut r, 2, 2, 3);
    let cache = spm_score_forward(&s, &roi, &tgt).unwrap();
    let g = spm_score_backward(&s, &roi, &tgt, &cache, 1.0);
    let rr = grad_check(
        roi.tokens().as_slice().unwrap(),
        g.search_roi.as_slice().unwrap(),
        |x| Ok(spm_score_forward(&s, &with_tokens(&roi, x), &tgt)?.score()),
        &cfg(),
        |_| false,
    )
    .unwrap();
    let rt = grad_check(
        tgt.tokens().as_slice().unwrap(),
        g.initial_target.as_slice().unwrap(),
        |x| Ok(spm_score_forward(&s, &roi, &with_tokens(&tgt, x))?.score()),
        &cfg(),
        |_| false,
    )
    .unwrap();
    assert!(rr.passed(), "{rr:?}");
    assert!(rt.passed(), "{rt:?}");
}

#[test]
fn loss_gradients() {
    let mut r = rng(14);
    for _ in 0..50 {
        let b = |r: &mut rand::rngs::StdRng| {
            BoundingBox::new(
                r.random_range(-5.0..5.0),
                r.random_range(-5.0..5.0),
                r.random_range(0.5..6.0),
                r.random_range(0.5..6.0),
            )
            .unwrap()
        };
        let (pred, gt) = (b(&mut r), b(&mut r));
        let rep = check_giou_term(&pred, &gt, &cfg()).unwrap();
        assert!(rep.passed(), "{pred:?} {gt:?}: {rep:?}");
        let rep = check_l1_giou_loss(&pred, &gt, &LossWeights::default(), &cfg()).unwrap();
        assert!(rep.passed(), "{pred:?} {gt:?}: {rep:?}");
        let p = r.random_range(0.01..0.99);
        assert!(check_score_loss(p, 1, &cfg()).unwrap().passed());
        assert!(check_score_loss(p, 0, &cfg()).unwrap().passed());
    }
}

#[test]
fn l1_kinks_are_flagged_and_skipped() {
    let gt = BoundingBox::new(0.0, 0.0, 2.0, 2.0).unwrap();
    let pred = BoundingBox::new(0.0, 1.0, 2.0, 3.0).unwrap();
    let g = l1_giou_loss_grad(&pred, &gt, &LossWeights::default(), 1e-5).unwrap();
    assert!(g.kinks[0] && g.kinks[2]);
    let rep = check_l1_giou_loss(&pred, &gt, &LossWeights::default(), &cfg()).unwrap();
    assert!(rep.skipped.contains(&0) && rep.skipped.contains(&2));
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn descent_step_reduces_attention_loss() {
    let mut r = rng(15);
    let (t, s) = (random_tokens(&mut r, 2, 2, 3), random_tokens(&mut r, 3, 3, 3));
    let yt = random_upstream(&mut r, t.n(), 3);
    let ys = random_upstream(&mut r, s.n(), 3);
    let mut p = MamParams::random(3, 3, 8);
    let loss = |p: &MamParams| {
        let (ot, os, cache) = mixed_attention_forward(&t, &s, p).unwrap();
        let (dt, ds) = (ot.tokens() - &yt, os.tokens() - &ys);
        (0.5 * (dt.mapv(|v| v * v).sum() + ds.mapv(|v| v * v).sum()), dt, ds, cache)
    };
    let (before, dt, ds, cache) = loss(&p);
    let g = mixed_attention_backward(&t, &s, &p, &cache, &dt, &ds).unwrap();
    p.descend(&g.params, 0.05);
    let (after, ..) = loss(&p);
    assert!(after < before, "{after} !< {before}");
}

#[test]
fn descent_step_reduces_score_loss() {
    let mut r = rng(16);
    let roi = random_tokens(&mut r, 3, 3, 4);
    let tgt = random_tokens(&mut r, 2, 2, 4);
    for label in [0u8, 1] {
        let mut s = SpmParams::random(4, 6, 21);
        let cache = spm_score_forward(&s, &roi, &tgt).unwrap();
        let before = score_loss(cache.score(), label).unwrap();
        let g = spm_score_backward(&s, &roi, &tgt, &cache, score_loss_grad(cache.score(), label).unwrap());
        s.descend(&g.params, 0.5);
        let after = score_loss(spm_score_forward(&s, &roi, &tgt).unwrap().score(), label).unwrap();
        assert!(after < before, "label {label}: {after} !< {before}");
    }
}

#[test]
fn descent_step_reduces_box_loss() {
    let gt = BoundingBox::new(10.0, 10.0, 20.0, 20.0).unwrap();
    let mut pred = BoundingBox::new(13.5, 7.25, 17.0, 24.0).unwrap();
    let w = LossWeights::default();
    let before = l1_giou_loss(&pred, &gt, &w).unwrap();
    let g = l1_giou_loss_grad(&pred, &gt, &w, 1e-9).unwrap().grad;
    let lr = 0.05;
    pred = BoundingBox::new(pred.x - lr * g[0], pred.y - lr * g[1], pred.w - lr * g[2], pred.h - lr * g[3]).unwrap();
    let after = l1_giou_loss(&pred, &gt, &w).unwrap();
    assert!(after < before, "{after} !< {before}");
}
