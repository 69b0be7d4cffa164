//! Shared fixtures and naive reference implementations for the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use nightbench::tracker::{AttentionBlock, DepthwiseKernel, Linear, MamParams, SpmParams, TokenSeq};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_tokens(rng: &mut StdRng, rows: usize, cols: usize, d: usize) -> TokenSeq {
    let t = Array2::from_shape_fn((rows * cols, d), |_| rng.random_range(-1.0..1.0));
    TokenSeq::new(t, rows, cols).unwrap()
}

pub fn random_upstream(rng: &mut StdRng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0))
}

pub fn to_mat(a: &Array2<f64>) -> Mat {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn max_abs_diff(a: &Mat, b: &Array2<f64>) -> f64 {
    assert_eq!((a.len(), a[0].len()), b.dim());
    let mut m: f64 = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m = m.max((v - b[[i, j]]).abs());
        }
    }
    m
}

fn linear(x: &Mat, l: &Linear) -> Mat {
    let (din, dout) = l.weight.dim();
    x.iter()
        .map(|row| {
            assert_eq!(row.len(), din);
            (0..dout)
                .map(|o| l.bias[o] + (0..din).map(|i| row[i] * l.weight[[i, o]]).sum::<f64>())
                .collect()
        })
        .collect()
}

/// Zero-padded per-channel correlation, spelled out over the spatial grid.
fn conv(x: &Mat, rows: usize, cols: usize, k: &DepthwiseKernel) -> Mat {
    let size = k.weights.dim().1 as isize;
    let half = size / 2;
    let d = x[0].len();
    let mut out = vec![vec![0.0; d]; x.len()];
    for r in 0..rows as isize {
        for c in 0..cols as isize {
            for ch in 0..d {
                let mut acc = 0.0;
                for a in 0..size {
                    for b in 0..size {
                        let (rr, cc) = (r + a - half, c + b - half);
                        if rr >= 0 && rr < rows as isize && cc >= 0 && cc < cols as isize {
                            acc += k.weights[[ch, a as usize, b as usize]] * x[(rr * cols as isize + cc) as usize][ch];
                        }
                    }
                }
                out[(r * cols as isize + c) as usize][ch] = acc;
            }
        }
    }
    out
}

/// Each query row attends over all key rows.
fn attend(q: &Mat, k: &Mat, v: &Mat) -> Mat {
    let d = q[0].len() as f64;
    q.iter()
        .map(|qi| {
            let logits: Vec<f64> = k
                .iter()
                .map(|kj| qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>() / d.sqrt())
                .collect();
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
            let z: f64 = e.iter().sum();
            (0..v[0].len())
                .map(|c| e.iter().zip(v).map(|(w, vj)| w / z * vj[c]).sum())
                .collect()
        })
        .collect()
}

/// Mixed attention written directly from its definition.
pub fn naive_mixed_attention(target: &TokenSeq, search: &TokenSeq, p: &MamParams) -> (Mat, Mat) {
    let stream = |s: &TokenSeq| {
        let (r, c) = s.layout();
        let x = to_mat(s.tokens());
        (
            linear(&conv(&x, r, c, &p.q_conv), &p.q_proj),
            linear(&conv(&x, r, c, &p.k_conv), &p.k_proj),
            linear(&conv(&x, r, c, &p.v_conv), &p.v_proj),
        )
    };
    let (qt, kt, vt) = stream(target);
    let (qs, ks, vs) = stream(search);
    let keys: Mat = kt.into_iter().chain(ks).collect();
    let values: Mat = vt.into_iter().chain(vs).collect();
    (
        linear(&attend(&qt, &keys, &values), &p.out_proj),
        linear(&attend(&qs, &keys, &values), &p.out_proj),
    )
}

fn block(x: &Mat, ctx: &Mat, b: &AttentionBlock) -> Mat {
    let att = attend(&linear(x, &b.q), &linear(ctx, &b.k), &linear(ctx, &b.v));
    let proj = linear(&att, &b.out);
    x.iter()
        .zip(&proj)
        .map(|(a, p)| a.iter().zip(p).map(|(u, v)| u + v).collect())
        .collect()
}

/// Score module written directly from its definition (unclamped sigmoid).
pub fn naive_spm_score(s: &SpmParams, roi: &TokenSeq, target: &TokenSeq) -> f64 {
    let x0 = vec![s.score_token.to_vec()];
    let h1 = block(&x0, &to_mat(roi.tokens()), &s.search_block);
    let h2 = block(&h1, &to_mat(target.tokens()), &s.target_block);
    let relu = |m: Mat| -> Mat { m.into_iter().map(|r| r.into_iter().map(|v| v.max(0.0)).collect()).collect() };
    let a0 = relu(linear(&h2, &s.mlp[0]));
    let a1 = relu(linear(&a0, &s.mlp[1]));
    let z = linear(&a1, &s.mlp[2])[0][0];
    1.0 / (1.0 + (-z).exp())
}

/// Pixel-grid overlap of two integer boxes `(x, y, w, h)` on a `size x size` canvas:
/// `(intersection, union, hull)` cell counts.
pub fn enumerate_overlap(a: [i64; 4], b: [i64; 4], size: i64) -> (i64, i64, i64) {
    let inside = |bx: [i64; 4], x: i64, y: i64| x >= bx[0] && x < bx[0] + bx[2] && y >= bx[1] && y < bx[1] + bx[3];
    let hx0 = a[0].min(b[0]);
    let hy0 = a[1].min(b[1]);
    let hx1 = (a[0] + a[2]).max(b[0] + b[2]);
    let hy1 = (a[1] + a[3]).max(b[1] + b[3]);
    let (mut inter, mut union, mut hull) = (0, 0, 0);
    for y in 0..size {
        for x in 0..size {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += (ia && ib) as i64;
            union += (ia || ib) as i64;
            hull += (x >= hx0 && x < hx1 && y >= hy0 && y < hy1) as i64;
        }
    }
    (inter, union, hull)
}

/// Integer box with corners on the `0..=8` grid and positive area.
pub fn grid_box(rng: &mut StdRng) -> [i64; 4] {
    let x0 = rng.random_range(0..8);
    let y0 = rng.random_range(0..8);
    let x1 = rng.random_range(x0 + 1..=8);
    let y1 = rng.random_range(y0 + 1..=8);
    [x0, y0, x1 - x0, y1 - y0]
}

/// Random target (up to 3x3) and search (up to 4x4) token grids.
pub fn random_streams(rng: &mut StdRng, d: usize) -> (TokenSeq, TokenSeq) {
    let (tr, tc) = (rng.random_range(1..=3), rng.random_range(1..=3));
    let (sr, sc) = (rng.random_range(1..=4), rng.random_range(1..=4));
    (random_tokens(rng, tr, tc, d), random_tokens(rng, sr, sc, d))
}
