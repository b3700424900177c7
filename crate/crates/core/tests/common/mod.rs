#![allow(dead_code)]

use ballinterp::geometry::{BallPoint, C64};
use proptest::prelude::*;

/// Point of 𝔹ⁿ with modulus at most `rmax`, drawn from coordinates in the cube.
pub fn ball_point(n: usize, rmax: f64) -> impl Strategy<Value = BallPoint> {
    (prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n), 0.0f64..1.0).prop_map(move |(xs, t)| {
        let p = BallPoint::new(xs.into_iter().map(|(re, im)| C64::new(re, im)));
        let norm = p.norm();
        if norm == 0.0 {
            p
        } else {
            p.scale_re(rmax * t / norm)
        }
    })
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Average ranks (1-based) with ties sharing their mean rank.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = r;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
