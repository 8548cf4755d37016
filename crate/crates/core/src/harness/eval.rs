use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::ToyDataset;
use super::encoder::DualEncoder;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pairs: usize,
    pub i2t_acc: f64,
    pub t2i_acc: f64,
    /// Mean of `s[i][i] - s[i][i']` in image-to-text logits.
    pub mean_gap: f64,
    /// Spearman correlation between per-pair concreteness and logit gap.
    pub rank_correlation: f64,
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut k = 0;
    while k < order.len() {
        let mut end = k + 1;
        while end < order.len() && x[order[end]] == x[order[k]] {
            end += 1;
        }
        let avg = (k + end - 1) as f64 / 2.0 + 1.0;
        for &i in &order[k..end] {
            out[i] = avg;
        }
        k = end;
    }
    out
}

/// Spearman rank correlation with average ranks for ties. Zero when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

fn dot(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Pairwise accuracy of every scene against its own hard negative.
pub fn evaluate(encoders: &DualEncoder, data: &ToyDataset, temperature: f64) -> Result<EvalReport> {
    let v = encoders.image.embed(&pad_even(&data.images))?;
    let vn = encoders.image.embed(&pad_even(&data.negative_images))?;
    let t = encoders.text.embed(&pad_even(&data.captions))?;
    let tn = encoders.text.embed(&pad_even(&data.negative_captions))?;
    let n = data.len();
    let per_pair: Vec<(bool, bool, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pos = dot(v.row(i), t.row(i));
            let i2t = pos > dot(v.row(i), tn.row(i));
            let t2i = pos > dot(t.row(i), vn.row(i));
            (i2t, t2i, (pos - dot(v.row(i), tn.row(i))) / temperature)
        })
        .collect();
    let gaps: Vec<f64> = per_pair.iter().map(|p| p.2).collect();
    let k = n as f64;
    Ok(EvalReport {
        pairs: n,
        i2t_acc: per_pair.iter().filter(|p| p.0).count() as f64 / k,
        t2i_acc: per_pair.iter().filter(|p| p.1).count() as f64 / k,
        mean_gap: gaps.iter().sum::<f64>() / k,
        rank_correlation: spearman(&data.concreteness(), &gaps),
    })
}

// Embedding matrices require an even row count.
fn pad_even(x: &ndarray::Array2<f64>) -> ndarray::Array2<f64> {
    if x.nrows().is_multiple_of(2) {
        return x.clone();
    }
    let mut out = ndarray::Array2::zeros((x.nrows() + 1, x.ncols()));
    out.slice_mut(ndarray::s![..x.nrows(), ..]).assign(x);
    out.row_mut(x.nrows()).assign(&x.row(0));
    out
}
