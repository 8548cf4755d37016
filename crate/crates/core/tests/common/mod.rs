#![allow(dead_code)]

use cement_core::simcore::{EmbeddingMatrix, PairedBatch};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rows: usize, dim: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, dim), |_| rng.sample::<f64, _>(StandardNormal))
}

/// Normalized random batch with concreteness uniform on `[1, 5]`.
pub fn random_batch(n: usize, dim: usize, temperature: f64, seed: u64) -> PairedBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let image = EmbeddingMatrix::new(gaussian(2 * n, dim, &mut rng)).unwrap();
    let text = EmbeddingMatrix::new(gaussian(2 * n, dim, &mut rng)).unwrap();
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..5.0)).collect();
    PairedBatch::new(image, text, temperature, &c).unwrap().normalized().unwrap()
}

/// Plain triple loop, no shared code with the library.
pub fn brute_logits(query: &Array2<f64>, key: &Array2<f64>, temperature: f64) -> Array2<f64> {
    let mut out = Array2::zeros((query.nrows(), key.nrows()));
    for i in 0..query.nrows() {
        for j in 0..key.nrows() {
            let mut s = 0.0;
            for k in 0..query.ncols() {
                s += query[[i, k]] * key[[j, k]];
            }
            out[[i, j]] = s / temperature;
        }
    }
    out
}

/// `-1/(2N) sum_i log softmax` of the margin-shifted row, computed directly.
pub fn brute_direction_loss(logits: &Array2<f64>, margins: &[f64]) -> f64 {
    let rows = logits.nrows();
    let n = rows / 2;
    let mut total = 0.0;
    for i in 0..rows {
        let pair = if i < n { i + n } else { i - n };
        let z: f64 = (0..rows)
            .map(|j| {
                let s = if j == pair { logits[[i, j]] + margins[i] } else { logits[[i, j]] };
                s.exp()
            })
            .sum();
        total += -(logits[[i, i]].exp() / z).ln();
    }
    total / rows as f64
}

/// `|a - b| / max(|a|, |b|)` in the Frobenius norm.
pub fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let diff = (a - b).mapv(|x| x * x).sum().sqrt();
    let scale = a.mapv(|x| x * x).sum().sqrt().max(b.mapv(|x| x * x).sum().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Central differences of `f` over every entry of `x`.
pub fn central_difference(x: &Array2<f64>, h: f64, mut f: impl FnMut(&Array2<f64>) -> f64) -> Array2<f64> {
    let mut g = Array2::zeros(x.dim());
    let mut probe = x.clone();
    for idx in 0..x.len() {
        let (r, c) = (idx / x.ncols(), idx % x.ncols());
        let orig = probe[[r, c]];
        probe[[r, c]] = orig + h;
        let up = f(&probe);
        probe[[r, c]] = orig - h;
        let down = f(&probe);
        probe[[r, c]] = orig;
        g[[r, c]] = (up - down) / (2.0 * h);
    }
    g
}
