use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cement::{embedding_gradients, evaluate_logits, Evaluation, Objective};
use crate::error::{Error, Result};
use crate::simcore::{scaled_dots, EmbeddingMatrix};

/// `x -> normalize(W x)` with `W` of shape `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEncoder {
    pub weight: Array2<f64>,
}

impl LinearEncoder {
    pub fn random(out_dim: usize, in_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = 1.0 / (in_dim as f64).sqrt();
        let weight = Array2::from_shape_fn((out_dim, in_dim), |_| {
            scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
        });
        Self { weight }
    }

    /// Unnormalized outputs, one row per input row.
    pub fn project(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.weight.t())
    }

    /// Normalized embeddings.
    pub fn embed(&self, x: &Array2<f64>) -> Result<EmbeddingMatrix> {
        EmbeddingMatrix::new(self.project(x))?.normalize_rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualEncoder {
    pub image: LinearEncoder,
    pub text: LinearEncoder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGradients {
    pub image: Array2<f64>,
    pub text: Array2<f64>,
}

/// Forward pass plus parameter gradients for one batch.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub evaluation: Evaluation,
    pub v2t: Array2<f64>,
    pub t2v: Array2<f64>,
    pub grads: EncoderGradients,
}

/// Pulls gradients on normalized rows `e = u/|u|` back onto `u`.
fn through_normalization(u: &Array2<f64>, g_e: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(u.dim());
    for (r, (urow, grow)) in u.axis_iter(Axis(0)).zip(g_e.axis_iter(Axis(0))).enumerate() {
        let norm = urow.dot(&urow).sqrt();
        let e = &urow / norm;
        let proj = e.dot(&grow);
        out.row_mut(r).assign(&((&grow - &(&e * proj)) / norm));
    }
    out
}

impl DualEncoder {
    pub fn random(out_dim: usize, in_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let image = LinearEncoder::random(out_dim, in_dim, &mut rng);
        let text = LinearEncoder::random(out_dim, in_dim, &mut rng);
        Self { image, text }
    }

    /// Evaluates `objective` on `[anchors | negatives]` inputs. `concreteness`
    /// has one entry per row.
    pub fn step(
        &self,
        x_img: &Array2<f64>,
        x_txt: &Array2<f64>,
        concreteness: &[f64],
        objective: &Objective,
        temperature: f64,
    ) -> Result<StepOutput> {
        if x_img.nrows() != concreteness.len() || x_txt.nrows() != concreteness.len() {
            return Err(Error::ShapeMismatch("inputs and concreteness differ in length".into()));
        }
        let u_img = self.image.project(x_img);
        let u_txt = self.text.project(x_txt);
        let e_img = EmbeddingMatrix::new(u_img.clone())?.normalize_rows()?;
        let e_txt = EmbeddingMatrix::new(u_txt.clone())?.normalize_rows()?;
        let v2t = scaled_dots(e_img.values(), e_txt.values(), temperature);
        let t2v = v2t.t().to_owned();
        let margins = objective.margins(concreteness);
        let evaluation = evaluate_logits(&v2t, &t2v, margins.as_deref())?;
        let g = embedding_gradients(
            e_img.values(),
            e_txt.values(),
            &evaluation.logit_gradients(),
            temperature,
        );
        let g_img = through_normalization(&u_img, &g.image);
        let g_txt = through_normalization(&u_txt, &g.text);
        let grads = EncoderGradients {
            image: g_img.t().dot(x_img),
            text: g_txt.t().dot(x_txt),
        };
        Ok(StepOutput { evaluation, v2t, t2v, grads })
    }

    /// Total loss only, for finite-difference checks.
    pub fn loss(
        &self,
        x_img: &Array2<f64>,
        x_txt: &Array2<f64>,
        concreteness: &[f64],
        objective: &Objective,
        temperature: f64,
    ) -> Result<f64> {
        Ok(self
            .step(x_img, x_txt, concreteness, objective, temperature)?
            .evaluation
            .report
            .total)
    }
}
