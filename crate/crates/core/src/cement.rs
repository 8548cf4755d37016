//! InfoNCE and the margin-injected Cement loss.
//!
//! Both directions are evaluated over the full `2N × 2N` logit matrix. For
//! Cement, row `i` of each direction has its hard-negative logit
//! `s[i][i']` shifted by the same per-row margin `m_i` before the partition
//! function is formed; the positive `s[i][i]` never receives a margin. Each
//! direction averages over its `2N` rows and the total is the sum of the two.
//!
//! Rows are reduced sequentially left to right so results do not depend on
//! how rows are scheduled.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::margin::{margin_vector, MarginConfig};
use crate::simcore::{pair_of, similarity, Direction, PairedBatch, SimilarityMatrix};

/// Log-probabilities and probabilities of one logit row.
///
/// `margin_at = Some((k, m))` adds `m` to entry `k` first, so the max
/// subtraction sees the effective logits.
pub fn row_log_softmax(
    scores: &[f64],
    margin_at: Option<(usize, f64)>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if scores.is_empty() {
        return Err(Error::InvalidBatch("empty logit row".into()));
    }
    if let Some((k, _)) = margin_at {
        if k >= scores.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                rows: scores.len(),
            });
        }
    }
    let mut probs = vec![0.0; scores.len()];
    let lse = softmax_into(ArrayView1::from(scores), margin_at, &mut probs)?;
    let log_probs = scores
        .iter()
        .enumerate()
        .map(|(j, &s)| effective(s, j, margin_at) - lse)
        .collect();
    Ok((log_probs, probs))
}

#[inline]
fn effective(s: f64, j: usize, margin_at: Option<(usize, f64)>) -> f64 {
    match margin_at {
        Some((k, m)) if k == j => s + m,
        _ => s,
    }
}

/// Writes the row's probabilities into `probs` and returns its log-sum-exp.
pub(crate) fn softmax_into(
    scores: ArrayView1<'_, f64>,
    margin_at: Option<(usize, f64)>,
    probs: &mut [f64],
) -> Result<f64> {
    let mut max = f64::NEG_INFINITY;
    for (j, &s) in scores.iter().enumerate() {
        let e = effective(s, j, margin_at);
        if !e.is_finite() {
            return Err(Error::NonFinite("logits"));
        }
        if e > max {
            max = e;
        }
    }
    let mut sum = 0.0;
    for (j, &s) in scores.iter().enumerate() {
        let w = (effective(s, j, margin_at) - max).exp();
        probs[j] = w;
        sum += w;
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
    Ok(max + sum.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub loss_v2t: f64,
    pub loss_t2v: f64,
    pub total: f64,
    /// `p[i][i]` per image-to-text row.
    pub recall_v2t: Vec<f64>,
    /// `p[i][i]` per text-to-image row.
    pub recall_t2v: Vec<f64>,
}

/// `∂L/∂s` for each direction, already scaled by `1/(2N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitGradients {
    pub v2t: Array2<f64>,
    pub t2v: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingGradients {
    pub image: Array2<f64>,
    pub text: Array2<f64>,
}

/// Which contrastive objective to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    InfoNce,
    Cement(MarginConfig),
}

impl Objective {
    /// Per-row margins, or `None` for plain InfoNCE.
    pub fn margins(&self, concreteness: &[f64]) -> Option<Vec<f64>> {
        match self {
            Objective::InfoNce => None,
            Objective::Cement(cfg) => Some(cfg.margins_for(concreteness)),
        }
    }
}

/// Row-softmax state of one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionPass {
    pub loss: f64,
    /// Row-stochastic matrix of (margin-injected) probabilities.
    pub probs: Array2<f64>,
}

impl DirectionPass {
    pub fn recall(&self) -> Vec<f64> {
        (0..self.probs.nrows()).map(|i| self.probs[[i, i]]).collect()
    }

    /// `(p - onehot(i)) / (2N)` per row.
    pub fn logit_gradient(&self) -> Array2<f64> {
        let rows = self.probs.nrows();
        let scale = 1.0 / rows as f64;
        let mut g = self.probs.mapv(|p| p * scale);
        for i in 0..rows {
            g[[i, i]] = (self.probs[[i, i]] - 1.0) * scale;
        }
        g
    }
}

/// Evaluates one direction. `margins[i]` is injected at `(i, i')`.
pub fn direction_pass(logits: &Array2<f64>, margins: Option<&[f64]>) -> Result<DirectionPass> {
    let (rows, cols) = logits.dim();
    if rows != cols || rows < 2 || rows % 2 != 0 {
        return Err(Error::ShapeMismatch(format!(
            "logits must be square with an even side >= 2, got {rows}x{cols}"
        )));
    }
    if let Some(m) = margins {
        if m.len() != rows {
            return Err(Error::ShapeMismatch(format!(
                "{} margins for {rows} rows",
                m.len()
            )));
        }
    }
    let n = rows / 2;
    let mut probs = Array2::zeros((rows, rows));
    let mut acc = 0.0;
    for i in 0..rows {
        let margin_at = margins.map(|m| (pair_of(i, n), m[i]));
        let row = logits.row(i);
        let mut out = probs.row_mut(i);
        let slice = out
            .as_slice_mut()
            .expect("freshly allocated rows are contiguous");
        let lse = softmax_into(row, margin_at, slice)?;
        acc += logits[[i, i]] - lse;
    }
    Ok(DirectionPass {
        loss: -acc / rows as f64,
        probs,
    })
}

/// Loss, probabilities and logit gradients for both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: LossReport,
    pub v2t: DirectionPass,
    pub t2v: DirectionPass,
}

impl Evaluation {
    pub fn logit_gradients(&self) -> LogitGradients {
        LogitGradients {
            v2t: self.v2t.logit_gradient(),
            t2v: self.t2v.logit_gradient(),
        }
    }
}

/// Evaluates raw logit matrices. The same margin vector is injected in both
/// directional partitions.
pub fn evaluate_logits(
    v2t: &Array2<f64>,
    t2v: &Array2<f64>,
    margins: Option<&[f64]>,
) -> Result<Evaluation> {
    if v2t.dim() != t2v.dim() {
        return Err(Error::ShapeMismatch(format!(
            "v2t {:?} vs t2v {:?}",
            v2t.dim(),
            t2v.dim()
        )));
    }
    if let Some(m) = margins {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("margins"));
        }
    }
    let fwd = direction_pass(v2t, margins)?;
    let bwd = direction_pass(t2v, margins)?;
    let report = LossReport {
        loss_v2t: fwd.loss,
        loss_t2v: bwd.loss,
        total: fwd.loss + bwd.loss,
        recall_v2t: fwd.recall(),
        recall_t2v: bwd.recall(),
    };
    Ok(Evaluation {
        report,
        v2t: fwd,
        t2v: bwd,
    })
}

fn batch_logits(batch: &PairedBatch) -> Result<(SimilarityMatrix, SimilarityMatrix)> {
    Ok((
        similarity(batch, Direction::ImageToText)?,
        similarity(batch, Direction::TextToImage)?,
    ))
}

/// Evaluates an objective on a normalized batch.
pub fn evaluate(batch: &PairedBatch, objective: &Objective) -> Result<Evaluation> {
    let (v2t, t2v) = batch_logits(batch)?;
    let margins = objective.margins(batch.concreteness());
    evaluate_logits(v2t.values(), t2v.values(), margins.as_deref())
}

pub fn infonce_loss(batch: &PairedBatch) -> Result<LossReport> {
    Ok(evaluate(batch, &Objective::InfoNce)?.report)
}

pub fn cement_loss(batch: &PairedBatch, cfg: &MarginConfig) -> Result<LossReport> {
    cfg.validate()?;
    let (v2t, t2v) = batch_logits(batch)?;
    let margins = margin_vector(batch, cfg);
    Ok(evaluate_logits(v2t.values(), t2v.values(), Some(&margins))?.report)
}

pub fn infonce_from_logits(v2t: &Array2<f64>, t2v: &Array2<f64>) -> Result<LossReport> {
    Ok(evaluate_logits(v2t, t2v, None)?.report)
}

pub fn cement_from_logits(
    v2t: &Array2<f64>,
    t2v: &Array2<f64>,
    margins: &[f64],
) -> Result<LossReport> {
    Ok(evaluate_logits(v2t, t2v, Some(margins))?.report)
}

/// Analytic Cement gradients w.r.t. both logit matrices.
pub fn grad_logits(batch: &PairedBatch, cfg: &MarginConfig) -> Result<LogitGradients> {
    cfg.validate()?;
    Ok(evaluate(batch, &Objective::Cement(*cfg))?.logit_gradients())
}

/// Chains logit gradients through `s = dot / τ` onto the (post-normalization)
/// embedding rows.
pub fn embedding_gradients(
    image: &Array2<f64>,
    text: &Array2<f64>,
    grads: &LogitGradients,
    temperature: f64,
) -> EmbeddingGradients {
    // v2t[i][j] = v_i·t_j/τ and t2v[i][j] = t_i·v_j/τ.
    let inv = 1.0 / temperature;
    let d_image = (grads.v2t.dot(text) + grads.t2v.t().dot(text)) * inv;
    let d_text = (grads.v2t.t().dot(image) + grads.t2v.dot(image)) * inv;
    EmbeddingGradients {
        image: d_image,
        text: d_text,
    }
}

/// Gradients of the total Cement loss w.r.t. the normalized embeddings.
pub fn grad_embeddings(batch: &PairedBatch, cfg: &MarginConfig) -> Result<EmbeddingGradients> {
    let grads = grad_logits(batch, cfg)?;
    Ok(embedding_gradients(
        batch.image().values(),
        batch.text().values(),
        &grads,
        batch.temperature(),
    ))
}
