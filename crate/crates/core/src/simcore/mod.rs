//! Embedding containers, the paired batch layout and cross-modal similarities.
//!
//! A batch holds `2N` rows per modality in the blocked layout
//! `[anchors | hard negatives]`: row `i < N` is an anchor and row `i + N` is
//! its generated hard negative. All arithmetic is `f64`.

pub mod io;

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Common contrastive-learning default; configurable everywhere it is used.
pub const DEFAULT_TEMPERATURE: f64 = 0.07;

const ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    values: Array2<f64>,
    normalized: bool,
}

impl EmbeddingMatrix {
    /// Wraps a `rows × dim` matrix. Rows must be even and at least two.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (rows, dim) = values.dim();
        if rows < 2 || rows % 2 != 0 {
            return Err(Error::InvalidBatch(format!(
                "embedding matrix needs an even row count >= 2, got {rows}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidBatch("embedding dimension is zero".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding matrix"));
        }
        Ok(Self {
            values,
            normalized: false,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch("ragged embedding rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), dim), flat)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(values)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn normalize_rows(&self) -> Result<Self> {
        normalize_rows(self)
    }
}

/// Scales every row to unit Euclidean norm.
pub fn normalize_rows(m: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    let mut values = m.values.clone();
    for (i, mut row) in values.axis_iter_mut(Axis(0)).enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= ZERO_NORM {
            return Err(Error::ZeroRow(i));
        }
        row.mapv_inplace(|v| v / norm);
    }
    Ok(EmbeddingMatrix {
        values,
        normalized: true,
    })
}

/// Index of the hard-negative counterpart under the blocked layout.
pub fn counterpart(i: usize, n_anchors: usize) -> Result<usize> {
    let rows = 2 * n_anchors;
    if i >= rows {
        return Err(Error::IndexOutOfRange { index: i, rows });
    }
    Ok(if i < n_anchors { i + n_anchors } else { i - n_anchors })
}

/// Unchecked variant for hot loops where `i < 2n` is already established.
#[inline]
pub(crate) fn pair_of(i: usize, n_anchors: usize) -> usize {
    if i < n_anchors {
        i + n_anchors
    } else {
        i - n_anchors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedBatch {
    image: EmbeddingMatrix,
    text: EmbeddingMatrix,
    n_anchors: usize,
    temperature: f64,
    concreteness: Vec<f64>,
}

impl PairedBatch {
    /// Builds a batch from per-anchor concreteness (length `N`), mirrored onto
    /// the hard-negative half so that `c[i] == c[counterpart(i)]`.
    pub fn new(
        image: EmbeddingMatrix,
        text: EmbeddingMatrix,
        temperature: f64,
        anchor_concreteness: &[f64],
    ) -> Result<Self> {
        let n = image.rows() / 2;
        if anchor_concreteness.len() != n {
            return Err(Error::InvalidBatch(format!(
                "expected {n} anchor concreteness values, got {}",
                anchor_concreteness.len()
            )));
        }
        let mut concreteness = anchor_concreteness.to_vec();
        concreteness.extend_from_slice(anchor_concreteness);
        Self::from_mirrored(image, text, temperature, concreteness)
    }

    /// Builds a batch from a full `2N` concreteness vector, which must already
    /// be mirrored.
    pub fn from_mirrored(
        image: EmbeddingMatrix,
        text: EmbeddingMatrix,
        temperature: f64,
        concreteness: Vec<f64>,
    ) -> Result<Self> {
        if image.values.dim() != text.values.dim() {
            return Err(Error::ShapeMismatch(format!(
                "image {:?} vs text {:?}",
                image.values.dim(),
                text.values.dim()
            )));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidBatch(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        let rows = image.rows();
        let n = rows / 2;
        if concreteness.len() != rows {
            return Err(Error::InvalidBatch(format!(
                "expected {rows} concreteness values, got {}",
                concreteness.len()
            )));
        }
        if concreteness.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("concreteness"));
        }
        if (0..n).any(|i| concreteness[i] != concreteness[i + n]) {
            return Err(Error::InvalidBatch(
                "concreteness is not mirrored across the counterpart map".into(),
            ));
        }
        Ok(Self {
            image,
            text,
            n_anchors: n,
            temperature,
            concreteness,
        })
    }

    pub fn image(&self) -> &EmbeddingMatrix {
        &self.image
    }

    pub fn text(&self) -> &EmbeddingMatrix {
        &self.text
    }

    pub fn n_anchors(&self) -> usize {
        self.n_anchors
    }

    pub fn rows(&self) -> usize {
        2 * self.n_anchors
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn concreteness(&self) -> &[f64] {
        &self.concreteness
    }

    pub fn counterpart(&self, i: usize) -> Result<usize> {
        counterpart(i, self.n_anchors)
    }

    /// Returns a copy with both modalities row-normalized.
    pub fn normalized(&self) -> Result<Self> {
        Ok(Self {
            image: self.image.normalize_rows()?,
            text: self.text.normalize_rows()?,
            ..self.clone()
        })
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::from_mirrored(
            self.image.clone(),
            self.text.clone(),
            temperature,
            self.concreteness.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ImageToText,
    TextToImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: Array2<f64>,
    direction: Direction,
}

impl SimilarityMatrix {
    /// Wraps a square `2N × 2N` logit matrix, e.g. one synthesized directly
    /// rather than computed from embeddings.
    pub fn from_logits(values: Array2<f64>, direction: Direction) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c || r < 2 || r % 2 != 0 {
            return Err(Error::ShapeMismatch(format!(
                "logits must be square with an even side >= 2, got {r}x{c}"
            )));
        }
        Ok(Self { values, direction })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_anchors(&self) -> usize {
        self.values.nrows() / 2
    }

    pub fn transposed(&self) -> Self {
        let direction = match self.direction {
            Direction::ImageToText => Direction::TextToImage,
            Direction::TextToImage => Direction::ImageToText,
        };
        Self {
            values: self.values.t().to_owned(),
            direction,
        }
    }
}

/// `values[i][j] = dot(query_i, key_j) / τ`, summed left to right.
pub(crate) fn scaled_dots(query: &Array2<f64>, key: &Array2<f64>, temperature: f64) -> Array2<f64> {
    let rows = query.nrows();
    let mut out = Array2::zeros((rows, key.nrows()));
    for i in 0..rows {
        let q = query.row(i);
        for j in 0..key.nrows() {
            let k = key.row(j);
            let mut acc = 0.0;
            for (a, b) in q.iter().zip(k.iter()) {
                acc += a * b;
            }
            out[[i, j]] = acc / temperature;
        }
    }
    out
}

/// Temperature-scaled cosine similarities between the two modalities.
///
/// `ImageToText` rows are images (`values[i][j] = v_i · t_j / τ`);
/// `TextToImage` rows are texts and equals the transpose.
pub fn similarity(batch: &PairedBatch, direction: Direction) -> Result<SimilarityMatrix> {
    if !(batch.image.normalized && batch.text.normalized) {
        return Err(Error::NotNormalized);
    }
    let (query, key) = match direction {
        Direction::ImageToText => (&batch.image.values, &batch.text.values),
        Direction::TextToImage => (&batch.text.values, &batch.image.values),
    };
    Ok(SimilarityMatrix {
        values: scaled_dots(query, key, batch.temperature),
        direction,
    })
}
