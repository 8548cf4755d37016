//! Where the positive-pull gradient goes.
//!
//! For every softmax row the pull on the positive, `1 - p[i][i]`, equals the
//! hard-negative mass `p[i][i']` plus the easy-negative mass
//! `sum_{j ∉ {i, i'}} p[i][j]`. Reports average these over all rows of both
//! directions. `hard_share` is the fraction of the pull spent on the hard
//! negative.

use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cement::{softmax_into, Evaluation, Objective};
use crate::error::{Error, Result};
use crate::margin::MarginConfig;
use crate::simcore::{pair_of, similarity, Direction, PairedBatch};

/// Mean `|∂L/∂s · s|` per component, with the row gradient unscaled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedMagnitudes {
    pub positive: f64,
    pub hard: f64,
    pub easy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub step: usize,
    pub positive_pull: f64,
    pub hard_reject: f64,
    pub easy_reject: f64,
    pub hard_share: f64,
    pub weighted: WeightedMagnitudes,
}

impl GradientReport {
    /// `positive_pull - hard_reject - easy_reject`; zero up to rounding.
    pub fn zero_sum_residual(&self) -> f64 {
        self.positive_pull - self.hard_reject - self.easy_reject
    }
}

/// Probability masses of one row.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RowMasses {
    pub positive_pull: f64,
    pub hard: f64,
    pub easy: f64,
    pub weighted: WeightedMagnitudes,
}

impl RowMasses {
    pub fn residual(&self) -> f64 {
        self.positive_pull - self.hard - self.easy
    }
}

fn masses_from_probs(probs: ArrayView1<'_, f64>, logits: ArrayView1<'_, f64>, i: usize, pair: usize) -> RowMasses {
    let mut easy = 0.0;
    let mut easy_weighted = 0.0;
    for (j, (&p, &s)) in probs.iter().zip(logits.iter()).enumerate() {
        if j != i && j != pair {
            easy += p;
            easy_weighted += p * s;
        }
    }
    let pull = 1.0 - probs[i];
    RowMasses {
        positive_pull: pull,
        hard: probs[pair],
        easy,
        weighted: WeightedMagnitudes {
            positive: (pull * logits[i]).abs(),
            hard: (probs[pair] * logits[pair]).abs(),
            easy: easy_weighted.abs(),
        },
    }
}

/// Per-row masses of one direction, rows evaluated in parallel.
pub fn row_masses(logits: &Array2<f64>, margins: Option<&[f64]>) -> Result<Vec<RowMasses>> {
    let (rows, cols) = logits.dim();
    if rows != cols || rows < 2 || rows % 2 != 0 {
        return Err(Error::ShapeMismatch(format!(
            "logits must be square with an even side >= 2, got {rows}x{cols}"
        )));
    }
    if let Some(m) = margins {
        if m.len() != rows {
            return Err(Error::ShapeMismatch(format!("{} margins for {rows} rows", m.len())));
        }
    }
    let n = rows / 2;
    (0..rows)
        .into_par_iter()
        .map(|i| {
            let pair = pair_of(i, n);
            let mut probs = vec![0.0; rows];
            let row = logits.row(i);
            softmax_into(row, margins.map(|m| (pair, m[i])), &mut probs)?;
            Ok(masses_from_probs(ArrayView1::from(&probs[..]), row, i, pair))
        })
        .collect()
}

fn aggregate(step: usize, rows: impl Iterator<Item = RowMasses>) -> GradientReport {
    let mut count = 0usize;
    let mut acc = RowMasses::default();
    for r in rows {
        count += 1;
        acc.positive_pull += r.positive_pull;
        acc.hard += r.hard;
        acc.easy += r.easy;
        acc.weighted.positive += r.weighted.positive;
        acc.weighted.hard += r.weighted.hard;
        acc.weighted.easy += r.weighted.easy;
    }
    let k = count.max(1) as f64;
    let positive_pull = acc.positive_pull / k;
    let hard_reject = acc.hard / k;
    GradientReport {
        step,
        positive_pull,
        hard_reject,
        easy_reject: acc.easy / k,
        hard_share: if positive_pull > 0.0 { hard_reject / positive_pull } else { 0.0 },
        weighted: WeightedMagnitudes {
            positive: acc.weighted.positive / k,
            hard: acc.weighted.hard / k,
            easy: acc.weighted.easy / k,
        },
    }
}

/// Decomposition of raw logit matrices for both directions.
pub fn decompose_logits(
    v2t: &Array2<f64>,
    t2v: &Array2<f64>,
    margins: Option<&[f64]>,
) -> Result<GradientReport> {
    let a = row_masses(v2t, margins)?;
    let b = row_masses(t2v, margins)?;
    Ok(aggregate(0, a.into_iter().chain(b)))
}

/// Decomposition reusing an already computed loss evaluation.
pub fn decompose_evaluation(
    eval: &Evaluation,
    v2t: &Array2<f64>,
    t2v: &Array2<f64>,
    step: usize,
) -> GradientReport {
    let n = v2t.nrows() / 2;
    let rows = |probs: &Array2<f64>, logits: &Array2<f64>| -> Vec<RowMasses> {
        (0..probs.nrows())
            .map(|i| masses_from_probs(probs.row(i), logits.row(i), i, pair_of(i, n)))
            .collect()
    };
    let a = rows(&eval.v2t.probs, v2t);
    let b = rows(&eval.t2v.probs, t2v);
    aggregate(step, a.into_iter().chain(b))
}

/// Decomposition of the Cement probabilities of a normalized batch.
pub fn decompose(batch: &PairedBatch, cfg: &MarginConfig) -> Result<GradientReport> {
    cfg.validate()?;
    let v2t = similarity(batch, Direction::ImageToText)?;
    let t2v = similarity(batch, Direction::TextToImage)?;
    let margins = Objective::Cement(*cfg).margins(batch.concreteness());
    decompose_logits(v2t.values(), t2v.values(), margins.as_deref())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapDistribution {
    pub mean: f64,
    pub std: f64,
}

/// How synthetic logit matrices are drawn for a sweep.
///
/// Row `i` gets `s[i][i] = positive_logit`, `s[i][i'] = positive_logit - g_hard`
/// and `s[i][j] = positive_logit - g_easy` for every other column, with gaps
/// drawn independently from the two normal distributions. The text-to-image
/// matrix is the transpose. Anchor concreteness is uniform on
/// `concreteness_range` and only matters for adaptive or inverse margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogitGapConfig {
    pub positive_logit: f64,
    pub hard_gap: GapDistribution,
    pub easy_gap: GapDistribution,
    pub concreteness_range: (f64, f64),
}

impl Default for LogitGapConfig {
    fn default() -> Self {
        Self {
            positive_logit: 10.0,
            hard_gap: GapDistribution { mean: 1.0, std: 0.5 },
            easy_gap: GapDistribution { mean: 7.5, std: 1.0 },
            concreteness_range: (1.0, 5.0),
        }
    }
}

impl LogitGapConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |d: &GapDistribution| d.mean.is_finite() && d.std.is_finite() && d.std >= 0.0;
        if !(ok(&self.hard_gap) && ok(&self.easy_gap) && self.positive_logit.is_finite()) {
            return Err(Error::InvalidConfig("gap distributions need finite mean and std >= 0".into()));
        }
        let (lo, hi) = self.concreteness_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig("bad concreteness range".into()));
        }
        Ok(())
    }

    /// Draws the image-to-text logits and per-anchor concreteness for `n`
    /// anchors.
    pub fn sample(&self, n_anchors: usize, seed: u64) -> Result<(Array2<f64>, Vec<f64>)> {
        self.validate()?;
        if n_anchors == 0 {
            return Err(Error::InvalidConfig("batch size must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = |d: &GapDistribution| {
            Normal::new(d.mean, d.std).map_err(|e| Error::InvalidConfig(e.to_string()))
        };
        let hard = normal(&self.hard_gap)?;
        let easy = normal(&self.easy_gap)?;
        let rows = 2 * n_anchors;
        let mut logits = Array2::zeros((rows, rows));
        for i in 0..rows {
            let pair = pair_of(i, n_anchors);
            for j in 0..rows {
                logits[[i, j]] = if j == i {
                    self.positive_logit
                } else if j == pair {
                    self.positive_logit - hard.sample(&mut rng)
                } else {
                    self.positive_logit - easy.sample(&mut rng)
                };
            }
        }
        let (lo, hi) = self.concreteness_range;
        let concreteness: Vec<f64> = if lo == hi {
            vec![lo; n_anchors]
        } else {
            let u = Uniform::new(lo, hi).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            (0..n_anchors).map(|_| u.sample(&mut rng)).collect()
        };
        Ok((logits, concreteness))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_anchors: usize,
    pub report: GradientReport,
}

/// Decomposes one synthetic batch per requested size. Point `k` is drawn with
/// seed `seed + k`, so results do not depend on evaluation order.
pub fn batch_sweep(
    gap: &LogitGapConfig,
    sizes: &[usize],
    cfg: &MarginConfig,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if sizes.is_empty() {
        return Err(Error::InvalidConfig("no batch sizes given".into()));
    }
    gap.validate()?;
    cfg.validate()?;
    sizes
        .par_iter()
        .enumerate()
        .map(|(k, &n)| {
            let (v2t, anchor_c) = gap.sample(n, seed.wrapping_add(k as u64))?;
            let t2v = v2t.t().to_owned();
            let mut c = anchor_c.clone();
            c.extend_from_slice(&anchor_c);
            let margins = Objective::Cement(*cfg).margins(&c);
            let mut report = decompose_logits(&v2t, &t2v, margins.as_deref())?;
            report.step = k;
            Ok(SweepPoint { n_anchors: n, report })
        })
        .collect()
}
