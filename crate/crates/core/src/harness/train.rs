use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{ToyDataset, ToyDatasetConfig};
use super::encoder::DualEncoder;
use super::eval::{evaluate, EvalReport};
use crate::cement::Objective;
use crate::error::{Error, Result};
use crate::graddiag::{decompose_evaluation, GradientReport, SweepPoint};
use crate::margin::MarginConfig;
use crate::simcore::DEFAULT_TEMPERATURE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    InfoNce,
    Cement,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "infonce" | "info_nce" => Ok(Self::InfoNce),
            "cement" => Ok(Self::Cement),
            other => Err(Error::InvalidConfig(format!("unknown loss `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub embed_dim: usize,
    pub loss: LossKind,
    pub margin: MarginConfig,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            epochs: 20,
            learning_rate: 0.05,
            momentum: 0.9,
            embed_dim: 32,
            loss: LossKind::Cement,
            margin: MarginConfig::default(),
            temperature: DEFAULT_TEMPERATURE,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.embed_dim == 0 {
            return Err(Error::InvalidConfig("batch_size and embed_dim must be >= 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be finite and >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("momentum must lie in [0, 1)".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidConfig("temperature must be positive".into()));
        }
        self.margin.validate()
    }

    pub fn objective(&self) -> Objective {
        match self.loss {
            LossKind::InfoNce => Objective::InfoNce,
            LossKind::Cement => Objective::Cement(self.margin),
        }
    }
}

/// Top-level JSON config: `{"dataset": {...}, "train": {...}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyConfig {
    pub dataset: ToyDatasetConfig,
    pub train: TrainConfig,
}

pub fn read_config(path: &Path) -> Result<ToyConfig> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub loss: f64,
    pub report: GradientReport,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub initial: DualEncoder,
    pub encoders: DualEncoder,
    pub trace: Vec<TraceRow>,
    pub eval: EvalReport,
}

impl TrainOutcome {
    pub fn mean_hard_share(&self) -> f64 {
        let n = self.trace.len().max(1) as f64;
        self.trace.iter().map(|r| r.report.hard_share).sum::<f64>() / n
    }
}

fn axpy(param: &mut Array2<f64>, velocity: &mut Array2<f64>, grad: &Array2<f64>, cfg: &TrainConfig) {
    velocity.zip_mut_with(grad, |v, &g| *v = cfg.momentum * *v + g);
    param.zip_mut_with(velocity, |w, &v| *w -= cfg.learning_rate * v);
}

/// Mini-batch gradient descent with momentum. Batches that would be smaller
/// than `batch_size` at the end of an epoch are dropped; when the dataset
/// holds fewer scenes than `batch_size` every step resamples with
/// replacement.
pub fn train(data: &ToyDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let objective = cfg.objective();
    let initial = DualEncoder::random(cfg.embed_dim, data.config.latent_dim, cfg.seed);
    let mut enc = initial.clone();
    let mut vel_img = Array2::zeros(enc.image.weight.dim());
    let mut vel_txt = Array2::zeros(enc.text.weight.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let all_c = data.concreteness();
    let n = cfg.batch_size;
    let steps_per_epoch = (data.len() / n).max(1);
    let mut trace = Vec::with_capacity(steps_per_epoch * cfg.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for b in 0..steps_per_epoch {
            let idx: Vec<usize> = if data.len() >= n {
                order[b * n..(b + 1) * n].to_vec()
            } else {
                (0..n).map(|_| rng.random_range(0..data.len())).collect()
            };
            let step = trace.len();
            let (x_img, x_txt) = data.batch_inputs(&idx);
            let mut c: Vec<f64> = idx.iter().map(|&i| all_c[i]).collect();
            c.extend_from_within(..);
            let out = enc
                .step(&x_img, &x_txt, &c, &objective, cfg.temperature)
                .map_err(|e| match e {
                    Error::NonFinite(_) | Error::ZeroRow(_) => Error::Divergence { step, loss: f64::NAN },
                    other => other,
                })?;
            let loss = out.evaluation.report.total;
            if !loss.is_finite() {
                return Err(Error::Divergence { step, loss });
            }
            let report = decompose_evaluation(&out.evaluation, &out.v2t, &out.t2v, step);
            trace.push(TraceRow { loss, report });
            axpy(&mut enc.image.weight, &mut vel_img, &out.grads.image, cfg);
            axpy(&mut enc.text.weight, &mut vel_txt, &out.grads.text, cfg);
        }
    }
    let eval = evaluate(&enc, data, cfg.temperature)?;
    Ok(TrainOutcome { initial, encoders: enc, trace, eval })
}

/// Writes `step,loss,positive_pull,hard_reject,easy_reject,hard_share`.
pub fn write_trace_csv<W: Write>(w: W, trace: &[TraceRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    out.write_record(["step", "loss", "positive_pull", "hard_reject", "easy_reject", "hard_share"])
        .map_err(csv_err)?;
    for row in trace {
        let r = &row.report;
        out.write_record([
            r.step.to_string(),
            format!("{:?}", row.loss),
            format!("{:?}", r.positive_pull),
            format!("{:?}", r.hard_reject),
            format!("{:?}", r.easy_reject),
            format!("{:?}", r.hard_share),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Gradient decomposition of the given encoders at several batch sizes.
/// Point `k` draws its scenes with seed `seed + k`; sizes larger than the
/// dataset sample scenes with replacement.
pub fn encoder_batch_sweep(
    data: &ToyDataset,
    encoders: &DualEncoder,
    sizes: &[usize],
    objective: &Objective,
    temperature: f64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidConfig("batch sizes must be non-empty and >= 1".into()));
    }
    let all_c = data.concreteness();
    sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let idx: Vec<usize> = if n <= data.len() {
                rand::seq::index::sample(&mut rng, data.len(), n).into_vec()
            } else {
                (0..n).map(|_| rng.random_range(0..data.len())).collect()
            };
            let (x_img, x_txt) = data.batch_inputs(&idx);
            let mut c: Vec<f64> = idx.iter().map(|&i| all_c[i]).collect();
            c.extend_from_within(..);
            let out = encoders.step(&x_img, &x_txt, &c, objective, temperature)?;
            let report = decompose_evaluation(&out.evaluation, &out.v2t, &out.t2v, k);
            Ok(SweepPoint { n_anchors: n, report })
        })
        .collect()
}
