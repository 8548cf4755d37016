use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slots per scene: object1, attribute, relation, object2.
pub const SLOTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabSizes {
    pub object1: usize,
    pub attribute: usize,
    pub relation: usize,
    pub object2: usize,
}

impl Default for VocabSizes {
    fn default() -> Self {
        Self { object1: 10, attribute: 8, relation: 6, object2: 10 }
    }
}

impl VocabSizes {
    pub fn as_array(&self) -> [usize; SLOTS] {
        [self.object1, self.attribute, self.relation, self.object2]
    }

    pub fn total(&self) -> usize {
        self.as_array().iter().sum()
    }

    /// Global column index of the first item of each slot.
    pub fn offsets(&self) -> [usize; SLOTS] {
        let sizes = self.as_array();
        let mut out = [0; SLOTS];
        for k in 1..SLOTS {
            out[k] = out[k - 1] + sizes[k - 1];
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyDatasetConfig {
    pub vocab: VocabSizes,
    pub scenes: usize,
    pub latent_dim: usize,
    pub noise_std: f64,
    pub seed: u64,
    /// Rating in `[1, 5]` per vocabulary item, in slot order. Scales the item's
    /// image-space column. Drawn uniformly from the seed when absent.
    pub item_ratings: Option<Vec<f64>>,
}

impl Default for ToyDatasetConfig {
    fn default() -> Self {
        Self {
            vocab: VocabSizes::default(),
            scenes: 2000,
            latent_dim: 32,
            noise_std: 0.05,
            seed: 0,
            item_ratings: None,
        }
    }
}

impl ToyDatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab.as_array().iter().any(|&v| v < 2) {
            return Err(Error::InvalidConfig("every vocabulary size must be >= 2".into()));
        }
        if self.scenes == 0 || self.latent_dim == 0 {
            return Err(Error::InvalidConfig("scenes and latent_dim must be positive".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidConfig("noise_std must be finite and >= 0".into()));
        }
        if let Some(r) = &self.item_ratings {
            if r.len() != self.vocab.total() {
                return Err(Error::InvalidConfig(format!(
                    "{} item ratings for {} vocabulary items",
                    r.len(),
                    self.vocab.total()
                )));
            }
            if r.iter().any(|v| !(1.0..=5.0).contains(v)) {
                return Err(Error::InvalidConfig("item ratings must lie in [1, 5]".into()));
            }
        }
        Ok(())
    }
}

/// One anchor scene and its one-slot perturbation. Items are global
/// vocabulary indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub slots: [usize; SLOTS],
    pub negative: [usize; SLOTS],
    pub flipped_slot: usize,
    pub displacement: f64,
    pub concreteness: f64,
}

/// Maps the image-space displacement of a flip onto `[1, 5]`.
pub fn rescale_displacement(d: f64, d_max: f64) -> f64 {
    if d_max <= 0.0 {
        return 1.0;
    }
    1.0 + 4.0 * (d / d_max).clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct ToyDataset {
    pub config: ToyDatasetConfig,
    pub a_img: Array2<f64>,
    pub a_txt: Array2<f64>,
    pub scenes: Vec<Scene>,
    /// Rows are per-scene vectors in `latent_dim`.
    pub images: Array2<f64>,
    pub negative_images: Array2<f64>,
    pub captions: Array2<f64>,
    pub negative_captions: Array2<f64>,
}

fn column_distance(a: &Array2<f64>, p: usize, q: usize) -> f64 {
    a.column(p)
        .iter()
        .zip(a.column(q).iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn encode(a: &Array2<f64>, items: &[usize; SLOTS]) -> Array1<f64> {
    let mut v = Array1::zeros(a.nrows());
    for &k in items {
        v += &a.column(k);
    }
    v
}

impl ToyDataset {
    /// Draws generating maps and scenes from `cfg.seed`.
    pub fn synthesize(cfg: &ToyDatasetConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let total = cfg.vocab.total();
        let ratings: Vec<f64> = match &cfg.item_ratings {
            Some(r) => r.clone(),
            None => (0..total).map(|_| rng.random_range(1.0..=5.0)).collect(),
        };
        let mut a_img = Array2::zeros((cfg.latent_dim, total));
        for k in 0..total {
            let dir: Vec<f64> = (0..cfg.latent_dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            for (r, x) in dir.iter().enumerate() {
                a_img[[r, k]] = ratings[k] * x / norm;
            }
        }
        let scale = 1.0 / (cfg.latent_dim as f64).sqrt();
        let a_txt = Array2::from_shape_fn((cfg.latent_dim, total), |_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        });
        Self::from_maps(cfg, a_img, a_txt, &mut rng)
    }

    /// Builds scenes on top of explicit generating maps (`latent_dim x total`).
    pub fn from_maps(
        cfg: &ToyDatasetConfig,
        a_img: Array2<f64>,
        a_txt: Array2<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        cfg.validate()?;
        let total = cfg.vocab.total();
        let shape = (cfg.latent_dim, total);
        if a_img.dim() != shape || a_txt.dim() != shape {
            return Err(Error::ShapeMismatch(format!(
                "generating maps must be {shape:?}, got {:?} and {:?}",
                a_img.dim(),
                a_txt.dim()
            )));
        }
        let sizes = cfg.vocab.as_array();
        let offsets = cfg.vocab.offsets();
        let mut d_max = 0.0f64;
        for s in 0..SLOTS {
            for p in 0..sizes[s] {
                for q in p + 1..sizes[s] {
                    d_max = d_max.max(column_distance(&a_img, offsets[s] + p, offsets[s] + q));
                }
            }
        }
        let noise = Normal::new(0.0, cfg.noise_std).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let n = cfg.scenes;
        let dim = cfg.latent_dim;
        let mut scenes = Vec::with_capacity(n);
        let mut images = Array2::zeros((n, dim));
        let mut negative_images = Array2::zeros((n, dim));
        let mut captions = Array2::zeros((n, dim));
        let mut negative_captions = Array2::zeros((n, dim));
        for i in 0..n {
            let mut slots = [0; SLOTS];
            for s in 0..SLOTS {
                slots[s] = offsets[s] + rng.random_range(0..sizes[s]);
            }
            let flipped_slot = rng.random_range(0..SLOTS);
            let local = slots[flipped_slot] - offsets[flipped_slot];
            let mut other = rng.random_range(0..sizes[flipped_slot] - 1);
            if other >= local {
                other += 1;
            }
            let mut negative = slots;
            negative[flipped_slot] = offsets[flipped_slot] + other;
            let displacement = column_distance(&a_img, slots[flipped_slot], negative[flipped_slot]);
            let mut img = encode(&a_img, &slots);
            let mut neg_img = encode(&a_img, &negative);
            if cfg.noise_std > 0.0 {
                img.mapv_inplace(|x| x + noise.sample(rng));
                neg_img.mapv_inplace(|x| x + noise.sample(rng));
            }
            images.row_mut(i).assign(&img);
            negative_images.row_mut(i).assign(&neg_img);
            captions.row_mut(i).assign(&encode(&a_txt, &slots));
            negative_captions.row_mut(i).assign(&encode(&a_txt, &negative));
            scenes.push(Scene {
                slots,
                negative,
                flipped_slot,
                displacement,
                concreteness: rescale_displacement(displacement, d_max),
            });
        }
        Ok(Self {
            config: cfg.clone(),
            a_img,
            a_txt,
            scenes,
            images,
            negative_images,
            captions,
            negative_captions,
        })
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    pub fn concreteness(&self) -> Vec<f64> {
        self.scenes.iter().map(|s| s.concreteness).collect()
    }

    /// `[anchors | negatives]` image and caption inputs for the given scenes.
    pub fn batch_inputs(&self, idx: &[usize]) -> (Array2<f64>, Array2<f64>) {
        let n = idx.len();
        let dim = self.config.latent_dim;
        let mut x_img = Array2::zeros((2 * n, dim));
        let mut x_txt = Array2::zeros((2 * n, dim));
        for (r, &i) in idx.iter().enumerate() {
            x_img.row_mut(r).assign(&self.images.row(i));
            x_img.row_mut(r + n).assign(&self.negative_images.row(i));
            x_txt.row_mut(r).assign(&self.captions.row(i));
            x_txt.row_mut(r + n).assign(&self.negative_captions.row(i));
        }
        (x_img, x_txt)
    }
}
