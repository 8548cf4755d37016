use std::fmt;
use std::str::FromStr;

use cement_core::margin::MISSING_CONCRETENESS;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{extract_candidates, Category, Extraction, KeywordCandidate, SpatialLexicon};
use crate::error::{Error, Result};
use crate::lexicon::ConcretenessLexicon;
use crate::tagger::{CorpusRecord, RuleTagger, TaggedCaption};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    HighConcreteness,
    LowConcreteness,
    Random,
}

impl SelectionMode {
    pub fn short(&self) -> &'static str {
        match self {
            SelectionMode::HighConcreteness => "hc",
            SelectionMode::LowConcreteness => "lc",
            SelectionMode::Random => "wo",
        }
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hc" | "high" | "high_concreteness" => Ok(Self::HighConcreteness),
            "lc" | "low" | "low_concreteness" => Ok(Self::LowConcreteness),
            "wo" | "random" => Ok(Self::Random),
            other => Err(Error::InvalidConfig(format!("unknown selection mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionPolicy {
    pub mode: SelectionMode,
    pub top_k: usize,
    pub sample_temperature: f64,
    pub seed: u64,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self {
            mode: SelectionMode::HighConcreteness,
            top_k: 3,
            sample_temperature: 1.0,
            seed: 0,
        }
    }
}

impl SelectionPolicy {
    pub fn with_mode(mode: SelectionMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::InvalidConfig("top_k must be >= 1".into()));
        }
        if !(self.sample_temperature > 0.0 && self.sample_temperature.is_finite()) {
            return Err(Error::InvalidConfig("sample_temperature must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub attribute: usize,
    pub object: usize,
    pub relation: usize,
}

impl CategoryCounts {
    pub fn bump(&mut self, c: Category) {
        match c {
            Category::Attribute => self.attribute += 1,
            Category::Object => self.object += 1,
            Category::Relation => self.relation += 1,
        }
    }
}

/// Running category totals and the attribute share targeted among
/// attribute/object picks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotaState {
    pub target_attribute: f64,
    pub counts: CategoryCounts,
}

impl Default for QuotaState {
    fn default() -> Self {
        Self { target_attribute: 0.5, counts: CategoryCounts::default() }
    }
}

impl QuotaState {
    pub fn with_counts(attribute: usize, object: usize) -> Self {
        Self {
            counts: CategoryCounts { attribute, object, relation: 0 },
            ..Self::default()
        }
    }

    /// `(attribute deficit, object deficit)` after one more pick.
    pub fn deficits(&self) -> (f64, f64) {
        let total = (self.counts.attribute + self.counts.object) as f64;
        (
            self.target_attribute * total - self.counts.attribute as f64,
            (1.0 - self.target_attribute) * total - self.counts.object as f64,
        )
    }
}

/// Relation whenever available, otherwise the larger attribute/object
/// deficit with ties going to object. Updates the counts.
pub fn choose_category(available: &[Category], quota: &mut QuotaState) -> Result<Category> {
    let has = |c| available.contains(&c);
    let chosen = if has(Category::Relation) {
        Category::Relation
    } else {
        match (has(Category::Attribute), has(Category::Object)) {
            (false, false) => return Err(Error::EmptyCandidates),
            (true, false) => Category::Attribute,
            (false, true) => Category::Object,
            (true, true) => {
                let (att, obj) = quota.deficits();
                if att > obj {
                    Category::Attribute
                } else {
                    Category::Object
                }
            }
        }
    };
    quota.counts.bump(chosen);
    Ok(chosen)
}

/// Draws one candidate. High and low modes restrict to the `top_k`
/// best (or worst) rated candidates, ties kept in token order, and sample
/// with softmax weights over `±rating / temperature`.
pub fn sample_keyword<'a, R: Rng + ?Sized>(
    candidates: &'a [KeywordCandidate],
    policy: &SelectionPolicy,
    rng: &mut R,
) -> Result<&'a KeywordCandidate> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    policy.validate()?;
    let sign = match policy.mode {
        SelectionMode::Random => return Ok(&candidates[rng.random_range(0..candidates.len())]),
        SelectionMode::HighConcreteness => 1.0,
        SelectionMode::LowConcreteness => -1.0,
    };
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (sign * candidates[a].concreteness, sign * candidates[b].concreteness);
        rb.total_cmp(&ra).then(candidates[a].token_start.cmp(&candidates[b].token_start))
    });
    order.truncate(policy.top_k);
    let best = sign * candidates[order[0]].concreteness;
    let weights: Vec<f64> = order
        .iter()
        .map(|&k| ((sign * candidates[k].concreteness - best) / policy.sample_temperature).exp())
        .collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(&candidates[order[dist.sample(rng)]])
}

/// Caption with the most tokens; the first one wins ties.
pub fn pick_anchor_caption(captions: &[TaggedCaption]) -> Result<&TaggedCaption> {
    let mut best: Option<&TaggedCaption> = None;
    for c in captions {
        if best.is_none_or(|b| c.tokens.len() > b.tokens.len()) {
            best = Some(c);
        }
    }
    best.ok_or(Error::EmptyInput)
}

/// One selected keyword per corpus record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub id: String,
    pub anchor_caption: String,
    pub keyword: String,
    /// `[token_start, token_count]` in the anchor caption.
    pub span: (usize, usize),
    pub category: Category,
    pub concreteness: f64,
    pub mode: SelectionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    /// True when the keyword came from the unrated fallback list.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub records: usize,
    pub selected: usize,
    pub fallback: usize,
    pub skipped: usize,
    pub counts: CategoryCounts,
    pub mean_concreteness: f64,
}

/// Resources shared by a selection run.
#[derive(Debug, Clone)]
pub struct Selector<'a> {
    pub lexicon: &'a ConcretenessLexicon,
    pub spatial: &'a SpatialLexicon,
    pub tagger: &'a RuleTagger,
}

struct Prepared {
    id: String,
    image_ref: Option<String>,
    anchor: Option<TaggedCaption>,
    extraction: Extraction,
}

impl Selector<'_> {
    pub fn prepare_caption(&self, caption: &TaggedCaption) -> Extraction {
        extract_candidates(caption, self.lexicon, self.spatial)
    }

    /// Extraction fans out over records; category assignment and sampling
    /// run sequentially in corpus order with a single seeded generator.
    pub fn select(
        &self,
        records: &[CorpusRecord],
        policy: &SelectionPolicy,
        quota: &mut QuotaState,
    ) -> Result<(Vec<SelectionRecord>, SelectionReport)> {
        policy.validate()?;
        let prepared: Vec<Prepared> = records
            .par_iter()
            .map(|r| {
                let caps = r.tagged_captions(self.tagger);
                let anchor = pick_anchor_caption(&caps).ok().cloned();
                let extraction = anchor
                    .as_ref()
                    .map(|a| self.prepare_caption(a))
                    .unwrap_or_default();
                Prepared { id: r.id.clone(), image_ref: r.image_ref.clone(), anchor, extraction }
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
        let mut out = Vec::with_capacity(records.len());
        let mut report = SelectionReport { records: records.len(), ..Default::default() };
        for p in prepared {
            let Some(anchor) = p.anchor else {
                report.skipped += 1;
                continue;
            };
            let record = if !p.extraction.scored.is_empty() {
                let mut available: Vec<Category> =
                    p.extraction.scored.iter().map(|c| c.category).collect();
                available.sort();
                available.dedup();
                let category = choose_category(&available, quota)?;
                let pool: Vec<KeywordCandidate> = p
                    .extraction
                    .scored
                    .iter()
                    .filter(|c| c.category == category)
                    .cloned()
                    .collect();
                let pick = sample_keyword(&pool, policy, &mut rng)?;
                SelectionRecord {
                    id: p.id,
                    anchor_caption: anchor.text.clone(),
                    keyword: pick.surface.clone(),
                    span: (pick.token_start, pick.span),
                    category,
                    concreteness: pick.concreteness,
                    mode: policy.mode,
                    image_ref: p.image_ref,
                    fallback: false,
                }
            } else if !p.extraction.fallback.is_empty() {
                let fb = &p.extraction.fallback;
                let pick = &fb[rng.random_range(0..fb.len())];
                quota.counts.bump(pick.category);
                report.fallback += 1;
                SelectionRecord {
                    id: p.id,
                    anchor_caption: anchor.text.clone(),
                    keyword: pick.surface.clone(),
                    span: (pick.token_start, 1),
                    category: pick.category,
                    concreteness: MISSING_CONCRETENESS,
                    mode: policy.mode,
                    image_ref: p.image_ref,
                    fallback: true,
                }
            } else {
                report.skipped += 1;
                continue;
            };
            report.counts.bump(record.category);
            out.push(record);
        }
        report.selected = out.len();
        if !out.is_empty() {
            report.mean_concreteness =
                out.iter().map(|r| r.concreteness).sum::<f64>() / out.len() as f64;
        }
        Ok((out, report))
    }
}
