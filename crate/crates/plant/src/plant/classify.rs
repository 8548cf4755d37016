use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::ConcretenessLexicon;
use crate::tagger::{Pos, TaggedCaption};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Attribute,
    Object,
    Relation,
}

impl Category {
    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Attribute => "attribute",
            Category::Object => "object",
            Category::Relation => "relation",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "attribute" => Ok(Category::Attribute),
            "object" => Ok(Category::Object),
            "relation" => Ok(Category::Relation),
            other => Err(Error::UnknownCategory(other.to_string())),
        }
    }
}

/// Surface forms treated as state-like attributes when tagged as verbs.
pub const STATE_VERBS: &[&str] = &["standing", "sitting", "lying", "open", "closed", "lit", "broken"];

const PHRASE_FUNCTION_WORDS: &[&str] = &["in", "to", "the", "of", "on", "at"];

/// Spatial prepositions and multi-word spatial phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialLexicon {
    prepositions: HashSet<String>,
    phrases: Vec<Vec<String>>,
}

impl Default for SpatialLexicon {
    fn default() -> Self {
        Self::parse(include_str!("../../data/spatial.txt"))
    }
}

impl SpatialLexicon {
    /// One entry per line, `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let mut prepositions = HashSet::new();
        let mut phrases = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim().to_lowercase();
            let words: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            match words.len() {
                0 => {}
                1 => {
                    prepositions.insert(words[0].clone());
                }
                _ => phrases.push(words),
            }
        }
        // longest phrases first so overlapping matches prefer them
        phrases.sort_by_key(|p| std::cmp::Reverse(p.len()));
        Self { prepositions, phrases }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn is_preposition(&self, word: &str) -> bool {
        self.prepositions.contains(word)
    }

    pub fn phrases(&self) -> &[Vec<String>] {
        &self.phrases
    }
}

/// Where a token sits relative to a multi-word spatial phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhraseRole {
    /// The content word standing for the whole phrase (`front` in `in front of`).
    Anchor { start: usize, len: usize },
    Member,
    Outside,
}

fn lower(caption: &TaggedCaption, i: usize) -> String {
    caption.tokens[i].surface.to_lowercase()
}

pub fn phrase_role(caption: &TaggedCaption, i: usize, spatial: &SpatialLexicon) -> PhraseRole {
    let n = caption.tokens.len();
    for phrase in spatial.phrases() {
        let len = phrase.len();
        let lo = i.saturating_sub(len - 1);
        for start in lo..=i {
            if start + len > n {
                break;
            }
            if (0..len).all(|k| lower(caption, start + k) == phrase[k]) {
                let anchor = phrase
                    .iter()
                    .position(|w| !PHRASE_FUNCTION_WORDS.contains(&w.as_str()))
                    .unwrap_or(len - 1);
                return if start + anchor == i {
                    PhraseRole::Anchor { start, len }
                } else {
                    PhraseRole::Member
                };
            }
        }
    }
    PhraseRole::Outside
}

fn has_arcs(caption: &TaggedCaption) -> bool {
    caption.tokens.iter().any(|t| t.dep.is_some())
}

fn children(caption: &TaggedCaption, i: usize) -> impl Iterator<Item = usize> + '_ {
    caption
        .tokens
        .iter()
        .enumerate()
        .filter(move |(_, t)| t.head == Some(i))
        .map(|(k, _)| k)
}

/// First token after `i` that is not a determiner, modifier or adverb.
fn next_head_word(caption: &TaggedCaption, i: usize) -> Option<usize> {
    (i + 1..caption.tokens.len()).find(|&k| {
        !matches!(caption.tokens[k].pos, Pos::Det | Pos::Adj | Pos::Num | Pos::Adv)
    })
}

fn has_nominal_object(caption: &TaggedCaption, i: usize) -> bool {
    if has_arcs(caption) {
        let t = &caption.tokens;
        let by_child = children(caption, i).any(|k| t[k].pos.is_nominal() && k > i);
        let by_case = t[i].dep.as_deref() == Some("case")
            && t[i].head.is_some_and(|h| h > i && t[h].pos.is_nominal());
        return by_child || by_case;
    }
    next_head_word(caption, i).is_some_and(|k| caption.tokens[k].pos.is_nominal())
}

fn has_subject(caption: &TaggedCaption, i: usize) -> bool {
    let t = &caption.tokens;
    if has_arcs(caption) {
        let child = children(caption, i)
            .any(|k| t[k].dep.as_deref().is_some_and(|d| d.starts_with("nsubj")));
        let modifies = t[i].head.is_some_and(|h| h != i && t[h].pos.is_nominal());
        return child || modifies;
    }
    t[..i].iter().any(|tok| tok.pos.is_nominal())
}

fn has_direct_object(caption: &TaggedCaption, i: usize) -> bool {
    if has_arcs(caption) {
        return children(caption, i).any(|k| {
            matches!(caption.tokens[k].dep.as_deref(), Some("obj") | Some("dobj"))
        });
    }
    next_head_word(caption, i).is_some_and(|k| caption.tokens[k].pos.is_nominal())
}

/// Compositional category of token `i`, or `None` when the token offers no
/// perturbation handle (intransitive verbs, non-spatial prepositions).
pub fn classify_composition(
    caption: &TaggedCaption,
    i: usize,
    spatial: &SpatialLexicon,
) -> Option<Category> {
    match phrase_role(caption, i, spatial) {
        PhraseRole::Anchor { .. } => return Some(Category::Relation),
        PhraseRole::Member => return None,
        PhraseRole::Outside => {}
    }
    let tok = &caption.tokens[i];
    match tok.pos {
        Pos::Adj | Pos::Num => Some(Category::Attribute),
        Pos::Verb => {
            if STATE_VERBS.contains(&tok.surface.to_lowercase().as_str()) {
                Some(Category::Attribute)
            } else if has_subject(caption, i) && has_direct_object(caption, i) {
                Some(Category::Relation)
            } else {
                None
            }
        }
        Pos::Adp => {
            let word = tok.lemma.to_lowercase();
            (spatial.is_preposition(&word) && has_nominal_object(caption, i)).then_some(Category::Relation)
        }
        Pos::Noun | Pos::Propn => Some(Category::Object),
        _ => None,
    }
}

/// A scored keyword handle in an anchor caption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordCandidate {
    pub token_start: usize,
    pub span: usize,
    pub lemma_key: String,
    pub surface: String,
    pub concreteness: f64,
    pub category: Category,
}

/// Classified handle without a rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackCandidate {
    pub token_start: usize,
    pub lemma_key: String,
    pub surface: String,
    pub category: Category,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub scored: Vec<KeywordCandidate>,
    pub fallback: Vec<FallbackCandidate>,
}

/// Left-to-right scan with bigram-first lookup. Tokens outside the content
/// POS set and tokens without a category are skipped; classified tokens
/// without a rating go to the fallback list.
pub fn extract_candidates(
    caption: &TaggedCaption,
    lexicon: &ConcretenessLexicon,
    spatial: &SpatialLexicon,
) -> Extraction {
    let lemmas: Vec<String> = caption.tokens.iter().map(|t| t.lemma.to_lowercase()).collect();
    let mut out = Extraction::default();
    let mut i = 0;
    while i < caption.tokens.len() {
        let tok = &caption.tokens[i];
        if !tok.pos.is_content() {
            i += 1;
            continue;
        }
        let hit = lexicon.lookup(&lemmas, i).filter(|&(_, span)| {
            span == 1 || caption.tokens[i + 1].pos.is_content()
        });
        let hit = hit.or_else(|| lexicon.lookup(&lemmas[..=i], i));
        match hit {
            Some((rating, span)) => {
                let head = i + span - 1;
                if let Some(category) = classify_composition(caption, head, spatial) {
                    out.scored.push(KeywordCandidate {
                        token_start: i,
                        span,
                        lemma_key: lemmas[i..i + span].join(" "),
                        surface: caption.tokens[i..i + span]
                            .iter()
                            .map(|t| t.surface.as_str())
                            .collect::<Vec<_>>()
                            .join(" "),
                        concreteness: rating,
                        category,
                    });
                }
                i += span;
            }
            None => {
                if let Some(category) = classify_composition(caption, i, spatial) {
                    out.fallback.push(FallbackCandidate {
                        token_start: i,
                        lemma_key: lemmas[i].clone(),
                        surface: tok.surface.clone(),
                        category,
                    });
                }
                i += 1;
            }
        }
    }
    out
}
