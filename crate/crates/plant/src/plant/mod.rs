//! Keyword selection: anchor caption, candidate extraction, compositional
//! classification, quota balancing and concreteness-biased sampling.

mod classify;
mod select;

pub use classify::{
    classify_composition, extract_candidates, phrase_role, Category, Extraction,
    FallbackCandidate, KeywordCandidate, PhraseRole, SpatialLexicon, STATE_VERBS,
};
pub use select::{
    choose_category, pick_anchor_caption, sample_keyword, CategoryCounts, QuotaState,
    SelectionMode, SelectionPolicy, SelectionRecord, SelectionReport, Selector,
};
