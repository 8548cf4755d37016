#![allow(dead_code)]

use std::path::PathBuf;

use cement_plant::lexicon::ConcretenessLexicon;
use cement_plant::plant::{QuotaState, SelectionMode, SelectionPolicy, SelectionRecord, SelectionReport, Selector, SpatialLexicon};
use cement_plant::tagger::{CorpusRecord, RuleTagger};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn lexicon() -> ConcretenessLexicon {
    ConcretenessLexicon::load(&fixture("lexicon.csv")).unwrap().0
}

pub fn select(records: &[CorpusRecord], lex: &ConcretenessLexicon, mode: SelectionMode, seed: u64) -> (Vec<SelectionRecord>, SelectionReport) {
    let spatial = SpatialLexicon::default();
    let tagger = RuleTagger::with_vocabulary(lex.words());
    let sel = Selector { lexicon: lex, spatial: &spatial, tagger: &tagger };
    let policy = SelectionPolicy { mode, seed, ..Default::default() };
    sel.select(records, &policy, &mut QuotaState::default()).unwrap()
}
