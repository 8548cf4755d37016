use cement_plant::lexicon::{normalize_key, ConcretenessLexicon, LexiconFormat};
use proptest::prelude::*;

#[test]
fn fixture_lexicon_loads() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/lexicon.csv");
    let (lex, report) = ConcretenessLexicon::load(&path).unwrap();
    assert_eq!(report.duplicates, 0);
    assert_eq!(lex.len(), report.rows);
    assert_eq!(lex.get("apple"), Some(5.0));
    assert_eq!(lex.get("idea"), Some(1.61));
    assert_eq!(lex.lookup(&["coffee", "cup"], 0), Some((4.9, 2)));
    assert_eq!(lex.histogram().iter().map(|b| b.2).sum::<usize>(), lex.len());
}

#[test]
fn tab_separated_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.tsv");
    std::fs::write(&path, "Word\tBigram\tConc.M\nice cream\t1\t4.9\n").unwrap();
    assert_eq!(LexiconFormat::for_path(&path).delimiter, b'\t');
    let (lex, _) = ConcretenessLexicon::load(&path).unwrap();
    assert_eq!(lex.get("Ice  Cream"), Some(4.9));
}

proptest! {
    #[test]
    fn normalization_is_idempotent(s in "\\PC{0,24}") {
        let once = normalize_key(&s);
        prop_assert_eq!(normalize_key(&once), once.clone());
        prop_assert!(!once.starts_with(' ') && !once.ends_with(' ') && !once.contains("  "));
    }

    #[test]
    fn in_range_ratings_round_trip(r in 1.0f64..=5.0, word in "[a-z]{1,10}") {
        let text = format!("Word,Conc.M\n{word},{r}\n");
        let (lex, _) = ConcretenessLexicon::from_reader(text.as_bytes(), &LexiconFormat::default()).unwrap();
        prop_assert_eq!(lex.get(&word), Some(r));
    }
}
