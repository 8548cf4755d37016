//! Seeded synthetic caption corpora for fixtures and quota checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tagger::{CaptionInput, CorpusRecord, RuleTagger};

const CONCRETE_NOUNS: &[&str] = &[
    "dog", "cat", "cup", "table", "car", "apple", "chair", "horse", "boat", "tree", "lamp",
    "bicycle", "woman", "man", "child", "bench", "book", "bottle", "plate", "sofa", "window",
    "ball", "helmet", "coffee cup", "teddy bear",
];
const ABSTRACT_NOUNS: &[&str] = &[
    "idea", "moment", "sense", "memory", "freedom", "hope", "peace", "mood", "thought", "silence",
    "truth", "chance", "scene", "view",
];
const AGENTS: &[&str] = &["dog", "cat", "woman", "man", "child", "horse"];
const CONCRETE_ADJ: &[&str] = &[
    "red", "blue", "green", "wooden", "metal", "plastic", "striped", "fluffy", "shiny", "wet",
];
const ABSTRACT_ADJ: &[&str] = &[
    "beautiful", "strange", "curious", "elegant", "simple", "famous", "rare", "typical", "calm",
    "lonely", "free", "happy",
];
const ACTION_VERBS: &[&str] = &[
    "holding", "carrying", "pushing", "pulling", "watching", "touching", "enjoying",
    "considering", "admiring", "ignoring", "imagining",
];
const STATE_VERBS: &[&str] = &["sitting", "standing", "lying"];
const PREPOSITIONS: &[&str] = &[
    "on", "under", "above", "below", "behind", "beside", "near", "over", "inside",
];
const PHRASES: &[&str] = &["in front of", "to the left of", "to the right of", "on top of", "next to"];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.random_range(0..pool.len())]
}

fn adj(rng: &mut ChaCha8Rng) -> &'static str {
    if rng.random_bool(0.5) {
        pick(rng, CONCRETE_ADJ)
    } else {
        pick(rng, ABSTRACT_ADJ)
    }
}

fn article(word: &str) -> &'static str {
    if word.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

/// Caption with attribute and object handles and nothing relational.
pub fn relation_free_caption(rng: &mut ChaCha8Rng) -> String {
    let (a1, n1) = (pick(rng, CONCRETE_ADJ), pick(rng, CONCRETE_NOUNS));
    let (a2, n2) = (pick(rng, ABSTRACT_ADJ), pick(rng, ABSTRACT_NOUNS));
    let (a1, a2) = if rng.random_bool(0.5) { (a1, a2) } else { (a2, a1) };
    match rng.random_range(0..3) {
        0 => format!("{} {a1} {n1} with {} {a2} {n2}", capitalize(article(a1)), article(a2)),
        1 => format!("The {a1} {n1} and the {a2} {n2}"),
        _ => format!("{} {a1} {n1} of {} {a2} {n2}", capitalize(article(a1)), article(a2)),
    }
}

fn relation_caption(rng: &mut ChaCha8Rng) -> String {
    let agent = pick(rng, AGENTS);
    let object = pick(rng, CONCRETE_NOUNS);
    let ground = pick(rng, CONCRETE_NOUNS);
    let a = adj(rng);
    match rng.random_range(0..4) {
        0 => format!(
            "A {agent} {} the {object} {} {} {a} {ground}",
            pick(rng, ACTION_VERBS),
            pick(rng, PREPOSITIONS),
            article(a)
        ),
        1 => format!("A {a} {agent} {} the {object} near a {}", pick(rng, ACTION_VERBS), pick(rng, ABSTRACT_NOUNS)),
        2 => format!("A {a} {object} {} {} the {ground}", pick(rng, STATE_VERBS), pick(rng, PHRASES)),
        _ => format!(
            "{} {a} {object} {} {} the {ground}",
            capitalize(article(a)),
            pick(rng, STATE_VERBS),
            pick(rng, PREPOSITIONS)
        ),
    }
}

fn short_caption(rng: &mut ChaCha8Rng) -> String {
    match rng.random_range(0..3) {
        0 => {
            let a = adj(rng);
            format!("{} {a} {}", capitalize(article(a)), pick(rng, CONCRETE_NOUNS))
        }
        1 => format!("A photo of a {}", pick(rng, CONCRETE_NOUNS)),
        _ => format!("The {}", pick(rng, CONCRETE_NOUNS)),
    }
}

fn record(id: String, captions: Vec<String>, image_ref: Option<String>, tagger: &RuleTagger) -> CorpusRecord {
    let captions = captions
        .into_iter()
        .enumerate()
        .map(|(k, text)| {
            let tokens = tagger.tag(&format!("{id}#{k}"), &text).tokens;
            CaptionInput { text, tokens }
        })
        .collect();
    CorpusRecord { id, image_ref, captions }
}

/// Image records with one long anchor caption (mixed relation-bearing and
/// relation-free) plus one or two short captions, pre-tagged by `tagger`.
pub fn fixture_corpus(records: usize, seed: u64, tagger: &RuleTagger) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..records)
        .map(|k| {
            let main = if rng.random_bool(0.6) {
                relation_caption(&mut rng)
            } else {
                relation_free_caption(&mut rng)
            };
            let extra = rng.random_range(1..=2);
            let mut caps: Vec<String> = (0..extra).map(|_| short_caption(&mut rng)).collect();
            caps.insert(rng.random_range(0..=caps.len()), main);
            record(format!("fx-{k:04}"), caps, Some(format!("images/{k:06}.jpg")), tagger)
        })
        .collect()
}

/// Single-caption records without any relational structure.
pub fn relation_free_corpus(records: usize, seed: u64, tagger: &RuleTagger) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..records)
        .map(|k| record(format!("rf-{k:04}"), vec![relation_free_caption(&mut rng)], None, tagger))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_is_the_long_caption() {
        let tagger = RuleTagger::new();
        for rec in fixture_corpus(50, 3, &tagger) {
            let lens: Vec<usize> = rec.captions.iter().map(|c| c.tokens.len()).collect();
            let max = *lens.iter().max().unwrap();
            assert_eq!(lens.iter().filter(|&&l| l == max).count(), 1, "{rec:?}");
            assert!(rec.captions.len() >= 2);
        }
    }

    #[test]
    fn seeded() {
        let tagger = RuleTagger::new();
        let a = fixture_corpus(20, 9, &tagger);
        assert_eq!(a, fixture_corpus(20, 9, &tagger));
        assert_ne!(a, fixture_corpus(20, 10, &tagger));
    }
}
