//! Caption records and a small rule-based tagger for untagged input.
//!
//! The tagger uses closed-class word lists and suffix rules. It produces no
//! dependency arcs; the classifier falls back to word-order heuristics when
//! arcs are absent.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Universal POS tags. Unknown strings map to `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Pos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Pos {
    pub fn as_str(&self) -> &'static str {
        match self {
            Pos::Adj => "ADJ",
            Pos::Adp => "ADP",
            Pos::Adv => "ADV",
            Pos::Aux => "AUX",
            Pos::Cconj => "CCONJ",
            Pos::Det => "DET",
            Pos::Intj => "INTJ",
            Pos::Noun => "NOUN",
            Pos::Num => "NUM",
            Pos::Part => "PART",
            Pos::Pron => "PRON",
            Pos::Propn => "PROPN",
            Pos::Punct => "PUNCT",
            Pos::Sconj => "SCONJ",
            Pos::Sym => "SYM",
            Pos::Verb => "VERB",
            Pos::X => "X",
        }
    }

    /// Tags eligible as perturbation keywords.
    pub fn is_content(&self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn | Pos::Adj | Pos::Num | Pos::Adp | Pos::Verb)
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn | Pos::Pron)
    }
}

impl From<String> for Pos {
    fn from(s: String) -> Self {
        match s.to_ascii_uppercase().as_str() {
            "ADJ" => Pos::Adj,
            "ADP" => Pos::Adp,
            "ADV" => Pos::Adv,
            "AUX" => Pos::Aux,
            "CCONJ" | "CONJ" => Pos::Cconj,
            "DET" => Pos::Det,
            "INTJ" => Pos::Intj,
            "NOUN" => Pos::Noun,
            "NUM" => Pos::Num,
            "PART" => Pos::Part,
            "PRON" => Pos::Pron,
            "PROPN" => Pos::Propn,
            "PUNCT" => Pos::Punct,
            "SCONJ" => Pos::Sconj,
            "SYM" => Pos::Sym,
            "VERB" => Pos::Verb,
            _ => Pos::X,
        }
    }
}

impl From<Pos> for String {
    fn from(p: Pos) -> Self {
        p.as_str().to_string()
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    #[serde(rename = "t")]
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dep: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<usize>,
}

/// Caption as it appears in corpus JSONL; `tokens` may be omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionInput {
    pub text: String,
    #[serde(default)]
    pub tokens: Vec<Token>,
}

/// One corpus line: an image with its captions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    pub captions: Vec<CaptionInput>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedCaption {
    pub id: String,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl TaggedCaption {
    /// Heads must point inside the caption.
    pub fn is_well_formed(&self) -> bool {
        self.tokens
            .iter()
            .all(|t| t.head.is_none_or(|h| h < self.tokens.len()))
    }

    pub fn lemmas(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.lemma.as_str()).collect()
    }
}

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "its", "his", "her", "their",
    "my", "your", "our", "each", "every", "another", "any", "no",
];
const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor", "yet", "so"];
const ADPOSITIONS: &[&str] = &[
    "of", "with", "in", "on", "under", "above", "below", "behind", "beside", "between", "near",
    "over", "inside", "outside", "to", "for", "at", "from", "by", "into", "onto", "across",
    "through", "along", "around", "against", "among", "beneath", "toward", "towards", "upon",
    "within", "without", "off", "down", "up", "past", "during", "beyond",
];
const PRONOUNS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "him", "them", "us", "me", "someone", "something",
    "everyone", "everything", "nothing", "who", "which", "what",
];
const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "be", "being", "been", "am", "has", "have", "had", "do", "does",
    "did", "can", "could", "will", "would", "may", "might", "must", "should",
];
const ADVERBS: &[&str] = &["very", "not", "there", "here", "together", "away", "outdoors", "indoors"];
const NUMBERS: &[&str] = &[
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "dozen", "several", "many", "few",
];
const ADJECTIVES: &[&str] = &[
    "red", "blue", "green", "yellow", "black", "white", "brown", "orange", "purple", "pink",
    "gray", "grey", "golden", "silver", "wooden", "plastic", "metal", "glass", "stone", "leather",
    "cloudy", "sunny", "rainy", "snowy", "foggy", "clear", "dark", "bright", "big", "large",
    "small", "little", "tiny", "huge", "tall", "short", "long", "old", "new", "young", "happy",
    "sad", "beautiful", "pretty", "ugly", "busy", "empty", "full", "quiet", "noisy", "wet", "dry",
    "hot", "cold", "warm", "fresh", "ripe", "striped", "spotted", "fluffy", "shiny", "dirty",
    "clean", "modern", "ancient", "strange", "calm", "wild", "free", "abstract", "lonely",
    "curious", "elegant", "simple", "famous", "rare", "typical", "various", "open", "closed",
];
/// Verbs the suffix rules would miss.
const BARE_VERBS: &[&str] = &["lit", "broken", "lying", "sits", "stands", "holds", "rides", "eats", "wears"];
const NOT_ING_VERBS: &[&str] = &[
    "thing", "something", "nothing", "everything", "anything", "building", "ceiling", "morning",
    "evening", "painting", "clothing", "string", "ring", "king", "wing", "spring", "swing",
    "sibling", "ping", "sing", "bring", "sling", "sting", "wedding", "pudding", "icing",
];
const NOT_ED_VERBS: &[&str] = &[
    "bed", "shed", "sled", "hundred", "seed", "speed", "need", "feed", "red", "bread", "head",
    "thread", "sped", "fled", "wed", "steed", "weed", "reed",
];

/// Rule-based tagger. An optional vocabulary steers lemma choice between
/// `stem` and `stem + "e"` (`riding` -> `ride`).
#[derive(Debug, Clone, Default)]
pub struct RuleTagger {
    vocabulary: HashSet<String>,
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

impl RuleTagger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vocabulary<I: IntoIterator<Item = String>>(words: I) -> Self {
        Self { vocabulary: words.into_iter().collect() }
    }

    fn known(&self, w: &str) -> bool {
        self.vocabulary.contains(w)
    }

    fn verb_lemma(&self, word: &str, suffix: &str) -> String {
        let stem = &word[..word.len() - suffix.len()];
        let chars: Vec<char> = stem.chars().collect();
        let n = chars.len();
        if n >= 2 && chars[n - 1] == chars[n - 2] && !matches!(chars[n - 1], 'l' | 's' | 'z' | 'f') {
            let undoubled: String = chars[..n - 1].iter().collect();
            if self.vocabulary.is_empty() || self.known(&undoubled) || !self.known(stem) {
                return undoubled;
            }
        }
        let with_e = format!("{stem}e");
        if self.known(stem) {
            return stem.to_string();
        }
        if self.known(&with_e) {
            return with_e;
        }
        // consonant-vowel-consonant stems usually dropped an `e`
        if (3..=4).contains(&n)
            && !is_vowel(chars[n - 1])
            && !matches!(chars[n - 1], 'w' | 'x' | 'y')
            && is_vowel(chars[n - 2])
            && !is_vowel(chars[n - 3])
            && self.vocabulary.is_empty()
        {
            return with_e;
        }
        stem.to_string()
    }

    fn noun_lemma(&self, word: &str) -> String {
        if word.len() > 3 && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is") {
            for suffix in ["ches", "shes", "sses", "xes"] {
                if word.ends_with(suffix) {
                    return word[..word.len() - 2].to_string();
                }
            }
            if let Some(stem) = word.strip_suffix("ies") {
                return format!("{stem}y");
            }
            if let Some(stem) = word.strip_suffix('s') {
                if self.vocabulary.is_empty() || self.known(stem) || !self.known(word) {
                    return stem.to_string();
                }
            }
        }
        match word {
            "men" => "man".into(),
            "women" => "woman".into(),
            "children" => "child".into(),
            "people" => "person".into(),
            "feet" => "foot".into(),
            "teeth" => "tooth".into(),
            "mice" => "mouse".into(),
            _ => word.to_string(),
        }
    }

    fn tag_word(&self, raw: &str) -> (String, Pos) {
        let w = raw.to_lowercase();
        if w.chars().all(|c| c.is_ascii_punctuation()) {
            return (w, Pos::Punct);
        }
        if w.chars().all(|c| c.is_ascii_digit()) {
            return (w, Pos::Num);
        }
        let has = |list: &[&str]| list.contains(&w.as_str());
        if has(DETERMINERS) {
            return (w, Pos::Det);
        }
        if has(CONJUNCTIONS) {
            return (w, Pos::Cconj);
        }
        if has(ADPOSITIONS) {
            return (w, Pos::Adp);
        }
        if has(PRONOUNS) {
            return (w, Pos::Pron);
        }
        if has(AUXILIARIES) {
            return (w, Pos::Aux);
        }
        if has(ADVERBS) || (w.ends_with("ly") && w.len() > 4 && !self.known(&w)) {
            return (w, Pos::Adv);
        }
        if has(NUMBERS) {
            return (w, Pos::Num);
        }
        if has(BARE_VERBS) {
            let lemma = match w.as_str() {
                "sits" | "stands" | "holds" | "rides" | "eats" | "wears" => w[..w.len() - 1].to_string(),
                "lying" => "lie".to_string(),
                _ => w.clone(),
            };
            return (lemma, Pos::Verb);
        }
        if has(ADJECTIVES) {
            return (w, Pos::Adj);
        }
        if w.ends_with("ing") && w.len() > 5 && !has(NOT_ING_VERBS) {
            let lemma = self.verb_lemma(&w, "ing");
            return (lemma, Pos::Verb);
        }
        if w.ends_with("ed") && w.len() > 4 && !has(NOT_ED_VERBS) {
            let lemma = self.verb_lemma(&w, "ed");
            return (lemma, Pos::Verb);
        }
        if raw.chars().next().is_some_and(|c| c.is_uppercase()) && self.vocabulary.contains(&w) {
            return (w, Pos::Noun);
        }
        let lemma = self.noun_lemma(&w);
        (lemma, Pos::Noun)
    }

    /// Splits on whitespace and detaches trailing punctuation.
    pub fn tag(&self, id: &str, text: &str) -> TaggedCaption {
        let mut tokens = Vec::new();
        for piece in text.split_whitespace() {
            let trimmed = piece.trim_end_matches(|c: char| c.is_ascii_punctuation());
            let tail = &piece[trimmed.len()..];
            if !trimmed.is_empty() {
                let (lemma, pos) = self.tag_word(trimmed);
                tokens.push(Token { surface: trimmed.to_string(), lemma, pos, dep: None, head: None });
            }
            for c in tail.chars() {
                tokens.push(Token {
                    surface: c.to_string(),
                    lemma: c.to_string(),
                    pos: Pos::Punct,
                    dep: None,
                    head: None,
                });
            }
        }
        TaggedCaption { id: id.to_string(), text: text.to_string(), tokens }
    }
}

impl CorpusRecord {
    /// Captions with tokens, tagging any that arrived untagged.
    pub fn tagged_captions(&self, tagger: &RuleTagger) -> Vec<TaggedCaption> {
        self.captions
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let id = format!("{}#{k}", self.id);
                if c.tokens.is_empty() {
                    tagger.tag(&id, &c.text)
                } else {
                    TaggedCaption { id, text: c.text.clone(), tokens: c.tokens.clone() }
                }
            })
            .collect()
    }
}
