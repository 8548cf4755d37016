use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoChange,
    KeywordRetained,
    ExcessiveEdit,
    LengthMismatch,
    Malformed,
    Retries,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::NoChange => "no_change",
            RejectReason::KeywordRetained => "keyword_retained",
            RejectReason::ExcessiveEdit => "excessive_edit",
            RejectReason::LengthMismatch => "length_mismatch",
            RejectReason::Malformed => "malformed",
            RejectReason::Retries => "retries",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeStatus {
    Ok,
    Rejected(RejectReason),
    PendingImage,
}

impl NegativeStatus {
    pub fn is_accepted(&self) -> bool {
        !matches!(self, NegativeStatus::Rejected(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationLimits {
    pub max_word_edits: usize,
    pub max_length_delta: usize,
}

impl Default for ValidationLimits {
    fn default() -> Self {
        Self { max_word_edits: 4, max_length_delta: 2 }
    }
}

/// Lowercased words with surrounding punctuation removed.
pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn word_edit_distance(a: &[String], b: &[String]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn find(hay: &[String], needle: &[String]) -> Option<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return None;
    }
    hay.windows(needle.len()).position(|w| w == needle)
}

/// Checks run in order: unchanged caption, keyword still at its original
/// word position, word edit distance, token count.
pub fn validate_negative(
    anchor: &str,
    negative: &str,
    keyword: &str,
    limits: &ValidationLimits,
) -> NegativeStatus {
    let a = words(anchor);
    let n = words(negative);
    let k = words(keyword);
    let reject = NegativeStatus::Rejected;
    if a == n {
        return reject(RejectReason::NoChange);
    }
    let retained = match find(&a, &k) {
        Some(pos) => n.get(pos..pos + k.len()) == Some(&k[..]),
        None => find(&n, &k).is_some(),
    };
    if retained {
        return reject(RejectReason::KeywordRetained);
    }
    if word_edit_distance(&a, &n) > limits.max_word_edits {
        return reject(RejectReason::ExcessiveEdit);
    }
    if a.len().abs_diff(n.len()) > limits.max_length_delta {
        return reject(RejectReason::LengthMismatch);
    }
    NegativeStatus::Ok
}
