use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::plant::Category;

/// Everything a captioner may use; the HTTP backend only sends `prompt`.
#[derive(Debug, Clone, Copy)]
pub struct CaptionRequest<'a> {
    pub prompt: &'a str,
    pub caption: &'a str,
    pub keyword: &'a str,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRequest {
    pub image_ref: String,
    pub caption: String,
    pub strength: f64,
    pub steps: u32,
}

pub trait CaptionClient: Sync {
    /// Raw response text.
    fn complete(&self, request: &CaptionRequest<'_>) -> Result<String>;
}

pub trait ImageClient: Sync {
    fn edit(&self, request: &ImageRequest) -> Result<String>;
}

/// First nonempty line, trimmed.
pub fn first_line(text: &str) -> Result<String> {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .map(str::to_string)
        .ok_or_else(|| Error::MalformedResponse("empty response".into()))
}

struct Swap {
    phrase: &'static str,
    replacement: &'static str,
}

const PRELOADED: [(&str, Category, Swap); 9] = [
    ("dog", Category::Object, Swap { phrase: "dog", replacement: "cat" }),
    ("under", Category::Relation, Swap { phrase: "under", replacement: "on" }),
    ("red", Category::Attribute, Swap { phrase: "red", replacement: "blue" }),
    ("coffee cup", Category::Object, Swap { phrase: "coffee cup", replacement: "laptop" }),
    ("highway", Category::Object, Swap { phrase: "highway", replacement: "grass" }),
    ("front", Category::Relation, Swap { phrase: "in front of", replacement: "behind" }),
    ("wooden", Category::Attribute, Swap { phrase: "wooden", replacement: "plastic" }),
    ("cloudy", Category::Attribute, Swap { phrase: "cloudy", replacement: "clear" }),
    ("left", Category::Relation, Swap { phrase: "left", replacement: "right" }),
];

/// `(keyword, phrase to replace, replacement)` for spatial words.
const SPATIAL_OPPOSITES: [(&str, &str, &str); 17] = [
    ("on", "on", "under"),
    ("under", "under", "on"),
    ("in", "in", "on"),
    ("above", "above", "below"),
    ("below", "below", "above"),
    ("over", "over", "under"),
    ("behind", "behind", "in front of"),
    ("front", "in front of", "behind"),
    ("beside", "beside", "behind"),
    ("between", "between", "behind"),
    ("near", "near", "far from"),
    ("inside", "inside", "outside"),
    ("outside", "outside", "inside"),
    ("left", "left", "right"),
    ("right", "right", "left"),
    ("next", "next to", "far from"),
    ("top", "on top of", "under"),
];

const ATTRIBUTE_POOL: [&str; 6] = ["blue", "green", "small", "large", "metal", "striped"];
const OBJECT_POOL: [&str; 6] = ["cat", "chair", "bottle", "ball", "lamp", "truck"];
const ING_POOL: [&str; 4] = ["watching", "carrying", "pushing", "touching"];
const S_POOL: [&str; 4] = ["watches", "carries", "pushes", "touches"];
const BASE_POOL: [&str; 4] = ["watch", "carry", "push", "touch"];

/// Deterministic offline captioner and image editor.
#[derive(Debug, Clone, Default)]
pub struct MockClient {
    extra: HashMap<(String, Category), (String, String)>,
}

impl MockClient {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a `(keyword, category)` rule replacing `phrase` by `replacement`.
    pub fn with_rule(mut self, keyword: &str, category: Category, phrase: &str, replacement: &str) -> Self {
        self.extra.insert(
            (keyword.to_lowercase(), category),
            (phrase.to_string(), replacement.to_string()),
        );
        self
    }

    fn rule(&self, keyword: &str, category: Category) -> Option<(String, String)> {
        let key = keyword.to_lowercase();
        if let Some(r) = self.extra.get(&(key.clone(), category)) {
            return Some(r.clone());
        }
        PRELOADED
            .iter()
            .find(|(k, c, _)| *k == key && *c == category)
            .map(|(_, _, s)| (s.phrase.to_string(), s.replacement.to_string()))
    }

    /// Substitution used when no rule matches the keyword.
    pub fn default_swap(keyword: &str, category: Category) -> String {
        let key = keyword.to_lowercase();
        if category == Category::Relation {
            if let Some((_, _, to)) = SPATIAL_OPPOSITES.iter().find(|(w, _, _)| *w == key) {
                return to.to_string();
            }
        }
        let pool: &[&str] = match category {
            Category::Attribute => &ATTRIBUTE_POOL,
            Category::Object => &OBJECT_POOL,
            Category::Relation if key.ends_with("ing") => &ING_POOL,
            Category::Relation if key.ends_with('s') => &S_POOL,
            Category::Relation => &BASE_POOL,
        };
        let digest = Sha256::digest(format!("{key}|{category}").as_bytes());
        let start = digest[0] as usize % pool.len();
        (0..pool.len())
            .map(|k| pool[(start + k) % pool.len()])
            .find(|w| *w != key)
            .unwrap_or(pool[start])
            .to_string()
    }

    pub fn perturb(&self, caption: &str, keyword: &str, category: Category) -> String {
        if let Some((phrase, to)) = self.rule(keyword, category) {
            if let Some(out) = replace_phrase(caption, &phrase, &to) {
                return out;
            }
        }
        if category == Category::Relation {
            let key = keyword.to_lowercase();
            if let Some((_, phrase, to)) = SPATIAL_OPPOSITES.iter().find(|(w, _, _)| *w == key) {
                if let Some(out) = replace_phrase(caption, phrase, to) {
                    return out;
                }
            }
        }
        let to = Self::default_swap(keyword, category);
        replace_phrase(caption, keyword, &to).unwrap_or_else(|| caption.to_string())
    }

    pub fn image_ref(anchor_ref: &str, caption: &str) -> String {
        let digest = Sha256::digest(format!("{anchor_ref}{caption}").as_bytes());
        format!("mock-image:{}", hex::encode(&digest[..16]))
    }
}

fn norm(w: &str) -> String {
    w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// Replaces the first word-aligned occurrence of `phrase`, keeping the
/// capitalization of a sentence-initial word and trailing punctuation.
fn replace_phrase(caption: &str, phrase: &str, replacement: &str) -> Option<String> {
    let tokens: Vec<&str> = caption.split_whitespace().collect();
    let needle: Vec<String> = phrase.split_whitespace().map(norm).collect();
    if needle.is_empty() || needle.len() > tokens.len() {
        return None;
    }
    let normed: Vec<String> = tokens.iter().map(|t| norm(t)).collect();
    let pos = normed.windows(needle.len()).position(|w| w == needle.as_slice())?;
    let last = tokens[pos + needle.len() - 1];
    let tail: String = last.chars().rev().take_while(|c| !c.is_alphanumeric()).collect::<Vec<_>>().into_iter().rev().collect();
    let mut fill = replacement.to_string();
    if pos == 0 && tokens[0].chars().next().is_some_and(char::is_uppercase) {
        let mut cs = fill.chars();
        if let Some(c) = cs.next() {
            fill = c.to_uppercase().chain(cs).collect();
        }
    }
    fill.push_str(&tail);
    let mut out: Vec<&str> = tokens[..pos].to_vec();
    out.push(&fill);
    out.extend_from_slice(&tokens[pos + needle.len()..]);
    Some(out.join(" "))
}

impl CaptionClient for MockClient {
    fn complete(&self, request: &CaptionRequest<'_>) -> Result<String> {
        Ok(self.perturb(request.caption, request.keyword, request.category))
    }
}

impl ImageClient for MockClient {
    fn edit(&self, request: &ImageRequest) -> Result<String> {
        Ok(Self::image_ref(&request.image_ref, &request.caption))
    }
}

/// JSON-over-HTTP backend: `POST {endpoint}/caption` and `POST {endpoint}/image`.
#[derive(Debug, Clone)]
pub struct HttpClient {
    endpoint: String,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct TextReply {
    text: String,
}

#[derive(Deserialize)]
struct ImageReply {
    image_ref: String,
}

impl HttpClient {
    pub fn new(endpoint: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { endpoint: endpoint.trim_end_matches('/').to_string(), agent }
    }

    fn post<B: Serialize, T: for<'de> Deserialize<'de>>(&self, path: &str, body: &B) -> Result<T> {
        let url = format!("{}/{path}", self.endpoint);
        let mut resp = self.agent.post(&url).send_json(body).map_err(map_err)?;
        let code = resp.status().as_u16();
        if !(200..300).contains(&code) {
            return Err(Error::BackendError(code));
        }
        let text = resp.body_mut().read_to_string().map_err(map_err)?;
        serde_json::from_str(&text).map_err(|e| Error::MalformedResponse(e.to_string()))
    }
}

fn map_err(e: ureq::Error) -> Error {
    match e {
        ureq::Error::Timeout(_) => Error::Timeout,
        ureq::Error::StatusCode(c) => Error::BackendError(c),
        other => Error::Transport(other.to_string()),
    }
}

impl CaptionClient for HttpClient {
    fn complete(&self, request: &CaptionRequest<'_>) -> Result<String> {
        let reply: TextReply = self.post("caption", &serde_json::json!({ "prompt": request.prompt }))?;
        Ok(reply.text)
    }
}

impl ImageClient for HttpClient {
    fn edit(&self, request: &ImageRequest) -> Result<String> {
        let reply: ImageReply = self.post("image", request)?;
        Ok(reply.image_ref)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preloaded_swaps() {
        let m = MockClient::new();
        assert_eq!(m.perturb("A woman holding a coffee cup", "coffee cup", Category::Object), "A woman holding a laptop");
        assert_eq!(m.perturb("A cat sitting under a table", "under", Category::Relation), "A cat sitting on a table");
        assert_eq!(
            m.perturb("A child standing in front of the tree", "front", Category::Relation),
            "A child standing behind the tree"
        );
        assert_eq!(m.perturb("Dog on a mat.", "dog", Category::Object), "Cat on a mat.");
    }

    #[test]
    fn unknown_keyword_uses_category_pool() {
        let m = MockClient::new();
        let out = m.perturb("A horse eating hay", "horse", Category::Object);
        assert_ne!(out, "A horse eating hay");
        assert!(OBJECT_POOL.iter().any(|w| out == format!("A {w} eating hay")));
        assert_eq!(out, m.perturb("A horse eating hay", "horse", Category::Object));
        assert_eq!(MockClient::default_swap("above", Category::Relation), "below");
        assert_eq!(m.perturb("A lamp next to the book", "next", Category::Relation), "A lamp far from the book");
        assert!(ING_POOL.contains(&MockClient::default_swap("riding", Category::Relation).as_str()));
    }

    #[test]
    fn image_ref_is_a_pure_function() {
        let a = MockClient::image_ref("img/1.jpg", "A cat");
        assert_eq!(a, MockClient::image_ref("img/1.jpg", "A cat"));
        assert_ne!(a, MockClient::image_ref("img/1.jpg", "A dog"));
    }

    #[test]
    fn first_line_rules() {
        assert_eq!(first_line("\n  \n  A cat on a mat \nmore").unwrap(), "A cat on a mat");
        assert!(matches!(first_line(" \n"), Err(Error::MalformedResponse(_))));
    }
}
