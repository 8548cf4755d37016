//! Concreteness ratings lookup.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Column layout of a ratings file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconFormat {
    pub delimiter: u8,
    pub word_column: String,
    pub rating_column: String,
}

impl Default for LexiconFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            word_column: "Word".into(),
            rating_column: "Conc.M".into(),
        }
    }
}

impl LexiconFormat {
    /// Tab-separated for `.tsv`/`.txt`, comma-separated otherwise.
    pub fn for_path(path: &Path) -> Self {
        let tab = matches!(
            path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
            Some("tsv") | Some("txt")
        );
        Self {
            delimiter: if tab { b'\t' } else { b',' },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConcretenessLexicon {
    entries: HashMap<String, f64>,
}

/// Lowercase, NFC, single spaces, trimmed.
pub fn normalize_key(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    nfc.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

impl ConcretenessLexicon {
    pub fn load(path: &Path) -> Result<(Self, LoadReport)> {
        Self::load_with(path, &LexiconFormat::for_path(path))
    }

    pub fn load_with(path: &Path, format: &LexiconFormat) -> Result<(Self, LoadReport)> {
        Self::from_reader(std::fs::File::open(path)?, format)
    }

    pub fn from_reader<R: Read>(reader: R, format: &LexiconFormat) -> Result<(Self, LoadReport)> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(format.delimiter)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let word_col = col(&format.word_column)?;
        let rating_col = col(&format.rating_column)?;
        let mut entries = HashMap::new();
        let mut report = LoadReport::default();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let word = rec.get(word_col).ok_or_else(|| Error::Parse {
                line,
                message: "missing word field".into(),
            })?;
            let raw = rec.get(rating_col).ok_or_else(|| Error::Parse {
                line,
                message: "missing rating field".into(),
            })?;
            let rating: f64 = raw.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad rating `{raw}`"),
            })?;
            if !(1.0..=5.0).contains(&rating) {
                return Err(Error::RatingOutOfRange { line, rating });
            }
            let key = normalize_key(word);
            if key.is_empty() {
                return Err(Error::Parse { line, message: "empty word".into() });
            }
            report.rows += 1;
            match entries.entry(key) {
                std::collections::hash_map::Entry::Occupied(_) => report.duplicates += 1,
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(rating);
                }
            }
        }
        Ok((Self { entries }, report))
    }

    pub fn from_entries<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut entries = HashMap::new();
        for (k, (w, r)) in pairs.into_iter().enumerate() {
            if !(1.0..=5.0).contains(&r) {
                return Err(Error::RatingOutOfRange { line: k + 1, rating: r });
            }
            entries.entry(normalize_key(w.as_ref())).or_insert(r);
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(&normalize_key(key)).copied()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    /// Bigram `tokens[start..start+2]` first, then the unigram. Returns the
    /// rating and the matched span length.
    pub fn lookup<S: AsRef<str>>(&self, tokens: &[S], start: usize) -> Option<(f64, usize)> {
        let first = tokens.get(start)?.as_ref();
        if let Some(next) = tokens.get(start + 1) {
            let bigram = format!("{} {}", first, next.as_ref());
            if let Some(r) = self.get(&bigram) {
                return Some((r, 2));
            }
        }
        self.get(first).map(|r| (r, 1))
    }

    /// Rating of a possibly multi-word phrase: the full phrase if listed,
    /// otherwise its head (last) word.
    pub fn lookup_phrase(&self, phrase: &str) -> Option<f64> {
        let key = normalize_key(phrase);
        self.get(&key)
            .or_else(|| key.rsplit(' ').next().and_then(|head| self.get(head)))
    }

    /// Entry keys in sorted order.
    pub fn words(&self) -> Vec<String> {
        let mut w: Vec<String> = self.entries.keys().cloned().collect();
        w.sort();
        w
    }

    pub fn ratings(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.values().copied()
    }

    /// Counts per 0.5-wide bin from 1 to 5; the last bin includes 5.
    pub fn histogram(&self) -> [(f64, f64, usize); 8] {
        let mut out = [(0.0, 0.0, 0usize); 8];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (1.0 + 0.5 * k as f64, 1.5 + 0.5 * k as f64, 0);
        }
        for r in self.ratings() {
            let k = (((r - 1.0) / 0.5).floor() as usize).min(7);
            out[k].2 += 1;
        }
        out
    }
}
