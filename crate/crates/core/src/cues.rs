//! Username and profile screening for extremist cue patterns: terminal digit
//! ciphers (`-88`), organisation prefixes, emoji ciphers and keyword lists.
//!
//! Hits are advisory metadata. They are never fed to the classifier.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::fold_char;
use crate::error::{Error, Result};

const DEFAULT_LEXICON: &str = include_str!("../data/cues.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum Prefixes {
    Plain(BTreeSet<String>),
    Expanded(BTreeMap<String, String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLexicon {
    #[serde(default)]
    ciphers: BTreeMap<String, String>,
    #[serde(default)]
    prefixes: Option<Prefixes>,
    #[serde(default)]
    emoji: BTreeMap<String, String>,
    #[serde(default)]
    keywords: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueLexicon {
    /// Digit suffix to its expansion, e.g. `88` to `HH`.
    pub ciphers: BTreeMap<String, String>,
    /// Case-sensitive handle prefix to its expansion.
    pub prefixes: BTreeMap<String, String>,
    pub emoji_ciphers: BTreeMap<String, String>,
    /// Category name to case-insensitive keywords.
    pub keyword_categories: BTreeMap<String, BTreeSet<String>>,
}

impl CueLexicon {
    /// The built-in lexicon.
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_LEXICON).expect("bundled cue lexicon is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawLexicon =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("cue lexicon: {e}")))?;
        let prefixes = match raw.prefixes {
            None => BTreeMap::new(),
            Some(Prefixes::Plain(set)) => set.into_iter().map(|p| (p.clone(), p)).collect(),
            Some(Prefixes::Expanded(map)) => map,
        };
        let lex = CueLexicon {
            ciphers: raw.ciphers,
            prefixes,
            emoji_ciphers: raw.emoji,
            keyword_categories: raw.keywords,
        };
        lex.validate()?;
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        let patterns = self
            .ciphers
            .keys()
            .chain(self.prefixes.keys())
            .chain(self.emoji_ciphers.keys())
            .chain(self.keyword_categories.values().flatten());
        for p in patterns {
            if p.trim().is_empty() {
                return Err(Error::Config("cue lexicon contains an empty pattern".into()));
            }
        }
        if let Some(c) = self.ciphers.keys().find(|c| !c.chars().all(|ch| ch.is_ascii_digit())) {
            return Err(Error::Config(format!("cipher `{c}` is not a digit sequence")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueCategory {
    Cipher,
    Prefix,
    EmojiCipher,
    Keyword,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueHit {
    pub category: CueCategory,
    /// Exact substring of the scanned input.
    pub matched: String,
    /// Cipher/prefix expansion, or the configured keyword.
    pub expansion_or_keyword: String,
    /// Keyword category, for keyword hits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keyword_category: Option<String>,
    /// Byte offset of the match in the input.
    pub position: usize,
}

/// Case-folded view of a string with variation selectors removed, keeping the
/// byte offset of every remaining character.
struct FoldedView<'a> {
    source: &'a str,
    chars: Vec<char>,
    starts: Vec<usize>,
    ends: Vec<usize>,
}

fn is_variation_selector(c: char) -> bool {
    matches!(c, '\u{FE0E}' | '\u{FE0F}')
}

fn normalize_pattern(p: &str) -> Vec<char> {
    p.chars().filter(|c| !is_variation_selector(*c)).map(fold_char).collect()
}

impl<'a> FoldedView<'a> {
    fn new(source: &'a str) -> Self {
        let mut view = FoldedView {
            source,
            chars: Vec::new(),
            starts: Vec::new(),
            ends: Vec::new(),
        };
        for (i, c) in source.char_indices() {
            if !is_variation_selector(c) {
                view.chars.push(fold_char(c));
                view.starts.push(i);
                view.ends.push(i + c.len_utf8());
            }
        }
        view
    }

    /// Non-overlapping occurrences as (byte offset, original substring).
    fn find_all(&self, pattern: &str) -> Vec<(usize, &'a str)> {
        let pat = normalize_pattern(pattern);
        let mut out = Vec::new();
        if pat.is_empty() || pat.len() > self.chars.len() {
            return out;
        }
        let mut i = 0;
        while i + pat.len() <= self.chars.len() {
            if self.chars[i..i + pat.len()] == pat[..] {
                let (s, e) = (self.starts[i], self.ends[i + pat.len() - 1]);
                out.push((s, &self.source[s..e]));
                i += pat.len();
            } else {
                i += 1;
            }
        }
        out
    }
}

fn substring_hits(input: &str, lexicon: &CueLexicon, hits: &mut Vec<CueHit>) {
    let view = FoldedView::new(input);
    for (pattern, expansion) in &lexicon.emoji_ciphers {
        for (pos, matched) in view.find_all(pattern) {
            hits.push(CueHit {
                category: CueCategory::EmojiCipher,
                matched: matched.to_string(),
                expansion_or_keyword: expansion.clone(),
                keyword_category: None,
                position: pos,
            });
        }
    }
    for (category, keywords) in &lexicon.keyword_categories {
        for kw in keywords {
            for (pos, matched) in view.find_all(kw) {
                hits.push(CueHit {
                    category: CueCategory::Keyword,
                    matched: matched.to_string(),
                    expansion_or_keyword: kw.clone(),
                    keyword_category: Some(category.clone()),
                    position: pos,
                });
            }
        }
    }
}

/// Sorts by position then category, keeping the first hit per (category, matched).
fn finish(mut hits: Vec<CueHit>) -> Vec<CueHit> {
    hits.sort_by(|a, b| {
        (a.position, a.category, &a.matched, &a.expansion_or_keyword)
            .cmp(&(b.position, b.category, &b.matched, &b.expansion_or_keyword))
    });
    let mut seen = BTreeSet::new();
    hits.retain(|h| seen.insert((h.category, h.matched.clone())));
    hits
}

/// Digit ciphers count only at the very end of the handle and prefixes only at
/// its start (case-sensitive); emoji ciphers and keywords match anywhere.
pub fn scan_handle(username: &str, lexicon: &CueLexicon) -> Vec<CueHit> {
    let mut hits = Vec::new();
    for (digits, expansion) in &lexicon.ciphers {
        if username.ends_with(digits.as_str()) {
            hits.push(CueHit {
                category: CueCategory::Cipher,
                matched: digits.clone(),
                expansion_or_keyword: expansion.clone(),
                keyword_category: None,
                position: username.len() - digits.len(),
            });
        }
    }
    for (prefix, expansion) in &lexicon.prefixes {
        if username.starts_with(prefix.as_str()) {
            hits.push(CueHit {
                category: CueCategory::Prefix,
                matched: prefix.clone(),
                expansion_or_keyword: expansion.clone(),
                keyword_category: None,
                position: 0,
            });
        }
    }
    substring_hits(username, lexicon, &mut hits);
    finish(hits)
}

/// Keyword and emoji-cipher matches over a free-text profile description.
pub fn scan_profile(description: &str, lexicon: &CueLexicon) -> Vec<CueHit> {
    let mut hits = Vec::new();
    substring_hits(description, lexicon, &mut hits);
    finish(hits)
}
