//! Sparse n-gram featurization.
//!
//! Five feature families are available: character trigrams, bigrams and
//! unigrams (the latter restricted to punctuation and emoji), and word unigrams
//! and bigrams. Every key is prefixed with its family tag (`ch3:`, `w2:`, ...)
//! so equal strings from different families never collide.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{fold_case, strip_mentions, tokenize, Document, Token, TokenKind};
use crate::error::{Error, Result};

/// Joins the two members of a word bigram.
pub const BIGRAM_SEPARATOR: char = '▸';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ch3,
    Ch2,
    Ch1,
    W1,
    W2,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Ch3, Family::Ch2, Family::Ch1, Family::W1, Family::W2];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Ch3 => "ch3",
            Family::Ch2 => "ch2",
            Family::Ch1 => "ch1",
            Family::W1 => "w1",
            Family::W2 => "w2",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown feature family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Count,
    Binary,
}

/// Which families are extracted and how they are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFeatureConfig", into = "RawFeatureConfig")]
pub struct FeatureConfig {
    families: [bool; 5],
    include_mentions: bool,
    weighting: Weighting,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeatureConfig {
    use_ch3: bool,
    use_ch2: bool,
    use_ch1: bool,
    use_w1: bool,
    use_w2: bool,
    include_mentions: bool,
    #[serde(default)]
    weighting: Weighting,
}

impl TryFrom<RawFeatureConfig> for FeatureConfig {
    type Error = Error;

    fn try_from(raw: RawFeatureConfig) -> Result<Self> {
        let families = [raw.use_ch3, raw.use_ch2, raw.use_ch1, raw.use_w1, raw.use_w2]
            .into_iter()
            .zip(Family::ALL)
            .filter_map(|(on, f)| on.then_some(f))
            .collect::<Vec<_>>();
        FeatureConfig::new(&families, raw.include_mentions, raw.weighting)
    }
}

impl From<FeatureConfig> for RawFeatureConfig {
    fn from(c: FeatureConfig) -> Self {
        RawFeatureConfig {
            use_ch3: c.has(Family::Ch3),
            use_ch2: c.has(Family::Ch2),
            use_ch1: c.has(Family::Ch1),
            use_w1: c.has(Family::W1),
            use_w2: c.has(Family::W2),
            include_mentions: c.include_mentions,
            weighting: c.weighting,
        }
    }
}

impl FeatureConfig {
    pub fn new(families: &[Family], include_mentions: bool, weighting: Weighting) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::Config(
                "at least one feature family must be enabled".into(),
            ));
        }
        let mut flags = [false; 5];
        for f in families {
            flags[*f as usize] = true;
        }
        Ok(FeatureConfig {
            families: flags,
            include_mentions,
            weighting,
        })
    }

    /// All five families, mentions stripped, count weighting.
    pub fn full() -> Self {
        FeatureConfig::new(&Family::ALL, false, Weighting::Count).expect("non-empty")
    }

    /// The six cumulative ablation rows: CH3, +CH2, +CH1, +W1, +W2, then +mentions.
    pub fn ablation_rows() -> Vec<FeatureConfig> {
        let mut rows: Vec<FeatureConfig> = (1..=5)
            .map(|n| FeatureConfig::new(&Family::ALL[..n], false, Weighting::Count).unwrap())
            .collect();
        rows.push(FeatureConfig::new(&Family::ALL, true, Weighting::Count).unwrap());
        rows
    }

    pub fn has(&self, family: Family) -> bool {
        self.families[family as usize]
    }

    pub fn families(&self) -> impl Iterator<Item = Family> + '_ {
        Family::ALL.into_iter().filter(|f| self.has(*f))
    }

    pub fn include_mentions(&self) -> bool {
        self.include_mentions
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.families[family as usize] = true;
        self
    }

    pub fn with_mentions(mut self, include: bool) -> Self {
        self.include_mentions = include;
        self
    }

    pub fn with_weighting(mut self, weighting: Weighting) -> Self {
        self.weighting = weighting;
        self
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.families().map(|f| f.tag().to_uppercase()).collect();
        write!(f, "{}", names.join("+"))?;
        if self.include_mentions {
            write!(f, "+@")?;
        }
        if self.weighting == Weighting::Binary {
            write!(f, " (binary)")?;
        }
        Ok(())
    }
}

/// Sparse feature-key to weight map. Zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: BTreeMap<String, f64>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accumulates `weight` onto `key`.
    ///
    /// Panics on a negative or non-finite weight.
    pub fn add(&mut self, key: impl Into<String>, weight: f64) {
        assert!(
            weight.is_finite() && weight >= 0.0,
            "feature weights must be finite and non-negative, got {weight}"
        );
        if weight == 0.0 {
            return;
        }
        *self.entries.entry(key.into()).or_insert(0.0) += weight;
    }

    pub fn get(&self, key: &str) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> FeatureVector {
        let mut out = FeatureVector::new();
        for (k, v) in self.iter() {
            out.add(k, v * factor);
        }
        out
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        let mut v = FeatureVector::new();
        for (k, w) in iter {
            v.add(k, w);
        }
        v
    }
}

/// All length-`n` codepoint windows of `surface`, without padding.
pub fn char_ngrams(surface: &str, n: usize) -> Vec<String> {
    assert!(n >= 1, "n-gram order must be positive");
    let chars: Vec<char> = surface.chars().collect();
    if chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Case-folded word unigrams (`n == 1`) or adjacent-pair bigrams (`n == 2`).
///
/// Punctuation and url tokens are skipped and break bigram adjacency.
pub fn word_ngrams(tokens: &[Token], n: usize) -> Vec<String> {
    assert!(n == 1 || n == 2, "word n-gram order must be 1 or 2");
    let mut out = Vec::new();
    let mut prev: Option<String> = None;
    for tok in tokens {
        if !is_word_level(tok) {
            prev = None;
            continue;
        }
        let folded = fold_case(&tok.surface);
        if n == 1 {
            out.push(folded);
        } else {
            if let Some(p) = prev.take() {
                out.push(format!("{p}{BIGRAM_SEPARATOR}{folded}"));
            }
            prev = Some(folded);
        }
    }
    out
}

fn is_word_level(tok: &Token) -> bool {
    matches!(
        tok.kind,
        TokenKind::Word | TokenKind::Hashtag | TokenKind::Emoji | TokenKind::Number | TokenKind::Mention
    )
}

fn is_char_level(tok: &Token) -> bool {
    matches!(
        tok.kind,
        TokenKind::Word | TokenKind::Hashtag | TokenKind::Number | TokenKind::Mention
    )
}

pub fn vectorize(doc: &Document, config: &FeatureConfig) -> FeatureVector {
    vectorize_tokens(&tokenize(&doc.text), config)
}

pub fn vectorize_text(text: &str, config: &FeatureConfig) -> FeatureVector {
    vectorize_tokens(&tokenize(text), config)
}

pub fn vectorize_tokens(tokens: &[Token], config: &FeatureConfig) -> FeatureVector {
    let stripped;
    let tokens = if config.include_mentions() {
        tokens
    } else {
        stripped = strip_mentions(tokens);
        &stripped
    };

    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    let mut bump = |family: Family, gram: &str| {
        *counts
            .entry(format!("{}:{}", family.tag(), gram))
            .or_insert(0.0) += 1.0;
    };

    for tok in tokens {
        if is_char_level(tok) {
            let folded = fold_case(&tok.surface);
            for (family, n) in [(Family::Ch3, 3), (Family::Ch2, 2)] {
                if config.has(family) {
                    for g in char_ngrams(&folded, n) {
                        bump(family, &g);
                    }
                }
            }
        }
        if config.has(Family::Ch1) && matches!(tok.kind, TokenKind::Punct | TokenKind::Emoji) {
            for g in char_ngrams(&tok.surface, 1) {
                bump(Family::Ch1, &g);
            }
        }
    }
    for (family, n) in [(Family::W1, 1), (Family::W2, 2)] {
        if config.has(family) {
            for g in word_ngrams(tokens, n) {
                bump(family, &g);
            }
        }
    }

    let binary = config.weighting() == Weighting::Binary;
    counts
        .into_iter()
        .map(|(k, c)| (k, if binary { 1.0 } else { c }))
        .collect()
}
