//! Lexicon polarity scoring (SentiWS text format) and reference counting
//! for demographic keyword groups.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{fold_case, Corpus, Label, Token, TokenKind};
use crate::error::{Error, Result};

/// Case-folded surface form to polarity score in [-1, 1].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, f64>,
}

impl SentimentLexicon {
    pub fn get(&self, surface: &str) -> Option<f64> {
        self.entries.get(&fold_case(surface)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.entries
    }

    /// Adds a form, keeping the larger-magnitude score when it already exists.
    pub fn insert(&mut self, surface: &str, score: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&score) {
            return Err(Error::InvalidArgument(format!(
                "score {score} for `{surface}` is outside [-1, 1]"
            )));
        }
        let key = fold_case(surface);
        match self.entries.get(&key) {
            Some(old) if old.abs() >= score.abs() => {}
            _ => {
                self.entries.insert(key, score);
            }
        }
        Ok(())
    }

    /// Reads `Lemma|POS<TAB>score[<TAB>inflection,inflection,...]` lines.
    pub fn read_sentiws(&mut self, reader: impl BufRead) -> Result<()> {
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io("<lexicon>", e))?;
            let line = line.trim_start_matches('\u{FEFF}').trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(bad(format!(
                    "expected 2 or 3 tab-separated fields, found {}",
                    fields.len()
                )));
            }
            let (lemma, _pos) = fields[0]
                .split_once('|')
                .ok_or_else(|| bad(format!("`{}` is not of the form Lemma|POS", fields[0])))?;
            if lemma.is_empty() {
                return Err(bad("empty lemma".into()));
            }
            let score: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| bad(format!("`{}` is not a number", fields[1])))?;
            if !(-1.0..=1.0).contains(&score) {
                return Err(bad(format!("score {score} is outside [-1, 1]")));
            }
            self.insert(lemma, score).map_err(|e| bad(e.to_string()))?;
            if let Some(inflections) = fields.get(2) {
                for form in inflections.split(',').map(str::trim).filter(|f| !f.is_empty()) {
                    self.insert(form, score).map_err(|e| bad(e.to_string()))?;
                }
            }
        }
        Ok(())
    }
}

pub fn load_lexicon(positive: impl AsRef<Path>, negative: impl AsRef<Path>) -> Result<SentimentLexicon> {
    let mut lex = SentimentLexicon::default();
    for path in [positive.as_ref(), negative.as_ref()] {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        lex.read_sentiws(BufReader::new(file)).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })?;
    }
    Ok(lex)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextPolarity {
    pub polarity: f64,
    pub matched: usize,
}

/// Mean score of the word tokens found in the lexicon; 0 when nothing matches.
pub fn score_text(tokens: &[Token], lexicon: &SentimentLexicon) -> TextPolarity {
    let mut scores: Vec<f64> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Word)
        .filter_map(|t| lexicon.get(&t.surface))
        .collect();
    if scores.is_empty() {
        return TextPolarity {
            polarity: 0.0,
            matched: 0,
        };
    }
    // summing in sorted order makes the mean independent of token order
    scores.sort_by(f64::total_cmp);
    let sum: f64 = scores.iter().sum();
    TextPolarity {
        polarity: (sum / scores.len() as f64).clamp(-1.0, 1.0),
        matched: scores.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

pub fn classify(polarity: f64, threshold: f64) -> Polarity {
    let t = threshold.abs();
    if polarity < -t {
        Polarity::Negative
    } else if polarity > t {
        Polarity::Positive
    } else {
        Polarity::Neutral
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PolarityShares {
    pub documents: u64,
    pub negative: f64,
    pub neutral: f64,
    pub positive: f64,
}

/// Per-label share of negative, neutral and positive documents. Labels with
/// no documents are absent.
pub fn polarity_distribution(
    corpus: &Corpus,
    lexicon: &SentimentLexicon,
    threshold: f64,
) -> BTreeMap<Label, PolarityShares> {
    let mut counts: BTreeMap<Label, [u64; 3]> = BTreeMap::new();
    for doc in corpus {
        let p = score_text(&doc.tokens(), lexicon).polarity;
        let slot = match classify(p, threshold) {
            Polarity::Negative => 0,
            Polarity::Neutral => 1,
            Polarity::Positive => 2,
        };
        counts.entry(doc.label).or_default()[slot] += 1;
    }
    counts
        .into_iter()
        .map(|(label, [neg, neu, pos])| {
            let n = neg + neu + pos;
            let share = |c: u64| c as f64 / n as f64;
            (
                label,
                PolarityShares {
                    documents: n,
                    negative: share(neg),
                    neutral: share(neu),
                    positive: share(pos),
                },
            )
        })
        .collect()
}

pub fn distribution_tsv(dist: &BTreeMap<Label, PolarityShares>) -> String {
    let mut out = String::from("label\tdocuments\tnegative\tneutral\tpositive\n");
    for (label, s) in dist {
        writeln!(
            out,
            "{label}\t{}\t{:.6}\t{:.6}\t{:.6}",
            s.documents, s.negative, s.neutral, s.positive
        )
        .unwrap();
    }
    out
}

/// Named keyword groups (regions, gender terms, ...), keywords case-folded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceGroups {
    groups: BTreeMap<String, BTreeSet<String>>,
}

impl ReferenceGroups {
    pub fn new(groups: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Config("no reference groups defined".into()));
        }
        let mut folded = BTreeMap::new();
        for (name, keywords) in groups {
            let kws: BTreeSet<String> = keywords
                .iter()
                .map(|k| fold_case(k.trim()))
                .filter(|k| !k.is_empty())
                .collect();
            if kws.is_empty() {
                return Err(Error::Config(format!("reference group `{name}` has no keywords")));
            }
            folded.insert(name, kws);
        }
        Ok(ReferenceGroups { groups: folded })
    }

    /// Reads a JSON object mapping group names to keyword arrays.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, BTreeSet<String>> =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("reference groups: {e}")))?;
        ReferenceGroups::new(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn groups(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.groups
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceCount {
    /// Documents containing at least one keyword of the group.
    pub mentions: u64,
    /// Of those, documents with negative polarity.
    pub negative_mentions: u64,
}

pub fn count_references(
    corpus: &Corpus,
    groups: &ReferenceGroups,
    lexicon: &SentimentLexicon,
) -> BTreeMap<String, ReferenceCount> {
    let mut out: BTreeMap<String, ReferenceCount> = groups
        .groups
        .keys()
        .map(|g| (g.clone(), ReferenceCount::default()))
        .collect();
    for doc in corpus {
        let tokens = doc.tokens();
        let words: BTreeSet<String> = tokens
            .iter()
            .filter(|t| t.is_lexical())
            .map(|t| fold_case(&t.surface))
            .collect();
        let negative = score_text(&tokens, lexicon).polarity < 0.0;
        for (name, keywords) in &groups.groups {
            if keywords.iter().any(|k| words.contains(k)) {
                let c = out.get_mut(name).expect("initialized");
                c.mentions += 1;
                if negative {
                    c.negative_mentions += 1;
                }
            }
        }
    }
    out
}

pub fn references_tsv(counts: &BTreeMap<String, ReferenceCount>) -> String {
    let mut out = String::from("group\tmentions\tnegative_mentions\tnegative_share\n");
    for (g, c) in counts {
        let share = if c.mentions == 0 {
            0.0
        } else {
            c.negative_mentions as f64 / c.mentions as f64
        };
        writeln!(out, "{g}\t{}\t{}\t{share:.6}", c.mentions, c.negative_mentions).unwrap();
    }
    out
}
