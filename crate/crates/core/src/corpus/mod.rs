//! Labeled document collections: loading, tokenization and fold partitioning.

mod folds;
mod tokenize;

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use folds::{make_folds, FoldPlan};
pub use tokenize::{is_emoji, strip_mentions, tokenize, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Hate,
    Safe,
    Unlabeled,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Hate => "hate",
            Label::Safe => "safe",
            Label::Unlabeled => "unlabeled",
        }
    }

    pub fn is_labeled(self) -> bool {
        self != Label::Unlabeled
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hate" => Ok(Label::Hate),
            "safe" => Ok(Label::Safe),
            "unlabeled" => Ok(Label::Unlabeled),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub label: Label,
    pub text: String,
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author_handle: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, label: Label, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            label,
            text: text.into(),
            source: String::new(),
            author_handle: None,
        }
    }

    pub fn with_author(mut self, handle: impl Into<String>) -> Self {
        self.author_handle = Some(handle.into());
        self
    }

    pub fn tokens(&self) -> Vec<Token> {
        tokenize(&self.text)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty document id".into());
        }
        if self.text.is_empty() && self.label.is_labeled() {
            return Err(format!(
                "document `{}` has empty text but label `{}`",
                self.id, self.label
            ));
        }
        Ok(())
    }
}

/// Ordered list of documents with unique ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    docs: Vec<Document>,
}

impl Corpus {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, doc) in docs.iter().enumerate() {
            doc.validate()
                .map_err(|message| Error::Parse { line: i + 1, message })?;
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId {
                    line: i + 1,
                    id: doc.id.clone(),
                });
            }
        }
        Ok(Corpus { docs })
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.docs.iter().filter(|d| d.label == label).count()
    }

    /// Sub-corpus of the documents carrying `label`, order preserved.
    pub fn with_label(&self, label: Label) -> Corpus {
        Corpus {
            docs: self.docs.iter().filter(|d| d.label == label).cloned().collect(),
        }
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for doc in &self.docs {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Tsv,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Config(format!("unknown corpus format `{other}`"))),
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), format).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses a corpus from any line-oriented reader. Blank lines are skipped.
pub fn read_corpus(reader: impl BufRead, format: CorpusFormat) -> Result<Corpus> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let doc = match format {
            CorpusFormat::Tsv => parse_tsv_record(line),
            CorpusFormat::Jsonl => parse_jsonl_record(line),
        }
        .and_then(|doc| doc.validate().map(|_| doc))
        .map_err(|message| Error::Parse {
            line: lineno,
            message,
        })?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateId {
                line: lineno,
                id: doc.id,
            });
        }
        docs.push(doc);
    }
    Ok(Corpus { docs })
}

fn parse_tsv_record(line: &str) -> std::result::Result<Document, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if !(3..=5).contains(&fields.len()) {
        return Err(format!(
            "expected 3 to 5 tab-separated fields, found {}",
            fields.len()
        ));
    }
    let label = fields[1].parse::<Label>().map_err(|e| e.to_string())?;
    Ok(Document {
        id: fields[0].to_string(),
        label,
        text: fields[2].to_string(),
        source: fields.get(3).map(|s| s.to_string()).unwrap_or_default(),
        author_handle: fields
            .get(4)
            .filter(|s| !s.is_empty())
            .map(|s| s.to_string()),
    })
}

#[derive(Deserialize)]
struct JsonRecord {
    id: String,
    label: String,
    text: String,
    #[serde(default)]
    source: String,
    #[serde(default)]
    author_handle: Option<String>,
}

fn parse_jsonl_record(line: &str) -> std::result::Result<Document, String> {
    let rec: JsonRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let label = rec.label.parse::<Label>().map_err(|e| e.to_string())?;
    Ok(Document {
        id: rec.id,
        label,
        text: rec.text,
        source: rec.source,
        author_handle: rec.author_handle.filter(|h| !h.is_empty()),
    })
}

/// Per-character Unicode lowercase mapping, kept only where it maps to a single
/// character (so `ß` stays `ß` and character positions are preserved).
pub fn fold_char(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

pub fn fold_case(s: &str) -> String {
    s.chars().map(fold_char).collect()
}
