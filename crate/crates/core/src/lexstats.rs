//! Vocabulary statistics over hate/safe corpora: chi-square word bias,
//! biased adjective-noun pairs and word trees.
//!
//! Words are the case-folded lexical tokens (words, hashtags, emoji) of each
//! document; mentions, urls, numbers and punctuation are ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::corpus::{fold_case, Corpus, Document, Label, Token, TokenKind};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MIN_COUNT: u64 = 5;

/// Inflectional endings that mark a lowercase word as adjective-like.
const ADJECTIVE_SUFFIXES: [&str; 5] = ["en", "er", "es", "em", "e"];

pub(crate) fn lexical_words(doc: &Document) -> Vec<String> {
    doc.tokens()
        .iter()
        .filter(|t| t.is_lexical())
        .map(|t| fold_case(&t.surface))
        .collect()
}

pub fn word_counts(corpus: &Corpus, label: Label) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for doc in corpus.iter().filter(|d| d.label == label) {
        for w in lexical_words(doc) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Pearson chi-square (no continuity correction) of the 2x2 table
/// `[[hate_count, safe_count], [hate_total - hate_count, safe_total - safe_count]]`.
pub fn chi_square(hate_count: u64, safe_count: u64, hate_total: u64, safe_total: u64) -> Result<f64> {
    if hate_count > hate_total || safe_count > safe_total {
        return Err(Error::InvalidArgument(format!(
            "counts ({hate_count}, {safe_count}) exceed totals ({hate_total}, {safe_total})"
        )));
    }
    let a = hate_count as f64;
    let b = safe_count as f64;
    let c = (hate_total - hate_count) as f64;
    let d = (safe_total - safe_count) as f64;
    let marginals = [a + b, c + d, a + c, b + d];
    if marginals.contains(&0.0) {
        return Err(Error::Computation(format!(
            "chi-square undefined for table [[{a}, {b}], [{c}, {d}]]: zero marginal"
        )));
    }
    let n = a + b + c + d;
    let diff = a * d - b * c;
    Ok(n * diff * diff / marginals.iter().product::<f64>())
}

/// Critical chi-square value at significance `alpha` with one degree of freedom.
pub fn critical_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let dist = ChiSquared::new(1.0).expect("one degree of freedom");
    Ok(dist.inverse_cdf(1.0 - alpha))
}

/// Add-one-half smoothed share of a word's occurrences that fall in the hate class.
pub fn hate_likelihood(hate_count: u64, safe_count: u64) -> f64 {
    (hate_count as f64 + 0.5) / ((hate_count + safe_count) as f64 + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasEntry {
    pub word: String,
    pub hate_count: u64,
    pub safe_count: u64,
    pub chi2: f64,
    pub p_significant: bool,
    pub hate_likelihood: f64,
    /// Relative frequency is higher in the hate class than in the safe class.
    pub hate_biased: bool,
}

impl BiasEntry {
    pub fn total(&self) -> u64 {
        self.hate_count + self.safe_count
    }

    pub fn is_significantly_hate_biased(&self) -> bool {
        self.p_significant && self.hate_biased
    }
}

/// One entry per word occurring at least `min_count` times, most hate-leaning first.
pub fn biased_words(corpus: &Corpus, alpha: f64, min_count: u64) -> Result<Vec<BiasEntry>> {
    if corpus.count_label(Label::Hate) == 0 || corpus.count_label(Label::Safe) == 0 {
        return Err(Error::InvalidArgument(
            "bias statistics need both hate and safe documents".into(),
        ));
    }
    let critical = critical_value(alpha)?;
    let hate = word_counts(corpus, Label::Hate);
    let safe = word_counts(corpus, Label::Safe);
    let hate_total: u64 = hate.values().sum();
    let safe_total: u64 = safe.values().sum();
    if hate_total == 0 || safe_total == 0 {
        return Err(Error::Computation(
            "one class has no word tokens; chi-square is undefined".into(),
        ));
    }

    let vocab: BTreeSet<&String> = hate.keys().chain(safe.keys()).collect();
    let mut entries = Vec::new();
    for word in vocab {
        let h = hate.get(word).copied().unwrap_or(0);
        let s = safe.get(word).copied().unwrap_or(0);
        if h + s < min_count.max(1) {
            continue;
        }
        // a word making up every token of the corpus has identical rates in both classes
        let chi2 = if h + s == hate_total + safe_total {
            0.0
        } else {
            chi_square(h, s, hate_total, safe_total)?
        };
        entries.push(BiasEntry {
            word: word.clone(),
            hate_count: h,
            safe_count: s,
            chi2,
            p_significant: chi2 > critical,
            hate_likelihood: hate_likelihood(h, s),
            hate_biased: (h as u128) * (safe_total as u128) > (s as u128) * (hate_total as u128),
        });
    }
    entries.sort_by(|a, b| {
        b.hate_likelihood
            .total_cmp(&a.hate_likelihood)
            .then(b.total().cmp(&a.total()))
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(entries)
}

pub fn bias_table_tsv(entries: &[BiasEntry]) -> String {
    let mut out = String::from("word\thate_count\tsafe_count\ttotal\tchi2\tp_significant\thate_likelihood\n");
    for e in entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}\t{}\t{:.6}",
            e.word,
            e.hate_count,
            e.safe_count,
            e.total(),
            e.chi2,
            e.p_significant,
            e.hate_likelihood
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Race,
    Gender,
    Religion,
    Ideology,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Race => "race",
            Target::Gender => "gender",
            Target::Religion => "religion",
            Target::Ideology => "ideology",
        }
    }
}

/// Optional word lists that override the capitalization/suffix heuristics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosLexicon {
    #[serde(default)]
    pub adjectives: HashSet<String>,
    #[serde(default)]
    pub nouns: HashSet<String>,
}

impl PosLexicon {
    pub fn normalized(self) -> Self {
        PosLexicon {
            adjectives: self.adjectives.iter().map(|w| fold_case(w)).collect(),
            nouns: self.nouns.iter().map(|w| fold_case(w)).collect(),
        }
    }
}

/// User-supplied keyword lists per target category, case-folded.
pub type TargetLexicon = BTreeMap<Target, BTreeSet<String>>;

#[derive(Debug, Clone, Default)]
pub struct PairOptions {
    pub pos: PosLexicon,
    pub targets: TargetLexicon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub adjective: String,
    pub noun: String,
    pub hate_count: u64,
    pub safe_count: u64,
    #[serde(default)]
    pub targets: BTreeSet<Target>,
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

fn starts_lower(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_lowercase)
}

fn adjective_like(surface: &str, folded: &str, pos: &PosLexicon) -> bool {
    pos.adjectives.contains(folded)
        || (starts_lower(surface)
            && ADJECTIVE_SUFFIXES
                .iter()
                .any(|suf| folded.len() > suf.len() && folded.ends_with(suf)))
}

fn noun_like(surface: &str, folded: &str, at_utterance_start: bool, pos: &PosLexicon) -> bool {
    pos.nouns.contains(folded) || (!at_utterance_start && starts_upper(surface))
}

/// Marks, for every token, whether it is the first word of an utterance
/// (document start or right after `.`, `!` or `?`).
fn utterance_starts(tokens: &[Token]) -> Vec<bool> {
    let mut at_start = true;
    tokens
        .iter()
        .map(|t| {
            if t.is_sentence_end() {
                at_start = true;
                false
            } else if t.kind == TokenKind::Word {
                std::mem::replace(&mut at_start, false)
            } else {
                false
            }
        })
        .collect()
}

pub fn mine_pairs(corpus: &Corpus, bias: &[BiasEntry]) -> Vec<PairEntry> {
    mine_pairs_with(corpus, bias, &PairOptions::default())
}

/// Adjacent (adjective-like, noun-like) word pairs whose members are both
/// significantly hate-biased, counted per label.
pub fn mine_pairs_with(corpus: &Corpus, bias: &[BiasEntry], options: &PairOptions) -> Vec<PairEntry> {
    let biased: HashSet<&str> = bias
        .iter()
        .filter(|e| e.is_significantly_hate_biased())
        .map(|e| e.word.as_str())
        .collect();
    let pos = &options.pos;

    let mut pairs: BTreeMap<(String, String), PairEntry> = BTreeMap::new();
    for doc in corpus.iter().filter(|d| d.label.is_labeled()) {
        let tokens = doc.tokens();
        let starts = utterance_starts(&tokens);
        for i in 1..tokens.len() {
            let (first, second) = (&tokens[i - 1], &tokens[i]);
            if first.kind != TokenKind::Word || second.kind != TokenKind::Word {
                continue;
            }
            let adj = fold_case(&first.surface);
            let noun = fold_case(&second.surface);
            if !biased.contains(adj.as_str()) || !biased.contains(noun.as_str()) {
                continue;
            }
            if !adjective_like(&first.surface, &adj, pos)
                || !noun_like(&second.surface, &noun, starts[i], pos)
            {
                continue;
            }
            let entry = pairs
                .entry((adj.clone(), noun.clone()))
                .or_insert_with(|| PairEntry {
                    targets: options
                        .targets
                        .iter()
                        .filter(|(_, kws)| kws.contains(&adj) || kws.contains(&noun))
                        .map(|(t, _)| *t)
                        .collect(),
                    adjective: first.surface.clone(),
                    noun: second.surface.clone(),
                    hate_count: 0,
                    safe_count: 0,
                });
            match doc.label {
                Label::Hate => entry.hate_count += 1,
                _ => entry.safe_count += 1,
            }
        }
    }

    let mut out: Vec<PairEntry> = pairs.into_values().collect();
    out.sort_by(|a, b| {
        b.hate_count
            .cmp(&a.hate_count)
            .then(a.safe_count.cmp(&b.safe_count))
            .then_with(|| fold_case(&a.adjective).cmp(&fold_case(&b.adjective)))
            .then_with(|| fold_case(&a.noun).cmp(&fold_case(&b.noun)))
    });
    out
}

pub fn pair_table_tsv(pairs: &[PairEntry]) -> String {
    let mut out = String::from("adjective\tnoun\thate_count\tsafe_count\trace\tgender\treligion\tideology\n");
    for p in pairs {
        let mark = |t: Target| if p.targets.contains(&t) { "✓" } else { "-" };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.adjective,
            p.noun,
            p.hate_count,
            p.safe_count,
            mark(Target::Race),
            mark(Target::Gender),
            mark(Target::Religion),
            mark(Target::Ideology)
        )
        .unwrap();
    }
    out
}

/// Neighbour counts within a fixed window around every occurrence of a target word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTree {
    pub target: String,
    pub window: usize,
    pub occurrences: u64,
    pub before: BTreeMap<String, u64>,
    pub after: BTreeMap<String, u64>,
}

pub fn word_tree(corpus: &Corpus, target: &str, window: usize) -> Result<WordTree> {
    let target = fold_case(target.trim());
    if target.is_empty() {
        return Err(Error::InvalidArgument("word tree target is empty".into()));
    }
    if window == 0 {
        return Err(Error::InvalidArgument("word tree window must be positive".into()));
    }
    let mut tree = WordTree {
        target,
        window,
        occurrences: 0,
        before: BTreeMap::new(),
        after: BTreeMap::new(),
    };
    for doc in corpus {
        let words = lexical_words(doc);
        for (i, w) in words.iter().enumerate() {
            if *w != tree.target {
                continue;
            }
            tree.occurrences += 1;
            for b in &words[i.saturating_sub(window)..i] {
                *tree.before.entry(b.clone()).or_insert(0) += 1;
            }
            for a in words.iter().skip(i + 1).take(window) {
                *tree.after.entry(a.clone()).or_insert(0) += 1;
            }
        }
    }
    Ok(tree)
}

#[derive(Serialize)]
struct WordCount<'a> {
    word: &'a str,
    count: u64,
}

fn ranked(map: &BTreeMap<String, u64>) -> Vec<WordCount<'_>> {
    let mut v: Vec<WordCount> = map
        .iter()
        .map(|(w, &c)| WordCount { word: w, count: c })
        .collect();
    // BTreeMap order already breaks ties by word
    v.sort_by_key(|w| std::cmp::Reverse(w.count));
    v
}

impl WordTree {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            target: &'a str,
            window: usize,
            occurrences: u64,
            before: Vec<WordCount<'a>>,
            after: Vec<WordCount<'a>>,
        }
        serde_json::to_string_pretty(&Out {
            target: &self.target,
            window: self.window,
            occurrences: self.occurrences,
            before: ranked(&self.before),
            after: ranked(&self.after),
        })
        .expect("word tree serializes")
    }

    pub fn is_empty(&self) -> bool {
        self.before.is_empty() && self.after.is_empty()
    }
}

/// Corpus frequency of every lexical word across all labels.
pub fn corpus_frequencies(corpus: &Corpus) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for doc in corpus {
        for w in lexical_words(doc) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use proptest::prelude::*;

    fn corpus(docs: &[(&str, Label)]) -> Corpus {
        Corpus::new(
            docs.iter()
                .enumerate()
                .map(|(i, (t, l))| Document::new(format!("d{i}"), *l, *t))
                .collect(),
        )
        .unwrap()
    }

    /// Pearson's sum over cells of (observed - expected)^2 / expected.
    fn pearson_oracle(h: u64, s: u64, ht: u64, st: u64) -> f64 {
        let obs = [
            [h as f64, s as f64],
            [(ht - h) as f64, (st - s) as f64],
        ];
        let n = (ht + st) as f64;
        let rows = [obs[0][0] + obs[0][1], obs[1][0] + obs[1][1]];
        let cols = [ht as f64, st as f64];
        let mut chi = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let e = rows[r] * cols[c] / n;
                chi += (obs[r][c] - e).powi(2) / e;
            }
        }
        chi
    }

    #[test]
    fn word_counts_by_label() {
        let c = corpus(&[("a b a", Label::Hate), ("Volk volk", Label::Safe)]);
        let hate = word_counts(&c, Label::Hate);
        assert_eq!(hate, BTreeMap::from([("a".into(), 2), ("b".into(), 1)]));
        assert_eq!(word_counts(&c, Label::Safe), BTreeMap::from([("volk".into(), 2)]));
        assert!(word_counts(&c, Label::Unlabeled).is_empty());
    }

    #[test]
    fn chi_square_examples() {
        assert_eq!(chi_square(50, 50, 1000, 1000).unwrap(), 0.0);
        let v = chi_square(20, 0, 1000, 1000).unwrap();
        assert!((v - pearson_oracle(20, 0, 1000, 1000)).abs() < 1e-9);
        assert!((v - 20.202_020_202_020_2).abs() < 1e-9, "{v}");
        assert!(chi_square(0, 0, 10, 10).is_err());
        assert!(chi_square(10, 10, 10, 10).is_err());
        assert!(chi_square(11, 0, 10, 10).is_err());
        assert!(chi_square(1, 0, 1, 0).is_err());
    }

    #[test]
    fn critical_value_at_five_percent() {
        let c = critical_value(0.05).unwrap();
        assert!((c - 3.841_458_820_694_124).abs() < 1e-9, "{c}");
        assert!(critical_value(0.0).is_err());
        assert!(critical_value(1.5).is_err());
    }

    #[test]
    fn likelihood_examples() {
        assert!((hate_likelihood(21, 0) - 21.5 / 22.0).abs() < 1e-15);
        assert_eq!(hate_likelihood(10, 10), 0.5);
    }

    #[test]
    fn balanced_word_is_not_significant() {
        let mut docs = Vec::new();
        for _ in 0..10 {
            docs.push(("gleich x", Label::Hate));
            docs.push(("gleich y", Label::Safe));
        }
        let c = corpus(&docs);
        let entries = biased_words(&c, 0.05, 1).unwrap();
        let g = entries.iter().find(|e| e.word == "gleich").unwrap();
        assert_eq!((g.hate_count, g.safe_count), (10, 10));
        assert_eq!(g.chi2, 0.0);
        assert_eq!(g.hate_likelihood, 0.5);
        assert!(!g.p_significant);
        assert_eq!(entries[0].word, "x");
        assert!(entries[0].is_significantly_hate_biased());
    }

    #[test]
    fn single_label_corpus_rejected() {
        let c = corpus(&[("a", Label::Hate)]);
        assert!(biased_words(&c, 0.05, 1).is_err());
    }

    #[test]
    fn min_count_filters() {
        let c = corpus(&[("a a a b", Label::Hate), ("c d", Label::Safe)]);
        let words: Vec<String> = biased_words(&c, 0.05, 2)
            .unwrap()
            .into_iter()
            .map(|e| e.word)
            .collect();
        assert_eq!(words, vec!["a"]);
    }

    fn all_biased(words: &[&str]) -> Vec<BiasEntry> {
        words
            .iter()
            .map(|w| BiasEntry {
                word: w.to_string(),
                hate_count: 10,
                safe_count: 0,
                chi2: 10.0,
                p_significant: true,
                hate_likelihood: hate_likelihood(10, 0),
                hate_biased: true,
            })
            .collect()
    }

    #[test]
    fn pairs_from_examples() {
        let bias = all_biased(&["nordafrikanischen", "horden", "kriminelle", "flüchtlinge", "kommen", "die"]);
        let c = corpus(&[
            ("die nordafrikanischen Horden", Label::Hate),
            ("Das sind kriminelle Flüchtlinge", Label::Hate),
            ("Horden kommen", Label::Safe),
        ]);
        let pairs = mine_pairs(&c, &bias);
        let found: Vec<(&str, &str, u64)> = pairs
            .iter()
            .map(|p| (p.adjective.as_str(), p.noun.as_str(), p.hate_count))
            .collect();
        assert_eq!(
            found,
            vec![("kriminelle", "Flüchtlinge", 1), ("nordafrikanischen", "Horden", 1)]
        );
    }

    #[test]
    fn pairs_need_significant_members_and_adjacency() {
        let mut bias = all_biased(&["kriminelle"]);
        bias.extend(all_biased(&["flüchtlinge"]).into_iter().map(|mut e| {
            e.p_significant = false;
            e
        }));
        let c = corpus(&[("viele kriminelle Flüchtlinge", Label::Hate)]);
        assert!(mine_pairs(&c, &bias).is_empty());

        let bias = all_biased(&["kriminelle", "flüchtlinge"]);
        let c = corpus(&[("viele kriminelle , Flüchtlinge", Label::Hate)]);
        assert!(mine_pairs(&c, &bias).is_empty());
    }

    #[test]
    fn utterance_start_noun_needs_lexicon() {
        let bias = all_biased(&["böse", "leute"]);
        let c = corpus(&[("Ja. böse Leute", Label::Hate)]);
        // "böse" starts the second utterance but the noun "Leute" does not
        assert_eq!(mine_pairs(&c, &bias).len(), 1);

        let bias = all_biased(&["gute", "wölfe"]);
        let c = corpus(&[("gute Wölfe", Label::Hate), ("Heute. Wölfe", Label::Hate)]);
        assert_eq!(mine_pairs(&c, &bias).len(), 1);
        let opts = PairOptions {
            pos: PosLexicon {
                adjectives: HashSet::from(["heute".to_string()]),
                nouns: HashSet::new(),
            },
            targets: TargetLexicon::new(),
        };
        // no adjacent pair across the full stop
        assert_eq!(mine_pairs_with(&c, &bias, &opts).len(), 1);
    }

    #[test]
    fn pair_targets_from_keywords() {
        let bias = all_biased(&["kriminelle", "flüchtlinge"]);
        let c = corpus(&[("viele kriminelle Flüchtlinge", Label::Hate)]);
        let opts = PairOptions {
            pos: PosLexicon::default(),
            targets: TargetLexicon::from([(Target::Race, BTreeSet::from(["flüchtlinge".to_string()]))]),
        };
        let pairs = mine_pairs_with(&c, &bias, &opts);
        assert_eq!(pairs[0].targets, BTreeSet::from([Target::Race]));
        assert!(pair_table_tsv(&pairs).contains("kriminelle\tFlüchtlinge\t1\t0\t✓\t-\t-\t-"));
    }

    #[test]
    fn word_tree_examples() {
        let c = corpus(&[("radikale Moslem kommen", Label::Hate)]);
        let t = word_tree(&c, "moslem", 1).unwrap();
        assert_eq!(t.before, BTreeMap::from([("radikale".into(), 1)]));
        assert_eq!(t.after, BTreeMap::from([("kommen".into(), 1)]));
        assert!(word_tree(&c, "fehlt", 2).unwrap().is_empty());
        assert!(word_tree(&c, "", 2).is_err());
        assert!(word_tree(&c, "moslem", 0).is_err());

        let c = corpus(&[("arme Moslem", Label::Hate), ("der arme Moslem!", Label::Safe)]);
        let t = word_tree(&c, "Moslem", 2).unwrap();
        assert_eq!(t.before["arme"], 2);
        assert_eq!(t.before["der"], 1);
        assert_eq!(t.occurrences, 2);
        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json["before"][0]["word"], "arme");
        assert_eq!(json["before"][0]["count"], 2);
    }

    proptest! {
        #[test]
        fn chi_square_matches_oracle(ht in 1u64..5000, st in 1u64..5000, hf in 0.0f64..1.0, sf in 0.0f64..1.0) {
            let h = (hf * ht as f64) as u64;
            let s = (sf * st as f64) as u64;
            prop_assume!(h + s > 0 && h + s < ht + st);
            let v = chi_square(h, s, ht, st).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert!((v - pearson_oracle(h, s, ht, st)).abs() < 1e-9 * v.max(1.0));
            // swapping the two classes together with their totals
            prop_assert!((v - chi_square(s, h, st, ht).unwrap()).abs() < 1e-9 * v.max(1.0));
        }

        #[test]
        fn likelihood_monotone(total in 1u64..500, h in 0u64..499) {
            prop_assume!(h < total);
            prop_assert!(hate_likelihood(h + 1, total - h - 1) > hate_likelihood(h, total - h));
        }

        #[test]
        fn word_tree_bound(words in proptest::collection::vec("[abc]", 0..30), window in 1usize..4) {
            let text = words.join(" ");
            let c = corpus(&[(if text.is_empty() { "x" } else { &text }, Label::Hate)]);
            let t = word_tree(&c, "a", window).unwrap();
            let before: u64 = t.before.values().sum();
            let after: u64 = t.after.values().sum();
            prop_assert!(before <= window as u64 * t.occurrences);
            prop_assert!(after <= window as u64 * t.occurrences);
        }
    }
}
