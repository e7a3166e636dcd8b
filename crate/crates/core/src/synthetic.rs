//! Deterministic synthetic corpora for tests, benchmarks and demos.
//!
//! The two classes are written in made-up words built from disjoint syllable
//! sets, so word features separate them perfectly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document, Label};

const HATE_SYLLABLES: [&str; 5] = ["gro", "zak", "vul", "dre", "mor"];
const SAFE_SYLLABLES: [&str; 5] = ["lin", "sa", "mie", "fel", "ton"];

fn vocabulary(syllables: &[&str]) -> Vec<String> {
    syllables
        .iter()
        .flat_map(|a| syllables.iter().map(move |b| format!("{a}{b}")))
        .collect()
}

/// `n_per_class` hate and `n_per_class` safe documents of 6 to 12 words each,
/// hate first. Every fifth document carries a mention.
pub fn separable_corpus(n_per_class: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(2 * n_per_class);
    for (label, syllables) in [(Label::Hate, &HATE_SYLLABLES), (Label::Safe, &SAFE_SYLLABLES)] {
        let vocab = vocabulary(syllables);
        for i in 0..n_per_class {
            let len = rng.gen_range(6..=12);
            let mut words: Vec<String> = (0..len)
                .map(|_| vocab.choose(&mut rng).expect("non-empty").clone())
                .collect();
            if i % 5 == 0 {
                words.insert(0, format!("@nutzer{}", rng.gen_range(0..50)));
            }
            let id = format!("{}{i:05}", &label.as_str()[..1]);
            docs.push(Document::new(id, label, words.join(" ") + "."));
        }
    }
    Corpus::new(docs).expect("generated ids are unique")
}

/// The same documents with their labels randomly permuted among them.
pub fn shuffled_labels(corpus: &Corpus, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Label> = corpus.iter().map(|d| d.label).collect();
    labels.shuffle(&mut rng);
    let docs = corpus
        .iter()
        .zip(labels)
        .map(|(d, label)| Document {
            label,
            ..d.clone()
        })
        .collect();
    Corpus::new(docs).expect("ids unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{vectorize, FeatureConfig, Family, Weighting};
    use std::collections::BTreeSet;

    #[test]
    fn classes_share_no_word() {
        let c = separable_corpus(50, 1);
        assert_eq!(c.count_label(Label::Hate), 50);
        let cfg = FeatureConfig::new(&[Family::W1], false, Weighting::Count).unwrap();
        let keys = |label| -> BTreeSet<String> {
            c.iter()
                .filter(|d| d.label == label)
                .flat_map(|d| vectorize(d, &cfg).keys().map(String::from).collect::<Vec<_>>())
                .collect()
        };
        assert!(keys(Label::Hate).is_disjoint(&keys(Label::Safe)));
    }

    #[test]
    fn shuffling_keeps_balance() {
        let c = separable_corpus(20, 1);
        let s = shuffled_labels(&c, 2);
        assert_eq!(s.count_label(Label::Hate), 20);
        assert_ne!(
            c.iter().map(|d| d.label).collect::<Vec<_>>(),
            s.iter().map(|d| d.label).collect::<Vec<_>>()
        );
    }
}
