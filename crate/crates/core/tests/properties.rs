use std::collections::BTreeMap;

use hsdetect::clustering::{spherical_kmeans, ContextVector, KMeansParams};
use hsdetect::corpus::{make_folds, strip_mentions, tokenize, Corpus, Document, Label, TokenKind};
use hsdetect::eval::{ablation, cross_validate, ConfusionMatrix};
use hsdetect::features::FeatureConfig;
use hsdetect::lexstats::{biased_words, chi_square, word_counts};
use hsdetect::sentiment::{score_text, SentimentLexicon};
use hsdetect::synthetic::separable_corpus;
use proptest::prelude::*;

const TEXT: &str = "[a-zA-ZäöüßÄ@#.,!?'’ 0-9👊😡\u{200D}\u{FE0F}-]{0,60}";

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    proptest::collection::vec((any::<bool>(), "[a-d]( [a-d]){0,6}"), 6..40).prop_map(|docs| {
        let mut docs: Vec<Document> = docs
            .into_iter()
            .enumerate()
            .map(|(i, (hate, text))| {
                let label = if hate { Label::Hate } else { Label::Safe };
                Document::new(format!("d{i}"), label, text)
            })
            .collect();
        // at least three documents of each class
        for (i, d) in docs.iter_mut().take(6).enumerate() {
            d.label = if i % 2 == 0 { Label::Hate } else { Label::Safe };
        }
        Corpus::new(docs).unwrap()
    })
}

proptest! {
    #[test]
    fn word_surfaces_retokenize_to_themselves(text in TEXT) {
        let words: Vec<_> = tokenize(&text)
            .into_iter()
            .filter(|t| t.kind == TokenKind::Word)
            .collect();
        let joined = words.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
        prop_assert_eq!(tokenize(&joined), words);
    }

    #[test]
    fn strip_mentions_is_idempotent(text in TEXT) {
        let once = strip_mentions(&tokenize(&text));
        prop_assert_eq!(strip_mentions(&once), once.clone());
    }

    #[test]
    fn every_document_lands_in_exactly_one_fold(corpus in corpus_strategy(), k in 2usize..4, seed: u64) {
        let plan = make_folds(&corpus, k, seed).unwrap();
        let mut seen = vec![0; corpus.len()];
        for fold in 0..k {
            for p in plan.test_positions(fold) {
                seen[p] += 1;
            }
            let train = plan.train_positions(fold);
            prop_assert_eq!(train.len() + plan.test_positions(fold).len(), corpus.len());
        }
        prop_assert!(seen.iter().all(|&n| n == 1));
        for d in corpus.iter() {
            prop_assert!(plan.fold_of(&d.id).unwrap() < k);
        }
    }

    #[test]
    fn chi_square_symmetric_in_classes(ht in 1u64..500, st in 1u64..500, hf in 0.0f64..1.0, sf in 0.0f64..1.0) {
        let h = (hf * ht as f64) as u64;
        let s = (sf * st as f64) as u64;
        prop_assume!(h + s > 0 && h + s < ht + st);
        let a = chi_square(h, s, ht, st).unwrap();
        let b = chi_square(s, h, st, ht).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn class_counts_sum_to_token_totals(corpus in corpus_strategy()) {
        let entries = biased_words(&corpus, 0.05, 1).unwrap();
        for label in [Label::Hate, Label::Safe] {
            let tokens: u64 = corpus
                .iter()
                .filter(|d| d.label == label)
                .map(|d| d.tokens().iter().filter(|t| t.is_lexical()).count() as u64)
                .sum();
            prop_assert_eq!(word_counts(&corpus, label).values().sum::<u64>(), tokens);
            let listed: u64 = entries
                .iter()
                .map(|e| if label == Label::Hate { e.hate_count } else { e.safe_count })
                .sum();
            prop_assert_eq!(listed, tokens);
        }
    }

    #[test]
    fn zero_hit_tokens_leave_polarity_unchanged(words in proptest::collection::vec("(gut|schlecht|xyz|Haus)", 0..12)) {
        let mut lex = SentimentLexicon::default();
        lex.insert("gut", 0.3716).unwrap();
        lex.insert("schlecht", -0.7683).unwrap();
        let text = words.join(" ");
        let base = score_text(&tokenize(&text), &lex).polarity;
        let padded = score_text(&tokenize(&format!("{text} nichts")), &lex).polarity;
        prop_assert_eq!(base, padded);
    }

    #[test]
    fn kmeans_partition_ignores_input_order(seed in 0u64..50, rotate in 1usize..20) {
        let vectors: Vec<ContextVector> = (0..20)
            .map(|i| {
                let counts: BTreeMap<String, f64> = (0..6)
                    .map(|d| (format!("c{d}"), ((i * 7 + d * 3 + seed as usize) % 5) as f64))
                    .collect();
                ContextVector::from_counts(format!("w{i:02}"), counts).unwrap()
            })
            .collect();
        let mut permuted = vectors.clone();
        permuted.rotate_left(rotate);
        permuted.reverse();
        let params = KMeansParams { k: 3, seed, ..KMeansParams::default() };
        let a = spherical_kmeans(&vectors, params).unwrap();
        let b = spherical_kmeans(&permuted, params).unwrap();
        prop_assert_eq!(a.assignment.len(), vectors.len());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn aggregate_is_sum_of_folds() {
    let corpus = separable_corpus(40, 2);
    let report = cross_validate(&corpus, &FeatureConfig::full(), 4, 3, 9).unwrap();
    let sum: ConfusionMatrix = report.folds.iter().copied().sum();
    assert_eq!(sum, report.aggregate);
    assert_eq!(sum.total(), corpus.len() as u64);
}

#[test]
fn identical_configs_give_identical_ablation_rows() {
    let corpus = separable_corpus(30, 5);
    let cfg = FeatureConfig::full();
    let table = ablation(&corpus, &[cfg, cfg], 3, 2, 1).unwrap();
    assert_eq!(table.rows[0], table.rows[1]);
}
