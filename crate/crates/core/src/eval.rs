//! Precision/recall/F1, stratified k-fold cross-validation, feature ablation
//! and out-of-domain scoring. Hate is always the positive class, and every
//! 0/0 ratio is reported as 0.

use std::fmt::Write as _;
use std::ops::Add;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{make_folds, Corpus, FoldPlan, Label};
use crate::error::{Error, Result};
use crate::features::{vectorize, Family, FeatureConfig, FeatureVector};
use crate::perceptron::{train, PerceptronModel};

pub const ZERO_DIVISION_NOTE: &str = "# zero-division convention: 0/0 = 0; hate is the positive class";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn record(&mut self, gold: Label, predicted: Label) {
        match (gold == Label::Hate, predicted == Label::Hate) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts seen with safe as the positive class.
    pub fn flipped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = ConfusionMatrix>>(iter: I) -> Self {
        iter.fold(ConfusionMatrix::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    Metrics {
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
    }
}

/// Mean of the hate-class and safe-class F1.
pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    (metrics(cm).f1 + metrics(&cm.flipped()).f1) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub feature_config: FeatureConfig,
    pub k: usize,
    pub epochs: usize,
    pub seed: u64,
    pub folds: Vec<ConfusionMatrix>,
    pub aggregate: ConfusionMatrix,
    pub precision: f64,
    pub recall: f64,
    pub f1_hate: f64,
    pub f1_macro: f64,
}

impl EvaluationReport {
    fn from_folds(
        feature_config: FeatureConfig,
        epochs: usize,
        seed: u64,
        folds: Vec<ConfusionMatrix>,
    ) -> Self {
        let aggregate: ConfusionMatrix = folds.iter().copied().sum();
        let m = metrics(&aggregate);
        EvaluationReport {
            feature_config,
            k: folds.len(),
            epochs,
            seed,
            folds,
            aggregate,
            precision: m.precision,
            recall: m.recall,
            f1_hate: m.f1,
            f1_macro: macro_f1(&aggregate),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{ZERO_DIVISION_NOTE}").unwrap();
        writeln!(
            out,
            "# features: {}; k={}; epochs={}; seed={}",
            self.feature_config, self.k, self.epochs, self.seed
        )
        .unwrap();
        writeln!(out, "fold\ttp\tfp\tfn\ttn\tprecision\trecall\tf1_hate\tf1_macro").unwrap();
        let rows = self
            .folds
            .iter()
            .enumerate()
            .map(|(i, cm)| (i.to_string(), cm))
            .chain(std::iter::once(("all".to_string(), &self.aggregate)));
        for (name, cm) in rows {
            let m = metrics(cm);
            writeln!(
                out,
                "{name}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                cm.tp,
                cm.fp,
                cm.fn_,
                cm.tn,
                m.precision,
                m.recall,
                m.f1,
                macro_f1(cm)
            )
            .unwrap();
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: P={:.4} R={:.4} F1(hate)={:.4} F1(macro)={:.4} over {} folds",
            self.feature_config, self.precision, self.recall, self.f1_hate, self.f1_macro, self.k
        )
    }
}

fn labeled_only(corpus: &Corpus) -> Result<()> {
    if let Some(doc) = corpus.iter().find(|d| !d.label.is_labeled()) {
        return Err(Error::InvalidArgument(format!(
            "document `{}` is unlabeled; evaluation needs hate/safe labels",
            doc.id
        )));
    }
    Ok(())
}

pub fn cross_validate(
    corpus: &Corpus,
    config: &FeatureConfig,
    k: usize,
    epochs: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    labeled_only(corpus)?;
    let plan = make_folds(corpus, k, seed)?;
    cross_validate_with_plan(corpus, &plan, config, epochs, seed)
}

/// Cross-validation over a fixed fold plan. Fold `i` trains with seed `seed + i`.
pub fn cross_validate_with_plan(
    corpus: &Corpus,
    plan: &FoldPlan,
    config: &FeatureConfig,
    epochs: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    labeled_only(corpus)?;
    if plan.assignments().len() != corpus.len() {
        return Err(Error::InvalidArgument(
            "fold plan was built for a different corpus".into(),
        ));
    }
    let docs = corpus.documents();
    let vectors: Vec<FeatureVector> = docs.par_iter().map(|d| vectorize(d, config)).collect();

    let folds = (0..plan.k())
        .into_par_iter()
        .map(|fold| {
            let train_pos = plan.train_positions(fold);
            let xs: Vec<FeatureVector> = train_pos.iter().map(|&i| vectors[i].clone()).collect();
            let ys: Vec<Label> = train_pos.iter().map(|&i| docs[i].label).collect();
            let model = train(&xs, &ys, epochs, seed.wrapping_add(fold as u64), *config)?;
            let mut cm = ConfusionMatrix::default();
            for i in plan.test_positions(fold) {
                cm.record(docs[i].label, model.predict(&vectors[i]).label);
            }
            Ok(cm)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EvaluationReport::from_folds(*config, epochs, seed, folds))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub k: usize,
    pub epochs: usize,
    pub seed: u64,
    pub rows: Vec<EvaluationReport>,
}

/// One cross-validation per config, all over the same folds.
pub fn ablation(
    corpus: &Corpus,
    configs: &[FeatureConfig],
    k: usize,
    epochs: usize,
    seed: u64,
) -> Result<AblationTable> {
    if configs.is_empty() {
        return Err(Error::InvalidArgument("ablation needs at least one config".into()));
    }
    labeled_only(corpus)?;
    let plan = make_folds(corpus, k, seed)?;
    let rows = configs
        .iter()
        .map(|c| cross_validate_with_plan(corpus, &plan, c, epochs, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationTable {
        k,
        epochs,
        seed,
        rows,
    })
}

impl AblationTable {
    /// Columns: CH3 CH2 CH1 W1 W2 @ P R, then F1 columns. P/R/F1 in percent.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{ZERO_DIVISION_NOTE}; P, R and F1 in percent").unwrap();
        writeln!(out, "CH3\tCH2\tCH1\tW1\tW2\t@\tP\tR\tF1\tF1_macro").unwrap();
        for r in &self.rows {
            let mark = |on: bool| if on { "✓" } else { "-" };
            let cfg = &r.feature_config;
            let flags: Vec<&str> = Family::ALL
                .iter()
                .map(|f| mark(cfg.has(*f)))
                .chain(std::iter::once(mark(cfg.include_mentions())))
                .collect();
            writeln!(
                out,
                "{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}",
                flags.join("\t"),
                100.0 * r.precision,
                100.0 * r.recall,
                100.0 * r.f1_hate,
                100.0 * r.f1_macro
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

/// Fraction of `corpus` the model labels as hate.
pub fn evaluate_domain(model: &PerceptronModel, corpus: &Corpus) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate an empty corpus".into()));
    }
    let config = model.feature_config();
    let hate = corpus
        .documents()
        .par_iter()
        .filter(|d| model.predict(&vectorize(d, config)).label == Label::Hate)
        .count();
    Ok(hate as f64 / corpus.len() as f64)
}
