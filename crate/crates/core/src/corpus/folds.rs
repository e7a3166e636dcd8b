use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Label};
use crate::error::{Error, Result};

/// Stratified assignment of every document of a corpus to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    /// Fold index per document, in corpus order.
    folds: Vec<usize>,
    index: HashMap<String, usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&pos| self.folds[pos])
    }

    /// Fold index per corpus position.
    pub fn assignments(&self) -> &[usize] {
        &self.folds
    }

    pub fn test_positions(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] == fold)
            .collect()
    }

    pub fn train_positions(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] != fold)
            .collect()
    }
}

/// Deals each label stratum round-robin over the folds after a seeded shuffle,
/// so every fold holds either `floor(n/k)` or `ceil(n/k)` documents of each label.
pub fn make_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "cross-validation needs k >= 2, got {k}"
        )));
    }
    for label in [Label::Hate, Label::Safe] {
        let n = corpus.count_label(label);
        if n < k {
            return Err(Error::InvalidArgument(format!(
                "{n} `{label}` documents cannot fill {k} folds"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; corpus.len()];
    let mut next = 0usize;
    for label in [Label::Hate, Label::Safe, Label::Unlabeled] {
        let mut stratum: Vec<usize> = corpus
            .iter()
            .enumerate()
            .filter(|(_, d)| d.label == label)
            .map(|(i, _)| i)
            .collect();
        stratum.shuffle(&mut rng);
        for pos in stratum {
            folds[pos] = next % k;
            next += 1;
        }
    }
    let index = corpus
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.clone(), i))
        .collect();
    Ok(FoldPlan { k, folds, index })
}
