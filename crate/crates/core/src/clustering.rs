//! Skip-gram context vectors and spherical k-means.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{fold_case, Corpus};
use crate::error::{Error, Result};
use crate::lexstats::{lexical_words, BiasEntry};

pub const DEFAULT_WINDOW: usize = 2;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_CLUSTERS: usize = 3;
pub const DEFAULT_TOP_WORDS: usize = 250;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextVector {
    pub word: String,
    /// Unit-length components.
    pub components: BTreeMap<String, f64>,
    /// Euclidean norm of the raw counts before normalization.
    pub norm: f64,
}

impl ContextVector {
    /// Normalizes raw counts; `None` for an all-zero vector.
    pub fn from_counts(word: impl Into<String>, counts: BTreeMap<String, f64>) -> Option<Self> {
        let norm = counts.values().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(ContextVector {
            word: word.into(),
            components: counts
                .into_iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|(k, v)| (k, v / norm))
                .collect(),
            norm,
        })
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.components.values().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextSet {
    /// Sorted by word.
    pub vectors: Vec<ContextVector>,
    /// Requested words that had no context at all.
    pub dropped: Vec<String>,
}

/// Counts the case-folded words within `window` positions of each target word
/// (the target itself excluded) and L2-normalizes the counts.
pub fn context_vectors(corpus: &Corpus, words: &BTreeSet<String>, window: usize) -> Result<ContextSet> {
    if words.is_empty() {
        return Err(Error::InvalidArgument("no target words given".into()));
    }
    if window == 0 {
        return Err(Error::InvalidArgument("context window must be positive".into()));
    }
    let targets: BTreeSet<String> = words.iter().map(|w| fold_case(w)).collect();
    let mut counts: BTreeMap<&str, BTreeMap<String, f64>> =
        targets.iter().map(|w| (w.as_str(), BTreeMap::new())).collect();

    for doc in corpus {
        let seq = lexical_words(doc);
        for (i, w) in seq.iter().enumerate() {
            let Some(ctx) = counts.get_mut(w.as_str()) else {
                continue;
            };
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(seq.len() - 1);
            for (j, neighbour) in seq.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i && neighbour != w {
                    *ctx.entry(neighbour.clone()).or_insert(0.0) += 1.0;
                }
            }
        }
    }

    let mut vectors = Vec::new();
    let mut dropped = Vec::new();
    for (word, ctx) in counts {
        match ContextVector::from_counts(word, ctx) {
            Some(v) => vectors.push(v),
            None => {
                warn!("`{word}` has no context words and is left out of clustering");
                dropped.push(word.to_string());
            }
        }
    }
    Ok(ContextSet { vectors, dropped })
}

/// The first `n` significantly hate-biased words of a bias table.
pub fn top_biased_words(entries: &[BiasEntry], n: usize) -> BTreeSet<String> {
    entries
        .iter()
        .filter(|e| e.is_significantly_hate_biased())
        .take(n)
        .map(|e| e.word.clone())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            k: DEFAULT_CLUSTERS,
            seed: 0,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    /// Unit-norm centroids, zero components omitted.
    pub centroids: Vec<BTreeMap<String, f64>>,
    pub assignment: BTreeMap<String, usize>,
    /// Sum over words of the cosine between the word's vector and its centroid.
    pub objective: f64,
    /// Objective after the initial assignment and after every iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn members(&self, cluster: usize) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|(_, &c)| c == cluster)
            .map(|(w, _)| w.as_str())
            .collect()
    }
}

type SparseRow = Vec<(usize, f64)>;

fn cosine(row: &SparseRow, centroid: &[f64]) -> f64 {
    row.iter().map(|&(i, v)| v * centroid[i]).sum()
}

struct Problem {
    rows: Vec<SparseRow>,
    dims: usize,
}

impl Problem {
    fn centroid_of(&self, row: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dims];
        for &(i, v) in &self.rows[row] {
            c[i] = v;
        }
        c
    }

    fn objective(&self, assignment: &[usize], centroids: &[Vec<f64>]) -> f64 {
        self.rows
            .iter()
            .zip(assignment)
            .map(|(r, &a)| cosine(r, &centroids[a]))
            .sum()
    }

    /// Farthest-point seeding with cosine distance: a seeded random first
    /// centroid, then repeatedly the row farthest from every chosen centroid,
    /// ties drawn at random.
    fn seed_centroids(&self, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let n = self.rows.len();
        let mut chosen = vec![rng.gen_range(0..n)];
        let mut dist: Vec<f64> = vec![f64::INFINITY; n];
        while chosen.len() < k {
            let last = self.centroid_of(*chosen.last().unwrap());
            for (i, row) in self.rows.iter().enumerate() {
                dist[i] = dist[i].min((1.0 - cosine(row, &last)).max(0.0));
            }
            let open = || (0..n).filter(|i| !chosen.contains(i));
            let far = open().map(|i| dist[i]).fold(f64::NEG_INFINITY, f64::max);
            let ties: Vec<usize> = open().filter(|&i| dist[i] == far).collect();
            chosen.push(ties[rng.gen_range(0..ties.len())]);
        }
        chosen.iter().map(|&i| self.centroid_of(i)).collect()
    }

    /// Moves each row to its most similar centroid; a row only leaves its
    /// current cluster for a strictly better one.
    fn assign(&self, centroids: &[Vec<f64>], current: Option<&[usize]>) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut best = current.map_or(0, |a| a[i]);
                let mut best_sim = cosine(row, &centroids[best]);
                for (c, centroid) in centroids.iter().enumerate() {
                    let sim = cosine(row, centroid);
                    if sim > best_sim {
                        best = c;
                        best_sim = sim;
                    }
                }
                best
            })
            .collect()
    }

    /// Reseeds every empty cluster with the row least similar to its own centroid.
    fn repair_empty(&self, assignment: &mut [usize], centroids: &mut [Vec<f64>]) {
        let k = centroids.len();
        loop {
            let mut sizes = vec![0usize; k];
            for &a in assignment.iter() {
                sizes[a] += 1;
            }
            let Some(empty) = sizes.iter().position(|&s| s == 0) else {
                return;
            };
            let donor = (0..self.rows.len())
                .filter(|&i| sizes[assignment[i]] > 1)
                .min_by(|&a, &b| {
                    let sa = cosine(&self.rows[a], &centroids[assignment[a]]);
                    let sb = cosine(&self.rows[b], &centroids[assignment[b]]);
                    sa.total_cmp(&sb)
                })
                .expect("k <= n leaves a cluster with two members");
            assignment[donor] = empty;
            centroids[empty] = self.centroid_of(donor);
        }
    }

    fn update_centroids(&self, assignment: &[usize], old: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut sums = vec![vec![0.0; self.dims]; old.len()];
        for (row, &a) in self.rows.iter().zip(assignment) {
            for &(i, v) in row {
                sums[a][i] += v;
            }
        }
        sums.into_iter()
            .zip(old)
            .map(|(mut s, prev)| {
                let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    s.iter_mut().for_each(|v| *v /= norm);
                    s
                } else {
                    prev.clone()
                }
            })
            .collect()
    }
}

/// Spherical k-means over unit context vectors.
///
/// Vectors are processed in word order, so the result does not depend on the
/// order of `vectors`.
pub fn spherical_kmeans(vectors: &[ContextVector], params: KMeansParams) -> Result<ClusterModel> {
    let KMeansParams {
        k,
        seed,
        max_iter,
        tol,
    } = params;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k > vectors.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot form {k} clusters from {} vectors",
            vectors.len()
        )));
    }
    let mut sorted: Vec<&ContextVector> = vectors.iter().collect();
    sorted.sort_by(|a, b| a.word.cmp(&b.word));
    if let Some(w) = sorted.windows(2).find(|w| w[0].word == w[1].word) {
        return Err(Error::InvalidArgument(format!("duplicate word `{}`", w[0].word)));
    }

    let vocab: BTreeSet<&str> = sorted
        .iter()
        .flat_map(|v| v.components.keys().map(String::as_str))
        .collect();
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let rows: Vec<SparseRow> = sorted
        .iter()
        .map(|v| {
            let norm = v.euclidean_norm();
            if norm == 0.0 {
                return Err(Error::InvalidArgument(format!("zero vector for `{}`", v.word)));
            }
            Ok(v.components
                .iter()
                .map(|(w, x)| (index[w.as_str()], x / norm))
                .collect())
        })
        .collect::<Result<_>>()?;
    let problem = Problem {
        rows,
        dims: vocab.len(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = problem.seed_centroids(k, &mut rng);
    let mut assignment = problem.assign(&centroids, None);
    problem.repair_empty(&mut assignment, &mut centroids);
    let mut objective = problem.objective(&assignment, &centroids);
    let mut history = vec![objective];
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        centroids = problem.update_centroids(&assignment, &centroids);
        let mut next = problem.assign(&centroids, Some(&assignment));
        problem.repair_empty(&mut next, &mut centroids);
        let next_objective = problem.objective(&next, &centroids);
        history.push(next_objective);
        let improvement = next_objective - objective;
        assignment = next;
        objective = next_objective;
        if improvement < tol {
            break;
        }
    }

    let names: Vec<&str> = vocab.into_iter().collect();
    Ok(ClusterModel {
        k,
        centroids: centroids
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| (names[i].to_string(), *v))
                    .collect()
            })
            .collect(),
        assignment: sorted
            .iter()
            .zip(&assignment)
            .map(|(v, &a)| (v.word.clone(), a))
            .collect(),
        objective,
        history,
        iterations,
    })
}

/// Members of every cluster ranked by corpus frequency (ties by word), at most `top_n` each.
pub fn cluster_summary(
    model: &ClusterModel,
    frequencies: &HashMap<String, u64>,
    top_n: usize,
) -> Vec<Vec<(String, u64)>> {
    (0..model.k)
        .map(|c| {
            let mut words: Vec<(String, u64)> = model
                .members(c)
                .into_iter()
                .map(|w| (w.to_string(), frequencies.get(w).copied().unwrap_or(0)))
                .collect();
            words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            words.truncate(top_n);
            words
        })
        .collect()
}

pub fn summary_json(k: usize, summary: &[Vec<(String, u64)>]) -> String {
    #[derive(Serialize)]
    struct Word<'a> {
        word: &'a str,
        count: u64,
    }
    #[derive(Serialize)]
    struct Cluster<'a> {
        id: usize,
        words: Vec<Word<'a>>,
    }
    #[derive(Serialize)]
    struct Out<'a> {
        k: usize,
        clusters: Vec<Cluster<'a>>,
    }
    let out = Out {
        k,
        clusters: summary
            .iter()
            .enumerate()
            .map(|(id, words)| Cluster {
                id,
                words: words
                    .iter()
                    .map(|(w, c)| Word { word: w, count: *c })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("summary serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Label};

    fn corpus(texts: &[&str]) -> Corpus {
        Corpus::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document::new(i.to_string(), Label::Hate, *t))
                .collect(),
        )
        .unwrap()
    }

    fn one_hot(word: &str, dim: &str) -> ContextVector {
        ContextVector::from_counts(word, BTreeMap::from([(dim.to_string(), 1.0)])).unwrap()
    }

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn single_context_word() {
        let cs = context_vectors(&corpus(&["a b a"]), &set(&["b"]), 1).unwrap();
        assert_eq!(cs.vectors.len(), 1);
        assert_eq!(cs.vectors[0].components, BTreeMap::from([("a".to_string(), 1.0)]));
        assert_eq!(cs.vectors[0].norm, 2.0);
    }

    #[test]
    fn absent_word_dropped() {
        let cs = context_vectors(&corpus(&["a b a"]), &set(&["z", "a"]), 1).unwrap();
        assert_eq!(cs.dropped, vec!["z"]);
        assert_eq!(cs.vectors.len(), 1);
        // the target itself is never its own context
        let cs = context_vectors(&corpus(&["a a a"]), &set(&["a"]), 2).unwrap();
        assert_eq!(cs.dropped, vec!["a"]);
    }

    #[test]
    fn vectors_are_unit_length() {
        let c = corpus(&["x y z x w y y", "Z x q @m y", "w w q x"]);
        let cs = context_vectors(&c, &set(&["x", "y", "W"]), 2).unwrap();
        assert_eq!(cs.vectors.len(), 3);
        for v in &cs.vectors {
            assert!((v.euclidean_norm() - 1.0).abs() < 1e-9);
            assert!(!v.components.keys().any(|k| k.starts_with('@')));
        }
    }

    #[test]
    fn k_one_is_normalized_sum() {
        let vs = vec![one_hot("a", "p"), one_hot("b", "q"), one_hot("c", "q")];
        let m = spherical_kmeans(&vs, KMeansParams { k: 1, ..Default::default() }).unwrap();
        assert!(m.assignment.values().all(|&c| c == 0));
        let s = 1.0 / 5f64.sqrt();
        assert!((m.centroids[0]["p"] - s).abs() < 1e-12);
        assert!((m.centroids[0]["q"] - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn k_larger_than_input_rejected() {
        let vs = vec![one_hot("a", "p")];
        assert!(spherical_kmeans(&vs, KMeansParams { k: 2, ..Default::default() }).is_err());
        assert!(spherical_kmeans(&vs, KMeansParams { k: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn identical_vectors_still_fill_every_cluster() {
        let vs: Vec<ContextVector> = ["a", "b", "c", "d"].iter().map(|w| one_hot(w, "p")).collect();
        let m = spherical_kmeans(&vs, KMeansParams { k: 3, ..Default::default() }).unwrap();
        let used: BTreeSet<usize> = m.assignment.values().copied().collect();
        assert_eq!(used.len(), 3);
        assert_eq!(m.assignment.len(), 4);
    }

    #[test]
    fn summary_ranking() {
        let m = ClusterModel {
            k: 1,
            centroids: vec![BTreeMap::new()],
            assignment: BTreeMap::from([("a".into(), 0), ("b".into(), 0), ("c".into(), 0)]),
            objective: 0.0,
            history: vec![],
            iterations: 0,
        };
        let freq = HashMap::from([("a".to_string(), 5), ("b".to_string(), 9), ("c".to_string(), 5)]);
        assert_eq!(cluster_summary(&m, &freq, 1), vec![vec![("b".to_string(), 9)]]);
        assert_eq!(
            cluster_summary(&m, &freq, 10),
            vec![vec![("b".to_string(), 9), ("a".to_string(), 5), ("c".to_string(), 5)]]
        );
        let json: serde_json::Value =
            serde_json::from_str(&summary_json(1, &cluster_summary(&m, &freq, 2))).unwrap();
        assert_eq!(json["clusters"][0]["words"][1]["word"], "a");
    }
}
