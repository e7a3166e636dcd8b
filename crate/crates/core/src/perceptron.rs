//! Binary averaged perceptron over sparse feature vectors.
//!
//! Training makes mistake-driven updates (`w += y·x`, `b += y`) over a seeded
//! shuffle of the data every epoch. The prediction weights are the mean of the
//! weight vector taken after every single example presentation, mistakes or
//! not. That mean is maintained lazily: each feature remembers the step at
//! which its weight last changed and folds `weight × elapsed steps` into a
//! running total only when it changes again.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureVector};

pub const DEFAULT_EPOCHS: usize = 5;
pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronModel {
    weights: BTreeMap<String, f64>,
    bias: f64,
    averaged_weights: BTreeMap<String, f64>,
    averaged_bias: f64,
    update_count: u64,
    epochs: usize,
    seed: u64,
    feature_config: FeatureConfig,
}

#[derive(Default, Clone, Copy)]
struct Accumulator {
    weight: f64,
    total: f64,
    last_step: u64,
}

impl Accumulator {
    /// Adds `delta` to the weight before snapshot number `step + 1` is taken.
    fn update(&mut self, step: u64, delta: f64) {
        self.total += self.weight * (step - self.last_step) as f64;
        self.last_step = step;
        self.weight += delta;
    }

    fn average(&self, steps: u64) -> f64 {
        (self.total + self.weight * (steps - self.last_step) as f64) / steps as f64
    }
}

fn sign(label: Label) -> Result<f64> {
    match label {
        Label::Hate => Ok(1.0),
        Label::Safe => Ok(-1.0),
        Label::Unlabeled => Err(Error::InvalidArgument(
            "training labels must be hate or safe".into(),
        )),
    }
}

fn label_for(score: f64) -> Label {
    if score > 0.0 {
        Label::Hate
    } else {
        Label::Safe
    }
}

pub fn train(
    vectors: &[FeatureVector],
    labels: &[Label],
    epochs: usize,
    seed: u64,
    feature_config: FeatureConfig,
) -> Result<PerceptronModel> {
    if vectors.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be positive".into()));
    }
    let ys = labels.iter().map(|&l| sign(l)).collect::<Result<Vec<f64>>>()?;
    if !(ys.contains(&1.0) && ys.contains(&-1.0)) {
        return Err(Error::InvalidArgument(
            "training data must contain both hate and safe examples".into(),
        ));
    }

    let mut acc: BTreeMap<String, Accumulator> = BTreeMap::new();
    for v in vectors {
        for key in v.keys() {
            acc.entry(key.to_string()).or_default();
        }
    }
    let mut bias = Accumulator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let mut step = 0u64;
    let mut updates = 0u64;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &vectors[i];
            let y = ys[i];
            let score = x
                .iter()
                .map(|(k, v)| acc[k].weight * v)
                .sum::<f64>()
                + bias.weight;
            if sign(label_for(score))? != y {
                for (k, v) in x.iter() {
                    acc.get_mut(k).expect("registered").update(step, y * v);
                }
                bias.update(step, y);
                updates += 1;
            }
            step += 1;
        }
    }

    Ok(PerceptronModel {
        weights: acc.iter().map(|(k, a)| (k.clone(), a.weight)).collect(),
        bias: bias.weight,
        averaged_weights: acc.iter().map(|(k, a)| (k.clone(), a.average(step))).collect(),
        averaged_bias: bias.average(step),
        update_count: updates,
        epochs,
        seed,
        feature_config,
    })
}

impl PerceptronModel {
    /// Scores with the averaged weights; `score > 0` means hate, ties go to safe.
    pub fn predict(&self, vector: &FeatureVector) -> Prediction {
        let score = dot(&self.averaged_weights, vector) + self.averaged_bias;
        Prediction {
            label: label_for(score),
            score,
        }
    }

    /// Scores with the final (non-averaged) weights.
    pub fn predict_live(&self, vector: &FeatureVector) -> Prediction {
        let score = dot(&self.weights, vector) + self.bias;
        Prediction {
            label: label_for(score),
            score,
        }
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn averaged_weights(&self) -> &BTreeMap<String, f64> {
        &self.averaged_weights
    }

    pub fn averaged_bias(&self) -> f64 {
        self.averaged_bias
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn feature_config(&self) -> &FeatureConfig {
        &self.feature_config
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            feature_config: self.feature_config,
            epochs: self.epochs,
            seed: self.seed,
            update_count: self.update_count,
            bias: self.bias,
            averaged_bias: self.averaged_bias,
            weights: self.weights.clone(),
            averaged_weights: self.averaged_weights.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        match value.get("version") {
            Some(v) if v.as_u64() == Some(MODEL_FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::Model(format!(
                    "unsupported format version {v} (expected {MODEL_FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::Model("missing field `version`".into())),
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::Model(e.to_string()))?;
        Ok(PerceptronModel {
            weights: file.weights,
            bias: file.bias,
            averaged_weights: file.averaged_weights,
            averaged_bias: file.averaged_bias,
            update_count: file.update_count,
            epochs: file.epochs,
            seed: file.seed,
            feature_config: file.feature_config,
        })
    }
}

fn dot(weights: &BTreeMap<String, f64>, vector: &FeatureVector) -> f64 {
    vector
        .iter()
        .map(|(k, v)| weights.get(k).copied().unwrap_or(0.0) * v)
        .sum()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u64,
    feature_config: FeatureConfig,
    epochs: usize,
    seed: u64,
    update_count: u64,
    bias: f64,
    averaged_bias: f64,
    weights: BTreeMap<String, f64>,
    averaged_weights: BTreeMap<String, f64>,
}

pub fn save_model(model: &PerceptronModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_json() + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PerceptronModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PerceptronModel::from_json(&text)
}
