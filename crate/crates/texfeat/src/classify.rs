//! Classification and evaluation: stratified splitting, KNN, Gaussian naive
//! Bayes, and accuracy/confusion reporting.
//!
//! Everything here is deterministic. The split shuffles each class's row
//! indices with a Fisher-Yates pass (descending `i`, `j = next_u64() mod
//! (i + 1)`) drawn from a single ChaCha8 stream seeded with
//! `seed_from_u64(seed)`, visiting classes in lexicographic label order; the
//! same seed on the same input ordering always yields the same partition.
//! KNN and naive-Bayes tie-breaking rules are fully specified below.

use std::collections::BTreeMap;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ExtractionConfig, FeatureTable, Standardization};

/// On-disk model format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Smallest per-dimension variance naive Bayes will score with.
pub const NB_VARIANCE_FLOOR: f64 = 1e-9;

/// Distance used by KNN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Euclidean => write!(f, "euclidean"),
            Metric::Manhattan => write!(f, "manhattan"),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::Parameter(format!(
                "unknown metric {other:?} (expected \"euclidean\" or \"manhattan\")"
            ))),
        }
    }
}

/// Per-class Gaussian statistics on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbClass {
    pub label: String,
    pub prior: f64,
    pub means: Vec<f64>,
    /// Population variances, floored at [`NB_VARIANCE_FLOOR`].
    pub variances: Vec<f64>,
}

/// Classifier-specific model state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelPayload {
    Knn {
        k: usize,
        metric: Metric,
        labels: Vec<String>,
        /// Standardized training vectors, in training-row order.
        vectors: Vec<Vec<f64>>,
    },
    NaiveBayes { classes: Vec<NbClass> },
}

/// A persisted classifier: the extraction config it expects, the
/// standardization fitted on its training set, and the classifier payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub config: ExtractionConfig,
    pub standardization: Standardization,
    #[serde(flatten)]
    pub payload: ModelPayload,
}

/// Accuracy, per-class metrics, and the confusion matrix of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class: BTreeMap<String, ClassMetrics>,
    /// Label order indexing the confusion matrix.
    pub labels: Vec<String>,
    /// `confusion[true_idx][predicted_idx]`, dense counts.
    pub confusion: Vec<Vec<u64>>,
    /// Split seed echoed from the test table's metadata, when present.
    pub seed: Option<u64>,
    pub config: ExtractionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub support: u64,
}

fn fisher_yates(indices: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..indices.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        indices.swap(i, j);
    }
}

/// Splits `table` per class: each class's rows are shuffled and the first
/// `ceil(n * train_fraction)` go to the train table, the rest to test. Output
/// rows keep the original table order.
pub fn stratified_split(
    table: &FeatureTable,
    train_fraction: f64,
    seed: u64,
) -> Result<(FeatureTable, FeatureTable)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "train fraction {train_fraction} out of range (0, 1)"
        )));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, row) in table.rows().iter().enumerate() {
        by_class.entry(&row.label).or_default().push(idx);
    }
    if by_class.is_empty() {
        return Err(Error::EmptyInput("cannot split an empty table".into()));
    }
    for (label, indices) in &by_class {
        if indices.len() < 2 {
            return Err(Error::Split(format!(
                "class {label:?} has {} sample(s), need at least 2 to split",
                indices.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (_, mut indices) in by_class {
        fisher_yates(&mut indices, &mut rng);
        let n_train = (indices.len() as f64 * train_fraction).ceil() as usize;
        train_idx.extend_from_slice(&indices[..n_train]);
        test_idx.extend_from_slice(&indices[n_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let pick = |indices: &[usize]| -> Result<FeatureTable> {
        let mut out = FeatureTable::new(table.config.clone());
        out.extra_metadata = table.extra_metadata.clone();
        for &i in indices {
            out.push_row(table.rows()[i].clone())?;
        }
        Ok(out)
    };
    Ok((pick(&train_idx)?, pick(&test_idx)?))
}

/// Fits a KNN model: standardizes the training rows and stores them. `k`
/// must be odd and no larger than the training-set size.
pub fn knn_train(train: &FeatureTable, k: usize, metric: Metric) -> Result<TrainedModel> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::Parameter(format!("knn k must be odd, got {k}")));
    }
    if k > train.len() {
        return Err(Error::Parameter(format!(
            "knn k {k} exceeds training size {}",
            train.len()
        )));
    }
    let (standardized, stats) = crate::features::standardize(train)?;
    let labels = standardized.rows().iter().map(|r| r.label.clone()).collect();
    let vectors = standardized
        .rows()
        .iter()
        .map(|r| r.values.clone())
        .collect();
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        config: train.config.clone(),
        standardization: stats,
        payload: ModelPayload::Knn {
            k,
            metric,
            labels,
            vectors,
        },
    })
}

/// Majority vote among the `k` nearest training vectors. Distance ties
/// prefer the earlier training index; vote ties prefer the smaller summed
/// distance among the tied classes, then the lexicographically smaller label.
fn knn_vote(
    k: usize,
    metric: Metric,
    labels: &[String],
    vectors: &[Vec<f64>],
    query: &[f64],
) -> String {
    let mut dists: Vec<(f64, usize)> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| (metric.distance(v, query), i))
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for &(d, i) in &dists[..k] {
        let entry = tally.entry(&labels[i]).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 += d;
    }
    let mut winner: Option<(&str, usize, f64)> = None;
    for (label, (count, dist_sum)) in tally {
        let better = match winner {
            None => true,
            Some((_, best_count, best_sum)) => {
                count > best_count || (count == best_count && dist_sum < best_sum)
            }
        };
        if better {
            winner = Some((label, count, dist_sum));
        }
    }
    winner.expect("k >= 1 guarantees at least one neighbor").0.to_string()
}

/// Fits a Gaussian naive-Bayes model: per-class priors plus per-dimension
/// means and (floored) population variances on standardized features.
pub fn nb_train(train: &FeatureTable) -> Result<TrainedModel> {
    let (standardized, stats) = crate::features::standardize(train)?;
    let dim = standardized.dim().expect("standardize requires rows");
    let n = standardized.len() as f64;

    let mut by_class: BTreeMap<&str, Vec<&[f64]>> = BTreeMap::new();
    for row in standardized.rows() {
        by_class.entry(&row.label).or_default().push(&row.values);
    }
    let mut classes = Vec::with_capacity(by_class.len());
    for (label, rows) in by_class {
        let nc = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for r in &rows {
            for (m, v) in means.iter_mut().zip(*r) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= nc;
        }
        let mut variances = vec![0.0; dim];
        for r in &rows {
            for ((s, v), m) in variances.iter_mut().zip(*r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut variances {
            *s = (*s / nc).max(NB_VARIANCE_FLOOR);
        }
        classes.push(NbClass {
            label: label.to_string(),
            prior: nc / n,
            means,
            variances,
        });
    }
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        config: train.config.clone(),
        standardization: stats,
        payload: ModelPayload::NaiveBayes { classes },
    })
}

/// Log-domain class scores: `ln prior + sum_d ln N(v_d; mean, variance)`.
/// Returned in the (sorted) order of `classes`.
pub(crate) fn nb_scores(classes: &[NbClass], standardized: &[f64]) -> Vec<f64> {
    const LN_2PI: f64 = 1.8378770664093453;
    classes
        .iter()
        .map(|c| {
            let mut score = c.prior.ln();
            for ((v, m), var) in standardized.iter().zip(&c.means).zip(&c.variances) {
                score += -0.5 * (LN_2PI + var.ln()) - (v - m) * (v - m) / (2.0 * var);
            }
            score
        })
        .collect()
}

impl TrainedModel {
    /// Classifies one raw (unstandardized) feature vector.
    pub fn predict(&self, values: &[f64]) -> Result<String> {
        let standardized = self.standardization.apply(values)?;
        Ok(match &self.payload {
            ModelPayload::Knn {
                k,
                metric,
                labels,
                vectors,
            } => knn_vote(*k, *metric, labels, vectors, &standardized),
            ModelPayload::NaiveBayes { classes } => {
                let scores = nb_scores(classes, &standardized);
                // classes are sorted by label; strict comparison keeps the
                // lexicographically smallest label on ties
                let mut best = 0;
                for (i, s) in scores.iter().enumerate() {
                    if *s > scores[best] {
                        best = i;
                    }
                }
                classes[best].label.clone()
            }
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.payload {
            ModelPayload::Knn { .. } => "knn",
            ModelPayload::NaiveBayes { .. } => "naive_bayes",
        }
    }

    /// Sorted unique labels the model can emit.
    pub fn label_set(&self) -> Vec<String> {
        match &self.payload {
            ModelPayload::Knn { labels, .. } => {
                let mut out: Vec<String> = labels.clone();
                out.sort();
                out.dedup();
                out
            }
            ModelPayload::NaiveBayes { classes } => {
                classes.iter().map(|c| c.label.clone()).collect()
            }
        }
    }
}

/// Evaluates `model` on every row of `test`. The confusion matrix covers the
/// union of model and test labels; the test table's extraction config must
/// match the model's.
pub fn evaluate(model: &TrainedModel, test: &FeatureTable) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyInput("test table has no rows".into()));
    }
    if test.config != model.config {
        return Err(Error::ConfigMismatch(format!(
            "model was trained with {:?}, test features carry {:?}",
            model.config, test.config
        )));
    }

    let mut labels = model.label_set();
    labels.extend(test.labels());
    labels.sort();
    labels.dedup();
    let index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let mut confusion = vec![vec![0u64; labels.len()]; labels.len()];
    for row in test.rows() {
        let predicted = model.predict(&row.values)?;
        let t = index[row.label.as_str()];
        let p = *index.get(predicted.as_str()).expect("prediction comes from the model label set");
        confusion[t][p] += 1;
    }

    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..labels.len()).map(|i| confusion[i][i]).sum();
    let accuracy = trace as f64 / total as f64;

    let mut per_class = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        let support: u64 = confusion[i].iter().sum();
        let predicted: u64 = confusion.iter().map(|row| row[i]).sum();
        let tp = confusion[i][i];
        per_class.insert(
            label.clone(),
            ClassMetrics {
                precision: if predicted == 0 {
                    0.0
                } else {
                    tp as f64 / predicted as f64
                },
                recall: if support == 0 {
                    0.0
                } else {
                    tp as f64 / support as f64
                },
                support,
            },
        );
    }

    let seed = test
        .extra_metadata
        .get("split_seed")
        .and_then(|s| s.parse().ok());

    Ok(EvalReport {
        accuracy,
        per_class,
        labels,
        confusion,
        seed,
        config: test.config.clone(),
    })
}

/// Writes a model as pretty-printed JSON; floats round-trip exactly.
pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let mut json = serde_json::to_string_pretty(model)
        .map_err(|e| Error::Format(format!("model serialization failed: {e}")))?;
    json.push('\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let model: TrainedModel = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: invalid model json: {e}", path.display())))?;
    if model.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "model format version {} unsupported, this build reads version {MODEL_FORMAT_VERSION}",
            model.format_version
        )));
    }
    match &model.payload {
        ModelPayload::Knn { k, vectors, .. } => {
            if *k == 0 || k % 2 == 0 || *k > vectors.len() {
                return Err(Error::Format(format!(
                    "model has invalid k {k} for {} training vectors",
                    vectors.len()
                )));
            }
        }
        ModelPayload::NaiveBayes { classes } => {
            let prior_sum: f64 = classes.iter().map(|c| c.prior).sum();
            if classes.is_empty() || (prior_sum - 1.0).abs() > 1e-9 {
                return Err(Error::Format(format!(
                    "model priors sum to {prior_sum}, expected 1"
                )));
            }
        }
    }
    Ok(model)
}

/// Writes an evaluation report as pretty-printed JSON.
pub fn save_report(report: &EvalReport, path: &Path) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Format(format!("report serialization failed: {e}")))?;
    json.push('\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}
