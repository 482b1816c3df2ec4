//! Linear soft-margin SVM and a stratified cross-validation harness.
//!
//! Training minimises the primal objective
//!
//! ```text
//! J(w) = (lambda / 2) |w|^2 + (1 / n) sum_i max(0, 1 - y_i <w, x_i>)
//! ```
//!
//! with `lambda = 1 / (C n)` by stochastic subgradient descent with step
//! `1 / (lambda t)`, projection onto the ball of radius `1 / sqrt(lambda)`
//! and iterate averaging. The bias is folded into `w` as the weight of a
//! constant input of 1. Inputs are scaled per feature by their maximum
//! absolute training value; the scaler is part of the model.
//!
//! After each epoch the averaged iterate replaces the retained model only if
//! it does not raise the objective, so the retained objective never
//! increases from one epoch to the next.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::FeatureVector;
use crate::selector::{rank_features, select_top, SelectError, Threshold};

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("training needs both classes (got {positives} map, {negatives} non-map)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("feature `{feature}` of {key} is not finite")]
    NonFinite { feature: String, key: String },
    #[error("cross-validation needs at least 2 folds (got {0})")]
    TooFewFolds(usize),
    #[error("class {class} has {count} examples, fewer than {k} folds")]
    Stratification {
        class: &'static str,
        count: usize,
        k: usize,
    },
    #[error("vector {0} has no label")]
    Unlabelled(String),
    #[error(transparent)]
    Select(#[from] SelectError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Soft-margin trade-off; larger values penalise violations more.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            epochs: 200,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_size: usize,
    pub selected_features: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub folds: Vec<FoldResult>,
    pub mean: Metrics,
    /// Sample standard deviation across folds.
    pub stddev: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingStats {
    pub training_error: f64,
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<CvReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub selected_features: Vec<String>,
    /// Weights over scaled features, aligned with `selected_features`.
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Per-feature divisor applied before the dot product.
    pub scaler: Vec<f64>,
    pub config: TrainConfig,
    pub stats: TrainingStats,
}

/// Objective values recorded after each epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochTrace {
    /// Objective of the running average at the end of the epoch.
    pub averaged: f64,
    /// Objective of the model retained so far.
    pub retained: f64,
}

struct Problem {
    /// Scaled inputs with a trailing constant 1.
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl Problem {
    fn objective(&self, w: &[f64], lambda: f64) -> f64 {
        let reg = 0.5 * lambda * dot(w, w);
        let hinge: f64 = self
            .rows
            .iter()
            .zip(&self.targets)
            .map(|(x, y)| (1.0 - y * dot(w, x)).max(0.0))
            .sum();
        reg + hinge / self.rows.len() as f64
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(v: &FeatureVector, features: &[String]) -> Vec<f64> {
    features.iter().map(|f| v.get(f)).collect()
}

fn check_labels(vectors: &[FeatureVector]) -> Result<Vec<bool>, TrainError> {
    let labels = vectors
        .iter()
        .map(|v| {
            v.label
                .ok_or_else(|| TrainError::Unlabelled(v.key.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(TrainError::SingleClass {
            positives,
            negatives,
        });
    }
    Ok(labels)
}

pub fn train(
    vectors: &[FeatureVector],
    selected: &[String],
    config: TrainConfig,
) -> Result<ClassifierModel, TrainError> {
    train_traced(vectors, selected, config).map(|(m, _)| m)
}

/// [`train`], also returning the per-epoch objective trace.
pub fn train_traced(
    vectors: &[FeatureVector],
    selected: &[String],
    config: TrainConfig,
) -> Result<(ClassifierModel, Vec<EpochTrace>), TrainError> {
    let labels = check_labels(vectors)?;
    for v in vectors {
        for f in selected {
            if !v.get(f).is_finite() {
                return Err(TrainError::NonFinite {
                    feature: f.clone(),
                    key: v.key.to_string(),
                });
            }
        }
    }

    let raw: Vec<Vec<f64>> = vectors.iter().map(|v| project(v, selected)).collect();
    let scaler: Vec<f64> = (0..selected.len())
        .map(|j| {
            let m = raw.iter().map(|r| r[j].abs()).fold(0.0, f64::max);
            if m > 0.0 {
                m
            } else {
                1.0
            }
        })
        .collect();
    let problem = Problem {
        rows: raw
            .into_iter()
            .map(|r| {
                let mut x: Vec<f64> = r.iter().zip(&scaler).map(|(v, s)| v / s).collect();
                x.push(1.0);
                x
            })
            .collect(),
        targets: labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect(),
    };

    let n = problem.rows.len();
    let dim = selected.len() + 1;
    let lambda = 1.0 / (config.c * n as f64);
    let radius = 1.0 / lambda.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = vec![0.0; dim];
    let mut avg = vec![0.0; dim];
    let mut retained = vec![0.0; dim];
    let mut retained_obj = problem.objective(&retained, lambda);
    let mut trace = Vec::with_capacity(config.epochs);
    let mut t = 0u64;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let (x, y) = (&problem.rows[i], problem.targets[i]);
            let violated = y * dot(&w, x) < 1.0;
            let shrink = 1.0 - eta * lambda;
            for (wj, xj) in w.iter_mut().zip(x) {
                *wj *= shrink;
                if violated {
                    *wj += eta * y * xj;
                }
            }
            let norm = dot(&w, &w).sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|wj| *wj *= s);
            }
            let step = 1.0 / t as f64;
            for (aj, wj) in avg.iter_mut().zip(&w) {
                *aj += (wj - *aj) * step;
            }
        }
        let avg_obj = problem.objective(&avg, lambda);
        if avg_obj <= retained_obj {
            retained.copy_from_slice(&avg);
            retained_obj = avg_obj;
        }
        trace.push(EpochTrace {
            averaged: avg_obj,
            retained: retained_obj,
        });
    }

    let errors = problem
        .rows
        .iter()
        .zip(&problem.targets)
        .filter(|(x, &y)| (dot(&retained, x) > 0.0) != (y > 0.0))
        .count();
    let bias = retained.pop().unwrap_or(0.0);
    let model = ClassifierModel {
        selected_features: selected.to_vec(),
        weights: retained,
        bias,
        scaler,
        config,
        stats: TrainingStats {
            training_error: errors as f64 / n as f64,
            objective: retained_obj,
            cross_validation: None,
        },
    };
    Ok((model, trace))
}

impl ClassifierModel {
    /// `w . x + b` over the selected features; other features are ignored.
    pub fn margin(&self, vector: &FeatureVector) -> f64 {
        self.selected_features
            .iter()
            .zip(&self.weights)
            .zip(&self.scaler)
            .map(|((f, w), s)| w * vector.get(f) / s)
            .sum::<f64>()
            + self.bias
    }

    /// Returns (is_map, margin). A margin of exactly zero is a non-map.
    pub fn predict(&self, vector: &FeatureVector) -> (bool, f64) {
        let m = self.margin(vector);
        (m > 0.0, m)
    }

    pub fn evaluate(&self, vectors: &[FeatureVector]) -> Metrics {
        let pairs: Vec<(bool, bool)> = vectors
            .iter()
            .filter_map(|v| v.label.map(|l| (self.predict(v).0, l)))
            .collect();
        metrics(&pairs)
    }
}

/// Metrics over (predicted, actual) pairs with "map" as the positive class.
/// Undefined ratios are reported as 0.
pub fn metrics(pairs: &[(bool, bool)]) -> Metrics {
    let count = |p: bool, a: bool| pairs.iter().filter(|&&x| x == (p, a)).count() as f64;
    let (tp, fp, fn_, tn) = (
        count(true, true),
        count(true, false),
        count(false, true),
        count(false, false),
    );
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Metrics {
        accuracy: ratio(tp + tn, pairs.len() as f64),
        precision,
        recall,
        f1: ratio(2.0 * precision * recall, precision + recall),
    }
}

/// Test-fold indices for stratified k-fold: each class is shuffled with
/// `seed` and dealt round-robin across the folds.
pub fn stratified_folds(
    labels: &[bool],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, TrainError> {
    if k < 2 {
        return Err(TrainError::TooFewFolds(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for (class, name) in [(true, "map"), (false, "non-map")] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(TrainError::Stratification {
                class: name,
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng);
        for (j, idx) in members.into_iter().enumerate() {
            folds[j % k].push(idx);
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

fn mean_std(values: impl Iterator<Item = Metrics> + Clone) -> (Metrics, Metrics) {
    let n = values.clone().count() as f64;
    let fields = |m: &Metrics| [m.accuracy, m.precision, m.recall, m.f1];
    let mut mean = [0.0; 4];
    for m in values.clone() {
        for (acc, v) in mean.iter_mut().zip(fields(&m)) {
            *acc += v / n;
        }
    }
    let mut var = [0.0; 4];
    if n > 1.0 {
        for m in values {
            for ((acc, v), mu) in var.iter_mut().zip(fields(&m)).zip(mean) {
                *acc += (v - mu) * (v - mu) / (n - 1.0);
            }
        }
    }
    let build = |a: [f64; 4]| Metrics {
        accuracy: a[0],
        precision: a[1],
        recall: a[2],
        f1: a[3],
    };
    (build(mean), build(var.map(f64::sqrt)))
}

/// Stratified k-fold cross-validation. Feature selection runs on each
/// training split only.
pub fn cross_validate(
    vectors: &[FeatureVector],
    k: usize,
    threshold: Threshold,
    config: TrainConfig,
) -> Result<CvReport, TrainError> {
    let labels = check_labels(vectors)?;
    let folds = stratified_folds(&labels, k, config.seed)?;

    let mut results = Vec::with_capacity(k);
    for (fold, test_idx) in folds.iter().enumerate() {
        let mut in_test = vec![false; vectors.len()];
        test_idx.iter().for_each(|&i| in_test[i] = true);
        let train_set: Vec<FeatureVector> = (0..vectors.len())
            .filter(|&i| !in_test[i])
            .map(|i| vectors[i].clone())
            .collect();
        let test_set: Vec<FeatureVector> = test_idx.iter().map(|&i| vectors[i].clone()).collect();

        let selected = select_top(&rank_features(&train_set)?, threshold)?;
        let model = train(&train_set, &selected, config)?;
        results.push(FoldResult {
            fold: fold + 1,
            test_size: test_set.len(),
            selected_features: selected.len(),
            metrics: model.evaluate(&test_set),
        });
    }
    let (mean, stddev) = mean_std(results.iter().map(|r| r.metrics));
    Ok(CvReport {
        k,
        folds: results,
        mean,
        stddev,
    })
}
