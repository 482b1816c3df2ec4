//! Feature selection by expected entropy loss.
//!
//! For a feature `f` over a labelled sample with class variable `C`:
//!
//! ```text
//! loss(f) = e(C) - [ P(f) e(C | f) + P(!f) e(C | !f) ]
//! ```
//!
//! where `e` is the binary Shannon entropy in bits and every probability is
//! a maximum-likelihood count. A feature is "present" in a vector when its
//! value is strictly positive.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::FeatureVector;

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("need at least one labelled example of each class (got {positives} positive, {negatives} negative)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("top-k threshold must be at least 1")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature_id: String,
    /// Bits.
    pub entropy_loss: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    TopK(usize),
    MinLoss(f64),
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    present_pos: usize,
    present_neg: usize,
}

fn loss_from_counts(c: Counts, positives: usize, negatives: usize) -> f64 {
    let n = (positives + negatives) as f64;
    let prior = binary_entropy(positives as f64 / n);

    let present = c.present_pos + c.present_neg;
    let absent_pos = positives - c.present_pos;
    let absent = (positives + negatives) - present;

    let conditional = |pos: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            total as f64 / n * binary_entropy(pos as f64 / total as f64)
        }
    };
    let expected = conditional(c.present_pos, present) + conditional(absent_pos, absent);
    (prior - expected).max(0.0)
}

fn class_counts(vectors: &[FeatureVector]) -> Result<(usize, usize), SelectError> {
    let positives = vectors.iter().filter(|v| v.label == Some(true)).count();
    let negatives = vectors.iter().filter(|v| v.label == Some(false)).count();
    if positives == 0 || negatives == 0 {
        return Err(SelectError::SingleClass {
            positives,
            negatives,
        });
    }
    Ok((positives, negatives))
}

/// Expected entropy loss of one feature. Unlabelled vectors are ignored.
pub fn entropy_loss(feature_id: &str, vectors: &[FeatureVector]) -> Result<f64, SelectError> {
    let (positives, negatives) = class_counts(vectors)?;
    let mut counts = Counts::default();
    for v in vectors {
        if v.get(feature_id) > 0.0 {
            match v.label {
                Some(true) => counts.present_pos += 1,
                Some(false) => counts.present_neg += 1,
                None => {}
            }
        }
    }
    Ok(loss_from_counts(counts, positives, negatives))
}

/// Scores every feature present in at least one labelled vector, sorted by
/// descending loss with ties broken by feature id.
pub fn rank_features(vectors: &[FeatureVector]) -> Result<Vec<FeatureScore>, SelectError> {
    let (positives, negatives) = class_counts(vectors)?;
    let mut counts: BTreeMap<&str, Counts> = BTreeMap::new();
    for v in vectors {
        let Some(label) = v.label else { continue };
        for (id, &value) in &v.values {
            let c = counts.entry(id.as_str()).or_default();
            if value > 0.0 {
                if label {
                    c.present_pos += 1;
                } else {
                    c.present_neg += 1;
                }
            }
        }
    }

    let mut scores: Vec<FeatureScore> = counts
        .into_iter()
        .map(|(id, c)| FeatureScore {
            feature_id: id.to_string(),
            entropy_loss: loss_from_counts(c, positives, negatives),
            rank: 0,
        })
        .collect();
    scores.sort_by(|a, b| {
        b.entropy_loss
            .total_cmp(&a.entropy_loss)
            .then_with(|| a.feature_id.cmp(&b.feature_id))
    });
    for (i, s) in scores.iter_mut().enumerate() {
        s.rank = i + 1;
    }
    Ok(scores)
}

/// Feature ids passing `threshold`, in rank order.
pub fn select_top(
    scores: &[FeatureScore],
    threshold: Threshold,
) -> Result<Vec<String>, SelectError> {
    let selected: Vec<String> = match threshold {
        Threshold::TopK(0) => return Err(SelectError::ZeroK),
        Threshold::TopK(k) => {
            if k > scores.len() {
                log::warn!(
                    "top-k {k} exceeds {} scored features; keeping all",
                    scores.len()
                );
            }
            scores
                .iter()
                .take(k)
                .map(|s| s.feature_id.clone())
                .collect()
        }
        Threshold::MinLoss(min) => scores
            .iter()
            .filter(|s| s.entropy_loss >= min)
            .map(|s| s.feature_id.clone())
            .collect(),
    };
    if selected.is_empty() {
        log::warn!("feature selection with {threshold:?} kept no features");
    }
    Ok(selected)
}

/// Two tab-separated columns: feature id and loss.
pub fn write_scores<W: Write>(scores: &[FeatureScore], mut out: W) -> std::io::Result<()> {
    for s in scores {
        writeln!(out, "{}\t{:.12}", s.feature_id, s.entropy_loss)?;
    }
    Ok(())
}
