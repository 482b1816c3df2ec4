//! End-to-end composition: labelled metadata to a model artifact, model to
//! classified figures, classified figures to an index.
//!
//! Each stage is a plain function so that the command-line tool and
//! in-process callers run the exact same code.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    cross_validate, train, ClassifierModel, CvReport, TrainConfig, TrainError,
};
use crate::docmodel::DocumentRecord;
use crate::featurize::{
    Analyzer, FeatureVector, Featurizer, Gazetteer, Vocabulary, FEATURE_VERSION,
};
use crate::metadata::{FigureMetadata, MapKey};
use crate::search::{FieldedIndex, IndexError, VenueTable};
use crate::selector::{rank_features, select_top, FeatureScore, Threshold};

pub const MODEL_FORMAT: &str = "figseek-model/1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("labels line {line}: {message}")]
    LabelSyntax { line: usize, message: String },
    #[error("labels reference unknown figure {0}")]
    UnknownFigure(MapKey),
    #[error("model format `{found}` is not `{MODEL_FORMAT}`")]
    ModelFormat { found: String },
    #[error("model was trained on feature version `{model}`, this build produces `{current}`")]
    FeatureVersion { model: String, current: String },
    #[error("classified figure {0} belongs to a document missing from the corpus")]
    MissingDocument(MapKey),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything needed to classify unseen figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub feature_version: String,
    pub vocabulary: Vocabulary,
    pub classifier: ClassifierModel,
}

impl ModelArtifact {
    pub fn check_compatible(&self) -> Result<(), PipelineError> {
        if self.format != MODEL_FORMAT {
            return Err(PipelineError::ModelFormat {
                found: self.format.clone(),
            });
        }
        if self.feature_version != FEATURE_VERSION {
            return Err(PipelineError::FeatureVersion {
                model: self.feature_version.clone(),
                current: FEATURE_VERSION.into(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serialises");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifiedFigure {
    pub metadata: FigureMetadata,
    pub is_map: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub threshold: Threshold,
    pub folds: usize,
    pub classifier: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub artifact: ModelArtifact,
    pub report: CvReport,
    pub scores: Vec<FeatureScore>,
}

/// Parses `doc_id<TAB>figure_number<TAB>label` lines, where label is one of
/// `map`/`non-map`, `1`/`0`, `true`/`false`.
pub fn parse_labels(reader: impl BufRead) -> Result<BTreeMap<MapKey, bool>, PipelineError> {
    let mut labels = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let err = |message: String| PipelineError::LabelSyntax {
            line: i + 1,
            message,
        };
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [doc_id, number, label] = cols[..] else {
            return Err(err(format!(
                "expected 3 tab-separated columns, found {}",
                cols.len()
            )));
        };
        let figure_number = number
            .parse()
            .map_err(|_| err(format!("bad figure number `{number}`")))?;
        let is_map = match label {
            "map" | "1" | "true" => true,
            "non-map" | "0" | "false" => false,
            other => return Err(err(format!("bad label `{other}`"))),
        };
        labels.insert(
            MapKey {
                doc_id: doc_id.into(),
                figure_number,
            },
            is_map,
        );
    }
    Ok(labels)
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| PipelineError::Json {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(items: &[T], mut out: impl Write) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl_file<T: DeserializeOwned>(
    path: impl AsRef<Path>,
) -> Result<Vec<T>, PipelineError> {
    read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Builds the vocabulary from the labelled figures, cross-validates, then
/// selects features and trains on all labelled figures.
pub fn train_model(
    metas: &[FigureMetadata],
    labels: &BTreeMap<MapKey, bool>,
    analyzer: &Analyzer,
    gazetteer: &Gazetteer,
    settings: TrainSettings,
) -> Result<TrainOutcome, PipelineError> {
    let by_key: HashMap<MapKey, &FigureMetadata> = metas.iter().map(|m| (m.key(), m)).collect();
    if let Some(missing) = labels.keys().find(|k| !by_key.contains_key(*k)) {
        return Err(PipelineError::UnknownFigure(missing.clone()));
    }
    let unlabelled = metas.len() - labels.len().min(metas.len());
    if unlabelled > 0 {
        log::warn!("{unlabelled} figures have no label and are left out of training");
    }

    let labelled: Vec<(&FigureMetadata, bool)> =
        labels.iter().map(|(k, &l)| (by_key[k], l)).collect();
    let vocabulary = Vocabulary::build(labelled.iter().map(|(m, _)| *m), analyzer);
    let featurizer = Featurizer::new(analyzer, &vocabulary, gazetteer);
    let vectors: Vec<FeatureVector> = labelled
        .iter()
        .map(|(m, l)| featurizer.featurize(m, Some(*l)))
        .collect();

    let report = cross_validate(
        &vectors,
        settings.folds,
        settings.threshold,
        settings.classifier,
    )?;
    let scores = rank_features(&vectors).map_err(TrainError::from)?;
    let selected = select_top(&scores, settings.threshold).map_err(TrainError::from)?;
    let mut classifier = train(&vectors, &selected, settings.classifier)?;
    classifier.stats.cross_validation = Some(report.clone());

    Ok(TrainOutcome {
        artifact: ModelArtifact {
            format: MODEL_FORMAT.into(),
            feature_version: FEATURE_VERSION.into(),
            vocabulary,
            classifier,
        },
        report,
        scores,
    })
}

pub fn classify(
    metas: &[FigureMetadata],
    artifact: &ModelArtifact,
    analyzer: &Analyzer,
    gazetteer: &Gazetteer,
) -> Result<Vec<ClassifiedFigure>, PipelineError> {
    artifact.check_compatible()?;
    let featurizer = Featurizer::new(analyzer, &artifact.vocabulary, gazetteer);
    Ok(metas
        .iter()
        .map(|m| {
            let (is_map, margin) = artifact.classifier.predict(&featurizer.featurize(m, None));
            ClassifiedFigure {
                metadata: m.clone(),
                is_map,
                margin,
            }
        })
        .collect())
}

/// Indexes the figures classified as maps, joined with their documents'
/// metadata.
pub fn build_map_index(
    classified: &[ClassifiedFigure],
    docs: &[DocumentRecord],
    venues: &VenueTable,
    analyzer: &Analyzer,
) -> Result<FieldedIndex, PipelineError> {
    let by_id: HashMap<&str, &DocumentRecord> =
        docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut maps = Vec::new();
    for c in classified.iter().filter(|c| c.is_map) {
        let doc = by_id
            .get(c.metadata.doc_id.as_str())
            .ok_or_else(|| PipelineError::MissingDocument(c.metadata.key()))?;
        maps.push((c.metadata.clone(), doc.metadata.clone()));
    }
    Ok(FieldedIndex::build(&maps, venues, analyzer)?)
}

/// Human-readable cross-validation summary; byte-stable for a given report.
pub fn format_report(report: &CvReport) -> String {
    let mut s = String::new();
    s.push_str("fold\ttest\tfeatures\taccuracy\tprecision\trecall\tf1\n");
    for f in &report.folds {
        s.push_str(&format!(
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\n",
            f.fold,
            f.test_size,
            f.selected_features,
            f.metrics.accuracy,
            f.metrics.precision,
            f.metrics.recall,
            f.metrics.f1
        ));
    }
    let (m, d) = (&report.mean, &report.stddev);
    s.push_str(&format!(
        "mean\t\t\t{:.4}±{:.4}\t{:.4}±{:.4}\t{:.4}±{:.4}\t{:.4}±{:.4}\n",
        m.accuracy, d.accuracy, m.precision, d.precision, m.recall, d.recall, m.f1, d.f1
    ));
    s
}
