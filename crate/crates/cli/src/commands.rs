use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use figseek::docmodel::{load_corpus_as_of, DocumentRecord};
use figseek::featurize::{Analyzer, Gazetteer, Stoplist};
use figseek::metadata::{extract_corpus, Diagnostic, FigureMetadata};
use figseek::pipeline::{
    self, build_map_index, format_report, read_jsonl_file, write_jsonl, ClassifiedFigure,
    ModelArtifact, TrainSettings,
};
use figseek::search::{FieldedIndex, VenueTable};
use figseek::selector::write_scores;

use crate::config::PipelineConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad input files, arguments or configuration.
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn inner(&self) -> &anyhow::Error {
        match self {
            CliError::Input(e) | CliError::Internal(e) => e,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Internal(e)
    }
}

fn input<E: Into<anyhow::Error>>(context: String) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Input(e.into().context(context))
}

fn require(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Input(anyhow!(
            "{what} {} not found",
            path.display()
        )))
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn analyzer(config: &PipelineConfig) -> Result<Analyzer, CliError> {
    match &config.stoplist {
        Some(path) => {
            require(path, "stoplist")?;
            let list =
                Stoplist::from_file(path).map_err(input(format!("reading {}", path.display())))?;
            Ok(Analyzer::new(list))
        }
        None => Ok(Analyzer::default()),
    }
}

fn gazetteer(config: &PipelineConfig) -> Result<Gazetteer, CliError> {
    match &config.gazetteer {
        Some(path) => {
            require(path, "gazetteer")?;
            Gazetteer::from_file(path).map_err(input(format!("reading {}", path.display())))
        }
        None => Ok(Gazetteer::bundled()),
    }
}

fn venues(config: &PipelineConfig) -> Result<VenueTable, CliError> {
    match &config.venues {
        Some(path) => {
            require(path, "venue table")?;
            let text = std::fs::read_to_string(path)
                .map_err(input(format!("reading {}", path.display())))?;
            VenueTable::parse(&text)
                .map_err(|e| CliError::Input(anyhow!("{}: {e}", path.display())))
        }
        None => Ok(VenueTable::default()),
    }
}

fn corpus(config: &PipelineConfig) -> Result<Vec<DocumentRecord>, CliError> {
    require(&config.corpus, "corpus")?;
    load_corpus_as_of(&config.corpus, config.as_of())
        .map_err(input(format!("corpus {}", config.corpus.display())))
}

fn read_records<T: serde::de::DeserializeOwned>(
    path: &Path,
    what: &str,
) -> Result<Vec<T>, CliError> {
    require(path, what)?;
    read_jsonl_file(path).map_err(input(format!("{what} {}", path.display())))
}

fn write_records<T: serde::Serialize>(items: &[T], path: &Path) -> anyhow::Result<()> {
    let mut out = create(path)?;
    write_jsonl(items, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn extract(config: &PipelineConfig, out: &Path) -> Result<(), CliError> {
    let docs = corpus(config)?;
    if docs.is_empty() {
        log::warn!("corpus {} contains no documents", config.corpus.display());
    }
    let metas = extract_corpus(&docs);
    write_records(&metas, out)?;

    let count = |pred: fn(&Diagnostic) -> bool| {
        metas
            .iter()
            .filter(|m| m.diagnostics.iter().any(pred))
            .count()
    };
    eprintln!(
        "{} documents, {} figures; {} without caption, {} with unclosed caption, {} without references, {} without size",
        docs.len(),
        metas.len(),
        count(|d| matches!(d, Diagnostic::CaptionNotFound)),
        count(|d| matches!(d, Diagnostic::UnmatchedCaptionBegin { .. })),
        count(|d| matches!(d, Diagnostic::NoReferences)),
        count(|d| matches!(d, Diagnostic::NoSizeBaseline)),
    );
    Ok(())
}

pub fn train(
    config: &PipelineConfig,
    metadata: &Path,
    labels: &Path,
    scores_out: Option<&Path>,
) -> Result<(), CliError> {
    let metas: Vec<FigureMetadata> = read_records(metadata, "metadata")?;
    require(labels, "labels")?;
    let file = File::open(labels).map_err(input(format!("labels {}", labels.display())))?;
    let labels = pipeline::parse_labels(std::io::BufReader::new(file))
        .map_err(input(format!("labels {}", labels.display())))?;
    let analyzer = analyzer(config)?;
    let gazetteer = gazetteer(config)?;

    let settings = TrainSettings {
        threshold: config.threshold().map_err(CliError::Input)?,
        folds: config.cv_folds,
        classifier: config.train_config(),
    };
    let outcome = pipeline::train_model(&metas, &labels, &analyzer, &gazetteer, settings)
        .map_err(input("training failed".into()))?;

    print!("{}", format_report(&outcome.report));
    let mut out = create(&config.model)?;
    out.write_all(outcome.artifact.to_json().as_bytes())
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", config.model.display()))?;
    if let Some(path) = scores_out {
        let mut out = create(path)?;
        write_scores(&outcome.scores, &mut out)
            .and_then(|_| out.flush())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "model with {} features written to {}",
        outcome.artifact.classifier.selected_features.len(),
        config.model.display()
    );
    Ok(())
}

fn load_model(config: &PipelineConfig) -> Result<ModelArtifact, CliError> {
    require(&config.model, "model")?;
    let text = std::fs::read_to_string(&config.model)
        .map_err(input(format!("model {}", config.model.display())))?;
    let artifact: ModelArtifact =
        serde_json::from_str(&text).map_err(input(format!("model {}", config.model.display())))?;
    Ok(artifact)
}

pub fn classify(config: &PipelineConfig, metadata: &Path, out: &Path) -> Result<(), CliError> {
    let metas: Vec<FigureMetadata> = read_records(metadata, "metadata")?;
    let artifact = load_model(config)?;
    let classified = pipeline::classify(&metas, &artifact, &analyzer(config)?, &gazetteer(config)?)
        .map_err(input(format!("model {}", config.model.display())))?;
    write_records(&classified, out)?;
    let maps = classified.iter().filter(|c| c.is_map).count();
    eprintln!("{maps} of {} figures classified as maps", classified.len());
    Ok(())
}

pub fn index(config: &PipelineConfig, classified: &Path) -> Result<(), CliError> {
    let classified: Vec<ClassifiedFigure> = read_records(classified, "classified metadata")?;
    let docs = corpus(config)?;
    let index = build_map_index(&classified, &docs, &venues(config)?, &analyzer(config)?)
        .map_err(input("indexing failed".into()))?;
    if let Some(dir) = config.index.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    index
        .save(&config.index)
        .with_context(|| format!("writing {}", config.index.display()))?;
    eprintln!(
        "{} maps indexed in {}",
        index.map_count(),
        config.index.display()
    );
    Ok(())
}

pub fn query(
    config: &PipelineConfig,
    q: &str,
    mode: Option<&str>,
    top_k: usize,
) -> Result<(), CliError> {
    let mut ranking = config.ranking().map_err(CliError::Input)?;
    if let Some(mode) = mode {
        ranking.mode = mode
            .parse()
            .map_err(|e: String| CliError::Input(anyhow!(e)))?;
    }
    require(&config.index, "index")?;
    let index = FieldedIndex::load(&config.index)
        .map_err(input(format!("index {}", config.index.display())))?;
    let hits = index.query(q, &analyzer(config)?, &ranking, top_k, config.as_of());

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "rank\tmap\ttext_score\tboost\tfinal_score\tfields")
        .context("writing results")?;
    for (i, h) in hits.iter().enumerate() {
        let fields: Vec<&str> = h.matched_fields.iter().map(|f| f.name()).collect();
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}",
            i + 1,
            h.key,
            h.text_score,
            h.boost,
            h.final_score,
            fields.join(",")
        )
        .context("writing results")?;
    }
    Ok(())
}
