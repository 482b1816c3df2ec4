use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::NaiveDate;
use figseek::classifier::TrainConfig;
use figseek::search::{FieldWeights, RankingConfig, RankingMode};
use figseek::selector::Threshold;
use serde::Deserialize;

/// Flat TOML file. Relative paths are resolved against the file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub model: PathBuf,
    pub index: PathBuf,
    /// Bundled list when absent.
    pub gazetteer: Option<PathBuf>,
    /// Bundled list when absent.
    pub stoplist: Option<PathBuf>,
    /// Every venue weighs 1.0 when absent.
    pub venues: Option<PathBuf>,

    /// Exactly one of these two.
    pub top_k_features: Option<usize>,
    pub min_entropy_loss: Option<f64>,

    #[serde(default = "default_c")]
    pub svm_c: f64,
    #[serde(default = "default_epochs")]
    pub svm_epochs: usize,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,

    #[serde(default)]
    pub ranking_mode: Option<String>,
    pub weight_caption: Option<f64>,
    pub weight_reference: Option<f64>,
    pub weight_title: Option<f64>,
    pub weight_abstract: Option<f64>,
    pub k1: Option<f64>,
    pub b: Option<f64>,
    pub beta_age: Option<f64>,
    pub beta_cite: Option<f64>,
    pub beta_venue: Option<f64>,
    pub half_life_years: Option<f64>,

    /// Reference date for ingestion checks and recency; today when absent.
    pub as_of: Option<NaiveDate>,
}

fn default_c() -> f64 {
    TrainConfig::default().c
}
fn default_epochs() -> usize {
    TrainConfig::default().epochs
}
fn default_folds() -> usize {
    5
}
fn default_seed() -> u64 {
    TrainConfig::default().seed
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: PipelineConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve(base);
        config.validate()?;
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.corpus);
        join(&mut self.model);
        join(&mut self.index);
        for p in [&mut self.gazetteer, &mut self.stoplist, &mut self.venues]
            .into_iter()
            .flatten()
        {
            join(p);
        }
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.cv_folds < 2 {
            bail!("cv_folds must be at least 2, got {}", self.cv_folds);
        }
        self.threshold()?;
        self.ranking()?.validate()?;
        if !(self.svm_c.is_finite() && self.svm_c > 0.0) {
            bail!("svm_c must be positive");
        }
        if self.svm_epochs == 0 {
            bail!("svm_epochs must be at least 1");
        }
        Ok(())
    }

    pub fn threshold(&self) -> anyhow::Result<Threshold> {
        match (self.top_k_features, self.min_entropy_loss) {
            (Some(k), None) => Ok(Threshold::TopK(k)),
            (None, Some(min)) => Ok(Threshold::MinLoss(min)),
            (None, None) => Ok(Threshold::TopK(50)),
            (Some(_), Some(_)) => bail!("set only one of top_k_features and min_entropy_loss"),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            c: self.svm_c,
            epochs: self.svm_epochs,
            seed: self.seed,
        }
    }

    pub fn ranking(&self) -> anyhow::Result<RankingConfig> {
        let d = RankingConfig::default();
        let w = d.field_weights;
        let mode = match &self.ranking_mode {
            Some(m) => m.parse::<RankingMode>().map_err(anyhow::Error::msg)?,
            None => d.mode,
        };
        Ok(RankingConfig {
            mode,
            field_weights: FieldWeights {
                caption: self.weight_caption.unwrap_or(w.caption),
                reference: self.weight_reference.unwrap_or(w.reference),
                title: self.weight_title.unwrap_or(w.title),
                abstract_text: self.weight_abstract.unwrap_or(w.abstract_text),
            },
            k1: self.k1.unwrap_or(d.k1),
            b: self.b.unwrap_or(d.b),
            beta_age: self.beta_age.unwrap_or(d.beta_age),
            beta_cite: self.beta_cite.unwrap_or(d.beta_cite),
            beta_venue: self.beta_venue.unwrap_or(d.beta_venue),
            half_life_years: self.half_life_years.unwrap_or(d.half_life_years),
        })
    }

    pub fn as_of(&self) -> NaiveDate {
        self.as_of
            .unwrap_or_else(|| chrono::Local::now().date_naive())
    }
}
