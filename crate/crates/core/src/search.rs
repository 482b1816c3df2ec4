//! Fielded map index and ranking.
//!
//! Each map is indexed under four fields: its caption and reference text,
//! and the title and abstract of its host document. Two text scorers are
//! available:
//!
//! * `bm25f` combines length-normalised term frequencies across fields
//!   before saturation:
//!   `tf' = sum_f w_f tf_f / (1 - b + b len_f / avglen_f)`,
//!   `score = sum_t idf(t) tf' / (k1 + tf')`.
//! * `linear` scores every field as its own BM25 collection and sums the
//!   field scores with weights `w_f`.
//!
//! Both use `idf(t) = ln((N - n_t + 0.5) / (n_t + 0.5) + 1)`. In `bm25f`
//! mode `n_t` counts maps containing `t` in any field with a positive
//! weight; in `linear` mode it counts maps containing `t` in that field.
//!
//! The final score multiplies the text score by `1 + boost`, where the
//! boost rewards recent, well-cited documents from weighted venues.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::docmodel::DocLevelMetadata;
use crate::featurize::Analyzer;
use crate::metadata::{FigureMetadata, MapKey};

pub const INDEX_FORMAT: &str = "figseek-index/1";

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("no maps to index")]
    Empty,
    #[error("map {0} appears more than once")]
    DuplicateMap(MapKey),
    #[error("invalid ranking configuration: {0}")]
    Config(String),
    #[error("index file has format `{found}`, expected `{INDEX_FORMAT}`")]
    Format { found: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed index file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Caption,
    Reference,
    Title,
    Abstract,
}

impl Field {
    pub const ALL: [Field; 4] = [
        Field::Caption,
        Field::Reference,
        Field::Title,
        Field::Abstract,
    ];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Caption => "caption",
            Field::Reference => "reference",
            Field::Title => "title",
            Field::Abstract => "abstract",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldWeights {
    pub caption: f64,
    pub reference: f64,
    pub title: f64,
    #[serde(rename = "abstract")]
    pub abstract_text: f64,
}

impl FieldWeights {
    pub fn get(&self, field: Field) -> f64 {
        match field {
            Field::Caption => self.caption,
            Field::Reference => self.reference,
            Field::Title => self.title,
            Field::Abstract => self.abstract_text,
        }
    }

    /// All weights zero except `field`, which gets `weight`.
    pub fn only(field: Field, weight: f64) -> Self {
        let mut w = FieldWeights {
            caption: 0.0,
            reference: 0.0,
            title: 0.0,
            abstract_text: 0.0,
        };
        match field {
            Field::Caption => w.caption = weight,
            Field::Reference => w.reference = weight,
            Field::Title => w.title = weight,
            Field::Abstract => w.abstract_text = weight,
        }
        w
    }
}

impl Default for FieldWeights {
    fn default() -> Self {
        FieldWeights {
            caption: 3.0,
            reference: 2.0,
            title: 1.5,
            abstract_text: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingMode {
    Bm25f,
    Linear,
}

impl std::str::FromStr for RankingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bm25f" => Ok(RankingMode::Bm25f),
            "linear" => Ok(RankingMode::Linear),
            other => Err(format!(
                "unknown ranking mode `{other}` (expected bm25f or linear)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingConfig {
    pub mode: RankingMode,
    pub field_weights: FieldWeights,
    pub k1: f64,
    pub b: f64,
    pub beta_age: f64,
    pub beta_cite: f64,
    pub beta_venue: f64,
    pub half_life_years: f64,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            mode: RankingMode::Bm25f,
            field_weights: FieldWeights::default(),
            k1: 1.2,
            b: 0.75,
            beta_age: 0.25,
            beta_cite: 0.5,
            beta_venue: 0.25,
            half_life_years: 10.0,
        }
    }
}

impl RankingConfig {
    pub fn validate(&self) -> Result<(), IndexError> {
        let bad = |msg: &str| Err(IndexError::Config(msg.into()));
        let weights = Field::ALL.map(|f| self.field_weights.get(f));
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("field weights must be finite and non-negative");
        }
        if weights.iter().all(|&w| w == 0.0) {
            return bad("at least one field weight must be positive");
        }
        if !(self.k1.is_finite() && self.k1 > 0.0) {
            return bad("k1 must be positive");
        }
        if !(0.0..=1.0).contains(&self.b) {
            return bad("b must lie in [0, 1]");
        }
        if [self.beta_age, self.beta_cite, self.beta_venue]
            .iter()
            .any(|b| !(b.is_finite() && *b >= 0.0))
        {
            return bad("boost weights must be finite and non-negative");
        }
        if !(self.half_life_years.is_finite() && self.half_life_years > 0.0) {
            return bad("half-life must be positive");
        }
        Ok(())
    }

    fn active(&self, field: Field) -> bool {
        self.field_weights.get(field) > 0.0
    }
}

/// Venue name to importance weight; unknown venues weigh 1.0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VenueTable {
    weights: BTreeMap<String, f64>,
}

impl VenueTable {
    pub fn weight(&self, venue: &str) -> f64 {
        self.weights.get(venue).copied().unwrap_or(1.0)
    }

    pub fn insert(&mut self, venue: impl Into<String>, weight: f64) {
        self.weights.insert(venue.into(), weight);
    }

    /// Parses `venue<TAB>weight` lines. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table = VenueTable::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (venue, weight) = line
                .rsplit_once('\t')
                .ok_or_else(|| format!("line {}: expected `venue<TAB>weight`", i + 1))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|e| format!("line {}: bad weight: {e}", i + 1))?;
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(format!("line {}: weight must be non-negative", i + 1));
            }
            table.insert(venue.trim(), weight);
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocAttrs {
    pub publication_date: NaiveDate,
    pub citation_count: u64,
    pub venue: String,
    pub venue_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedMap {
    pub key: MapKey,
    /// Token counts per field, in [`Field::ALL`] order.
    pub field_lengths: [u32; 4],
    pub attrs: DocAttrs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    /// Position of the map in [`FieldedIndex::maps`].
    pub map: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldedIndex {
    format: String,
    maps: Vec<IndexedMap>,
    postings: BTreeMap<Field, BTreeMap<String, Vec<Posting>>>,
    avg_field_length: BTreeMap<Field, f64>,
    max_citations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredHit {
    pub key: MapKey,
    pub text_score: f64,
    pub boost: f64,
    pub final_score: f64,
    pub matched_fields: Vec<Field>,
}

fn idf(n_maps: usize, doc_freq: usize) -> f64 {
    let (n, df) = (n_maps as f64, doc_freq as f64);
    ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
}

fn length_normalised(tf: u32, len: u32, avg: f64, b: f64) -> f64 {
    if tf == 0 || avg <= 0.0 {
        return 0.0;
    }
    f64::from(tf) / (1.0 - b + b * f64::from(len) / avg)
}

impl FieldedIndex {
    pub fn build(
        maps: &[(FigureMetadata, DocLevelMetadata)],
        venues: &VenueTable,
        analyzer: &Analyzer,
    ) -> Result<Self, IndexError> {
        if maps.is_empty() {
            return Err(IndexError::Empty);
        }
        let mut sorted: Vec<&(FigureMetadata, DocLevelMetadata)> = maps.iter().collect();
        sorted.sort_by_key(|(m, _)| m.key());
        for pair in sorted.windows(2) {
            if pair[0].0.key() == pair[1].0.key() {
                return Err(IndexError::DuplicateMap(pair[0].0.key()));
            }
        }

        let mut postings: BTreeMap<Field, BTreeMap<String, Vec<Posting>>> =
            Field::ALL.iter().map(|&f| (f, BTreeMap::new())).collect();
        let mut entries = Vec::with_capacity(sorted.len());
        for (ord, (meta, doc)) in sorted.iter().enumerate() {
            let texts = [
                meta.caption.clone(),
                meta.reference_sentences.join(" "),
                doc.title.clone(),
                doc.abstract_text.clone(),
            ];
            let mut field_lengths = [0u32; 4];
            for field in Field::ALL {
                let tokens = analyzer.analyze(&texts[field.slot()]);
                field_lengths[field.slot()] = tokens.len() as u32;
                let mut tfs: BTreeMap<String, u32> = BTreeMap::new();
                for t in tokens {
                    *tfs.entry(t).or_default() += 1;
                }
                let field_postings = postings.get_mut(&field).unwrap();
                for (term, tf) in tfs {
                    field_postings.entry(term).or_default().push(Posting {
                        map: ord as u32,
                        tf,
                    });
                }
            }
            entries.push(IndexedMap {
                key: meta.key(),
                field_lengths,
                attrs: DocAttrs {
                    publication_date: doc.publication_date,
                    citation_count: doc.citation_count,
                    venue: doc.venue.clone(),
                    venue_weight: venues.weight(&doc.venue),
                },
            });
        }

        let n = entries.len() as f64;
        let avg_field_length = Field::ALL
            .iter()
            .map(|&f| {
                let total: u64 = entries
                    .iter()
                    .map(|e| u64::from(e.field_lengths[f.slot()]))
                    .sum();
                (f, total as f64 / n)
            })
            .collect();
        let max_citations = entries
            .iter()
            .map(|e| e.attrs.citation_count)
            .max()
            .unwrap_or(0);

        Ok(FieldedIndex {
            format: INDEX_FORMAT.into(),
            maps: entries,
            postings,
            avg_field_length,
            max_citations,
        })
    }

    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[IndexedMap] {
        &self.maps
    }

    pub fn avg_field_length(&self, field: Field) -> f64 {
        self.avg_field_length.get(&field).copied().unwrap_or(0.0)
    }

    pub fn postings(&self, field: Field, term: &str) -> &[Posting] {
        self.postings
            .get(&field)
            .and_then(|p| p.get(term))
            .map_or(&[], Vec::as_slice)
    }

    fn ordinal(&self, key: &MapKey) -> Option<usize> {
        self.maps.binary_search_by(|m| m.key.cmp(key)).ok()
    }

    fn tf(&self, field: Field, term: &str, ord: usize) -> u32 {
        let list = self.postings(field, term);
        list.binary_search_by_key(&(ord as u32), |p| p.map)
            .map_or(0, |i| list[i].tf)
    }

    /// Maps containing `term` in any field with positive weight.
    fn combined_doc_freq(&self, term: &str, config: &RankingConfig) -> usize {
        let mut seen = BTreeSet::new();
        for field in Field::ALL.into_iter().filter(|&f| config.active(f)) {
            seen.extend(self.postings(field, term).iter().map(|p| p.map));
        }
        seen.len()
    }

    /// The idf used by the configured mode; in linear mode, the idf within
    /// `field`.
    pub fn idf(&self, term: &str, config: &RankingConfig, field: Option<Field>) -> f64 {
        let df = match field {
            Some(f) => self.postings(f, term).len(),
            None => self.combined_doc_freq(term, config),
        };
        idf(self.map_count(), df)
    }

    fn bm25f_at(&self, terms: &BTreeSet<&str>, ord: usize, config: &RankingConfig) -> f64 {
        let len = &self.maps[ord].field_lengths;
        let mut score = 0.0;
        for &term in terms {
            let pseudo_tf: f64 = Field::ALL
                .iter()
                .filter(|&&f| config.active(f))
                .map(|&f| {
                    config.field_weights.get(f)
                        * length_normalised(
                            self.tf(f, term, ord),
                            len[f.slot()],
                            self.avg_field_length(f),
                            config.b,
                        )
                })
                .sum();
            if pseudo_tf > 0.0 {
                let w = idf(self.map_count(), self.combined_doc_freq(term, config));
                score += w * pseudo_tf / (config.k1 + pseudo_tf);
            }
        }
        score
    }

    fn field_bm25_at(
        &self,
        terms: &BTreeSet<&str>,
        ord: usize,
        field: Field,
        config: &RankingConfig,
    ) -> f64 {
        let len = self.maps[ord].field_lengths[field.slot()];
        let avg = self.avg_field_length(field);
        terms
            .iter()
            .map(|&term| {
                let ntf = length_normalised(self.tf(field, term, ord), len, avg, config.b);
                if ntf > 0.0 {
                    idf(self.map_count(), self.postings(field, term).len()) * ntf
                        / (config.k1 + ntf)
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn linear_at(&self, terms: &BTreeSet<&str>, ord: usize, config: &RankingConfig) -> f64 {
        Field::ALL
            .iter()
            .filter(|&&f| config.active(f))
            .map(|&f| config.field_weights.get(f) * self.field_bm25_at(terms, ord, f, config))
            .sum()
    }

    fn text_score_at(&self, terms: &BTreeSet<&str>, ord: usize, config: &RankingConfig) -> f64 {
        match config.mode {
            RankingMode::Bm25f => self.bm25f_at(terms, ord, config),
            RankingMode::Linear => self.linear_at(terms, ord, config),
        }
    }

    /// BM25F score of one map for already-analysed query terms. Unknown
    /// maps score 0.
    pub fn score_bm25f(&self, terms: &[String], key: &MapKey, config: &RankingConfig) -> f64 {
        let terms: BTreeSet<&str> = terms.iter().map(String::as_str).collect();
        self.ordinal(key)
            .map_or(0.0, |o| self.bm25f_at(&terms, o, config))
    }

    pub fn score_linear(&self, terms: &[String], key: &MapKey, config: &RankingConfig) -> f64 {
        let terms: BTreeSet<&str> = terms.iter().map(String::as_str).collect();
        self.ordinal(key)
            .map_or(0.0, |o| self.linear_at(&terms, o, config))
    }

    /// BM25 of one field treated as a standalone collection.
    pub fn score_field(
        &self,
        terms: &[String],
        key: &MapKey,
        field: Field,
        config: &RankingConfig,
    ) -> f64 {
        let terms: BTreeSet<&str> = terms.iter().map(String::as_str).collect();
        self.ordinal(key)
            .map_or(0.0, |o| self.field_bm25_at(&terms, o, field, config))
    }

    fn boost_at(&self, ord: usize, config: &RankingConfig, now: NaiveDate) -> f64 {
        let attrs = &self.maps[ord].attrs;
        let age_years = ((now - attrs.publication_date).num_days().max(0)) as f64 / 365.25;
        let recency = (-age_years / config.half_life_years).exp2();
        let c_max = self.max_citations.max(1) as f64;
        let popularity = (attrs.citation_count as f64).ln_1p() / c_max.ln_1p();
        config.beta_age * recency
            + config.beta_cite * popularity
            + config.beta_venue * attrs.venue_weight
    }

    /// Context boost of a map as of `now`; 0 for unknown maps.
    pub fn boost(&self, key: &MapKey, config: &RankingConfig, now: NaiveDate) -> f64 {
        self.ordinal(key)
            .map_or(0.0, |o| self.boost_at(o, config, now))
    }

    /// Ranks maps matching any of `terms`.
    pub fn query_terms(
        &self,
        terms: &[String],
        config: &RankingConfig,
        top_k: usize,
        now: NaiveDate,
    ) -> Vec<ScoredHit> {
        let terms: BTreeSet<&str> = terms.iter().map(String::as_str).collect();
        let mut matched: BTreeMap<usize, BTreeSet<Field>> = BTreeMap::new();
        for field in Field::ALL.into_iter().filter(|&f| config.active(f)) {
            for &term in &terms {
                for p in self.postings(field, term) {
                    matched.entry(p.map as usize).or_default().insert(field);
                }
            }
        }

        let mut hits: Vec<ScoredHit> = matched
            .into_iter()
            .map(|(ord, fields)| {
                let text_score = self.text_score_at(&terms, ord, config);
                let boost = self.boost_at(ord, config, now);
                ScoredHit {
                    key: self.maps[ord].key.clone(),
                    text_score,
                    boost,
                    final_score: text_score * (1.0 + boost),
                    matched_fields: fields.into_iter().collect(),
                }
            })
            .collect();
        hits.sort_by(|a, b| {
            b.final_score
                .total_cmp(&a.final_score)
                .then_with(|| a.key.cmp(&b.key))
        });
        hits.truncate(top_k);
        hits
    }

    /// Analyses `query` like indexed text and ranks the matching maps.
    pub fn query(
        &self,
        query: &str,
        analyzer: &Analyzer,
        config: &RankingConfig,
        top_k: usize,
        now: NaiveDate,
    ) -> Vec<ScoredHit> {
        let terms = analyzer.analyze(query);
        if terms.is_empty() {
            log::warn!("query `{query}` has no searchable terms after preprocessing");
            return Vec::new();
        }
        self.query_terms(&terms, config, top_k, now)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IndexError> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let index: FieldedIndex = serde_json::from_reader(reader)?;
        if index.format != INDEX_FORMAT {
            return Err(IndexError::Format {
                found: index.format,
            });
        }
        Ok(index)
    }
}
