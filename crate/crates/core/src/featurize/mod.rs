//! Feature extraction for map/non-map classification.
//!
//! Every figure becomes a sparse vector keyed by `family:field:term`
//! identifiers. Zero values are not stored; [`FeatureVector::get`] returns
//! 0 for any identifier outside the vector's support.
//!
//! Families:
//!
//! | id | values |
//! |----|--------|
//! | `term:caption:<stem>`, `term:reference:<stem>`, `term:combined:<stem>` | term counts |
//! | `begins_with:caption:<stem>` | 1 for the caption's first surviving term |
//! | `figure_no:number:1-2` | 1 when the figure number is 1 or 2 |
//! | `location:caption:<bucket>`, `location:reference:<bucket>` | one-hot location-name count bucket |
//! | `size:page:gt-third` | 1 when the figure covers more than a third of the page |

mod gazetteer;
pub mod porter;
mod text;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use gazetteer::Gazetteer;
pub use text::{preprocess, tokenize, Analyzer, Stoplist};

use crate::metadata::{FigureMetadata, MapKey};

/// Bumped whenever feature identifiers or their semantics change; models
/// record the version they were trained against.
pub const FEATURE_VERSION: &str = "figseek-features/1";

pub const FIGURE_NO_FEATURE: &str = "figure_no:number:1-2";
pub const SIZE_FEATURE: &str = "size:page:gt-third";

/// Count buckets for location-name mentions. The bucket `3-5` owns the count
/// 5; `6-9` starts after it.
pub const LOCATION_BUCKETS: [&str; 6] = ["0", "1-2", "3-5", "6-9", "10-20", "21+"];

pub type FeatureValues = BTreeMap<String, f64>;

/// Stems kept for term features: every stem occurring at least twice in the
/// training corpus, with its corpus frequency.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: BTreeMap<String, u64>,
}

impl Vocabulary {
    pub fn build<'a>(
        metas: impl IntoIterator<Item = &'a FigureMetadata>,
        analyzer: &Analyzer,
    ) -> Self {
        let mut freqs: BTreeMap<String, u64> = BTreeMap::new();
        for meta in metas {
            let stems = analyzer.analyze(&meta.caption).into_iter().chain(
                meta.reference_sentences
                    .iter()
                    .flat_map(|s| analyzer.analyze(s)),
            );
            for stem in stems {
                *freqs.entry(stem).or_default() += 1;
            }
        }
        Self::from_frequencies(freqs)
    }

    pub fn from_frequencies(freqs: BTreeMap<String, u64>) -> Self {
        Vocabulary {
            terms: freqs.into_iter().filter(|&(_, n)| n >= 2).collect(),
        }
    }

    pub fn contains(&self, stem: &str) -> bool {
        self.terms.contains_key(stem)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    pub fn frequencies(&self) -> &BTreeMap<String, u64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub key: MapKey,
    pub values: FeatureValues,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
}

impl FeatureVector {
    pub fn get(&self, feature_id: &str) -> f64 {
        self.values.get(feature_id).copied().unwrap_or(0.0)
    }
}

pub fn location_bucket(count: usize) -> &'static str {
    match count {
        0 => "0",
        1..=2 => "1-2",
        3..=5 => "3-5",
        6..=9 => "6-9",
        10..=20 => "10-20",
        _ => "21+",
    }
}

fn set(values: &mut FeatureValues, id: String, value: f64) {
    if value != 0.0 {
        values.insert(id, value);
    }
}

pub fn figure_no_feature(meta: &FigureMetadata) -> FeatureValues {
    let mut v = FeatureValues::new();
    set(
        &mut v,
        FIGURE_NO_FEATURE.into(),
        f64::from(u8::from((1..=2).contains(&meta.figure_number))),
    );
    v
}

pub fn size_feature(meta: &FigureMetadata) -> FeatureValues {
    let mut v = FeatureValues::new();
    let large = meta.relative_size.is_some_and(|s| s > 1.0 / 3.0);
    set(&mut v, SIZE_FEATURE.into(), f64::from(u8::from(large)));
    v
}

/// Every feature identifier a vector can carry under `vocab`, sorted.
pub fn feature_space(vocab: &Vocabulary) -> Vec<String> {
    let mut ids: Vec<String> = vocab
        .terms()
        .flat_map(|t| {
            [
                format!("term:caption:{t}"),
                format!("term:reference:{t}"),
                format!("term:combined:{t}"),
                format!("begins_with:caption:{t}"),
            ]
        })
        .collect();
    for field in ["caption", "reference"] {
        ids.extend(
            LOCATION_BUCKETS
                .iter()
                .map(|b| format!("location:{field}:{b}")),
        );
    }
    ids.push(FIGURE_NO_FEATURE.into());
    ids.push(SIZE_FEATURE.into());
    ids.sort();
    ids
}

/// The text-dependent feature families, bound to one vocabulary, analyzer
/// and gazetteer.
#[derive(Debug, Clone, Copy)]
pub struct Featurizer<'a> {
    pub analyzer: &'a Analyzer,
    pub vocab: &'a Vocabulary,
    pub gazetteer: &'a Gazetteer,
}

impl<'a> Featurizer<'a> {
    pub fn new(analyzer: &'a Analyzer, vocab: &'a Vocabulary, gazetteer: &'a Gazetteer) -> Self {
        Featurizer {
            analyzer,
            vocab,
            gazetteer,
        }
    }

    fn preprocess(&self, text: &str) -> Vec<String> {
        preprocess(
            tokenize(text),
            self.analyzer.stoplist(),
            self.vocab.frequencies(),
        )
    }

    pub fn term_features(&self, meta: &FigureMetadata) -> FeatureValues {
        let mut caption: BTreeMap<String, u32> = BTreeMap::new();
        for t in self.preprocess(&meta.caption) {
            *caption.entry(t).or_default() += 1;
        }
        let mut reference: BTreeMap<String, u32> = BTreeMap::new();
        for t in meta
            .reference_sentences
            .iter()
            .flat_map(|s| self.preprocess(s))
        {
            *reference.entry(t).or_default() += 1;
        }

        let mut v = FeatureValues::new();
        for (t, &n) in &caption {
            set(&mut v, format!("term:caption:{t}"), f64::from(n));
        }
        for (t, &n) in &reference {
            set(&mut v, format!("term:reference:{t}"), f64::from(n));
        }
        let mut combined = caption;
        for (t, n) in reference {
            *combined.entry(t).or_default() += n;
        }
        for (t, n) in combined {
            set(&mut v, format!("term:combined:{t}"), f64::from(n));
        }
        v
    }

    pub fn begins_with_features(&self, meta: &FigureMetadata) -> FeatureValues {
        let mut v = FeatureValues::new();
        if let Some(first) = self.preprocess(&meta.caption).into_iter().next() {
            set(&mut v, format!("begins_with:caption:{first}"), 1.0);
        }
        v
    }

    pub fn location_counts(&self, meta: &FigureMetadata) -> (usize, usize) {
        let caption = self.gazetteer.count_matches(&meta.caption);
        let reference = meta
            .reference_sentences
            .iter()
            .map(|s| self.gazetteer.count_matches(s))
            .sum();
        (caption, reference)
    }

    pub fn location_name_features(&self, meta: &FigureMetadata) -> FeatureValues {
        let (caption, reference) = self.location_counts(meta);
        let mut v = FeatureValues::new();
        set(
            &mut v,
            format!("location:caption:{}", location_bucket(caption)),
            1.0,
        );
        set(
            &mut v,
            format!("location:reference:{}", location_bucket(reference)),
            1.0,
        );
        v
    }

    pub fn featurize(&self, meta: &FigureMetadata, label: Option<bool>) -> FeatureVector {
        let mut values = self.term_features(meta);
        values.extend(self.begins_with_features(meta));
        values.extend(figure_no_feature(meta));
        values.extend(self.location_name_features(meta));
        values.extend(size_feature(meta));
        FeatureVector {
            key: meta.key(),
            values,
            label,
        }
    }

    /// Unlabelled vectors for `metas`, in input order.
    pub fn featurize_all(&self, metas: &[FigureMetadata]) -> Vec<FeatureVector> {
        metas.iter().map(|m| self.featurize(m, None)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(figure_number: u32, caption: &str, refs: &[&str]) -> FigureMetadata {
        FigureMetadata {
            doc_id: "d".into(),
            figure_number,
            page_number: 1,
            caption: caption.into(),
            reference_sentences: refs.iter().map(|s| s.to_string()).collect(),
            relative_size: None,
            diagnostics: vec![],
        }
    }

    fn vocab(terms: &[&str]) -> Vocabulary {
        Vocabulary::from_frequencies(terms.iter().map(|t| (t.to_string(), 2)).collect())
    }

    fn with<R>(vocab: &Vocabulary, f: impl FnOnce(Featurizer<'_>) -> R) -> R {
        let analyzer = Analyzer::default();
        let gaz: Gazetteer = ["peru", "cusco valley"].into_iter().collect();
        f(Featurizer::new(&analyzer, vocab, &gaz))
    }

    #[test]
    fn term_counts_per_field() {
        let v = vocab(&["map"]);
        let values = with(&v, |f| {
            f.term_features(&meta(1, "map of maps", &["the map"]))
        });
        assert_eq!(values["term:caption:map"], 2.0);
        assert_eq!(values["term:reference:map"], 1.0);
        assert_eq!(values["term:combined:map"], 3.0);
        assert_eq!(values.len(), 3);

        let empty = with(&v, |f| f.term_features(&meta(1, "", &[])));
        assert!(empty.is_empty());
        let unseen = with(&v, |f| f.term_features(&meta(1, "pottery", &[])));
        assert!(unseen.is_empty());
    }

    #[test]
    fn begins_with_first_surviving_term() {
        let v = vocab(&["map", "region"]);
        let values = with(&v, |f| f.begins_with_features(&meta(1, "Map region", &[])));
        assert_eq!(values.get("begins_with:caption:map"), Some(&1.0));
        assert_eq!(values.get("begins_with:caption:region"), None);
        assert!(with(&v, |f| f.begins_with_features(&meta(1, "", &[]))).is_empty());
        let values = with(&v, |f| {
            f.begins_with_features(&meta(1, "The map of the region", &[]))
        });
        assert_eq!(
            values.keys().collect::<Vec<_>>(),
            ["begins_with:caption:map"]
        );
    }

    #[test]
    fn figure_number_range() {
        let get = |n| {
            figure_no_feature(&meta(n, "", &[]))
                .get(FIGURE_NO_FEATURE)
                .copied()
                .unwrap_or(0.0)
        };
        assert_eq!((get(1), get(2), get(3)), (1.0, 1.0, 0.0));
    }

    #[test]
    fn location_buckets() {
        let v = vocab(&[]);
        let values = with(&v, |f| {
            f.location_name_features(&meta(1, "Sites in Peru and the Cusco Valley.", &[]))
        });
        assert_eq!(values.get("location:caption:1-2"), Some(&1.0));
        assert_eq!(values.get("location:reference:0"), Some(&1.0));
        assert_eq!(values.len(), 2);
        assert_eq!(location_bucket(5), "3-5");
        assert_eq!(location_bucket(9), "6-9");
        assert_eq!(location_bucket(21), "21+");
    }

    #[test]
    fn size_threshold() {
        let get = |s: Option<f64>| {
            let mut m = meta(1, "", &[]);
            m.relative_size = s;
            size_feature(&m).get(SIZE_FEATURE).copied().unwrap_or(0.0)
        };
        assert_eq!(get(Some(0.5)), 1.0);
        assert_eq!(get(Some(1.0 / 3.0)), 0.0);
        assert_eq!(get(None), 0.0);
    }

    #[test]
    fn vocabulary_drops_singletons() {
        let metas = [
            meta(1, "Map of the valley", &["The map shows pottery."]),
            meta(2, "Valley sherds", &[]),
        ];
        let v = Vocabulary::build(&metas, &Analyzer::default());
        assert_eq!(v.terms().collect::<Vec<_>>(), ["map", "vallei"]);
    }

    #[test]
    fn featurize_all_is_deterministic_and_within_space() {
        let v = vocab(&["map", "site", "pottery"]);
        let metas: Vec<_> = (1..=10)
            .map(|i| {
                meta(
                    i,
                    "Figure. Map of sites in Peru",
                    &["See the map of sites."],
                )
            })
            .collect();
        let (a, b) = with(&v, |f| (f.featurize_all(&metas), f.featurize_all(&metas)));
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        let space = feature_space(&v);
        for fv in &a {
            assert!(fv.label.is_none());
            assert!(
                fv.values.keys().all(|k| space.binary_search(k).is_ok()),
                "{:?}",
                fv.values
            );
        }
    }
}
