use figseek::featurize::{
    location_bucket, Analyzer, Featurizer, Gazetteer, Vocabulary, LOCATION_BUCKETS,
};
use figseek::metadata::FigureMetadata;
use proptest::prelude::*;

const WORDS: [&str; 12] = [
    "map", "maps", "survey", "peru", "site", "sites", "pottery", "valley", "the", "of", "egypt",
    "andes",
];

fn arb_text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS.to_vec()), 0..10).prop_map(|w| w.join(" "))
}

fn arb_meta() -> impl Strategy<Value = FigureMetadata> {
    (
        arb_text(),
        prop::collection::vec(arb_text(), 0..5),
        1u32..5,
        prop::option::of(0.0f64..=1.0),
    )
        .prop_map(|(caption, refs, n, size)| FigureMetadata {
            doc_id: "d".into(),
            figure_number: n,
            page_number: 1,
            caption,
            reference_sentences: refs,
            relative_size: size,
            diagnostics: vec![],
        })
}

fn vocabulary(analyzer: &Analyzer) -> Vocabulary {
    let all: Vec<FigureMetadata> = WORDS
        .iter()
        .map(|w| FigureMetadata {
            doc_id: "v".into(),
            figure_number: 1,
            page_number: 1,
            caption: format!("{w} {w}"),
            reference_sentences: vec![],
            relative_size: None,
            diagnostics: vec![],
        })
        .collect();
    Vocabulary::build(&all, analyzer)
}

#[test]
fn every_count_falls_in_exactly_one_bucket() {
    let ranges: [(usize, usize); 6] = [(0, 0), (1, 2), (3, 5), (6, 9), (10, 20), (21, usize::MAX)];
    for count in 0..=1000usize {
        let hits: Vec<&str> = LOCATION_BUCKETS
            .iter()
            .zip(ranges)
            .filter(|(_, (lo, hi))| (*lo..=*hi).contains(&count))
            .map(|(b, _)| *b)
            .collect();
        assert_eq!(hits, [location_bucket(count)], "count {count}");
    }
}

proptest! {
    #[test]
    fn one_location_bucket_per_field(meta in arb_meta()) {
        let (analyzer, gazetteer) = (Analyzer::default(), Gazetteer::bundled());
        let vocab = vocabulary(&analyzer);
        let v = Featurizer::new(&analyzer, &vocab, &gazetteer).location_name_features(&meta);
        for field in ["caption", "reference"] {
            let prefix = format!("location:{field}:");
            prop_assert_eq!(v.keys().filter(|k| k.starts_with(&prefix)).count(), 1);
        }
    }

    #[test]
    fn combined_counts_are_caption_plus_reference(meta in arb_meta()) {
        let (analyzer, gazetteer) = (Analyzer::default(), Gazetteer::bundled());
        let vocab = vocabulary(&analyzer);
        let v = Featurizer::new(&analyzer, &vocab, &gazetteer).term_features(&meta);
        let get = |id: String| v.get(&id).copied().unwrap_or(0.0);
        for term in vocab.terms() {
            prop_assert_eq!(
                get(format!("term:combined:{term}")),
                get(format!("term:caption:{term}")) + get(format!("term:reference:{term}"))
            );
        }
    }

    #[test]
    fn reference_order_does_not_matter(meta in arb_meta(), seed in any::<u64>()) {
        let (analyzer, gazetteer) = (Analyzer::default(), Gazetteer::bundled());
        let vocab = vocabulary(&analyzer);
        let f = Featurizer::new(&analyzer, &vocab, &gazetteer);
        let mut shuffled = meta.clone();
        let n = shuffled.reference_sentences.len();
        if n > 1 {
            shuffled.reference_sentences.rotate_left((seed as usize) % n);
            shuffled.reference_sentences.swap(0, n - 1);
        }
        prop_assert_eq!(f.featurize(&meta, None), f.featurize(&shuffled, None));
    }
}
