use std::path::PathBuf;

use chrono::NaiveDate;
use figseek::docmodel::load_corpus_as_of;
use figseek::metadata::{extract_corpus, Diagnostic};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

#[test]
fn fixture_metadata_matches_hand_trace() {
    let docs = load_corpus_as_of(
        fixture("corpus.jsonl"),
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
    )
    .unwrap();
    assert_eq!(docs.len(), 4);
    let metas = extract_corpus(&docs);
    assert_eq!(metas.len(), 9);

    // (doc, figure, lines on page, fullest figure-free page, figures on page, references)
    let expected = [
        ("andes-survey", 1, 14.0, 40.0, 1.0, 1),
        ("andes-survey", 2, 30.0, 40.0, 1.0, 1),
        ("andes-survey", 3, 16.0, 40.0, 1.0, 1),
        ("levant-regional", 1, 8.0, 40.0, 2.0, 1),
        ("levant-regional", 2, 8.0, 40.0, 2.0, 1),
        ("nile-delta", 1, 10.0, 38.0, 1.0, 1),
        ("nile-delta", 2, 28.0, 38.0, 1.0, 1),
        ("pottery-study", 1, 25.0, 42.0, 1.0, 1),
        ("pottery-study", 2, 31.0, 42.0, 1.0, 0),
    ];
    let mut metas = metas;
    metas.sort_by_key(|m| m.key());
    for (meta, (doc, fig, lines, full, figs, refs)) in metas.iter().zip(expected) {
        assert_eq!((meta.doc_id.as_str(), meta.figure_number), (doc, fig));
        let size = meta.relative_size.unwrap();
        assert!(
            (size - (1.0 - lines / full) / figs).abs() < 1e-12,
            "{}",
            meta.key()
        );
        assert_eq!(meta.reference_sentences.len(), refs, "{}", meta.key());
        assert!(!meta.caption.is_empty());
    }

    let andes1 = &metas[0];
    assert_eq!(
        andes1.caption,
        "Figure 1. Map of settlement sites in the Cusco Valley, Peru, showing survey zones along the Andes."
    );
    assert_eq!(
        andes1.reference_sentences,
        ["The map in Figure 1 shows the location of each settlement in the Cusco Valley and the surrounding highlands of Peru."]
    );
    let andes3 = &metas[2];
    assert_eq!(
        andes3.reference_sentences,
        ["A second survey block lay farther south, where the distribution of sites near Lake Titicaca (Fig. 3) extends into Bolivia."]
    );
    assert_eq!(metas[8].diagnostics, [Diagnostic::NoReferences]);
}
