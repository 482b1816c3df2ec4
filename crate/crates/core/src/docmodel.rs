//! Document interchange format.
//!
//! A corpus file holds one JSON document per line. Each record carries the
//! per-line typographic evidence (text, font, size, paragraph grouping) and
//! the figure regions the extraction rules work from, plus document-level
//! metadata that arrives pre-populated.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two font sizes closer than this are considered the same size.
pub const FONT_SIZE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate doc_id `{doc_id}`")]
    DuplicateId { line: usize, doc_id: String },
    #[error("line {line}: invalid {item} in document `{doc_id}`: {message}")]
    Invalid {
        line: usize,
        doc_id: String,
        item: &'static str,
        message: String,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum DocError {
    #[error("document has no text lines")]
    EmptyDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextLine {
    pub text: String,
    pub font: String,
    pub font_size: f64,
    pub paragraph_id: u32,
    pub line_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureRegion {
    pub figure_number: u32,
    pub page_number: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_fraction_of_page: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Page {
    pub page_number: u32,
    pub lines: Vec<TextLine>,
    pub figures: Vec<FigureRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocLevelMetadata {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub authors: Vec<String>,
    pub publication_date: NaiveDate,
    pub citation_count: u64,
    pub venue: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub regular_font_size: f64,
    pub metadata: DocLevelMetadata,
    pub pages: Vec<Page>,
}

impl DocumentRecord {
    pub fn lines(&self) -> impl Iterator<Item = &TextLine> {
        self.pages.iter().flat_map(|p| p.lines.iter())
    }

    pub fn figures(&self) -> impl Iterator<Item = &FigureRegion> {
        self.pages.iter().flat_map(|p| p.figures.iter())
    }
}

pub fn same_size(a: f64, b: f64) -> bool {
    (a - b).abs() <= FONT_SIZE_TOLERANCE
}

/// The modal font size over every line of the document. Ties go to the
/// larger size.
pub fn compute_regular_font_size(doc: &DocumentRecord) -> Result<f64, DocError> {
    let mut sizes: Vec<f64> = doc.lines().map(|l| l.font_size).collect();
    if sizes.is_empty() {
        return Err(DocError::EmptyDocument);
    }
    sizes.sort_by(f64::total_cmp);

    let mut best = (sizes[0], 0usize);
    let mut run_start = 0;
    for i in 1..=sizes.len() {
        if i == sizes.len() || sizes[i] != sizes[run_start] {
            let count = i - run_start;
            // ascending order, so `>=` lets the larger size win ties
            if count >= best.1 {
                best = (sizes[run_start], count);
            }
            run_start = i;
        }
    }
    Ok(best.0)
}

/// Loads a corpus, validating records against `today` as ingestion date.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<DocumentRecord>, LoadError> {
    load_corpus_as_of(path, chrono::Local::now().date_naive())
}

pub fn load_corpus_as_of(
    path: impl AsRef<Path>,
    ingestion_date: NaiveDate,
) -> Result<Vec<DocumentRecord>, LoadError> {
    let reader = BufReader::new(File::open(path)?);
    read_corpus(reader, ingestion_date)
}

pub fn read_corpus<R: BufRead>(
    reader: R,
    ingestion_date: NaiveDate,
) -> Result<Vec<DocumentRecord>, LoadError> {
    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut doc: DocumentRecord =
            serde_json::from_str(&line).map_err(|e| LoadError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        validate(&mut doc, ingestion_date).map_err(|(item, message)| LoadError::Invalid {
            line: line_no,
            doc_id: doc.doc_id.clone(),
            item,
            message,
        })?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(LoadError::DuplicateId {
                line: line_no,
                doc_id: doc.doc_id,
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus<W: Write>(docs: &[DocumentRecord], mut out: W) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn validate(
    doc: &mut DocumentRecord,
    ingestion_date: NaiveDate,
) -> Result<(), (&'static str, String)> {
    if doc.doc_id.is_empty() {
        return Err(("DocumentRecord", "doc_id is empty".into()));
    }
    if !(doc.regular_font_size.is_finite() && doc.regular_font_size > 0.0) {
        return Err((
            "DocumentRecord",
            format!(
                "regular_font_size {} is not positive",
                doc.regular_font_size
            ),
        ));
    }
    if doc.metadata.publication_date > ingestion_date {
        return Err((
            "DocLevelMetadata",
            format!(
                "publication_date {} is after ingestion date {}",
                doc.metadata.publication_date, ingestion_date
            ),
        ));
    }

    for page in &mut doc.pages {
        if page.page_number == 0 {
            return Err(("Page", "page_number must be >= 1".into()));
        }
        page.lines.sort_by_key(|l| l.line_index);
        for (i, line) in page.lines.iter().enumerate() {
            if !(line.font_size.is_finite() && line.font_size > 0.0) {
                return Err((
                    "TextLine",
                    format!(
                        "page {} line {}: font_size {} is not positive",
                        page.page_number, line.line_index, line.font_size
                    ),
                ));
            }
            if line.line_index as usize != i {
                return Err((
                    "TextLine",
                    format!(
                        "page {}: line_index values are not contiguous from 0 (found {} at position {})",
                        page.page_number, line.line_index, i
                    ),
                ));
            }
            if i > 0 && line.paragraph_id < page.lines[i - 1].paragraph_id {
                return Err((
                    "TextLine",
                    format!(
                        "page {} line {}: paragraph_id decreases",
                        page.page_number, line.line_index
                    ),
                ));
            }
        }
        for fig in &page.figures {
            if fig.figure_number == 0 {
                return Err(("FigureRegion", "figure_number must be >= 1".into()));
            }
            if fig.page_number != page.page_number {
                return Err((
                    "FigureRegion",
                    format!(
                        "figure {} declares page {} but sits on page {}",
                        fig.figure_number, fig.page_number, page.page_number
                    ),
                ));
            }
            if let Some(frac) = fig.declared_fraction_of_page {
                if !(0.0..=1.0).contains(&frac) {
                    return Err((
                        "FigureRegion",
                        format!(
                            "figure {}: declared_fraction_of_page {} outside [0,1]",
                            fig.figure_number, frac
                        ),
                    ));
                }
            }
        }
    }

    if let Ok(modal) = compute_regular_font_size(doc) {
        if !same_size(modal, doc.regular_font_size) {
            log::warn!(
                "document `{}`: declared regular_font_size {} differs from modal size {}; using {}",
                doc.doc_id,
                doc.regular_font_size,
                modal,
                modal
            );
            doc.regular_font_size = modal;
        }
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use proptest::prelude::*;

    fn today() -> NaiveDate {
        NaiveDate::from_ymd_opt(2026, 1, 1).unwrap()
    }

    fn jsonl(docs: &[DocumentRecord]) -> String {
        let mut buf = Vec::new();
        write_corpus(docs, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn modal_size() {
        let mut sizes = vec![10.0; 100];
        sizes.extend([8.0; 5]);
        let d = doc("a", 10.0, vec![sized_page(1, &sizes)]);
        assert_eq!(compute_regular_font_size(&d).unwrap(), 10.0);
    }

    #[test]
    fn modal_size_tie_prefers_larger() {
        let mut sizes = vec![10.0; 50];
        sizes.extend([12.0; 50]);
        let d = doc("a", 10.0, vec![sized_page(1, &sizes)]);
        assert_eq!(compute_regular_font_size(&d).unwrap(), 12.0);
    }

    #[test]
    fn modal_size_singleton_and_empty() {
        let d = doc("a", 9.5, vec![sized_page(1, &[9.5])]);
        assert_eq!(compute_regular_font_size(&d).unwrap(), 9.5);
        let empty = doc("b", 9.5, vec![sized_page(1, &[])]);
        assert_eq!(
            compute_regular_font_size(&empty),
            Err(DocError::EmptyDocument)
        );
    }

    #[test]
    fn loads_two_records() {
        let docs = vec![
            doc("a", 10.0, vec![sized_page(1, &[10.0, 10.0])]),
            doc("b", 10.0, vec![sized_page(1, &[10.0])]),
        ];
        let loaded = read_corpus(jsonl(&docs).as_bytes(), today()).unwrap();
        assert_eq!(loaded, docs);
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let docs = vec![
            doc("same", 10.0, vec![sized_page(1, &[10.0])]),
            doc("same", 10.0, vec![sized_page(1, &[10.0])]),
        ];
        let err = read_corpus(jsonl(&docs).as_bytes(), today()).unwrap_err();
        match err {
            LoadError::DuplicateId { line, doc_id } => {
                assert_eq!(line, 2);
                assert_eq!(doc_id, "same");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn zero_font_size_names_text_line() {
        let docs = vec![doc("a", 10.0, vec![sized_page(1, &[10.0, 0.0])])];
        let err = read_corpus(jsonl(&docs).as_bytes(), today()).unwrap_err();
        assert!(
            matches!(
                err,
                LoadError::Invalid {
                    item: "TextLine",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn unknown_field_is_malformed() {
        let mut value = serde_json::to_value(doc("a", 10.0, vec![])).unwrap();
        value["extra"] = serde_json::json!(1);
        let text = format!("\n{value}\n");
        let err = read_corpus(text.as_bytes(), today()).unwrap_err();
        match err {
            LoadError::Malformed { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("extra"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn figure_on_wrong_page_is_invalid() {
        let mut page = sized_page(2, &[10.0]);
        page.figures.push(FigureRegion {
            figure_number: 1,
            page_number: 3,
            declared_fraction_of_page: None,
        });
        let err =
            read_corpus(jsonl(&[doc("a", 10.0, vec![page])]).as_bytes(), today()).unwrap_err();
        assert!(matches!(
            err,
            LoadError::Invalid {
                item: "FigureRegion",
                ..
            }
        ));
    }

    #[test]
    fn future_publication_date_is_invalid() {
        let mut d = doc("a", 10.0, vec![]);
        d.metadata.publication_date = NaiveDate::from_ymd_opt(2030, 1, 1).unwrap();
        let err = read_corpus(jsonl(&[d]).as_bytes(), today()).unwrap_err();
        assert!(matches!(
            err,
            LoadError::Invalid {
                item: "DocLevelMetadata",
                ..
            }
        ));
    }

    #[test]
    fn non_contiguous_line_index_is_invalid() {
        let mut page = sized_page(1, &[10.0, 10.0]);
        page.lines[1].line_index = 5;
        let err =
            read_corpus(jsonl(&[doc("a", 10.0, vec![page])]).as_bytes(), today()).unwrap_err();
        assert!(matches!(
            err,
            LoadError::Invalid {
                item: "TextLine",
                ..
            }
        ));
    }

    #[test]
    fn declared_regular_size_is_recomputed() {
        let d = doc("a", 12.0, vec![sized_page(1, &[10.0, 10.0, 8.0])]);
        let loaded = read_corpus(jsonl(&[d]).as_bytes(), today()).unwrap();
        assert_eq!(loaded[0].regular_font_size, 10.0);
    }

    #[test]
    fn optional_fraction_round_trips_absent() {
        let mut page = sized_page(1, &[10.0]);
        page.figures.push(FigureRegion {
            figure_number: 1,
            page_number: 1,
            declared_fraction_of_page: None,
        });
        let text = jsonl(&[doc("a", 10.0, vec![page])]);
        assert!(!text.contains("declared_fraction_of_page"));
    }

    fn arb_doc() -> impl Strategy<Value = DocumentRecord> {
        let sizes = prop::collection::vec(prop::sample::select(vec![8.0, 9.5, 10.0, 12.0]), 1..20);
        (
            "[a-z]{1,8}",
            sizes,
            prop::collection::vec(1u32..5, 0..3),
            0u64..500,
        )
            .prop_map(|(id, sizes, figs, cites)| {
                let mut page = sized_page(1, &sizes);
                for (i, _) in figs.iter().enumerate() {
                    page.figures.push(FigureRegion {
                        figure_number: i as u32 + 1,
                        page_number: 1,
                        declared_fraction_of_page: if i % 2 == 0 { Some(0.25) } else { None },
                    });
                }
                let mut d = doc(&id, 10.0, vec![page]);
                d.regular_font_size = compute_regular_font_size(&d).unwrap();
                d.metadata.citation_count = cites;
                d
            })
    }

    proptest! {
        #[test]
        fn corpus_round_trip(d in arb_doc()) {
            let text = jsonl(std::slice::from_ref(&d));
            let loaded = read_corpus(text.as_bytes(), today()).unwrap();
            prop_assert_eq!(jsonl(&loaded), text);
        }

        #[test]
        fn regular_size_is_present_in_document(d in arb_doc()) {
            let size = compute_regular_font_size(&d).unwrap();
            prop_assert!(d.lines().any(|l| l.font_size == size));
        }
    }
}
