//! Figure-level metadata: captions, reference sentences, relative size and
//! figure/page numbers.
//!
//! Captions are found by tagging each line of a page as `caption_begin`,
//! `caption_end` or `other` from its keyword prefix, its typography relative
//! to its neighbours and the document's regular font size. Reference points
//! are keyword + figure-number occurrences in lines set at the regular size,
//! which keeps caption lines (set smaller) out of the reference text.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::docmodel::{same_size, DocumentRecord, Page, TextLine, FONT_SIZE_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptionTag {
    CaptionBegin,
    CaptionEnd,
    /// A one-line caption: the line opens and closes the caption.
    CaptionBeginEnd,
    Other,
}

impl CaptionTag {
    pub fn is_begin(self) -> bool {
        matches!(self, CaptionTag::CaptionBegin | CaptionTag::CaptionBeginEnd)
    }

    pub fn is_end(self) -> bool {
        matches!(self, CaptionTag::CaptionEnd | CaptionTag::CaptionBeginEnd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineTag {
    pub page_number: u32,
    pub line_index: u32,
    pub tag: CaptionTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// A caption_begin for this figure was never closed on its page.
    UnmatchedCaptionBegin {
        page_number: u32,
        line_index: u32,
    },
    CaptionNotFound,
    NoReferences,
    /// No figure-free page exists to estimate a full page's line count.
    NoSizeBaseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureMetadata {
    pub doc_id: String,
    pub figure_number: u32,
    pub page_number: u32,
    pub caption: String,
    pub reference_sentences: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

/// Identifies a figure across the corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MapKey {
    pub doc_id: String,
    pub figure_number: u32,
}

impl std::fmt::Display for MapKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.doc_id, self.figure_number)
    }
}

impl FigureMetadata {
    pub fn key(&self) -> MapKey {
        MapKey {
            doc_id: self.doc_id.clone(),
            figure_number: self.figure_number,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaptionOutcome {
    Found(String),
    Unmatched { page_number: u32, line_index: u32 },
    Absent,
}

impl CaptionOutcome {
    pub fn text(&self) -> &str {
        match self {
            CaptionOutcome::Found(s) => s,
            _ => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ReferencePoint {
    pub page_number: u32,
    pub line_index: u32,
    /// Offset in characters (not bytes) of the keyword within the line.
    pub char_offset: usize,
}

const KEYWORD: &str = r"(?:Figure|FIGURE|Fig|FIG)[.:]?\s*(\d+)";

fn caption_prefix() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(&format!(r"^\s*{KEYWORD}")).unwrap())
}

fn reference_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(&format!(r"\b{KEYWORD}")).unwrap())
}

/// The figure number a line opens with, if it starts with a keyword form.
pub fn caption_number(text: &str) -> Option<u32> {
    caption_prefix()
        .captures(text)
        .and_then(|c| c[1].parse().ok())
}

fn is_smaller(line: &TextLine, regular_size: f64) -> bool {
    line.font_size < regular_size - FONT_SIZE_TOLERANCE
}

// Missing neighbours (page edges) count as differing.
fn presentation_differs(neighbour: Option<&TextLine>, line: &TextLine) -> bool {
    neighbour.is_none_or(|n| n.font != line.font && !same_size(n.font_size, line.font_size))
}

fn same_presentation(a: &TextLine, b: &TextLine) -> bool {
    a.paragraph_id == b.paragraph_id && a.font == b.font && same_size(a.font_size, b.font_size)
}

pub fn tag_caption_boundaries(page: &Page, regular_size: f64) -> Vec<LineTag> {
    let lines = &page.lines;
    let mut open: Option<usize> = None;
    let mut tags = Vec::with_capacity(lines.len());

    for (i, line) in lines.iter().enumerate() {
        let prev = i.checked_sub(1).map(|p| &lines[p]);
        let next = lines.get(i + 1);
        let smaller = is_smaller(line, regular_size);

        let begin =
            smaller && caption_number(&line.text).is_some() && presentation_differs(prev, line);
        if begin {
            open = Some(i);
        }

        let end = match open {
            Some(start) => {
                smaller
                    && line.text.trim_end().ends_with('.')
                    && presentation_differs(next, line)
                    && lines[start..=i].iter().all(|l| same_presentation(l, line))
            }
            None => false,
        };
        if end {
            open = None;
        }

        let tag = match (begin, end) {
            (true, true) => CaptionTag::CaptionBeginEnd,
            (true, false) => CaptionTag::CaptionBegin,
            (false, true) => CaptionTag::CaptionEnd,
            (false, false) => CaptionTag::Other,
        };
        tags.push(LineTag {
            page_number: page.page_number,
            line_index: line.line_index,
            tag,
        });
    }
    tags
}

pub fn extract_caption(page: &Page, figure_number: u32, regular_size: f64) -> CaptionOutcome {
    let tags = tag_caption_boundaries(page, regular_size);
    let mut open: Option<usize> = None;
    let mut unmatched = None;

    for (i, tag) in tags.iter().enumerate() {
        if tag.tag.is_begin() {
            if let Some(start) = open.take() {
                if caption_number(&page.lines[start].text) == Some(figure_number) {
                    unmatched.get_or_insert(start);
                }
            }
            open = Some(i);
        }
        if tag.tag.is_end() {
            if let Some(start) = open.take() {
                if caption_number(&page.lines[start].text) == Some(figure_number) {
                    return CaptionOutcome::Found(join_lines(&page.lines[start..=i]));
                }
            }
        }
    }
    if let Some(start) = open {
        if caption_number(&page.lines[start].text) == Some(figure_number) {
            unmatched.get_or_insert(start);
        }
    }

    match unmatched {
        Some(start) => {
            log::debug!(
                "page {}: caption for figure {} opened at line {} never closed",
                page.page_number,
                figure_number,
                page.lines[start].line_index
            );
            CaptionOutcome::Unmatched {
                page_number: page.page_number,
                line_index: page.lines[start].line_index,
            }
        }
        None => CaptionOutcome::Absent,
    }
}

fn join_lines(lines: &[TextLine]) -> String {
    lines
        .iter()
        .flat_map(|l| l.text.split_whitespace())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn find_reference_points(doc: &DocumentRecord, figure_number: u32) -> Vec<ReferencePoint> {
    let mut hits = Vec::new();
    for page in &doc.pages {
        for line in &page.lines {
            if !same_size(line.font_size, doc.regular_font_size) {
                continue;
            }
            for cap in reference_pattern().captures_iter(&line.text) {
                if cap[1].parse::<u32>().ok() != Some(figure_number) {
                    continue;
                }
                let byte = cap.get(0).unwrap().start();
                hits.push(ReferencePoint {
                    page_number: page.page_number,
                    line_index: line.line_index,
                    char_offset: line.text[..byte].chars().count(),
                });
            }
        }
    }
    hits
}

/// Consecutive regular-size lines of one page sharing a paragraph id, joined
/// with single spaces. `starts[i]` is the byte offset of line `first_line + i`.
struct ParagraphText {
    text: String,
    first_line: usize,
    starts: Vec<usize>,
}

fn paragraph_of(page: &Page, line_pos: usize, regular_size: f64) -> ParagraphText {
    let para = page.lines[line_pos].paragraph_id;
    let member = |l: &TextLine| l.paragraph_id == para && same_size(l.font_size, regular_size);
    let mut first = line_pos;
    while first > 0 && member(&page.lines[first - 1]) {
        first -= 1;
    }
    let mut text = String::new();
    let mut starts = Vec::new();
    for line in page.lines[first..].iter().take_while(|l| member(l)) {
        if !text.is_empty() {
            text.push(' ');
        }
        starts.push(text.len());
        text.push_str(&line.text);
    }
    ParagraphText {
        text,
        first_line: first,
        starts,
    }
}

const GUARDED_ABBREVIATIONS: [&str; 6] = ["Fig.", "FIG.", "e.g.", "i.e.", "cf.", "al."];

fn guards_period(text: &str, period: usize) -> bool {
    let before = &text[..=period];
    let word_start = before
        .rfind(char::is_whitespace)
        .map_or(0, |p| p + before[p..].chars().next().unwrap().len_utf8());
    let word = before[word_start..].trim_start_matches(|c: char| !c.is_alphanumeric());
    if word == "al." {
        let prev = before[..word_start].split_whitespace().next_back();
        return prev.is_some_and(|w| w.trim_start_matches(|c: char| !c.is_alphanumeric()) == "et");
    }
    if GUARDED_ABBREVIATIONS.contains(&word) {
        return true;
    }
    // initials such as "J."
    let mut chars = word.chars();
    matches!(
        (chars.next(), chars.next(), chars.next()),
        (Some(c), Some('.'), None) if c.is_uppercase()
    )
}

/// Byte ranges of the sentences in `text`. A sentence ends at `.`, `!` or
/// `?` followed by whitespace or the end of the text, unless the period
/// closes a guarded abbreviation or an initial.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let at_break = iter.peek().is_none_or(|&(_, n)| n.is_whitespace());
        if !at_break || (c == '.' && guards_period(text, i)) {
            continue;
        }
        spans.push((start, i + 1));
        start = i + 1;
    }
    if text[start..].trim().is_empty() {
        if let Some(last) = spans.last_mut() {
            last.1 = text.len().max(last.1);
        }
    } else {
        spans.push((start, text.len()));
    }
    spans
}

pub fn extract_reference_sentences(doc: &DocumentRecord, figure_number: u32) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for point in find_reference_points(doc, figure_number) {
        let Some(page) = doc
            .pages
            .iter()
            .find(|p| p.page_number == point.page_number)
        else {
            continue;
        };
        let pos = point.line_index as usize;
        let para = paragraph_of(page, pos, doc.regular_font_size);
        let line_text = &page.lines[pos].text;
        let byte_in_line = line_text
            .char_indices()
            .nth(point.char_offset)
            .map_or(line_text.len(), |(b, _)| b);
        let offset = para.starts[pos - para.first_line] + byte_in_line;

        let spans = sentence_spans(&para.text);
        let Some(&(s, e)) = spans.iter().find(|&&(s, e)| s <= offset && offset < e) else {
            continue;
        };
        let sentence = para.text[s..e]
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        if !out.contains(&sentence) {
            out.push(sentence);
        }
    }
    out
}

/// Line count of the fullest figure-free page of `doc`.
pub fn figure_free_line_count(doc: &DocumentRecord) -> Option<usize> {
    doc.pages
        .iter()
        .filter(|p| p.figures.is_empty())
        .map(|p| p.lines.len())
        .max()
}

/// Median line count over every figure-free page of the corpus; the
/// fallback baseline for documents without a figure-free page.
pub fn corpus_figure_free_median(docs: &[DocumentRecord]) -> Option<f64> {
    let mut counts: Vec<usize> = docs
        .iter()
        .flat_map(|d| d.pages.iter())
        .filter(|p| p.figures.is_empty())
        .map(|p| p.lines.len())
        .collect();
    if counts.is_empty() {
        return None;
    }
    counts.sort_unstable();
    let mid = counts.len() / 2;
    Some(if counts.len() % 2 == 1 {
        counts[mid] as f64
    } else {
        (counts[mid - 1] + counts[mid]) as f64 / 2.0
    })
}

/// Average fraction of the page occupied by each figure on `page`, inferred
/// from how many text lines the figures displace:
/// `(1 - lines_on_page / full_page_lines) / figures_on_page`, clamped to
/// `[0, 1]`.
pub fn compute_relative_size(
    doc: &DocumentRecord,
    page: &Page,
    fallback_baseline: Option<f64>,
) -> Option<f64> {
    if page.figures.is_empty() {
        return None;
    }
    let baseline = figure_free_line_count(doc)
        .map(|n| n as f64)
        .or(fallback_baseline)?;
    if baseline <= 0.0 {
        return None;
    }
    Some(size_formula(
        page.lines.len() as f64,
        baseline,
        page.figures.len() as f64,
    ))
}

pub(crate) fn size_formula(lines_on_page: f64, full_page_lines: f64, figures: f64) -> f64 {
    ((1.0 - lines_on_page / full_page_lines) / figures).clamp(0.0, 1.0)
}

pub fn extract_all(doc: &DocumentRecord, fallback_baseline: Option<f64>) -> Vec<FigureMetadata> {
    let mut out = Vec::new();
    for page in &doc.pages {
        let page_size = compute_relative_size(doc, page, fallback_baseline);
        for fig in &page.figures {
            let mut diagnostics = Vec::new();
            let caption = match extract_caption(page, fig.figure_number, doc.regular_font_size) {
                CaptionOutcome::Found(text) => text,
                CaptionOutcome::Unmatched {
                    page_number,
                    line_index,
                } => {
                    diagnostics.push(Diagnostic::UnmatchedCaptionBegin {
                        page_number,
                        line_index,
                    });
                    String::new()
                }
                CaptionOutcome::Absent => {
                    diagnostics.push(Diagnostic::CaptionNotFound);
                    String::new()
                }
            };
            let reference_sentences = extract_reference_sentences(doc, fig.figure_number);
            if reference_sentences.is_empty() {
                diagnostics.push(Diagnostic::NoReferences);
            }
            let relative_size = fig.declared_fraction_of_page.or(page_size);
            if relative_size.is_none() {
                diagnostics.push(Diagnostic::NoSizeBaseline);
            }
            out.push(FigureMetadata {
                doc_id: doc.doc_id.clone(),
                figure_number: fig.figure_number,
                page_number: page.page_number,
                caption,
                reference_sentences,
                relative_size,
                diagnostics,
            });
        }
    }
    out.sort_by_key(|m| (m.page_number, m.figure_number));
    out
}

/// Runs [`extract_all`] over a corpus, using the corpus-wide figure-free
/// median as the size fallback.
pub fn extract_corpus(docs: &[DocumentRecord]) -> Vec<FigureMetadata> {
    let fallback = corpus_figure_free_median(docs);
    docs.iter().flat_map(|d| extract_all(d, fallback)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::test_support::{doc, line};
    use crate::docmodel::FigureRegion;

    const BODY: &str = "Times";
    const CAP: &str = "Helvetica";

    fn page(lines: Vec<TextLine>) -> Page {
        Page {
            page_number: 1,
            lines,
            figures: vec![],
        }
    }

    fn tags(p: &Page) -> Vec<CaptionTag> {
        tag_caption_boundaries(p, 10.0)
            .into_iter()
            .map(|t| t.tag)
            .collect()
    }

    #[test]
    fn single_line_caption_is_begin_and_end() {
        let p = page(vec![
            line(0, "Body text before.", BODY, 10.0, 0),
            line(1, "Figure 3. Site map.", CAP, 8.0, 1),
            line(2, "Body text after.", BODY, 10.0, 2),
        ]);
        assert_eq!(
            tags(&p),
            [
                CaptionTag::Other,
                CaptionTag::CaptionBeginEnd,
                CaptionTag::Other
            ]
        );
        assert_eq!(extract_caption(&p, 3, 10.0).text(), "Figure 3. Site map.");
    }

    #[test]
    fn regular_size_reference_is_not_a_caption() {
        let p = page(vec![line(
            0,
            "As shown in Figure 3, the sites cluster.",
            BODY,
            10.0,
            0,
        )]);
        assert_eq!(tags(&p), [CaptionTag::Other]);
        let p = page(vec![line(0, "Figure 3 shows the sites.", BODY, 10.0, 0)]);
        assert_eq!(tags(&p), [CaptionTag::Other]);
    }

    #[test]
    fn page_without_keywords_is_all_other() {
        let p = page(vec![
            line(0, "Plain text.", BODY, 10.0, 0),
            line(1, "Small print.", CAP, 8.0, 1),
        ]);
        assert!(tags(&p).iter().all(|&t| t == CaptionTag::Other));
    }

    #[test]
    fn two_line_caption() {
        let p = page(vec![
            line(0, "Body.", BODY, 10.0, 0),
            line(1, "Figure 2. Map of the", CAP, 8.0, 1),
            line(2, "study region.", CAP, 8.0, 1),
            line(3, "More body.", BODY, 10.0, 2),
        ]);
        assert_eq!(
            tags(&p),
            [
                CaptionTag::Other,
                CaptionTag::CaptionBegin,
                CaptionTag::CaptionEnd,
                CaptionTag::Other
            ]
        );
        assert_eq!(
            extract_caption(&p, 2, 10.0),
            CaptionOutcome::Found("Figure 2. Map of the study region.".into())
        );
        assert_eq!(extract_caption(&p, 5, 10.0), CaptionOutcome::Absent);
    }

    #[test]
    fn paragraph_change_leaves_caption_unmatched() {
        let p = page(vec![
            line(0, "Body.", BODY, 10.0, 0),
            line(1, "Figure 2. Map of the", CAP, 8.0, 1),
            line(2, "study region.", CAP, 8.0, 2),
            line(3, "More body.", BODY, 10.0, 3),
        ]);
        assert_eq!(tags(&p)[2], CaptionTag::Other);
        assert_eq!(
            extract_caption(&p, 2, 10.0),
            CaptionOutcome::Unmatched {
                page_number: 1,
                line_index: 1
            }
        );
    }

    #[test]
    fn end_without_begin_is_other() {
        let p = page(vec![
            line(0, "Body.", BODY, 10.0, 0),
            line(1, "a footnote.", CAP, 8.0, 1),
            line(2, "Body.", BODY, 10.0, 2),
        ]);
        assert_eq!(tags(&p)[1], CaptionTag::Other);
    }

    #[test]
    fn first_line_of_page_has_differing_neighbour() {
        let p = page(vec![line(0, "FIG. 7: Pottery.", CAP, 8.0, 0)]);
        assert_eq!(tags(&p), [CaptionTag::CaptionBeginEnd]);
        assert_eq!(caption_number("Fig.3 text"), Some(3));
        assert_eq!(caption_number("FIGURE 12: text"), Some(12));
        assert_eq!(caption_number("Figures 3 and 4"), None);
    }

    fn reference_doc() -> DocumentRecord {
        let lines = vec![
            line(
                0,
                "The valley was surveyed earlier work. The sites appear in",
                BODY,
                10.0,
                0,
            ),
            line(
                1,
                "Figure 2 and span two valleys. Later work (see Fig 4) across",
                BODY,
                10.0,
                0,
            ),
            line(
                2,
                "the basin, and Fig. 2 again. Figure 41 is unrelated.",
                BODY,
                10.0,
                0,
            ),
            line(3, "Figure 4. Caption text.", CAP, 8.0, 1),
        ];
        doc(
            "d",
            10.0,
            vec![Page {
                page_number: 1,
                lines,
                figures: vec![],
            }],
        )
    }

    #[test]
    fn reference_points_require_regular_size_and_exact_number() {
        let d = reference_doc();
        let hits = find_reference_points(&d, 4);
        assert_eq!(
            hits,
            vec![ReferencePoint {
                page_number: 1,
                line_index: 1,
                char_offset: 47
            }]
        );
        assert_eq!(find_reference_points(&d, 41).len(), 1);
        assert!(find_reference_points(&d, 9).is_empty());
    }

    #[test]
    fn reference_sentences_cross_lines_and_respect_fig_abbreviation() {
        let d = reference_doc();
        assert_eq!(
            extract_reference_sentences(&d, 2),
            vec![
                "The sites appear in Figure 2 and span two valleys.".to_string(),
                "Later work (see Fig 4) across the basin, and Fig. 2 again.".to_string(),
            ]
        );
        assert!(extract_reference_sentences(&d, 9).is_empty());
    }

    #[test]
    fn sentence_guards() {
        let text = "Smith et al. found it, e.g. here. J. Doe agreed! Next?";
        let sentences: Vec<&str> = sentence_spans(text)
            .into_iter()
            .map(|(s, e)| text[s..e].trim())
            .collect();
        assert_eq!(
            sentences,
            [
                "Smith et al. found it, e.g. here.",
                "J. Doe agreed!",
                "Next?"
            ]
        );
    }

    #[test]
    fn duplicate_sentences_are_removed() {
        let d = doc(
            "d",
            10.0,
            vec![Page {
                page_number: 1,
                lines: vec![line(
                    0,
                    "Compare Figure 1 with Fig. 1 here. Done.",
                    BODY,
                    10.0,
                    0,
                )],
                figures: vec![],
            }],
        );
        assert_eq!(
            extract_reference_sentences(&d, 1),
            vec!["Compare Figure 1 with Fig. 1 here.".to_string()]
        );
    }

    #[test]
    fn size_formula_cases() {
        assert!((size_formula(20.0, 50.0, 2.0) - 0.3).abs() < 1e-12);
        assert_eq!(size_formula(50.0, 50.0, 1.0), 0.0);
        assert_eq!(size_formula(0.0, 50.0, 2.0), 0.5);
        assert_eq!(size_formula(60.0, 50.0, 1.0), 0.0);
    }

    fn fig(n: u32, page: u32) -> FigureRegion {
        FigureRegion {
            figure_number: n,
            page_number: page,
            declared_fraction_of_page: None,
        }
    }

    fn filler(page_number: u32, n: usize, figures: Vec<FigureRegion>) -> Page {
        Page {
            page_number,
            lines: (0..n)
                .map(|i| line(i as u32, "Body text.", BODY, 10.0, i as u32))
                .collect(),
            figures,
        }
    }

    #[test]
    fn relative_size_uses_fullest_figure_free_page() {
        let d = doc(
            "d",
            10.0,
            vec![
                filler(1, 50, vec![]),
                filler(2, 30, vec![]),
                filler(3, 20, vec![fig(1, 3), fig(2, 3)]),
            ],
        );
        let size = compute_relative_size(&d, &d.pages[2], None).unwrap();
        assert!((size - 0.3).abs() < 1e-12);
        assert_eq!(compute_relative_size(&d, &d.pages[0], None), None);
    }

    #[test]
    fn relative_size_fallback_and_absence() {
        let d = doc("d", 10.0, vec![filler(1, 10, vec![fig(1, 1)])]);
        assert_eq!(compute_relative_size(&d, &d.pages[0], None), None);
        let size = compute_relative_size(&d, &d.pages[0], Some(40.0)).unwrap();
        assert!((size - 0.75).abs() < 1e-12);
    }

    #[test]
    fn extract_all_orders_and_shares_sizes() {
        let mut p3 = filler(3, 20, vec![fig(3, 3), fig(2, 3)]);
        p3.lines[0] = line(0, "Figure 2. A map.", CAP, 8.0, 100);
        let mut p2 = filler(2, 49, vec![fig(1, 2)]);
        p2.lines[0].text = "See Figure 1 for details.".into();
        let mut d = doc("d", 10.0, vec![filler(1, 50, vec![]), p2, p3]);
        d.pages[2].figures[0].declared_fraction_of_page = None;

        let metas = extract_all(&d, None);
        let keys: Vec<_> = metas
            .iter()
            .map(|m| (m.page_number, m.figure_number))
            .collect();
        assert_eq!(keys, [(2, 1), (3, 2), (3, 3)]);
        assert_eq!(metas[1].caption, "Figure 2. A map.");
        assert_eq!(metas[1].relative_size, metas[2].relative_size);
        assert!(metas[1].reference_sentences.is_empty());
        assert!(metas[1].diagnostics.contains(&Diagnostic::NoReferences));
        assert_eq!(metas[0].reference_sentences, ["See Figure 1 for details."]);
        assert!(metas[0].diagnostics.contains(&Diagnostic::CaptionNotFound));
    }

    #[test]
    fn declared_fraction_overrides_formula() {
        let mut p = filler(2, 10, vec![fig(1, 2)]);
        p.figures[0].declared_fraction_of_page = Some(0.9);
        let d = doc("d", 10.0, vec![filler(1, 50, vec![]), p]);
        assert_eq!(extract_all(&d, None)[0].relative_size, Some(0.9));
    }
}
