//! Map search over scholarly documents.
//!
//! The crate covers the path from typographically annotated document text
//! to ranked map search results:
//!
//! 1. [`docmodel`] loads the document interchange format.
//! 2. [`metadata`] extracts each figure's caption, reference sentences,
//!    relative size and figure/page numbers.
//! 3. [`featurize`] turns figure metadata into sparse feature vectors.
//! 4. [`selector`] ranks features by expected entropy loss.
//! 5. [`classifier`] trains a linear SVM separating maps from other figures.
//! 6. [`search`] indexes maps by field and ranks them for a query.
//!
//! [`pipeline`] strings the stages together.
//!
//! ```
//! use figseek::featurize::{tokenize, Analyzer};
//!
//! assert_eq!(tokenize("Map of Site-42, Peru."), ["map", "of", "site", "peru"]);
//! assert_eq!(Analyzer::default().analyze("Mapping the valleys"), ["map", "vallei"]);
//! ```

pub mod classifier;
pub mod docmodel;
pub mod featurize;
pub mod metadata;
pub mod pipeline;
pub mod search;
pub mod selector;

// mdbook can't build snippets against this crate, so the chapters are
// compiled here as doc comments and run by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/document-format.md")]
    mod document_format {}
    #[doc = include_str!("../../../book/src/captions-and-references.md")]
    mod captions_and_references {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/entropy-loss.md")]
    mod entropy_loss {}
    #[doc = include_str!("../../../book/src/svm.md")]
    mod svm {}
    #[doc = include_str!("../../../book/src/ranking.md")]
    mod ranking {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
