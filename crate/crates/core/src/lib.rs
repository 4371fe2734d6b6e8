//! Keyword retrieval of XML elements filtered by namespace semantics.
//!
//! Documents are parsed into Dewey-labelled element trees whose namespaces
//! resolve to single-term semantic labels. A column-normalized term-element
//! matrix is reduced by SVD to a low-rank concept space in which each label
//! is correlated with the query keywords. Elements whose label is
//! irrelevant to every keyword are never scored; the rest are ranked by a
//! blend of that correlation and a tf-ief cosine text match, after removing
//! ancestor/descendant overlaps.
//!
//! ```
//! use nsfilter::{IndexBuilder, QueryConfig, nfa_query};
//!
//! let mut builder = IndexBuilder::default();
//! builder
//!     .add_document("d.xml", r#"<r xmlns:m="urn:music"><m:n>pitch octave</m:n><m:n>voice</m:n></r>"#)
//!     .unwrap();
//! let index = builder.build().unwrap();
//! let cfg = QueryConfig::default().with_filter(false);
//! let hits = nfa_query(&index, "pitch", &cfg).unwrap();
//! assert_eq!(hits[0].dewey.to_string(), "0.1");
//! ```

pub mod concept;
pub mod dewey;
pub mod engine;
pub mod error;
pub mod eval;
pub mod format;
pub mod index;
pub mod ingest;
pub mod matrix;
pub mod scoring;
pub mod svd;
pub mod tokenize;

pub use concept::{ConceptSpace, CorrelationProvider, CorrelationTable};
pub use dewey::DeweyId;
pub use engine::{execute, nfa_query, render_results, QueryConfig, QueryOutcome, RelevanceClass, ScoredElement};
pub use error::{Error, Result};
pub use index::{IndexArtifact, IndexBuilder};
pub use ingest::{parse_document, ElementNode, NamespaceMap};
pub use tokenize::Stopwords;
