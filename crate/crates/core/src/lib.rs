//! Allocation-only core of the sentiscope exploratory search engine.
//!
//! Everything here is pure computation over in-memory data: document
//! validation, a BM25 inverted index, the rectangular sentiment facet,
//! session sequencing and metrics, and the nonparametric statistics behind
//! the engagement reports. File formats, the HTTP service and the CLI live in
//! the `sentiscope` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytics;
pub mod corpus;
pub mod facets;
pub mod index;
pub mod session;
pub mod stats;

pub use corpus::{CategoryMap, Corpus, CorpusError, Document, RawDocument, Violation};
pub use facets::{DistributionSummary, PartitionedResults, SentimentRect};
pub use index::{Bm25Params, InvertedIndex, RankedHit, SearchError};
pub use session::{EventKind, SessionEvent, SessionLog, SessionMetrics, Treatment};
