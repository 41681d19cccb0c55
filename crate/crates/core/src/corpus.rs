//! Sentiment-annotated documents and the collection that holds them.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Lowest admissible sentiment score.
pub const SCORE_MIN: f64 = 1.0;
/// Highest admissible sentiment score.
pub const SCORE_MAX: f64 = 5.0;
/// Maximum number of distinct display categories before overflow into [`OTHER_CATEGORY`].
pub const MAX_DISPLAY_CATEGORIES: usize = 24;
/// Reserved display label for unmapped or overflowing categories.
pub const OTHER_CATEGORY: &str = "other";

/// One searchable article with its bivariate sentiment annotation.
///
/// Positivity and negativity are scored independently in `[1, 5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub positivity: f64,
    pub negativity: f64,
    pub category: String,
}

/// A syntactically parsed record that has not been checked yet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDocument {
    pub doc_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub positivity: f64,
    pub negativity: f64,
    pub category: String,
}

impl From<Document> for RawDocument {
    fn from(doc: Document) -> Self {
        RawDocument {
            doc_id: doc.doc_id,
            title: doc.title,
            abstract_text: doc.abstract_text,
            positivity: doc.positivity,
            negativity: doc.negativity,
            category: doc.category,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attribute {
    Positivity,
    Negativity,
}

impl Attribute {
    pub fn name(self) -> &'static str {
        match self {
            Attribute::Positivity => "positivity",
            Attribute::Negativity => "negativity",
        }
    }
}

/// A single broken field invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DocIdEmpty,
    TitleEmpty,
    NotFinite(Attribute),
    BelowRange(Attribute),
    AboveRange(Attribute),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DocIdEmpty => f.write_str("doc_id empty"),
            Violation::TitleEmpty => f.write_str("title empty"),
            Violation::NotFinite(a) => write!(f, "{} not a finite number", a.name()),
            Violation::BelowRange(a) => write!(f, "{} below 1.0", a.name()),
            Violation::AboveRange(a) => write!(f, "{} above 5.0", a.name()),
        }
    }
}

fn check_score(value: f64, attr: Attribute, out: &mut Vec<Violation>) {
    if !value.is_finite() {
        out.push(Violation::NotFinite(attr));
    } else if value < SCORE_MIN {
        out.push(Violation::BelowRange(attr));
    } else if value > SCORE_MAX {
        out.push(Violation::AboveRange(attr));
    }
}

/// Checks every field invariant of `raw`, reporting all violations at once.
pub fn validate_document(raw: RawDocument) -> Result<Document, Vec<Violation>> {
    let mut violations = Vec::new();
    if raw.doc_id.is_empty() {
        violations.push(Violation::DocIdEmpty);
    }
    if raw.title.is_empty() {
        violations.push(Violation::TitleEmpty);
    }
    check_score(raw.positivity, Attribute::Positivity, &mut violations);
    check_score(raw.negativity, Attribute::Negativity, &mut violations);
    if !violations.is_empty() {
        return Err(violations);
    }
    Ok(Document {
        doc_id: raw.doc_id,
        title: raw.title,
        abstract_text: raw.abstract_text,
        positivity: raw.positivity,
        negativity: raw.negativity,
        category: raw.category,
    })
}

/// Raw ontology label to display category, bounded to a fixed palette.
///
/// Display labels are admitted in insertion order; once
/// [`MAX_DISPLAY_CATEGORIES`] distinct labels exist, any raw label pointing
/// at a further display label maps to [`OTHER_CATEGORY`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryMap {
    entries: BTreeMap<String, String>,
    palette: Vec<String>,
}

impl CategoryMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut map = CategoryMap::new();
        for (raw, display) in pairs {
            map.insert(raw.into(), display.into());
        }
        map
    }

    /// Identity mapping over the labels in `documents`, in order of first appearance.
    pub fn identity_for(documents: &[Document]) -> Self {
        let mut map = CategoryMap::new();
        for doc in documents {
            if !doc.category.is_empty() && !map.entries.contains_key(&doc.category) {
                map.insert(doc.category.clone(), doc.category.clone());
            }
        }
        map
    }

    pub fn insert(&mut self, raw: String, display: String) {
        if raw.is_empty() {
            return;
        }
        let display = if display == OTHER_CATEGORY || self.palette.contains(&display) {
            display
        } else if self.palette.len() < MAX_DISPLAY_CATEGORIES {
            self.palette.push(display.clone());
            display
        } else {
            OTHER_CATEGORY.to_string()
        };
        self.entries.insert(raw, display);
    }

    /// Display label for `raw_label`; unknown and empty labels become `"other"`.
    pub fn map_category(&self, raw_label: &str) -> &str {
        self.entries
            .get(raw_label)
            .map(String::as_str)
            .unwrap_or(OTHER_CATEGORY)
    }

    /// Distinct display labels in admission order (excluding `"other"`).
    pub fn palette(&self) -> &[String] {
        &self.palette
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusError {
    Empty,
    DuplicateId(String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Empty => f.write_str("corpus contains no valid documents"),
            CorpusError::DuplicateId(id) => write!(f, "duplicate doc_id {id:?}"),
        }
    }
}

impl core::error::Error for CorpusError {}

/// Immutable, validated document collection.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    category_map: CategoryMap,
    by_id: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, category_map: CategoryMap) -> Result<Self, CorpusError> {
        if documents.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut by_id = BTreeMap::new();
        for (ordinal, doc) in documents.iter().enumerate() {
            if by_id.insert(doc.doc_id.clone(), ordinal).is_some() {
                return Err(CorpusError::DuplicateId(doc.doc_id.clone()));
            }
        }
        Ok(Corpus {
            documents,
            category_map,
            by_id,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, ordinal: usize) -> Option<&Document> {
        self.documents.get(ordinal)
    }

    pub fn ordinal_of(&self, doc_id: &str) -> Option<usize> {
        self.by_id.get(doc_id).copied()
    }

    pub fn category_map(&self) -> &CategoryMap {
        &self.category_map
    }

    pub fn display_category(&self, ordinal: usize) -> &str {
        self.category_map.map_category(&self.documents[ordinal].category)
    }
}
