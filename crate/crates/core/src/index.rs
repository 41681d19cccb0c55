//! Tokenization, inverted index construction and BM25 ranking.
//!
//! Scoring follows the usual Okapi form
//!
//! ```text
//! score(D, Q) = Σ idf(t) · f(t,D)·(k1 + 1) / (f(t,D) + k1·(1 − b + b·|D|/avgdl))
//! idf(t)      = ln(1 + (N − n_t + 0.5) / (n_t + 0.5))
//! ```
//!
//! summed over the distinct query terms, in order of first occurrence.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

/// Result cap for a single query.
pub const MAX_RESULTS: usize = 200;

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.chars().flat_map(char::to_lowercase).collect())
        .collect()
}

/// Tokens of `text` with duplicates removed, first occurrence wins.
pub fn distinct_terms(text: &str) -> Vec<String> {
    let mut terms: Vec<String> = Vec::new();
    for t in tokenize(text) {
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    terms
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self, SearchError> {
        let params = Bm25Params { k1, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(SearchError::InvalidParams("k1 must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(SearchError::InvalidParams("b must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchError {
    EmptyQuery,
    InvalidLimit,
    InvalidParams(&'static str),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::EmptyQuery => f.write_str("empty query"),
            SearchError::InvalidLimit => f.write_str("limit must be at least 1"),
            SearchError::InvalidParams(msg) => write!(f, "invalid BM25 parameters: {msg}"),
        }
    }
}

impl core::error::Error for SearchError {}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexError {
    EmptyCorpus,
    TooManyDocuments,
}

impl fmt::Display for IndexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexError::EmptyCorpus => f.write_str("cannot index an empty corpus"),
            IndexError::TooManyDocuments => f.write_str("corpus exceeds u32 document ordinals"),
        }
    }
}

impl core::error::Error for IndexError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    doc_ids: Vec<String>,
    avg_doc_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHit {
    pub doc_id: String,
    pub ordinal: usize,
    pub bm25_score: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResults {
    /// Documents containing at least one query term, before the limit applies.
    pub total_matches: usize,
    pub hits: Vec<RankedHit>,
}

/// Indexes title and abstract of every document in `corpus`.
pub fn build_index(corpus: &Corpus) -> Result<InvertedIndex, IndexError> {
    InvertedIndex::from_texts(corpus.documents().iter().map(|d| {
        let mut text = String::with_capacity(d.title.len() + 1 + d.abstract_text.len());
        text.push_str(&d.title);
        text.push(' ');
        text.push_str(&d.abstract_text);
        (d.doc_id.clone(), text)
    }))
}

impl InvertedIndex {
    /// Builds from `(doc_id, text)` pairs; ordinals follow iteration order.
    pub fn from_texts<I>(docs: I) -> Result<Self, IndexError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::new();
        let mut doc_ids = Vec::new();
        for (ordinal, (doc_id, text)) in docs.into_iter().enumerate() {
            let doc = u32::try_from(ordinal).map_err(|_| IndexError::TooManyDocuments)?;
            let tokens = tokenize(&text);
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for t in &tokens {
                *counts.entry(t.clone()).or_insert(0) += 1;
            }
            // ordinals arrive ascending, so every postings list stays sorted
            for (term, tf) in counts {
                postings.entry(term).or_default().push(Posting { doc, tf });
            }
            doc_lengths.push(tokens.len() as u32);
            doc_ids.push(doc_id);
        }
        if doc_ids.is_empty() {
            return Err(IndexError::EmptyCorpus);
        }
        let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
        let avg_doc_length = total as f64 / doc_lengths.len() as f64;
        Ok(InvertedIndex {
            postings,
            doc_lengths,
            doc_ids,
            avg_doc_length,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_lengths.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_length(&self, doc: usize) -> usize {
        self.doc_lengths[doc] as usize
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    pub fn doc_id(&self, doc: usize) -> &str {
        &self.doc_ids[doc]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn doc_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn term_frequency(&self, term: &str, doc: usize) -> u32 {
        let list = self.postings(term);
        match list.binary_search_by_key(&(doc as u64), |p| u64::from(p.doc)) {
            Ok(i) => list[i].tf,
            Err(_) => 0,
        }
    }

    pub fn idf(&self, term: &str) -> f64 {
        idf(self.doc_count(), self.doc_frequency(term))
    }

    fn term_weight(&self, idf: f64, tf: u32, doc: usize, params: Bm25Params) -> f64 {
        let length_ratio = if self.avg_doc_length > 0.0 {
            f64::from(self.doc_lengths[doc]) / self.avg_doc_length
        } else {
            1.0
        };
        bm25_term(idf, f64::from(tf), length_ratio, params)
    }

    /// BM25 score of one document; query terms are deduplicated first.
    pub fn score_bm25<S: AsRef<str>>(&self, query_terms: &[S], doc: usize, params: Bm25Params) -> f64 {
        let mut seen: Vec<&str> = Vec::with_capacity(query_terms.len());
        let mut score = 0.0;
        for term in query_terms.iter().map(AsRef::as_ref) {
            if seen.contains(&term) {
                continue;
            }
            seen.push(term);
            let tf = self.term_frequency(term, doc);
            if tf > 0 {
                score += self.term_weight(self.idf(term), tf, doc, params);
            }
        }
        score
    }

    /// Ranks every document containing a query term and keeps the best `limit`.
    pub fn search(&self, query: &str, limit: usize, params: Bm25Params) -> Result<SearchResults, SearchError> {
        params.validate()?;
        if limit == 0 {
            return Err(SearchError::InvalidLimit);
        }
        let terms = distinct_terms(query);
        if terms.is_empty() {
            return Err(SearchError::EmptyQuery);
        }

        let mut scores: BTreeMap<u32, f64> = BTreeMap::new();
        for term in &terms {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let term_idf = idf(self.doc_count(), list.len());
            for p in list {
                let w = self.term_weight(term_idf, p.tf, p.doc as usize, params);
                *scores.entry(p.doc).or_insert(0.0) += w;
            }
        }

        let mut ranked: Vec<(usize, f64)> = scores.into_iter().map(|(doc, score)| (doc as usize, score)).collect();
        let total_matches = ranked.len();
        let order = |a: &(usize, f64), b: &(usize, f64)| -> Ordering {
            b.1.total_cmp(&a.1)
                .then_with(|| self.doc_ids[a.0].cmp(&self.doc_ids[b.0]))
        };
        if ranked.len() > limit {
            ranked.select_nth_unstable_by(limit - 1, order);
            ranked.truncate(limit);
        }
        ranked.sort_unstable_by(order);

        let hits = ranked
            .into_iter()
            .enumerate()
            .map(|(i, (doc, score))| RankedHit {
                doc_id: self.doc_ids[doc].clone(),
                ordinal: doc,
                bm25_score: score,
                rank: i + 1,
            })
            .collect();
        Ok(SearchResults { total_matches, hits })
    }
}

/// Non-negative BM25 inverse document frequency.
pub fn idf(doc_count: usize, doc_frequency: usize) -> f64 {
    let n = doc_count as f64;
    let df = doc_frequency as f64;
    libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
}

/// Contribution of a single term with frequency `tf` in a document whose
/// length is `length_ratio` times the corpus average.
pub fn bm25_term(idf: f64, tf: f64, length_ratio: f64, params: Bm25Params) -> f64 {
    let norm = params.k1 * (1.0 - params.b + params.b * length_ratio);
    idf * tf * (params.k1 + 1.0) / (tf + norm)
}
