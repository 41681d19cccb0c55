//! Ranked, faceted search over a loaded corpus.

use std::collections::HashSet;

use sentiscope_core::corpus::Corpus;
use sentiscope_core::facets::{
    distribution_summary, partition_by_rect, DistributionSummary, FacetedHit, SentimentRect,
};
use sentiscope_core::index::{build_index, Bm25Params, IndexError, InvertedIndex, SearchError, MAX_RESULTS};
use serde::Serialize;

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitView {
    pub doc_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub positivity: f64,
    pub negativity: f64,
    pub display_category: String,
    pub bm25_score: f64,
    pub in_focus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResponse {
    pub total_matches: usize,
    pub hits: Vec<HitView>,
    pub active_rect: SentimentRect,
    /// Over every returned hit, focused or not; `null` when nothing matched.
    pub distributions: Option<DistributionSummary>,
}

/// Immutable search state: corpus, its index and ranking settings.
#[derive(Debug)]
pub struct Engine {
    corpus: Corpus,
    index: InvertedIndex,
    params: Bm25Params,
    bins: usize,
}

impl Engine {
    pub fn new(corpus: Corpus, index: InvertedIndex, params: Bm25Params, bins: usize) -> Self {
        Engine {
            corpus,
            index,
            params,
            bins: bins.max(1),
        }
    }

    pub fn build(corpus: Corpus, params: Bm25Params, bins: usize) -> Result<Self, IndexError> {
        let index = build_index(&corpus)?;
        Ok(Self::new(corpus, index, params, bins))
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Ranks `query`, caps at 200 and flags each hit against `rect`.
    pub fn search(
        &self,
        query: &str,
        rect: SentimentRect,
        limit: Option<usize>,
    ) -> Result<SearchResponse, SearchError> {
        let limit = limit.unwrap_or(MAX_RESULTS).min(MAX_RESULTS);
        let results = self.index.search(query, limit, self.params)?;
        let faceted: Vec<FacetedHit> = results
            .hits
            .into_iter()
            .map(|hit| {
                let doc = &self.corpus.documents()[hit.ordinal];
                FacetedHit {
                    positivity: doc.positivity,
                    negativity: doc.negativity,
                    display_category: self.corpus.display_category(hit.ordinal).to_string(),
                    hit,
                }
            })
            .collect();
        let distributions = distribution_summary(&faceted, self.bins).ok();
        let partition = partition_by_rect(faceted.iter().collect(), &rect);
        let focused: HashSet<usize> = partition.in_focus.iter().map(|h| h.hit.ordinal).collect();
        let hits = faceted
            .iter()
            .map(|f| {
                let doc = &self.corpus.documents()[f.hit.ordinal];
                HitView {
                    doc_id: doc.doc_id.clone(),
                    title: doc.title.clone(),
                    abstract_text: doc.abstract_text.clone(),
                    positivity: f.positivity,
                    negativity: f.negativity,
                    display_category: f.display_category.clone(),
                    bm25_score: f.hit.bm25_score,
                    in_focus: focused.contains(&f.hit.ordinal),
                }
            })
            .collect();
        Ok(SearchResponse {
            total_matches: results.total_matches,
            hits,
            active_rect: rect,
            distributions,
        })
    }

    /// Whole-corpus distributions, used for widget axes.
    pub fn corpus_stats(&self) -> DistributionSummary {
        distribution_summary(self.corpus.documents(), self.bins).expect("corpus is never empty")
    }
}
