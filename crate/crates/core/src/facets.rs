//! The sentiment facet.
//!
//! Every filter widget reduces to one closed rectangle in
//! (positivity, negativity) space: the scatter brush sets both axes, a
//! parallel-coordinates brush replaces one axis, and the baseline buttons
//! select tercile ranges. Results outside the rectangle are kept, only
//! flagged out of focus.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Attribute, Document, SCORE_MAX, SCORE_MIN};
use crate::index::RankedHit;

/// Per-mark alpha; density shows through additive overlap.
pub const DEFAULT_MARK_ALPHA: f64 = 0.25;

/// Upper edge of the "low" tercile and lower edge of "mid".
pub const TERCILE_LOW_MAX: f64 = 7.0 / 3.0;
/// Upper edge of the "mid" tercile and lower edge of "high".
pub const TERCILE_MID_MAX: f64 = 11.0 / 3.0;

#[derive(Debug, Clone, PartialEq)]
pub enum FacetError {
    InvalidRect(&'static str),
    InvertedRange { lo: f64, hi: f64 },
    EmptyInput,
    InvalidBinCount,
    InvalidOverlap,
    InvalidAlpha,
}

impl fmt::Display for FacetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FacetError::InvalidRect(msg) => write!(f, "invalid sentiment rectangle: {msg}"),
            FacetError::InvertedRange { lo, hi } => write!(f, "brush range inverted: {lo} > {hi}"),
            FacetError::EmptyInput => f.write_str("distribution summary needs at least one item"),
            FacetError::InvalidBinCount => f.write_str("bin count must be at least 1"),
            FacetError::InvalidOverlap => f.write_str("overlap count must be at least 1"),
            FacetError::InvalidAlpha => f.write_str("base alpha must lie in (0, 1]"),
        }
    }
}

impl core::error::Error for FacetError {}

/// Closed axis-aligned rectangle over `[1,5]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentRect {
    pub pos_min: f64,
    pub pos_max: f64,
    pub neg_min: f64,
    pub neg_max: f64,
}

impl Default for SentimentRect {
    fn default() -> Self {
        Self::FULL
    }
}

fn in_score_range(v: f64) -> bool {
    (SCORE_MIN..=SCORE_MAX).contains(&v)
}

impl SentimentRect {
    /// The whole score space, i.e. no filter.
    pub const FULL: SentimentRect = SentimentRect {
        pos_min: SCORE_MIN,
        pos_max: SCORE_MAX,
        neg_min: SCORE_MIN,
        neg_max: SCORE_MAX,
    };

    pub fn new(pos_min: f64, pos_max: f64, neg_min: f64, neg_max: f64) -> Result<Self, FacetError> {
        let rect = SentimentRect {
            pos_min,
            pos_max,
            neg_min,
            neg_max,
        };
        rect.validate()?;
        Ok(rect)
    }

    pub fn validate(&self) -> Result<(), FacetError> {
        let bounds = [self.pos_min, self.pos_max, self.neg_min, self.neg_max];
        if !bounds.iter().all(|&v| in_score_range(v)) {
            return Err(FacetError::InvalidRect("bounds must lie in [1, 5]"));
        }
        if self.pos_min > self.pos_max {
            return Err(FacetError::InvalidRect("pos_min exceeds pos_max"));
        }
        if self.neg_min > self.neg_max {
            return Err(FacetError::InvalidRect("neg_min exceeds neg_max"));
        }
        Ok(())
    }

    pub fn is_full(&self) -> bool {
        *self == Self::FULL
    }

    /// Closed-interval membership on both axes.
    pub fn contains(&self, positivity: f64, negativity: f64) -> bool {
        self.pos_min <= positivity
            && positivity <= self.pos_max
            && self.neg_min <= negativity
            && negativity <= self.neg_max
    }

    pub fn range(&self, axis: Attribute) -> (f64, f64) {
        match axis {
            Attribute::Positivity => (self.pos_min, self.pos_max),
            Attribute::Negativity => (self.neg_min, self.neg_max),
        }
    }
}

/// Anything placed in sentiment space.
pub trait Sentiment {
    fn positivity(&self) -> f64;
    fn negativity(&self) -> f64;
}

impl Sentiment for Document {
    fn positivity(&self) -> f64 {
        self.positivity
    }
    fn negativity(&self) -> f64 {
        self.negativity
    }
}

impl Sentiment for (f64, f64) {
    fn positivity(&self) -> f64 {
        self.0
    }
    fn negativity(&self) -> f64 {
        self.1
    }
}

impl<T: Sentiment + ?Sized> Sentiment for &T {
    fn positivity(&self) -> f64 {
        (**self).positivity()
    }
    fn negativity(&self) -> f64 {
        (**self).negativity()
    }
}

/// A ranked hit carrying the sentiment and display category of its document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetedHit {
    pub hit: RankedHit,
    pub positivity: f64,
    pub negativity: f64,
    pub display_category: String,
}

impl Sentiment for FacetedHit {
    fn positivity(&self) -> f64 {
        self.positivity
    }
    fn negativity(&self) -> f64 {
        self.negativity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedResults<T> {
    pub in_focus: Vec<T>,
    pub out_of_focus: Vec<T>,
}

/// Stable split of `items` by closed-interval membership in `rect`.
pub fn partition_by_rect<T: Sentiment>(items: Vec<T>, rect: &SentimentRect) -> PartitionedResults<T> {
    let (in_focus, out_of_focus) = items
        .into_iter()
        .partition(|item| rect.contains(item.positivity(), item.negativity()));
    PartitionedResults { in_focus, out_of_focus }
}

/// Replaces the bounds of one axis, leaving the other as it was.
pub fn axis_brush_to_rect(
    axis: Attribute,
    lo: f64,
    hi: f64,
    current: &SentimentRect,
) -> Result<SentimentRect, FacetError> {
    if lo > hi {
        return Err(FacetError::InvertedRange { lo, hi });
    }
    let mut rect = *current;
    match axis {
        Attribute::Positivity => {
            rect.pos_min = lo;
            rect.pos_max = hi;
        }
        Attribute::Negativity => {
            rect.neg_min = lo;
            rect.neg_max = hi;
        }
    }
    rect.validate()?;
    Ok(rect)
}

/// Baseline button levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Low,
    Mid,
    High,
    Any,
}

impl Bucket {
    pub fn range(self) -> (f64, f64) {
        match self {
            Bucket::Low => (SCORE_MIN, TERCILE_LOW_MAX),
            Bucket::Mid => (TERCILE_LOW_MAX, TERCILE_MID_MAX),
            Bucket::High => (TERCILE_MID_MAX, SCORE_MAX),
            Bucket::Any => (SCORE_MIN, SCORE_MAX),
        }
    }
}

pub fn bucket_rect(positivity: Bucket, negativity: Bucket) -> SentimentRect {
    let (pos_min, pos_max) = positivity.range();
    let (neg_min, neg_max) = negativity.range();
    SentimentRect {
        pos_min,
        pos_max,
        neg_min,
        neg_max,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSummary {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub positivity: AttributeSummary,
    pub negativity: AttributeSummary,
}

/// `bin_count + 1` equal-width edges from 1.0 to exactly 5.0.
pub fn bin_edges(bin_count: usize) -> Vec<f64> {
    let width = (SCORE_MAX - SCORE_MIN) / bin_count as f64;
    let mut edges: Vec<f64> = (0..=bin_count).map(|i| SCORE_MIN + width * i as f64).collect();
    edges[bin_count] = SCORE_MAX;
    edges
}

fn summarize<I: Iterator<Item = f64>>(values: I, edges: &[f64]) -> AttributeSummary {
    let bins = edges.len() - 1;
    let interior = &edges[1..bins];
    let mut counts = alloc::vec![0u64; bins];
    let mut count = 0u64;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for v in values {
        // right-open bins; anything at or past the last interior edge falls in the last bin
        let bin = interior.partition_point(|&e| e <= v);
        counts[bin] += 1;
        count += 1;
        let delta = v - mean;
        mean += delta / count as f64;
        m2 += delta * (v - mean);
    }
    let variance = if count > 0 { m2 / count as f64 } else { 0.0 };
    AttributeSummary {
        bin_edges: edges.to_vec(),
        counts,
        mean,
        stddev: libm::sqrt(variance.max(0.0)),
        count,
    }
}

/// Histograms plus mean and population standard deviation for both attributes.
pub fn distribution_summary<T: Sentiment>(items: &[T], bin_count: usize) -> Result<DistributionSummary, FacetError> {
    if bin_count == 0 {
        return Err(FacetError::InvalidBinCount);
    }
    if items.is_empty() {
        return Err(FacetError::EmptyInput);
    }
    let edges = bin_edges(bin_count);
    Ok(DistributionSummary {
        positivity: summarize(items.iter().map(Sentiment::positivity), &edges),
        negativity: summarize(items.iter().map(Sentiment::negativity), &edges),
    })
}

/// Effective darkness where `overlap_count` marks of alpha `base_alpha` stack.
pub fn opacity_for_density(overlap_count: u32, base_alpha: f64) -> Result<f64, FacetError> {
    if overlap_count == 0 {
        return Err(FacetError::InvalidOverlap);
    }
    if !(base_alpha > 0.0 && base_alpha <= 1.0) {
        return Err(FacetError::InvalidAlpha);
    }
    Ok(1.0 - libm::pow(1.0 - base_alpha, f64::from(overlap_count)))
}
