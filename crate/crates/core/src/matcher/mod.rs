//! Repeated-suffix search over fuzzified histories.
//!
//! For a query (the most recent symbols) the matcher looks, degree by degree,
//! for every place in the training text where the last `d` query symbols occur
//! and tallies the symbol that came next. Degree 1 matches only the last query
//! symbol, degree 2 the last two, and so on until a degree has no occurrence
//! with a successor or the configured maximum degree is reached. Overlapping
//! occurrences all count; an occurrence ending on the final training symbol has
//! no successor and is ignored.
//!
//! Two implementations share this contract: [`match_degrees_naive`], a direct
//! scan used as the reference, and [`SuffixIndex`], a suffix array over the
//! reversed training text that answers each degree with two binary searches
//! plus a rank lookup.

mod index;
mod naive;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub use index::SuffixIndex;
pub use naive::match_degrees_naive;

/// Default cap on matched suffix length; roughly one trading month.
pub const DEFAULT_MAX_DEGREE: usize = 20;

/// Training text over the alphabet `1..=alphabet_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSequence {
    symbols: Vec<u16>,
    alphabet_size: usize,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<u16>, alphabet_size: usize) -> Result<Self> {
        if alphabet_size == 0 || alphabet_size > u16::MAX as usize {
            return Err(Error::arg(format!(
                "alphabet size {alphabet_size} out of range"
            )));
        }
        if let Some(&s) = symbols
            .iter()
            .find(|&&s| s == 0 || s as usize > alphabet_size)
        {
            return Err(Error::arg(format!(
                "symbol {s} outside 1..={alphabet_size}"
            )));
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    pub fn symbols(&self) -> &[u16] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Recent symbols (most recent last) and the deepest degree to try.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySuffix {
    symbols: Vec<u16>,
    max_degree: usize,
}

impl QuerySuffix {
    pub fn new(symbols: Vec<u16>, max_degree: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::arg("query suffix is empty"));
        }
        if max_degree == 0 || max_degree > symbols.len() {
            return Err(Error::arg(format!(
                "max degree {max_degree} must be within 1..={}",
                symbols.len()
            )));
        }
        Ok(Self {
            symbols,
            max_degree,
        })
    }

    /// The last `min(max_degree, len)` symbols of `history`.
    pub fn tail_of(history: &[u16], max_degree: usize) -> Result<Self> {
        if max_degree == 0 {
            return Err(Error::arg("max degree must be at least 1"));
        }
        let take = max_degree.min(history.len());
        Self::new(history[history.len() - take..].to_vec(), take)
    }

    pub fn symbols(&self) -> &[u16] {
        &self.symbols
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The last `degree` symbols.
    pub fn pattern(&self, degree: usize) -> &[u16] {
        &self.symbols[self.symbols.len() - degree..]
    }
}

/// Successor tallies for one matched degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeStats {
    pub degree: usize,
    /// Successor symbol → number of occurrences it followed. Zero counts are omitted.
    pub successor_counts: BTreeMap<u16, usize>,
    pub total: usize,
}

impl DegreeStats {
    /// Builds stats from raw counts, dropping zeros and summing the total.
    pub fn from_counts(degree: usize, counts: impl IntoIterator<Item = (u16, usize)>) -> Self {
        let mut successor_counts = BTreeMap::new();
        for (sym, n) in counts {
            if n > 0 {
                *successor_counts.entry(sym).or_insert(0) += n;
            }
        }
        let total = successor_counts.values().sum();
        Self {
            degree,
            successor_counts,
            total,
        }
    }

    pub fn count(&self, symbol: u16) -> usize {
        self.successor_counts.get(&symbol).copied().unwrap_or(0)
    }
}

/// Stats for degrees `1..=D`; empty when even the last symbol never recurs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MatchResult {
    pub stats: Vec<DegreeStats>,
}

impl MatchResult {
    /// Deepest matched degree `D` (0 when nothing matched).
    pub fn max_degree(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }
}

/// Strategy for answering degree queries against a training text.
pub trait DegreeMatcher: Sync {
    fn match_degrees(&self, training: &SymbolSequence, query: &QuerySuffix) -> Result<MatchResult>;
}

/// Direct scan; the reference implementation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NaiveMatcher;

impl DegreeMatcher for NaiveMatcher {
    fn match_degrees(&self, training: &SymbolSequence, query: &QuerySuffix) -> Result<MatchResult> {
        match_degrees_naive(training, query)
    }
}

/// Builds a [`SuffixIndex`] per call. Use the index directly to amortise over many queries.
#[derive(Clone, Copy, Debug, Default)]
pub struct IndexedMatcher;

impl DegreeMatcher for IndexedMatcher {
    fn match_degrees(&self, training: &SymbolSequence, query: &QuerySuffix) -> Result<MatchResult> {
        Ok(SuffixIndex::build(training)?.match_degrees(query))
    }
}

/// Indexed search; see [`SuffixIndex::match_degrees`].
pub fn match_degrees(training: &SymbolSequence, query: &QuerySuffix) -> Result<MatchResult> {
    IndexedMatcher.match_degrees(training, query)
}
