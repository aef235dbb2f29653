use super::{DegreeStats, MatchResult, QuerySuffix, SymbolSequence};
use crate::error::{Error, Result};

/// Scans every end position for every degree. `O(len * degree)` per degree.
pub fn match_degrees_naive(training: &SymbolSequence, query: &QuerySuffix) -> Result<MatchResult> {
    if training.is_empty() {
        return Err(Error::arg("training sequence is empty"));
    }
    let text = training.symbols();
    let mut stats = Vec::new();
    for degree in 1..=query.max_degree() {
        let pattern = query.pattern(degree);
        let mut counts = Vec::new();
        // end position j needs a successor at j + 1
        for end in degree - 1..text.len().saturating_sub(1) {
            let start = end + 1 - degree;
            if &text[start..=end] == pattern {
                counts.push((text[end + 1], 1));
            }
        }
        if counts.is_empty() {
            break;
        }
        stats.push(DegreeStats::from_counts(degree, counts));
    }
    Ok(MatchResult { stats })
}
