use super::{DegreeStats, MatchResult, QuerySuffix, SymbolSequence};
use crate::error::{Error, Result};

/// Rows between stored rank checkpoints.
const CHECKPOINT_STEP: usize = 32;

/// Suffix array over the reversed training text.
///
/// Reversal turns "the last `d` query symbols end here" into "this reversed
/// suffix starts with the query read backwards", so the matching rows for
/// degree `d + 1` are a sub-range of those for degree `d`. The symbol that
/// followed an occurrence in the original text is the symbol preceding the
/// reversed suffix, i.e. the BWT character of the row. Successor tallies for a
/// row range come from checkpointed rank counts over that column.
#[derive(Clone, Debug)]
pub struct SuffixIndex {
    reversed: Vec<u16>,
    sa: Vec<u32>,
    /// Successor symbol per suffix-array row, 0 when the occurrence ends the text.
    successor: Vec<u16>,
    /// `checkpoints[k * alphabet + (c - 1)]` = occurrences of `c` in `successor[..k * STEP]`.
    checkpoints: Vec<u32>,
    alphabet: usize,
}

impl SuffixIndex {
    pub fn build(training: &SymbolSequence) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::arg("cannot index an empty training sequence"));
        }
        let alphabet = training.alphabet_size();
        let reversed: Vec<u16> = training.symbols().iter().rev().copied().collect();
        let sa = suffix_array(&reversed, alphabet);
        let successor: Vec<u16> = sa
            .iter()
            .map(|&s| match s as usize {
                0 => 0,
                s => reversed[s - 1],
            })
            .collect();

        let n = reversed.len();
        let blocks = n / CHECKPOINT_STEP + 1;
        let mut checkpoints = vec![0u32; blocks * alphabet];
        let mut running = vec![0u32; alphabet];
        for (row, &c) in successor.iter().enumerate() {
            if row % CHECKPOINT_STEP == 0 {
                let k = row / CHECKPOINT_STEP;
                checkpoints[k * alphabet..(k + 1) * alphabet].copy_from_slice(&running);
            }
            if c != 0 {
                running[c as usize - 1] += 1;
            }
        }
        if n.is_multiple_of(CHECKPOINT_STEP) {
            let k = n / CHECKPOINT_STEP;
            checkpoints[k * alphabet..(k + 1) * alphabet].copy_from_slice(&running);
        }

        Ok(Self {
            reversed,
            sa,
            successor,
            checkpoints,
            alphabet,
        })
    }

    pub fn len(&self) -> usize {
        self.reversed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reversed.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// Same contract as [`super::match_degrees_naive`].
    pub fn match_degrees(&self, query: &QuerySuffix) -> MatchResult {
        let q = query.symbols();
        let (mut lo, mut hi) = (0usize, self.sa.len());
        let mut stats = Vec::new();
        for degree in 1..=query.max_degree() {
            let c = q[q.len() - degree];
            if c == 0 || c as usize > self.alphabet {
                break;
            }
            let (new_lo, new_hi) = self.narrow(lo, hi, degree - 1, c);
            if new_lo == new_hi {
                break;
            }
            let counts = self.range_counts(new_lo, new_hi);
            if counts.iter().all(|&n| n == 0) {
                break;
            }
            stats.push(DegreeStats::from_counts(
                degree,
                counts
                    .into_iter()
                    .enumerate()
                    .map(|(i, n)| (i as u16 + 1, n as usize)),
            ));
            lo = new_lo;
            hi = new_hi;
        }
        MatchResult { stats }
    }

    /// Rows of `[lo, hi)` whose suffix has `c` at `offset`. All rows in the input
    /// range share their first `offset` symbols, so they are sorted by this one.
    fn narrow(&self, lo: usize, hi: usize, offset: usize, c: u16) -> (usize, usize) {
        let key = |&row_start: &u32| self.reversed.get(row_start as usize + offset).copied();
        let rows = &self.sa[lo..hi];
        let first = rows.partition_point(|s| key(s) < Some(c));
        let last = rows.partition_point(|s| key(s) <= Some(c));
        (lo + first, lo + last)
    }

    fn counts_before(&self, row: usize) -> Vec<u32> {
        let k = row / CHECKPOINT_STEP;
        let mut counts = self.checkpoints[k * self.alphabet..(k + 1) * self.alphabet].to_vec();
        for &c in &self.successor[k * CHECKPOINT_STEP..row] {
            if c != 0 {
                counts[c as usize - 1] += 1;
            }
        }
        counts
    }

    fn range_counts(&self, lo: usize, hi: usize) -> Vec<u32> {
        let before = self.counts_before(lo);
        let mut upto = self.counts_before(hi);
        for (u, b) in upto.iter_mut().zip(before) {
            *u -= b;
        }
        upto
    }
}

/// Prefix-doubling suffix array with radix passes; `O(n log n)`.
/// Symbols must lie in `1..=alphabet`.
pub(crate) fn suffix_array(text: &[u16], alphabet: usize) -> Vec<u32> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    // rank 0 is reserved for "past the end"
    let mut rank: Vec<usize> = text.iter().map(|&c| c as usize).collect();
    let mut max_rank = alphabet;
    let mut sa: Vec<usize> = (0..n).collect();
    let mut scratch = vec![0usize; n];
    let mut next_rank = vec![0usize; n];
    let mut bucket = Vec::new();
    let mut k = 1;
    loop {
        let second = |i: usize, rank: &[usize]| if i + k < n { rank[i + k] } else { 0 };
        counting_sort(&sa, &mut scratch, &mut bucket, max_rank, |i| {
            second(i, &rank)
        });
        counting_sort(&scratch, &mut sa, &mut bucket, max_rank, |i| rank[i]);

        next_rank[sa[0]] = 1;
        for w in 1..n {
            let (a, b) = (sa[w - 1], sa[w]);
            let differs = rank[a] != rank[b] || second(a, &rank) != second(b, &rank);
            next_rank[b] = next_rank[a] + usize::from(differs);
        }
        std::mem::swap(&mut rank, &mut next_rank);
        max_rank = rank[sa[n - 1]];
        if max_rank == n || k >= n {
            break;
        }
        k *= 2;
    }
    sa.into_iter().map(|i| i as u32).collect()
}

fn counting_sort(
    input: &[usize],
    output: &mut [usize],
    bucket: &mut Vec<usize>,
    max_key: usize,
    key: impl Fn(usize) -> usize,
) {
    bucket.clear();
    bucket.resize(max_key + 2, 0);
    for &i in input {
        bucket[key(i) + 1] += 1;
    }
    for b in 1..bucket.len() {
        bucket[b] += bucket[b - 1];
    }
    for &i in input {
        let slot = &mut bucket[key(i)];
        output[*slot] = i;
        *slot += 1;
    }
}
