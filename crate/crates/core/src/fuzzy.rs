//! Universe of discourse over daily changes and crisp interval assignment.

use std::fmt;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::ReturnSeries;

pub const MIN_INTERVALS: usize = 2;
pub const MAX_INTERVALS: usize = 35;

/// `[d_min, d_max]` (percent) split into `n` equal-width intervals.
///
/// Interval `i` (1-based) covers `[d_min + (i-1)w, d_min + iw)`; the last one is
/// closed at `d_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UniversePartition<T> {
    d_min: T,
    d_max: T,
    n: usize,
}

impl<T: Scalar> UniversePartition<T> {
    pub fn new(d_min: T, d_max: T, n: usize) -> Result<Self> {
        if !d_min.is_finite() || !d_max.is_finite() || d_min >= d_max {
            return Err(Error::arg(format!(
                "universe bounds must satisfy d_min < d_max, got [{d_min}, {d_max}]"
            )));
        }
        if !(MIN_INTERVALS..=MAX_INTERVALS).contains(&n) {
            return Err(Error::arg(format!(
                "interval count must be in {MIN_INTERVALS}..={MAX_INTERVALS}, got {n}"
            )));
        }
        Ok(Self { d_min, d_max, n })
    }

    /// The ±7% daily limit universe.
    pub fn daily_limit(n: usize) -> Result<Self> {
        Self::new(T::lit(-7.0), T::lit(7.0), n)
    }

    pub fn d_min(&self) -> T {
        self.d_min
    }

    pub fn d_max(&self) -> T {
        self.d_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> T {
        (self.d_max - self.d_min) / T::from_count(self.n)
    }

    /// Lower edge of the interval with 0-based index `k`; `k == n` gives `d_max`.
    fn edge(&self, k: usize) -> T {
        if k == self.n {
            self.d_max
        } else {
            self.d_min + T::from_count(k) * self.width()
        }
    }

    /// `(lo, hi)` of interval `i` (1-based).
    pub fn bounds(&self, i: usize) -> Result<(T, T)> {
        self.check_index(i)?;
        Ok((self.edge(i - 1), self.edge(i)))
    }

    pub fn midpoint(&self, i: usize) -> Result<T> {
        self.check_index(i)?;
        Ok(self.midpoint_unchecked(i))
    }

    pub(crate) fn midpoint_unchecked(&self, i: usize) -> T {
        self.d_min + (T::from_count(i) - T::lit(0.5)) * self.width()
    }

    pub fn midpoints(&self) -> Vec<T> {
        (1..=self.n).map(|i| self.midpoint_unchecked(i)).collect()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::arg(format!(
                "interval index {i} outside 1..={}",
                self.n
            )));
        }
        Ok(())
    }

    /// Interval containing `change` after clamping it into the universe, and
    /// whether clamping happened.
    pub fn locate(&self, change: T) -> (FuzzySymbol, bool) {
        if change.is_nan() {
            // no ordering information; treat as the centre of the universe
            return (self.locate((self.d_min + self.d_max) / T::lit(2.0)).0, true);
        }
        if change < self.d_min {
            return (FuzzySymbol(1), true);
        }
        if change > self.d_max {
            return (FuzzySymbol(self.n as u16), true);
        }
        let raw = ((change - self.d_min) / self.width()).floor();
        let mut k = raw.to_usize().unwrap_or(0).min(self.n - 1);
        // snap onto the same edges `bounds` reports
        while k > 0 && change < self.edge(k) {
            k -= 1;
        }
        while k + 1 < self.n && change >= self.edge(k + 1) {
            k += 1;
        }
        (FuzzySymbol(k as u16 + 1), false)
    }

    pub fn interval_of(&self, change: T) -> FuzzySymbol {
        self.locate(change).0
    }
}

/// 1-based interval label `A_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct FuzzySymbol(pub u16);

impl FuzzySymbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FuzzySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.0)
    }
}

/// Symbols for a run of daily changes, aligned with the source dates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzySeries<T> {
    partition: UniversePartition<T>,
    dates: Vec<NaiveDate>,
    symbols: Vec<FuzzySymbol>,
    clamp_count: usize,
}

impl<T: Scalar> FuzzySeries<T> {
    /// Wraps an existing symbol sequence. Every symbol must lie in the partition.
    pub fn from_symbols(
        partition: UniversePartition<T>,
        dates: Vec<NaiveDate>,
        symbols: Vec<FuzzySymbol>,
    ) -> Result<Self> {
        if dates.len() != symbols.len() {
            return Err(Error::arg("dates and symbols must have equal length"));
        }
        if let Some(s) = symbols
            .iter()
            .find(|s| s.0 == 0 || s.index() > partition.len())
        {
            return Err(Error::arg(format!(
                "symbol {s} outside partition of {}",
                partition.len()
            )));
        }
        Ok(Self {
            partition,
            dates,
            symbols,
            clamp_count: 0,
        })
    }

    pub fn partition(&self) -> &UniversePartition<T> {
        &self.partition
    }

    pub fn symbols(&self) -> &[FuzzySymbol] {
        &self.symbols
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn clamp_count(&self) -> usize {
        self.clamp_count
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Raw symbol indices, as consumed by the matcher.
    pub fn indices(&self) -> Vec<u16> {
        self.symbols.iter().map(|s| s.0).collect()
    }

    /// Each symbol replaced by its interval midpoint.
    pub fn defuzzify(&self) -> Vec<T> {
        self.symbols
            .iter()
            .map(|s| self.partition.midpoint_unchecked(s.index()))
            .collect()
    }
}

/// Element-wise [`UniversePartition::interval_of`], counting clamped inputs.
pub fn fuzzify<T: Scalar>(
    partition: &UniversePartition<T>,
    returns: &ReturnSeries<T>,
) -> FuzzySeries<T> {
    let mut clamp_count = 0;
    let mut dates = Vec::with_capacity(returns.len());
    let mut symbols = Vec::with_capacity(returns.len());
    for e in returns.entries() {
        let (sym, clamped) = partition.locate(e.change);
        clamp_count += usize::from(clamped);
        dates.push(e.date);
        symbols.push(sym);
    }
    FuzzySeries {
        partition: *partition,
        dates,
        symbols,
        clamp_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::ReturnPoint;

    fn p7() -> UniversePartition<f64> {
        UniversePartition::daily_limit(7).unwrap()
    }

    fn returns(changes: &[f64]) -> ReturnSeries<f64> {
        let d0 = NaiveDate::from_ymd_opt(2014, 12, 26).unwrap();
        ReturnSeries::from_entries(
            changes
                .iter()
                .enumerate()
                .map(|(i, &c)| ReturnPoint {
                    date: d0 + chrono::Days::new(i as u64),
                    change: c,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn seven_interval_bounds() {
        let p = p7();
        assert_eq!(p.bounds(1).unwrap(), (-7.0, -5.0));
        assert_eq!(p.bounds(2).unwrap(), (-5.0, -3.0));
        assert_eq!(p.bounds(3).unwrap(), (-3.0, -1.0));
        assert_eq!(p.bounds(6).unwrap(), (3.0, 5.0));
        assert_eq!(p.bounds(7).unwrap(), (5.0, 7.0));
    }

    #[test]
    fn bisection() {
        let p = UniversePartition::<f64>::daily_limit(2).unwrap();
        assert_eq!(p.bounds(1).unwrap(), (-7.0, 0.0));
        assert_eq!(p.bounds(2).unwrap(), (0.0, 7.0));
        assert_eq!(p.interval_of(0.0), FuzzySymbol(2));
        assert_eq!(p.interval_of(-1e-12), FuzzySymbol(1));
    }

    #[test]
    fn unit_width_intervals_tile_universe() {
        let p = UniversePartition::<f64>::daily_limit(14).unwrap();
        let bounds: Vec<_> = (1..=14).map(|i| p.bounds(i).unwrap()).collect();
        assert_eq!(bounds[0].0, -7.0);
        assert_eq!(bounds[13].1, 7.0);
        for (lo, hi) in &bounds {
            assert!((hi - lo - 1.0).abs() < 1e-12);
        }
        for w in bounds.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn bad_partitions() {
        assert!(UniversePartition::<f64>::daily_limit(1).is_err());
        assert!(UniversePartition::<f64>::daily_limit(36).is_err());
        assert!(UniversePartition::new(7.0f64, -7.0, 7).is_err());
        assert!(UniversePartition::new(1.0f64, 1.0, 7).is_err());
    }

    #[test]
    fn interval_lookup_and_clamping() {
        let p = p7();
        assert_eq!(p.interval_of(5.58), FuzzySymbol(7));
        assert_eq!(p.interval_of(-1.31), FuzzySymbol(3));
        assert_eq!(p.locate(7.0), (FuzzySymbol(7), false));
        assert_eq!(p.locate(-7.0), (FuzzySymbol(1), false));
        assert_eq!(p.locate(-9.0), (FuzzySymbol(1), true));
        assert_eq!(p.locate(9.0), (FuzzySymbol(7), true));
        assert_eq!(p.interval_of(-5.0), FuzzySymbol(2));
        assert_eq!(p.interval_of(-1.0), FuzzySymbol(4));
    }

    #[test]
    fn midpoints() {
        let p = p7();
        assert_eq!(p.midpoint(4).unwrap(), 0.0);
        assert_eq!(p.midpoint(7).unwrap(), 6.0);
        assert_eq!(p.midpoint(1).unwrap(), -6.0);
        assert!(p.midpoint(0).is_err());
        assert!(p.midpoint(8).is_err());
    }

    #[test]
    fn table_one_mapping() {
        let f = fuzzify(&p7(), &returns(&[5.58, 0.65, -1.31, 1.20, -0.55, 1.02]));
        let labels: Vec<String> = f.symbols().iter().map(|s| s.to_string()).collect();
        assert_eq!(labels, ["A7", "A4", "A3", "A5", "A4", "A5"]);
        assert_eq!(f.clamp_count(), 0);
        assert_eq!(f.dates().len(), 6);
    }

    #[test]
    fn empty_and_flat_inputs() {
        let f = fuzzify(&p7(), &returns(&[]));
        assert!(f.is_empty());
        let f = fuzzify(&p7(), &returns(&[0.0; 5]));
        assert!(f.symbols().iter().all(|s| *s == FuzzySymbol(4)));
    }

    #[test]
    fn clamp_count_is_recorded() {
        let f = fuzzify(&p7(), &returns(&[-9.0, 0.0, 12.5, 7.0]));
        assert_eq!(f.clamp_count(), 2);
        assert_eq!(f.indices(), vec![1, 4, 7, 7]);
    }

    #[test]
    fn single_precision_agrees_on_table_one() {
        let p = UniversePartition::<f32>::daily_limit(7).unwrap();
        let got: Vec<u16> = [5.58f32, 0.65, -1.31, 1.20, -0.55, 1.02]
            .iter()
            .map(|&c| p.interval_of(c).0)
            .collect();
        assert_eq!(got, vec![7, 4, 3, 5, 4, 5]);
    }

    #[test]
    fn from_symbols_rejects_out_of_partition() {
        let d = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        assert!(FuzzySeries::from_symbols(p7(), vec![d], vec![FuzzySymbol(8)]).is_err());
        assert!(FuzzySeries::from_symbols(p7(), vec![d], vec![FuzzySymbol(0)]).is_err());
        assert!(FuzzySeries::from_symbols(p7(), vec![], vec![FuzzySymbol(1)]).is_err());
    }
}
