//! Turning successor statistics into a next-day price.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{fuzzify, FuzzySeries, UniversePartition};
use crate::matcher::{
    DegreeMatcher, DegreeStats, MatchResult, QuerySuffix, SymbolSequence, DEFAULT_MAX_DEGREE,
};
use crate::scalar::Scalar;
use crate::series::{percent_changes, PriceSeries};

/// How a forecast percentage is applied to the previous price.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PercentScaling {
    /// `previous * (1 + pct / 100)`; the percentage is in percent units.
    #[default]
    UnitConsistent,
    /// `previous * (1 + pct)`; reproduces the published worked example
    /// (100 at 0.082 → 108.2).
    Table3Compat,
}

impl fmt::Display for PercentScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PercentScaling::UnitConsistent => "unit-consistent",
            PercentScaling::Table3Compat => "table3-compat",
        })
    }
}

impl FromStr for PercentScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-consistent" => Ok(Self::UnitConsistent),
            "table3-compat" => Ok(Self::Table3Compat),
            other => Err(Error::arg(format!("unknown percent scaling '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ForecastConfig<T> {
    pub partition: UniversePartition<T>,
    pub max_degree: usize,
    pub percent_scaling: PercentScaling,
}

impl<T: Scalar> ForecastConfig<T> {
    pub fn new(partition: UniversePartition<T>) -> Self {
        Self {
            partition,
            max_degree: DEFAULT_MAX_DEGREE,
            percent_scaling: PercentScaling::UnitConsistent,
        }
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Self {
        self.max_degree = max_degree;
        self
    }

    pub fn with_scaling(mut self, scaling: PercentScaling) -> Self {
        self.percent_scaling = scaling;
        self
    }

    pub fn with_partition(mut self, partition: UniversePartition<T>) -> Self {
        self.partition = partition;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegreeForecast<T> {
    pub degree: usize,
    /// Count-weighted mean of successor midpoints, in percent.
    pub forecast_percent: T,
    pub forecast_price: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Forecast<T> {
    pub per_degree: Vec<DegreeForecast<T>>,
    pub final_price: T,
    pub previous_price: T,
    /// No degree matched and the previous price was carried forward.
    pub fallback_used: bool,
    /// Query symbols used for matching, most recent last. Empty when built by [`aggregate`].
    pub query: Vec<u16>,
    pub matches: MatchResult,
}

impl<T> Forecast<T> {
    pub fn matched_degree(&self) -> usize {
        self.per_degree.len()
    }
}

/// `Σ N_i M_i / Σ N_i` over the successor counts.
pub fn forecast_percent<T: Scalar>(
    stats: &DegreeStats,
    partition: &UniversePartition<T>,
) -> Result<T> {
    if stats.total == 0 {
        return Err(Error::arg(format!(
            "degree {} has no successors",
            stats.degree
        )));
    }
    let mut weighted = T::zero();
    let mut total = T::zero();
    for (&sym, &count) in &stats.successor_counts {
        let n = T::from_count(count);
        weighted += n * partition.midpoint(sym as usize)?;
        total += n;
    }
    Ok(weighted / total)
}

pub fn price_from_percent<T: Scalar>(previous_price: T, pct: T, mode: PercentScaling) -> Result<T> {
    if !(previous_price > T::zero()) || !previous_price.is_finite() {
        return Err(Error::arg(format!(
            "previous price must be positive, got {previous_price}"
        )));
    }
    let factor = match mode {
        PercentScaling::UnitConsistent => T::one() + pct / T::lit(100.0),
        PercentScaling::Table3Compat => T::one() + pct,
    };
    let price = previous_price * factor;
    if !(price > T::zero()) || !price.is_finite() {
        return Err(Error::Domain(format!(
            "forecast price {price} from {previous_price} at {pct}% ({mode}) is not positive"
        )));
    }
    Ok(price)
}

/// Arithmetic mean of the per-degree prices; the previous price when there are none.
pub fn aggregate<T: Scalar>(per_degree: Vec<DegreeForecast<T>>, previous_price: T) -> Forecast<T> {
    let fallback_used = per_degree.is_empty();
    let final_price = if fallback_used {
        previous_price
    } else {
        per_degree.iter().map(|d| d.forecast_price).sum::<T>() / T::from_count(per_degree.len())
    };
    Forecast {
        per_degree,
        final_price,
        previous_price,
        fallback_used,
        query: Vec::new(),
        matches: MatchResult::default(),
    }
}

/// One-day-ahead forecast from a fuzzified history ending the day before.
pub fn forecast_next<T: Scalar, M: DegreeMatcher + ?Sized>(
    history: &FuzzySeries<T>,
    previous_price: T,
    cfg: &ForecastConfig<T>,
    matcher: &M,
) -> Result<Forecast<T>> {
    if history.is_empty() {
        return Err(Error::arg("cannot forecast from an empty history"));
    }
    if history.partition() != &cfg.partition {
        return Err(Error::arg(
            "history was fuzzified with a different partition",
        ));
    }
    if !(previous_price > T::zero()) {
        return Err(Error::arg(format!(
            "previous price must be positive, got {previous_price}"
        )));
    }
    let partition = &cfg.partition;
    let symbols = history.indices();
    let training = SymbolSequence::new(symbols.clone(), partition.len())?;
    let query = QuerySuffix::tail_of(&symbols, cfg.max_degree)?;
    let matches = matcher.match_degrees(&training, &query)?;

    let per_degree = matches
        .stats
        .iter()
        .map(|stats| {
            let pct = forecast_percent(stats, partition)?;
            Ok(DegreeForecast {
                degree: stats.degree,
                forecast_percent: pct,
                forecast_price: price_from_percent(previous_price, pct, cfg.percent_scaling)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut forecast = aggregate(per_degree, previous_price);
    forecast.query = query.symbols().to_vec();
    forecast.matches = matches;
    Ok(forecast)
}

/// Forecast for the day after the last close of `prices`.
pub fn forecast_from_prices<T: Scalar, M: DegreeMatcher + ?Sized>(
    prices: &PriceSeries<T>,
    cfg: &ForecastConfig<T>,
    matcher: &M,
) -> Result<Forecast<T>> {
    let returns = percent_changes(prices)?;
    let history = fuzzify(&cfg.partition, &returns);
    forecast_next(&history, prices.close(prices.len() - 1), cfg, matcher)
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::fuzzy::FuzzySymbol;
    use crate::matcher::{IndexedMatcher, NaiveMatcher};
    use chrono::NaiveDate;

    fn p7() -> UniversePartition<f64> {
        UniversePartition::daily_limit(7).unwrap()
    }

    fn stats(counts: [usize; 7]) -> DegreeStats {
        DegreeStats::from_counts(
            1,
            counts.iter().enumerate().map(|(i, &n)| (i as u16 + 1, n)),
        )
    }

    /// Direct evaluation with hard-coded midpoints -6, -4, ..., 6.
    fn oracle_percent(counts: [usize; 7]) -> f64 {
        let mids = [-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0];
        let num: f64 = counts.iter().zip(mids).map(|(&n, m)| n as f64 * m).sum();
        num / counts.iter().sum::<usize>() as f64
    }

    #[test]
    fn successor_weighted_percent_rows() {
        let rows = [
            ([30, 70, 150, 250, 100, 80, 50], 0.082),
            ([25, 50, 100, 200, 80, 60, 40], 0.162),
            ([10, 20, 60, 150, 50, 30, 25], 0.318),
        ];
        for (counts, printed) in rows {
            let got = forecast_percent(&stats(counts), &p7()).unwrap();
            assert!((got - oracle_percent(counts)).abs() < 1e-12);
            // printed figures are truncated, not rounded, to three decimals
            assert_eq!(
                (got * 1000.0).floor() as i64,
                (printed * 1000.0_f64).round() as i64,
                "{got} vs {printed}"
            );
        }
    }

    #[test]
    fn fourth_row_recomputes_to_ninety_over_one_forty_five() {
        let counts = [0, 0, 10, 100, 20, 10, 5];
        let oracle = oracle_percent(counts);
        assert!((oracle - 90.0 / 145.0).abs() < 1e-15);
        let got = forecast_percent(&stats(counts), &p7()).unwrap();
        assert!((got - 0.620_689_655).abs() < 1e-9);
        assert_eq!((got * 1000.0).floor(), 620.0);
    }

    #[test]
    fn concentrated_on_centre_is_zero() {
        assert_eq!(
            forecast_percent(&stats([0, 0, 0, 9, 0, 0, 0]), &p7()).unwrap(),
            0.0
        );
    }

    #[test]
    fn empty_stats_are_rejected() {
        let empty = DegreeStats::from_counts(1, []);
        assert!(forecast_percent(&empty, &p7()).is_err());
    }

    #[test]
    fn price_modes() {
        let compat = price_from_percent(100.0f64, 0.082, PercentScaling::Table3Compat).unwrap();
        assert!((compat - 108.2).abs() < 1e-9);
        let unit = price_from_percent(100.0f64, 0.082, PercentScaling::UnitConsistent).unwrap();
        assert!((unit - 100.082).abs() < 1e-9);
        for mode in [PercentScaling::UnitConsistent, PercentScaling::Table3Compat] {
            assert_eq!(price_from_percent(100.0, 0.0, mode).unwrap(), 100.0);
        }
        assert!(price_from_percent(0.0, 1.0, PercentScaling::UnitConsistent).is_err());
        assert!(matches!(
            price_from_percent(100.0, -1.5, PercentScaling::Table3Compat),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn aggregation_of_worked_example() {
        let per_degree: Vec<_> = [0.082, 0.162, 0.318, 0.620]
            .iter()
            .enumerate()
            .map(|(i, &pct)| DegreeForecast {
                degree: i + 1,
                forecast_percent: pct,
                forecast_price: price_from_percent(100.0, pct, PercentScaling::Table3Compat)
                    .unwrap(),
            })
            .collect();
        let prices: Vec<f64> = per_degree.iter().map(|d| d.forecast_price).collect();
        for (got, want) in prices.iter().zip([108.2, 116.2, 131.8, 162.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        let f = aggregate(per_degree, 100.0);
        assert!((f.final_price - 129.55).abs() < 1e-9);
        assert!(!f.fallback_used);
    }

    #[test]
    fn aggregation_edge_cases() {
        let f = aggregate(Vec::<DegreeForecast<f64>>::new(), 100.0);
        assert!(f.fallback_used);
        assert_eq!(f.final_price, 100.0);
        let single = DegreeForecast {
            degree: 1,
            forecast_percent: 1.0,
            forecast_price: 101.0,
        };
        assert_eq!(aggregate(vec![single], 100.0).final_price, 101.0);
    }

    fn history(symbols: &[u16]) -> FuzzySeries<f64> {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let dates = (0..symbols.len())
            .map(|i| d0 + chrono::Days::new(i as u64))
            .collect();
        FuzzySeries::from_symbols(
            p7(),
            dates,
            symbols.iter().map(|&s| FuzzySymbol(s)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn unseen_last_symbol_falls_back_to_persistence() {
        let cfg = ForecastConfig::new(p7());
        let f = forecast_next(&history(&[4, 4, 5, 4, 7]), 250.0, &cfg, &IndexedMatcher).unwrap();
        assert!(f.fallback_used);
        assert_eq!(f.final_price, 250.0);
        assert_eq!(f.matched_degree(), 0);
    }

    #[test]
    fn constant_centre_history_forecasts_previous_price() {
        let cfg = ForecastConfig::new(p7());
        let f = forecast_next(&history(&[4; 30]), 80.0, &cfg, &IndexedMatcher).unwrap();
        assert_eq!(f.matched_degree(), DEFAULT_MAX_DEGREE);
        assert!(f.per_degree.iter().all(|d| d.forecast_percent == 0.0));
        assert_eq!(f.final_price, 80.0);
        assert!(!f.fallback_used);
    }

    #[test]
    fn matchers_agree_through_forecast() {
        let h = history(&[3, 5, 4, 5, 2, 5, 4, 5, 6, 3, 5, 4, 5]);
        let cfg = ForecastConfig::new(p7()).with_max_degree(4);
        let a = forecast_next(&h, 100.0, &cfg, &IndexedMatcher).unwrap();
        let b = forecast_next(&h, 100.0, &cfg, &NaiveMatcher).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.query, vec![3, 5, 4, 5]);
        // A5 → {A4, A2, A4, A6, A4}; A4A5 → {A2, A6}; A5A4A5 → {A2, A6}; A3A5A4A5 → {A2}
        let pcts: Vec<f64> = a.per_degree.iter().map(|d| d.forecast_percent).collect();
        assert_eq!(pcts, vec![0.0, 0.0, 0.0, -4.0]);
    }

    #[test]
    fn mismatched_partition_is_rejected() {
        let cfg = ForecastConfig::new(UniversePartition::daily_limit(9).unwrap());
        assert!(forecast_next(&history(&[1, 2]), 10.0, &cfg, &IndexedMatcher).is_err());
    }

    #[test]
    fn scaling_round_trips_through_strings() {
        for mode in [PercentScaling::UnitConsistent, PercentScaling::Table3Compat] {
            assert_eq!(mode.to_string().parse::<PercentScaling>().unwrap(), mode);
        }
    }
}
