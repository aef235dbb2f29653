//! Price series, daily percentage changes and synthetic fixtures.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One daily close.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricePoint<T> {
    pub date: NaiveDate,
    pub close: T,
}

impl<T> PricePoint<T> {
    pub fn new(date: NaiveDate, close: T) -> Self {
        Self { date, close }
    }
}

/// Closes ordered by strictly increasing date, all positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceSeries<T> {
    points: Vec<PricePoint<T>>,
}

impl<T: Scalar> PriceSeries<T> {
    pub fn new(points: Vec<PricePoint<T>>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.close.is_finite() || p.close <= T::zero() {
                return Err(Error::invalid(format!(
                    "close at {} (row {i}) must be positive and finite, got {}",
                    p.date, p.close
                )));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].date <= w[0].date {
                return Err(Error::invalid(format!(
                    "dates must be strictly increasing: {} follows {} (row {})",
                    w[1].date,
                    w[0].date,
                    i + 1
                )));
            }
        }
        Ok(Self { points })
    }

    /// Builds a series on consecutive weekdays starting at `start`.
    pub fn from_closes(start: NaiveDate, closes: &[T]) -> Result<Self> {
        let dates = trading_days(start, closes.len());
        Self::new(
            dates
                .into_iter()
                .zip(closes)
                .map(|(d, &c)| PricePoint::new(d, c))
                .collect(),
        )
    }

    pub fn points(&self) -> &[PricePoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn closes(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p.close)
    }

    pub fn close(&self, i: usize) -> T {
        self.points[i].close
    }

    pub fn date(&self, i: usize) -> NaiveDate {
        self.points[i].date
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            points: self.points[start..end].to_vec(),
        }
    }

    pub fn validate(&self, d_min: T, d_max: T) -> ValidationReport {
        validate_points(&self.points, d_min, d_max)
    }

    pub fn into_points(self) -> Vec<PricePoint<T>> {
        self.points
    }
}

/// One day-over-day change in percent, dated by the later of the two closes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReturnPoint<T> {
    pub date: NaiveDate,
    pub change: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnSeries<T> {
    entries: Vec<ReturnPoint<T>>,
}

impl<T: Scalar> ReturnSeries<T> {
    pub fn from_entries(entries: Vec<ReturnPoint<T>>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|e| !e.change.is_finite()) {
            return Err(Error::invalid(format!("non-finite change on {}", bad.date)));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ReturnPoint<T>] {
        &self.entries
    }

    pub fn changes(&self) -> impl Iterator<Item = T> + '_ {
        self.entries.iter().map(|e| e.change)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rebuilds closes from the first close by compounding each change.
    pub fn reconstruct(&self, first_close: T) -> Vec<T> {
        let hundred = T::lit(100.0);
        let mut out = Vec::with_capacity(self.entries.len() + 1);
        let mut price = first_close;
        out.push(price);
        for e in &self.entries {
            price *= T::one() + e.change / hundred;
            out.push(price);
        }
        out
    }
}

/// Day-over-day change `(today / yesterday - 1) * 100`, kept at full precision.
pub fn percent_changes<T: Scalar>(series: &PriceSeries<T>) -> Result<ReturnSeries<T>> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    let hundred = T::lit(100.0);
    let entries = series
        .points
        .windows(2)
        .map(|w| {
            if w[0].close <= T::zero() || w[1].close <= T::zero() {
                return Err(Error::invalid(format!(
                    "non-positive close near {}",
                    w[1].date
                )));
            }
            Ok(ReturnPoint {
                date: w[1].date,
                change: (w[1].close / w[0].close - T::one()) * hundred,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ReturnSeries::from_entries(entries)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Finding {
    DuplicateDate {
        index: usize,
        date: NaiveDate,
    },
    NonMonotoneDate {
        index: usize,
        date: NaiveDate,
        previous: NaiveDate,
    },
    NonPositivePrice {
        index: usize,
        date: NaiveDate,
        close: f64,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DuplicateDate { index, date } => {
                write!(f, "row {index}: duplicate date {date}")
            }
            Finding::NonMonotoneDate {
                index,
                date,
                previous,
            } => {
                write!(f, "row {index}: date {date} precedes {previous}")
            }
            Finding::NonPositivePrice { index, date, close } => {
                write!(f, "row {index}: non-positive close {close} on {date}")
            }
        }
    }
}

/// Result of [`validate_points`]; report-only, never an error.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    /// Changes falling outside `[d_min, d_max]`; these get clamped during fuzzification.
    pub out_of_range_changes: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty() && self.out_of_range_changes == 0
    }
}

/// Inspects raw points without rejecting them.
pub fn validate_points<T: Scalar>(
    points: &[PricePoint<T>],
    d_min: T,
    d_max: T,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, p) in points.iter().enumerate() {
        if !(p.close > T::zero()) {
            report.findings.push(Finding::NonPositivePrice {
                index: i,
                date: p.date,
                close: p.close.to_f64_lossy(),
            });
        }
        if i > 0 {
            let prev = &points[i - 1];
            if p.date == prev.date {
                report.findings.push(Finding::DuplicateDate {
                    index: i,
                    date: p.date,
                });
            } else if p.date < prev.date {
                report.findings.push(Finding::NonMonotoneDate {
                    index: i,
                    date: p.date,
                    previous: prev.date,
                });
            }
            if prev.close > T::zero() && p.close > T::zero() {
                let change = (p.close / prev.close - T::one()) * T::lit(100.0);
                if change < d_min || change > d_max {
                    report.out_of_range_changes += 1;
                }
            }
        }
    }
    report
}

/// `count` consecutive Monday-to-Friday dates starting at the first weekday on or after `start`.
pub fn trading_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// The two synthetic trend scenarios used to show why absolute-price intervals fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Prices rise over the training days.
    Fig1,
    /// Mirror image of `Fig1`: prices fall over the training days.
    Fig2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    RiseThenRise,
    RiseThenFall,
    FallThenFall,
    FallThenRise,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" => Ok(Scenario::Fig1),
            "fig2" => Ok(Scenario::Fig2),
            other => Err(Error::arg(format!(
                "unknown scenario '{other}' (expected fig1 or fig2)"
            ))),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rise-then-rise" => Ok(Variant::RiseThenRise),
            "rise-then-fall" => Ok(Variant::RiseThenFall),
            "fall-then-fall" => Ok(Variant::FallThenFall),
            "fall-then-rise" => Ok(Variant::FallThenRise),
            other => Err(Error::arg(format!("unknown scenario variant '{other}'"))),
        }
    }
}

/// Training days 1..=15 of the rising scenario.
pub const FIG1_TRAINING: [f64; 15] = [
    1.0, 2.0, 4.0, 3.0, 4.0, 6.0, 5.0, 7.0, 8.0, 10.0, 9.0, 12.0, 13.0, 13.0, 15.0,
];
/// Days 16..=20 when the rise continues.
pub const FIG1_CONTINUED_RISE: [f64; 5] = [16.0, 18.0, 17.0, 18.0, 19.0];
/// Falling scenarios are `MIRROR_OFFSET - price` of the rising ones.
pub const MIRROR_OFFSET: f64 = 20.0;
/// Length of the training part of every scenario fixture.
pub const SCENARIO_TRAINING_DAYS: usize = FIG1_TRAINING.len();

fn scenario_closes(scenario: Scenario, variant: Variant) -> Result<Vec<f64>> {
    let last = FIG1_TRAINING[FIG1_TRAINING.len() - 1];
    // the falling continuation reflects the rising one around the day-15 close
    let rise_then_fall: Vec<f64> = FIG1_CONTINUED_RISE.iter().map(|p| 2.0 * last - p).collect();
    let rising = |tail: &[f64]| -> Vec<f64> { FIG1_TRAINING.iter().chain(tail).copied().collect() };
    let mirror = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|p| MIRROR_OFFSET - p).collect() };
    match (scenario, variant) {
        (Scenario::Fig1, Variant::RiseThenRise) => Ok(rising(&FIG1_CONTINUED_RISE)),
        (Scenario::Fig1, Variant::RiseThenFall) => Ok(rising(&rise_then_fall)),
        (Scenario::Fig2, Variant::FallThenFall) => Ok(mirror(rising(&FIG1_CONTINUED_RISE))),
        (Scenario::Fig2, Variant::FallThenRise) => Ok(mirror(rising(&rise_then_fall))),
        (s, v) => Err(Error::arg(format!("scenario {s:?} has no variant {v:?}"))),
    }
}

/// Deterministic 20-day trend fixture. Dates are weekdays from 2014-12-01.
pub fn synth_scenario<T: Scalar>(scenario: Scenario, variant: Variant) -> Result<PriceSeries<T>> {
    let closes: Vec<T> = scenario_closes(scenario, variant)?
        .into_iter()
        .map(T::lit)
        .collect();
    PriceSeries::from_closes(fixture_start(), &closes)
}

fn fixture_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 12, 1).expect("valid date")
}

/// Seeded geometric random walk with normally distributed daily changes (in percent),
/// truncated to `[-limit_pct, limit_pct]`.
pub fn random_walk<T: Scalar>(
    days: usize,
    seed: u64,
    start_price: f64,
    daily_sd_pct: f64,
    limit_pct: f64,
) -> Result<PriceSeries<T>> {
    if days == 0 {
        return Err(Error::arg("random walk needs at least one day"));
    }
    if !(start_price > 0.0) || !(daily_sd_pct > 0.0) || !(limit_pct > 0.0) {
        return Err(Error::arg("random walk parameters must be positive"));
    }
    let normal = Normal::new(0.0, daily_sd_pct).map_err(|e| Error::arg(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut price = start_price;
    let mut closes = Vec::with_capacity(days);
    closes.push(T::lit(price));
    for _ in 1..days {
        let change: f64 = normal.sample(&mut rng);
        price *= 1.0 + change.clamp(-limit_pct, limit_pct) / 100.0;
        closes.push(T::lit(price));
    }
    let start = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    PriceSeries::from_closes(start, &closes)
}
