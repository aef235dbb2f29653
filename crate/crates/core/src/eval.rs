//! Error metrics and rolling one-day-ahead backtests.

use std::fmt;
use std::str::FromStr;

use chrono::{Months, NaiveDate};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forecast::{forecast_from_prices, ForecastConfig};
use crate::matcher::{DegreeMatcher, IndexedMatcher};
use crate::scalar::Scalar;
use crate::series::PriceSeries;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalPair<T> {
    pub date: NaiveDate,
    pub forecast: T,
    pub actual: T,
}

impl<T: Scalar> EvalPair<T> {
    pub fn new(date: NaiveDate, forecast: T, actual: T) -> Result<Self> {
        if !(forecast > T::zero()) || !(actual > T::zero()) {
            return Err(Error::arg(format!(
                "prices must be positive on {date}: forecast {forecast}, actual {actual}"
            )));
        }
        Ok(Self {
            date,
            forecast,
            actual,
        })
    }

    pub fn abs_error(&self) -> T {
        (self.forecast - self.actual).abs()
    }
}

/// Root mean square error of forecast against actual.
pub fn rmse<T: Scalar>(pairs: &[EvalPair<T>]) -> Result<T> {
    if pairs.is_empty() {
        return Err(Error::arg("rmse of zero pairs"));
    }
    let sq: T = pairs.iter().map(|p| (p.forecast - p.actual).powi(2)).sum();
    Ok((sq / T::from_count(pairs.len())).sqrt())
}

/// Mean absolute percentage error, in percent.
pub fn mape<T: Scalar>(pairs: &[EvalPair<T>]) -> Result<T> {
    if pairs.is_empty() {
        return Err(Error::arg("mape of zero pairs"));
    }
    let mut acc = T::zero();
    for p in pairs {
        if !(p.actual > T::zero()) {
            return Err(Error::arg(format!(
                "mape needs positive actuals, got {} on {}",
                p.actual, p.date
            )));
        }
        acc += ((p.forecast - p.actual) / p.actual).abs();
    }
    Ok(acc / T::from_count(pairs.len()) * T::lit(100.0))
}

/// How much history each forecast may see.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum TrainingLength {
    /// Every close before the forecast day (expanding window).
    #[default]
    Full,
    /// The most recent `k` closes before the forecast day.
    Days(usize),
    /// Closes dated within `k` calendar years before the forecast day.
    Years(u32),
}

impl fmt::Display for TrainingLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainingLength::Full => f.write_str("full"),
            TrainingLength::Days(k) => write!(f, "{k}d"),
            TrainingLength::Years(k) => write!(f, "{k}y"),
        }
    }
}

impl FromStr for TrainingLength {
    type Err = Error;

    /// `full`, `250d` / `250`, or `5y`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") {
            return Ok(Self::Full);
        }
        let bad = || {
            Error::arg(format!(
                "bad training length '{s}' (expected full, <n>d or <n>y)"
            ))
        };
        if let Some(y) = s.strip_suffix(['y', 'Y']) {
            return y.parse().map(Self::Years).map_err(|_| bad());
        }
        let d = s.strip_suffix(['d', 'D']).unwrap_or(s);
        d.parse().map(Self::Days).map_err(|_| bad())
    }
}

/// Which days to forecast and how much history each forecast sees.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BacktestWindow {
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    /// Keep only the last `k` selected days.
    pub last: Option<usize>,
    pub training: TrainingLength,
}

impl BacktestWindow {
    pub fn expanding() -> Self {
        Self::default()
    }

    pub fn with_training(mut self, training: TrainingLength) -> Self {
        self.training = training;
        self
    }

    /// Forecast day indices into `series`. The earliest possible day is the third close.
    pub fn forecast_days<T: Scalar>(&self, series: &PriceSeries<T>) -> Result<Vec<usize>> {
        let mut days: Vec<usize> = (2..series.len())
            .filter(|&t| {
                let d = series.date(t);
                self.from.is_none_or(|f| d >= f) && self.to.is_none_or(|e| d <= e)
            })
            .collect();
        if let Some(k) = self.last {
            days.drain(..days.len().saturating_sub(k));
        }
        if days.is_empty() {
            return Err(Error::arg(format!(
                "backtest window selects no forecast day ({} closes; the first forecastable is the third)",
                series.len()
            )));
        }
        Ok(days)
    }

    /// Index of the first close visible when forecasting day `t`.
    pub fn history_start<T: Scalar>(&self, series: &PriceSeries<T>, t: usize) -> Result<usize> {
        let start = match self.training {
            TrainingLength::Full => 0,
            TrainingLength::Days(k) => {
                if k < 2 {
                    return Err(Error::arg("training length must cover at least 2 closes"));
                }
                if t < k {
                    return Err(Error::arg(format!(
                        "only {t} closes before {}, training length {k}d is infeasible",
                        series.date(t)
                    )));
                }
                t - k
            }
            TrainingLength::Years(y) => {
                let cutoff = series
                    .date(t)
                    .checked_sub_months(Months::new(12 * y))
                    .ok_or_else(|| {
                        Error::arg(format!("training length {y}y underflows the calendar"))
                    })?;
                if y == 0 || series.date(0) > cutoff {
                    return Err(Error::arg(format!(
                        "series starts {}, training length {y}y before {} is infeasible",
                        series.date(0),
                        series.date(t)
                    )));
                }
                series.points()[..t].partition_point(|p| p.date <= cutoff)
            }
        };
        if t - start < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: t - start,
            });
        }
        Ok(start)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DayDetail<T> {
    pub previous_price: T,
    /// Deepest matched degree; 0 on fallback days.
    pub matched_degree: usize,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BacktestReport<T> {
    pub pairs: Vec<EvalPair<T>>,
    pub details: Vec<DayDetail<T>>,
    pub rmse: T,
    pub mape: T,
    pub n_days: usize,
    pub fallback_days: usize,
}

impl<T: Scalar> BacktestReport<T> {
    pub fn from_days(pairs: Vec<EvalPair<T>>, details: Vec<DayDetail<T>>) -> Result<Self> {
        Ok(Self {
            rmse: rmse(&pairs)?,
            mape: mape(&pairs)?,
            n_days: pairs.len(),
            fallback_days: details.iter().filter(|d| d.fallback).count(),
            pairs,
            details,
        })
    }

    /// Mean deepest matched degree over forecast days.
    pub fn avg_match_len(&self) -> f64 {
        if self.details.is_empty() {
            return 0.0;
        }
        self.details
            .iter()
            .map(|d| d.matched_degree as f64)
            .sum::<f64>()
            / self.details.len() as f64
    }
}

/// Expanding (or truncated) window backtest with the indexed matcher.
pub fn backtest<T: Scalar>(
    series: &PriceSeries<T>,
    cfg: &ForecastConfig<T>,
    window: &BacktestWindow,
) -> Result<BacktestReport<T>> {
    backtest_with(series, cfg, window, &IndexedMatcher)
}

/// Day `t` is forecast from closes strictly before `t`; days run in parallel.
pub fn backtest_with<T: Scalar, M: DegreeMatcher>(
    series: &PriceSeries<T>,
    cfg: &ForecastConfig<T>,
    window: &BacktestWindow,
    matcher: &M,
) -> Result<BacktestReport<T>> {
    let days = window.forecast_days(series)?;
    let starts = days
        .iter()
        .map(|&t| window.history_start(series, t))
        .collect::<Result<Vec<_>>>()?;

    let results = days
        .par_iter()
        .zip(starts.par_iter())
        .map(|(&t, &start)| {
            let history = series.slice(start, t);
            let f = forecast_from_prices(&history, cfg, matcher)?;
            let pair = EvalPair::new(series.date(t), f.final_price, series.close(t))?;
            let detail = DayDetail {
                previous_price: f.previous_price,
                matched_degree: f.matched_degree(),
                fallback: f.fallback_used,
            };
            Ok((pair, detail))
        })
        .collect::<Result<Vec<_>>>()?;

    let (pairs, details) = results.into_iter().unzip();
    BacktestReport::from_days(pairs, details)
}
