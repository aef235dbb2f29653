//! Parameter sweeps and the absolute-price baseline.

use std::fmt;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{backtest, BacktestWindow, TrainingLength};
use crate::forecast::ForecastConfig;
use crate::fuzzy::UniversePartition;
use crate::scalar::Scalar;
use crate::series::PriceSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum SweepParam {
    IntervalCount(usize),
    TrainingLength(TrainingLength),
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::IntervalCount(n) => write!(f, "{n}"),
            SweepParam::TrainingLength(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub param: SweepParam,
    pub rmse: T,
    pub mape: T,
    pub avg_match_len: f64,
    pub n_days: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult<T> {
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Scalar> SweepResult<T> {
    pub fn all_finite(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.rmse.is_finite() && r.mape.is_finite() && r.avg_match_len.is_finite())
    }
}

/// One backtest per interval count, bounds taken from `template`.
pub fn sweep_intervals<T: Scalar>(
    series: &PriceSeries<T>,
    counts: &[usize],
    template: &ForecastConfig<T>,
    window: &BacktestWindow,
) -> Result<SweepResult<T>> {
    if counts.is_empty() {
        return Err(Error::arg(
            "interval sweep needs at least one interval count",
        ));
    }
    let (d_min, d_max) = (template.partition.d_min(), template.partition.d_max());
    let rows = counts
        .par_iter()
        .map(|&n| {
            let cfg = template.with_partition(UniversePartition::new(d_min, d_max, n)?);
            let report = backtest(series, &cfg, window)?;
            Ok(SweepRow {
                param: SweepParam::IntervalCount(n),
                rmse: report.rmse,
                mape: report.mape,
                avg_match_len: report.avg_match_len(),
                n_days: report.n_days,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// One backtest per training length over the same forecast days.
pub fn sweep_training_length<T: Scalar>(
    series: &PriceSeries<T>,
    lengths: &[TrainingLength],
    cfg: &ForecastConfig<T>,
    window: &BacktestWindow,
) -> Result<SweepResult<T>> {
    if lengths.is_empty() {
        return Err(Error::arg("training sweep needs at least one length"));
    }
    let rows = lengths
        .par_iter()
        .map(|&len| {
            let report = backtest(series, cfg, &window.with_training(len))?;
            Ok(SweepRow {
                param: SweepParam::TrainingLength(len),
                rmse: report.rmse,
                mape: report.mape,
                avg_match_len: report.avg_match_len(),
                n_days: report.n_days,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// First-order fuzzy time series over absolute prices.
///
/// The universe is `[min, max]` of the training closes split into `n` equal
/// intervals. Each training transition `A_i → A_j` is recorded; a forecast is
/// the count-weighted mean midpoint of the successors of the previous close's
/// interval, or that interval's own midpoint when it has no recorded successor.
/// Forecasts therefore never leave the span of the partition midpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineForecaster<T> {
    lo: T,
    hi: T,
    n: usize,
    /// `transitions[i][j]` = times interval `i` was followed by interval `j` (0-based).
    transitions: Vec<Vec<usize>>,
}

impl<T: Scalar> BaselineForecaster<T> {
    pub fn fit(training: &[T], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("baseline needs at least one interval"));
        }
        if training.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: training.len(),
            });
        }
        let lo = training.iter().copied().fold(T::infinity(), T::min);
        let hi = training.iter().copied().fold(T::neg_infinity(), T::max);
        if !(hi > lo) {
            return Err(Error::arg(format!(
                "degenerate price universe [{lo}, {hi}]"
            )));
        }
        let mut model = Self {
            lo,
            hi,
            n,
            transitions: vec![vec![0; n]; n],
        };
        for w in training.windows(2) {
            let (a, b) = (model.interval(w[0]), model.interval(w[1]));
            model.transitions[a][b] += 1;
        }
        Ok(model)
    }

    fn width(&self) -> T {
        (self.hi - self.lo) / T::from_count(self.n)
    }

    /// 0-based interval of `price`, clamped into the universe.
    fn interval(&self, price: T) -> usize {
        if !(price > self.lo) {
            return 0;
        }
        let k = ((price - self.lo) / self.width())
            .floor()
            .to_usize()
            .unwrap_or(self.n);
        k.min(self.n - 1)
    }

    fn midpoint(&self, k: usize) -> T {
        self.lo + (T::from_count(k) + T::lit(0.5)) * self.width()
    }

    /// Lowest and highest interval midpoints.
    pub fn midpoint_span(&self) -> (T, T) {
        (self.midpoint(0), self.midpoint(self.n - 1))
    }

    pub fn universe(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn forecast(&self, previous_price: T) -> T {
        let lhs = self.interval(previous_price);
        let row = &self.transitions[lhs];
        let total: usize = row.iter().sum();
        if total == 0 {
            return self.midpoint(lhs);
        }
        let weighted: T = row
            .iter()
            .enumerate()
            .map(|(j, &c)| T::from_count(c) * self.midpoint(j))
            .sum();
        weighted / T::from_count(total)
    }
}

/// Fits the baseline on the first `training_days` closes and forecasts every later
/// day from the actual previous close.
pub fn baseline_absolute_fts<T: Scalar>(
    series: &PriceSeries<T>,
    n: usize,
    training_days: usize,
) -> Result<Vec<(NaiveDate, T)>> {
    if training_days >= series.len() {
        return Err(Error::arg(format!(
            "{training_days} training days leave nothing to forecast in {} closes",
            series.len()
        )));
    }
    let training: Vec<T> = series.closes().take(training_days).collect();
    let model = BaselineForecaster::fit(&training, n)?;
    Ok((training_days..series.len())
        .map(|t| (series.date(t), model.forecast(series.close(t - 1))))
        .collect())
}
