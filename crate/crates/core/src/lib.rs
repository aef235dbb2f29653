//! Next-day price forecasting from fuzzified daily returns.
//!
//! Closing prices become daily percentage changes, which are binned into equal
//! intervals of a bounded universe (±7% by default). The recent run of interval
//! symbols is then matched, suffix by suffix, against the whole history; each
//! matched suffix length ("degree") yields the distribution of what came next,
//! its count-weighted midpoint becomes a forecast change, and the forecast
//! price is the mean over degrees.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! and `*F32` aliases below name the common instantiations.
//!
//! ```
//! use fuzzy_lrs::{forecast_from_prices, ForecastConfig, IndexedMatcher, PriceSeriesF64, UniversePartition};
//!
//! let start = chrono::NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
//! let closes = [100.0, 101.0, 100.5, 101.5, 101.0, 102.0];
//! let prices = PriceSeriesF64::from_closes(start, &closes).unwrap();
//! let cfg = ForecastConfig::new(UniversePartition::daily_limit(3).unwrap());
//! let f = forecast_from_prices(&prices, &cfg, &IndexedMatcher).unwrap();
//! assert!(f.final_price > 0.0);
//! ```

// `!(x > 0)` is the NaN-rejecting check throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod experiments;
pub mod forecast;
pub mod fuzzy;
pub mod io;
pub mod matcher;
pub mod scalar;
pub mod selftest;
pub mod series;

pub use error::{Error, Result};
pub use eval::{
    backtest, backtest_with, mape, rmse, BacktestReport, BacktestWindow, DayDetail, EvalPair,
    TrainingLength,
};
pub use experiments::{
    baseline_absolute_fts, sweep_intervals, sweep_training_length, BaselineForecaster, SweepParam,
    SweepResult, SweepRow,
};
pub use forecast::{
    aggregate, forecast_from_prices, forecast_next, forecast_percent, price_from_percent,
    DegreeForecast, Forecast, ForecastConfig, PercentScaling,
};
pub use fuzzy::{fuzzify, FuzzySeries, FuzzySymbol, UniversePartition};
pub use io::{ingest_csv, IngestSpec, Ingested, OutputFormat, RunConfig};
pub use matcher::{
    match_degrees, match_degrees_naive, DegreeMatcher, DegreeStats, IndexedMatcher, MatchResult,
    NaiveMatcher, QuerySuffix, SuffixIndex, SymbolSequence, DEFAULT_MAX_DEGREE,
};
pub use scalar::Scalar;
pub use series::{
    percent_changes, random_walk, synth_scenario, validate_points, Finding, PricePoint,
    PriceSeries, ReturnPoint, ReturnSeries, Scenario, ValidationReport, Variant,
};

pub type PricePointF64 = PricePoint<f64>;
pub type PriceSeriesF64 = PriceSeries<f64>;
pub type ReturnSeriesF64 = ReturnSeries<f64>;
pub type PartitionF64 = UniversePartition<f64>;
pub type FuzzySeriesF64 = FuzzySeries<f64>;
pub type ForecastConfigF64 = ForecastConfig<f64>;
pub type ForecastF64 = Forecast<f64>;
pub type EvalPairF64 = EvalPair<f64>;
pub type BacktestReportF64 = BacktestReport<f64>;
pub type SweepResultF64 = SweepResult<f64>;
pub type BaselineF64 = BaselineForecaster<f64>;

pub type PriceSeriesF32 = PriceSeries<f32>;
pub type PartitionF32 = UniversePartition<f32>;
pub type ForecastConfigF32 = ForecastConfig<f32>;
pub type ForecastF32 = Forecast<f32>;
pub type BacktestReportF32 = BacktestReport<f32>;
