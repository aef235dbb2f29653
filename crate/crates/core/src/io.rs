//! CSV ingestion, run configuration and report serialization.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::eval::{BacktestReport, BacktestWindow};
use crate::experiments::{SweepParam, SweepResult};
use crate::forecast::{Forecast, ForecastConfig, PercentScaling};
use crate::fuzzy::UniversePartition;
use crate::matcher::DEFAULT_MAX_DEGREE;
use crate::scalar::Scalar;
use crate::series::{validate_points, PricePoint, PriceSeries, ValidationReport};

pub const DEFAULT_DATE_FORMAT: &str = "%Y-%m-%d";

/// Where and how to read closes from a CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub date_column: String,
    pub close_column: String,
    /// `chrono` format string for the date column.
    pub date_format: String,
    /// Universe used to count out-of-range changes in the validation report.
    pub bounds: (f64, f64),
}

impl IngestSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            date_column: "date".into(),
            close_column: "close".into(),
            date_format: DEFAULT_DATE_FORMAT.into(),
            bounds: (-7.0, 7.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ingested<T> {
    pub series: PriceSeries<T>,
    /// Findings on the rows in file order, before sorting.
    pub report: ValidationReport,
}

/// Reads `(date, close)` rows, sorts them by date and validates them.
///
/// Unparseable cells, non-positive closes and duplicate dates are errors that
/// name the 1-based file line.
pub fn ingest_csv<T: Scalar>(spec: &IngestSpec) -> Result<Ingested<T>> {
    let file = std::fs::File::open(&spec.path).map_err(|source| Error::Io {
        path: spec.path.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let at = |line: u64, message: String| Error::Ingest {
        path: spec.path.clone(),
        line,
        message,
    };

    let headers = reader.headers().map_err(|e| at(1, e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                at(
                    1,
                    format!(
                        "missing column '{name}' in header {:?}",
                        headers.iter().collect::<Vec<_>>()
                    ),
                )
            })
    };
    let date_col = column(&spec.date_column)?;
    let close_col = column(&spec.close_column)?;

    let mut rows: Vec<(u64, PricePoint<T>)> = Vec::new();
    let mut seen: HashMap<NaiveDate, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            at(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| {
            record
                .get(i)
                .ok_or_else(|| at(line, format!("row has no column {}", i + 1)))
        };
        let raw_date = cell(date_col)?;
        let date = NaiveDate::parse_from_str(raw_date, &spec.date_format).map_err(|e| {
            at(
                line,
                format!(
                    "bad date '{raw_date}' for format '{}': {e}",
                    spec.date_format
                ),
            )
        })?;
        let raw_close = cell(close_col)?;
        let close: f64 = raw_close
            .parse()
            .map_err(|_| at(line, format!("bad close '{raw_close}'")))?;
        if !(close > 0.0) || !close.is_finite() {
            return Err(at(line, format!("close must be positive, got {raw_close}")));
        }
        if let Some(first) = seen.insert(date, line) {
            return Err(at(
                line,
                format!("duplicate date {date} (first seen on line {first})"),
            ));
        }
        rows.push((line, PricePoint::new(date, T::lit(close))));
    }

    let points: Vec<PricePoint<T>> = rows.into_iter().map(|(_, p)| p).collect();
    let report = validate_points(&points, T::lit(spec.bounds.0), T::lit(spec.bounds.1));
    let mut sorted = points;
    sorted.sort_by_key(|p| p.date);
    Ok(Ingested {
        series: PriceSeries::new(sorted)?,
        report,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::arg(format!("unknown output format '{other}'"))),
        }
    }
}

/// Every knob of a run. Reports embed it so a result can be reproduced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub d_min: f64,
    pub d_max: f64,
    pub intervals: usize,
    pub max_degree: usize,
    pub percent_scaling: PercentScaling,
    pub window: BacktestWindow,
    pub format: OutputFormat,
    /// Seed for synthetic data; unused for file input.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d_min: -7.0,
            d_max: 7.0,
            intervals: 3,
            max_degree: DEFAULT_MAX_DEGREE,
            percent_scaling: PercentScaling::UnitConsistent,
            window: BacktestWindow::default(),
            format: OutputFormat::Csv,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 11] = [
        "d_min",
        "d_max",
        "n",
        "max_degree",
        "percent_scaling",
        "from",
        "to",
        "last",
        "training",
        "format",
        "seed",
    ];

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = |what: &str| Error::arg(format!("bad value '{value}' for {what}"));
        match key.trim() {
            "d_min" => self.d_min = value.parse().map_err(|_| num("d_min"))?,
            "d_max" => self.d_max = value.parse().map_err(|_| num("d_max"))?,
            "n" | "intervals" => self.intervals = value.parse().map_err(|_| num("n"))?,
            "max_degree" => self.max_degree = value.parse().map_err(|_| num("max_degree"))?,
            "percent_scaling" => self.percent_scaling = value.parse()?,
            "from" => self.window.from = parse_optional_date(value)?,
            "to" => self.window.to = parse_optional_date(value)?,
            "last" => {
                self.window.last = match value {
                    "" | "none" => None,
                    v => Some(v.parse().map_err(|_| num("last"))?),
                }
            }
            "training" => self.window.training = value.parse()?,
            "format" => self.format = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| num("seed"))?,
            other => return Err(Error::arg(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::arg(format!("config line {}: expected key=value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::arg(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_kv(&text)
    }

    /// `(key, value)` pairs in [`Self::KEYS`] order; parseable by [`Self::set`].
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let opt_date =
            |d: Option<NaiveDate>| d.map_or_else(|| "none".to_string(), |d| d.to_string());
        vec![
            ("d_min", self.d_min.to_string()),
            ("d_max", self.d_max.to_string()),
            ("n", self.intervals.to_string()),
            ("max_degree", self.max_degree.to_string()),
            ("percent_scaling", self.percent_scaling.to_string()),
            ("from", opt_date(self.window.from)),
            ("to", opt_date(self.window.to)),
            (
                "last",
                self.window
                    .last
                    .map_or_else(|| "none".into(), |k| k.to_string()),
            ),
            ("training", self.window.training.to_string()),
            ("format", self.format.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn to_kv(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn partition<T: Scalar>(&self) -> Result<UniversePartition<T>> {
        UniversePartition::new(T::lit(self.d_min), T::lit(self.d_max), self.intervals)
    }

    pub fn forecast_config<T: Scalar>(&self) -> Result<ForecastConfig<T>> {
        if self.max_degree == 0 {
            return Err(Error::arg("max_degree must be at least 1"));
        }
        Ok(ForecastConfig::new(self.partition()?)
            .with_max_degree(self.max_degree)
            .with_scaling(self.percent_scaling))
    }

    fn json(&self) -> serde_json::Value {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
            .collect::<serde_json::Map<_, _>>()
            .into()
    }
}

fn parse_optional_date(value: &str) -> Result<Option<NaiveDate>> {
    match value {
        "" | "none" => Ok(None),
        v => NaiveDate::parse_from_str(v, DEFAULT_DATE_FORMAT)
            .map(Some)
            .map_err(|e| Error::arg(format!("bad date '{v}': {e}"))),
    }
}

fn write_config_header<W: Write + ?Sized>(
    out: &mut W,
    kind: &str,
    cfg: &RunConfig,
) -> std::io::Result<()> {
    writeln!(out, "# fuzzy-lrs {kind}")?;
    for (k, v) in cfg.to_pairs() {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<output>"),
        source: e,
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write + ?Sized>(out: &mut W, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out).map_err(io_err)
}

/// `date,close` rows.
pub fn write_series_csv<T: Scalar, W: Write + ?Sized>(
    out: &mut W,
    series: &PriceSeries<T>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "close"])?;
    for p in series.points() {
        w.write_record([p.date.to_string(), p.close.to_string()])?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// `#`-prefixed config and summary lines, then `date,forecast,actual,abs_error`.
pub fn write_backtest_csv<T: Scalar, W: Write + ?Sized>(
    out: &mut W,
    report: &BacktestReport<T>,
    cfg: &RunConfig,
) -> Result<()> {
    write_config_header(out, "backtest", cfg).map_err(io_err)?;
    writeln!(
        out,
        "# rmse={} mape={} n_days={} fallback_days={} avg_match_len={}",
        report.rmse,
        report.mape,
        report.n_days,
        report.fallback_days,
        report.avg_match_len()
    )
    .map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "forecast", "actual", "abs_error"])?;
    for p in &report.pairs {
        w.write_record([
            p.date.to_string(),
            p.forecast.to_string(),
            p.actual.to_string(),
            p.abs_error().to_string(),
        ])?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn backtest_json<T: Scalar>(report: &BacktestReport<T>, cfg: &RunConfig) -> serde_json::Value {
    let rows: Vec<_> = report
        .pairs
        .iter()
        .zip(&report.details)
        .map(|(p, d)| {
            json!({
                "date": p.date.to_string(),
                "forecast": p.forecast.to_f64_lossy(),
                "actual": p.actual.to_f64_lossy(),
                "abs_error": p.abs_error().to_f64_lossy(),
                "matched_degree": d.matched_degree,
                "fallback": d.fallback,
            })
        })
        .collect();
    json!({
        "kind": "backtest",
        "config": cfg.json(),
        "summary": {
            "rmse": report.rmse.to_f64_lossy(),
            "mape": report.mape.to_f64_lossy(),
            "n_days": report.n_days,
            "fallback_days": report.fallback_days,
            "avg_match_len": report.avg_match_len(),
        },
        "rows": rows,
    })
}

/// `n,rmse,mape,avg_match_len` for interval sweeps, `length,...` for training sweeps.
pub fn write_sweep_csv<T: Scalar, W: Write + ?Sized>(
    out: &mut W,
    sweep: &SweepResult<T>,
    cfg: &RunConfig,
) -> Result<()> {
    let training = matches!(
        sweep.rows.first().map(|r| r.param),
        Some(SweepParam::TrainingLength(_))
    );
    let kind = if training {
        "sweep-training"
    } else {
        "sweep-intervals"
    };
    write_config_header(out, kind, cfg).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        if training { "length" } else { "n" },
        "rmse",
        "mape",
        "avg_match_len",
    ])?;
    for r in &sweep.rows {
        w.write_record([
            r.param.to_string(),
            r.rmse.to_string(),
            r.mape.to_string(),
            r.avg_match_len.to_string(),
        ])?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn sweep_json<T: Scalar>(sweep: &SweepResult<T>, cfg: &RunConfig) -> serde_json::Value {
    let rows: Vec<_> = sweep
        .rows
        .iter()
        .map(|r| {
            json!({
                "param": r.param.to_string(),
                "rmse": r.rmse.to_f64_lossy(),
                "mape": r.mape.to_f64_lossy(),
                "avg_match_len": r.avg_match_len,
                "n_days": r.n_days,
            })
        })
        .collect();
    json!({ "kind": "sweep", "config": cfg.json(), "rows": rows })
}

fn pattern_label(symbols: &[u16]) -> String {
    symbols.iter().map(|s| format!("A{s}")).collect()
}

/// Per-degree table: pattern, successor counts per interval, percent and price,
/// followed by a `final` row.
pub fn write_forecast_table<T: Scalar, W: Write + ?Sized>(
    out: &mut W,
    forecast: &Forecast<T>,
    intervals: usize,
    cfg: &RunConfig,
) -> Result<()> {
    write_config_header(out, "forecast", cfg).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["pattern".to_string()];
    header.extend((1..=intervals).map(|i| format!("A{i}")));
    header.extend(["forecast_percent".into(), "forecast_price".into()]);
    w.write_record(&header)?;
    for (stats, d) in forecast.matches.stats.iter().zip(&forecast.per_degree) {
        let pattern = &forecast.query[forecast.query.len() - d.degree..];
        let mut row = vec![pattern_label(pattern)];
        row.extend((1..=intervals).map(|i| stats.count(i as u16).to_string()));
        row.push(d.forecast_percent.to_string());
        row.push(d.forecast_price.to_string());
        w.write_record(&row)?;
    }
    let mut last = vec!["final".to_string()];
    last.extend(std::iter::repeat_n(String::new(), intervals));
    last.push(if forecast.fallback_used {
        "fallback".into()
    } else {
        String::new()
    });
    last.push(forecast.final_price.to_string());
    w.write_record(&last)?;
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn forecast_json<T: Scalar>(forecast: &Forecast<T>, cfg: &RunConfig) -> serde_json::Value {
    let degrees: Vec<_> = forecast
        .matches
        .stats
        .iter()
        .zip(&forecast.per_degree)
        .map(|(stats, d)| {
            json!({
                "degree": d.degree,
                "pattern": pattern_label(&forecast.query[forecast.query.len() - d.degree..]),
                "successor_counts": stats.successor_counts.iter().map(|(k, v)| (format!("A{k}"), json!(v))).collect::<serde_json::Map<_, _>>(),
                "forecast_percent": d.forecast_percent.to_f64_lossy(),
                "forecast_price": d.forecast_price.to_f64_lossy(),
            })
        })
        .collect();
    json!({
        "kind": "forecast",
        "config": cfg.json(),
        "previous_price": forecast.previous_price.to_f64_lossy(),
        "final_price": forecast.final_price.to_f64_lossy(),
        "fallback_used": forecast.fallback_used,
        "degrees": degrees,
    })
}
