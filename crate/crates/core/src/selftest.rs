//! Golden checks against the published worked examples.

use chrono::NaiveDate;

use crate::eval::{mape, rmse, EvalPair};
use crate::forecast::{
    aggregate, forecast_percent, price_from_percent, DegreeForecast, PercentScaling,
};
use crate::fuzzy::{fuzzify, UniversePartition};
use crate::matcher::{match_degrees_naive, DegreeStats, QuerySuffix, SuffixIndex, SymbolSequence};
use crate::series::{percent_changes, PriceSeries, ReturnPoint, ReturnSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Successor counts over A1..A7 for the four degrees of the worked example.
pub const TABLE2_COUNTS: [[usize; 7]; 4] = [
    [30, 70, 150, 250, 100, 80, 50],
    [25, 50, 100, 200, 80, 60, 40],
    [10, 20, 60, 150, 50, 30, 25],
    [0, 0, 10, 100, 20, 10, 5],
];
/// Printed forecast percents for those rows.
#[allow(clippy::approx_constant)]
pub const TABLE2_PERCENTS: [f64; 4] = [0.082, 0.162, 0.318, 0.620];
pub const TABLE3_PRICES: [f64; 4] = [108.2, 116.2, 131.8, 162.0];
pub const TABLE3_FINAL: f64 = 129.55;

pub const TABLE1_CHANGES: [f64; 6] = [5.58, 0.65, -1.31, 1.20, -0.55, 1.02];
pub const TABLE1_SYMBOLS: [u16; 6] = [7, 4, 3, 5, 4, 5];

pub fn table2_stats(row: usize) -> DegreeStats {
    DegreeStats::from_counts(
        row + 1,
        TABLE2_COUNTS[row]
            .iter()
            .enumerate()
            .map(|(i, &n)| (i as u16 + 1, n)),
    )
}

fn day(i: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 12, 26).expect("valid date") + chrono::Days::new(i)
}

fn change_extent() -> Check {
    let detail;
    let passed = match PriceSeries::<f64>::from_closes(day(0), &[55.5, 58.6])
        .and_then(|s| percent_changes(&s))
    {
        Ok(r) => {
            let c = r.entries()[0].change;
            detail = format!("55.5 -> 58.6 gives {c:.4}%");
            (c - 5.5856).abs() < 1e-4
        }
        Err(e) => {
            detail = e.to_string();
            false
        }
    };
    Check::new("change extent 55.5 -> 58.6", passed, detail)
}

fn table1() -> Check {
    let p = UniversePartition::<f64>::daily_limit(7).expect("valid partition");
    let returns = ReturnSeries::from_entries(
        TABLE1_CHANGES
            .iter()
            .enumerate()
            .map(|(i, &c)| ReturnPoint {
                date: day(i as u64),
                change: c,
            })
            .collect(),
    )
    .expect("finite changes");
    let got = fuzzify(&p, &returns).indices();
    Check::new(
        "Table I fuzzification (n=7)",
        got == TABLE1_SYMBOLS,
        format!("{got:?} expected {TABLE1_SYMBOLS:?}"),
    )
}

/// The one golden row whose recomputed value misses the printed figure by more
/// than the ±0.0005 tolerance: the printed value is truncated, not rounded.
pub const KNOWN_TRUNCATED_ROW: &str = "Table II row A5A4A5 -> 0.318";

fn table2_rows() -> Vec<Check> {
    let p = UniversePartition::<f64>::daily_limit(7).expect("valid partition");
    const NAMES: [&str; 3] = [
        "Table II row A5 -> 0.082",
        "Table II row A4A5 -> 0.162",
        "Table II row A5A4A5 -> 0.318",
    ];
    NAMES
        .iter()
        .enumerate()
        .map(|(row, &name)| {
            let got = forecast_percent(&table2_stats(row), &p).unwrap_or(f64::NAN);
            let want = TABLE2_PERCENTS[row];
            let passed = (got - want).abs() <= 5e-4;
            let mut detail = format!("{got:.5} vs {want} ± 0.0005");
            if !passed && (got * 1000.0).floor() == (want * 1000.0).round() {
                detail.push_str(" (printed value is this one truncated to 3 decimals)");
            }
            Check::new(name, passed, detail)
        })
        .collect()
}

fn lrs_example() -> Check {
    let training = SymbolSequence::new(vec![1, 3, 2, 2, 1, 3, 1], 3).expect("valid sequence");
    let query = QuerySuffix::new(vec![2, 1, 3], 3).expect("valid query");
    let want: Vec<Vec<(u16, usize)>> =
        vec![vec![(1, 1), (2, 1)], vec![(1, 1), (2, 1)], vec![(1, 1)]];
    let flatten = |r: &crate::matcher::MatchResult| -> Vec<Vec<(u16, usize)>> {
        r.stats
            .iter()
            .map(|s| s.successor_counts.iter().map(|(&k, &v)| (k, v)).collect())
            .collect()
    };
    let naive = match_degrees_naive(&training, &query).map(|r| flatten(&r));
    let indexed = SuffixIndex::build(&training).map(|idx| flatten(&idx.match_degrees(&query)));
    let passed = matches!((&naive, &indexed), (Ok(a), Ok(b)) if *a == want && *b == want);
    Check::new(
        "repeated-suffix example (orders 1-3)",
        passed,
        format!("naive {naive:?}, indexed {indexed:?}"),
    )
}

fn table3() -> Check {
    let per_degree: Result<Vec<DegreeForecast<f64>>, _> = TABLE2_PERCENTS
        .iter()
        .enumerate()
        .map(|(i, &pct)| {
            price_from_percent(100.0, pct, PercentScaling::Table3Compat).map(|price| {
                DegreeForecast {
                    degree: i + 1,
                    forecast_percent: pct,
                    forecast_price: price,
                }
            })
        })
        .collect();
    match per_degree {
        Ok(per_degree) => {
            let prices: Vec<f64> = per_degree.iter().map(|d| d.forecast_price).collect();
            let f = aggregate(per_degree, 100.0);
            let prices_ok = prices
                .iter()
                .zip(TABLE3_PRICES)
                .all(|(g, w)| (g - w).abs() <= 0.005);
            Check::new(
                "Table III prices and 129.55 average",
                prices_ok && (f.final_price - TABLE3_FINAL).abs() <= 0.005,
                format!("prices {prices:?}, final {:.4}", f.final_price),
            )
        }
        Err(e) => Check::new("Table III prices and 129.55 average", false, e.to_string()),
    }
}

fn table4() -> Check {
    let small =
        EvalPair::new(day(0), 1020.0f64, 1010.0).and_then(|p| Ok((rmse(&[p])?, mape(&[p])?)));
    let large =
        EvalPair::new(day(0), 10200.0f64, 10100.0).and_then(|p| Ok((rmse(&[p])?, mape(&[p])?)));
    let passed = match (&small, &large) {
        (Ok((r1, m1)), Ok((r2, m2))) => {
            *r1 == 10.0 && *r2 == 100.0 && (m1 - 0.990).abs() <= 1e-3 && (m2 - 0.990).abs() <= 1e-3
        }
        _ => false,
    };
    Check::new(
        "Table IV RMSE/MAPE",
        passed,
        format!("(1010, 1020) -> {small:?}; (10100, 10200) -> {large:?}"),
    )
}

/// Runs every golden check in a fixed order.
pub fn run_selftest() -> Vec<Check> {
    let mut checks = vec![change_extent(), table1()];
    checks.extend(table2_rows());
    checks.push(lrs_example());
    checks.push(table3());
    checks.push(table4());
    checks
}
