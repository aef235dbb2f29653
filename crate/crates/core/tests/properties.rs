use approx::assert_relative_eq;
use chrono::NaiveDate;
use fuzzy_lrs::{
    backtest, forecast_from_prices, forecast_percent, fuzzify, mape, match_degrees_naive,
    percent_changes, price_from_percent, rmse, BacktestWindow, DegreeStats, EvalPair,
    ForecastConfig, IndexedMatcher, PartitionF64, PercentScaling, PriceSeriesF64, QuerySuffix,
    ReturnPoint, ReturnSeries, SuffixIndex, SymbolSequence, UniversePartition,
};
use proptest::prelude::*;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 4).unwrap()
}

fn closes(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    (50.0..500.0f64, prop::collection::vec(-6.9..6.9f64, len)).prop_map(|(first, changes)| {
        let mut price = first;
        let mut out = vec![price];
        for c in changes {
            price *= 1.0 + c / 100.0;
            out.push(price);
        }
        out
    })
}

/// Training text, alphabet size and a query whose tail may repeat inside the text.
fn matcher_case() -> impl Strategy<Value = (Vec<u16>, usize, Vec<u16>, usize)> {
    (2usize..=35, 1usize..=3, 1usize..=500, 1usize..=20).prop_flat_map(
        |(alphabet, spread, len, qlen)| {
            let effective = alphabet.min(spread + 1) as u16;
            let text = prop::collection::vec(1..=effective, len);
            let query = prop::collection::vec(1..=alphabet as u16, qlen);
            (text, Just(alphabet), query, 1..=qlen)
        },
    )
}

fn returns(changes: &[f64]) -> ReturnSeries<f64> {
    ReturnSeries::from_entries(
        changes
            .iter()
            .enumerate()
            .map(|(i, &change)| ReturnPoint {
                date: start() + chrono::Days::new(i as u64),
                change,
            })
            .collect(),
    )
    .unwrap()
}

fn pairs(values: &[(f64, f64)]) -> Vec<EvalPair<f64>> {
    values
        .iter()
        .map(|&(f, a)| EvalPair::new(start(), f, a).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn indexed_matches_naive((text, alphabet, query, max_degree) in matcher_case()) {
        let training = SymbolSequence::new(text, alphabet).unwrap();
        let query = QuerySuffix::new(query, max_degree).unwrap();
        let naive = match_degrees_naive(&training, &query).unwrap();
        let indexed = SuffixIndex::build(&training).unwrap().match_degrees(&query);
        prop_assert_eq!(naive, indexed);
    }

    #[test]
    fn suffix_of_text_always_matches((text, alphabet, _q, _d) in matcher_case(), cut in 0.0..1.0f64, qlen in 1usize..=20) {
        let end = ((text.len() as f64 * cut) as usize).clamp(1, text.len());
        let query: Vec<u16> = text[end.saturating_sub(qlen)..end].to_vec();
        let max_degree = query.len();
        let training = SymbolSequence::new(text.clone(), alphabet).unwrap();
        let result = SuffixIndex::build(&training).unwrap().match_degrees(&QuerySuffix::new(query, max_degree).unwrap());
        // the query's own occurrence has a successor unless it ends the text
        if end < text.len() {
            prop_assert_eq!(result.max_degree(), max_degree);
        }
    }

    #[test]
    fn degrees_are_contiguous_and_totals_shrink((text, alphabet, query, max_degree) in matcher_case()) {
        let training = SymbolSequence::new(text, alphabet).unwrap();
        let query = QuerySuffix::new(query, max_degree).unwrap();
        let result = SuffixIndex::build(&training).unwrap().match_degrees(&query);
        for (i, s) in result.stats.iter().enumerate() {
            prop_assert_eq!(s.degree, i + 1);
            prop_assert!(s.total > 0);
            prop_assert_eq!(s.successor_counts.values().sum::<usize>(), s.total);
        }
        for w in result.stats.windows(2) {
            prop_assert!(w[1].total <= w[0].total);
        }
    }

    #[test]
    fn changes_have_one_fewer_entry(cl in closes(1..=200)) {
        let series = PriceSeriesF64::from_closes(start(), &cl).unwrap();
        let r = percent_changes(&series).unwrap();
        prop_assert_eq!(r.len(), series.len() - 1);
    }

    #[test]
    fn changes_ignore_price_scale(cl in closes(1..=100), k in 1e-3..1e3f64) {
        let a = percent_changes(&PriceSeriesF64::from_closes(start(), &cl).unwrap()).unwrap();
        let scaled: Vec<f64> = cl.iter().map(|c| c * k).collect();
        let b = percent_changes(&PriceSeriesF64::from_closes(start(), &scaled).unwrap()).unwrap();
        for (x, y) in a.changes().zip(b.changes()) {
            prop_assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn changes_reconstruct_closes(cl in closes(1..=100)) {
        let r = percent_changes(&PriceSeriesF64::from_closes(start(), &cl).unwrap()).unwrap();
        for (got, want) in r.reconstruct(cl[0]).iter().zip(&cl) {
            assert_relative_eq!(*got, *want, max_relative = 1e-9);
        }
    }

    #[test]
    fn every_change_lands_in_one_interval(n in 2usize..=35, change in -7.0..=7.0f64) {
        let p = PartitionF64::daily_limit(n).unwrap();
        let (sym, clamped) = p.locate(change);
        prop_assert!(!clamped);
        let i = sym.index();
        prop_assert!((1..=n).contains(&i));
        let (lo, hi) = p.bounds(i).unwrap();
        prop_assert!(lo <= change && (change < hi || (i == n && change <= hi)), "{change} not in [{lo}, {hi})");
        let inside = (1..=n).filter(|&j| {
            let (lo, hi) = p.bounds(j).unwrap();
            lo <= change && (change < hi || (j == n && change == hi))
        });
        prop_assert_eq!(inside.count(), 1);
    }

    #[test]
    fn midpoints_are_interior_and_increasing(n in 2usize..=35) {
        let p = PartitionF64::daily_limit(n).unwrap();
        let m = p.midpoints();
        for (i, &mid) in m.iter().enumerate() {
            let (lo, hi) = p.bounds(i + 1).unwrap();
            prop_assert!(lo < mid && mid < hi);
        }
        prop_assert!(m.windows(2).all(|w| w[0] < w[1]));
        if n % 2 == 1 {
            // the centre interval straddles zero
            prop_assert!(m[n / 2].abs() < 1e-12);
        } else {
            prop_assert!(p.bounds(n / 2).unwrap().1.abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_changes_clamp_to_the_edges(n in 2usize..=35, excess in 1e-6..100.0f64) {
        let p = PartitionF64::daily_limit(n).unwrap();
        prop_assert_eq!(p.locate(7.0 + excess), (p.locate(7.0).0, true));
        prop_assert_eq!(p.locate(-7.0 - excess), (p.locate(-7.0).0, true));
    }

    #[test]
    fn defuzzify_is_within_half_a_width(n in 2usize..=35, changes in prop::collection::vec(-7.0..=7.0f64, 1..50)) {
        let p = PartitionF64::daily_limit(n).unwrap();
        let f = fuzzify(&p, &returns(&changes));
        for (c, m) in changes.iter().zip(f.defuzzify()) {
            prop_assert!((c - m).abs() <= p.width() / 2.0 + 1e-12);
        }
    }

    #[test]
    fn forecast_percent_stays_within_extreme_midpoints(n in 2usize..=35, raw in prop::collection::vec(0usize..50, 35)) {
        let p = PartitionF64::daily_limit(n).unwrap();
        let counts: Vec<(u16, usize)> = (1..=n as u16).zip(raw.iter().copied()).collect();
        prop_assume!(counts.iter().any(|&(_, c)| c > 0));
        let pct = forecast_percent(&DegreeStats::from_counts(1, counts.clone()), &p).unwrap();
        let m = p.midpoints();
        let used: Vec<f64> = counts.iter().filter(|c| c.1 > 0).map(|c| m[c.0 as usize - 1]).collect();
        let (lo, hi) = used.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        prop_assert!(lo - 1e-12 <= pct && pct <= hi + 1e-12);
        prop_assert!(pct.abs() <= 7.0);
    }

    #[test]
    fn forecast_percent_ignores_count_scale_and_order(n in 2usize..=35, raw in prop::collection::vec(0usize..50, 35), k in 1usize..20) {
        let p = PartitionF64::daily_limit(n).unwrap();
        let counts: Vec<(u16, usize)> = (1..=n as u16).zip(raw.iter().copied()).collect();
        prop_assume!(counts.iter().any(|&(_, c)| c > 0));
        let base = forecast_percent(&DegreeStats::from_counts(1, counts.clone()), &p).unwrap();
        let scaled = forecast_percent(&DegreeStats::from_counts(1, counts.iter().map(|&(s, c)| (s, c * k))), &p).unwrap();
        let reversed = forecast_percent(&DegreeStats::from_counts(1, counts.iter().rev().copied()), &p).unwrap();
        assert_relative_eq!(base, scaled, epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(base, reversed, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn unit_consistent_forecasts_move_at_most_the_limit(cl in closes(2..=150), n in 2usize..=35) {
        let series = PriceSeriesF64::from_closes(start(), &cl).unwrap();
        let cfg = ForecastConfig::new(PartitionF64::daily_limit(n).unwrap());
        let f = forecast_from_prices(&series, &cfg, &IndexedMatcher).unwrap();
        let prev = *cl.last().unwrap();
        prop_assert!((f.final_price / prev - 1.0).abs() <= 0.07 + 1e-12);
        for d in &f.per_degree {
            prop_assert!((d.forecast_price / prev - 1.0).abs() <= 0.07 + 1e-12);
        }
    }

    #[test]
    fn price_modes_differ_by_a_factor_of_100(prev in 1.0..1e4f64, pct in -0.9..0.9f64) {
        let unit = price_from_percent(prev, pct, PercentScaling::UnitConsistent).unwrap();
        let compat = price_from_percent(prev, pct / 100.0, PercentScaling::Table3Compat).unwrap();
        assert_relative_eq!(unit, compat, max_relative = 1e-12);
    }

    #[test]
    fn mape_ignores_scale_and_rmse_scales_linearly(
        values in prop::collection::vec((1.0..1e4f64, 1.0..1e4f64), 1..50),
        k in 1e-2..1e2f64,
    ) {
        let base = pairs(&values);
        let scaled = pairs(&values.iter().map(|&(f, a)| (f * k, a * k)).collect::<Vec<_>>());
        assert_relative_eq!(mape(&base).unwrap(), mape(&scaled).unwrap(), max_relative = 1e-9);
        assert_relative_eq!(rmse(&base).unwrap() * k, rmse(&scaled).unwrap(), epsilon = 1e-9, max_relative = 1e-9);
    }

    #[test]
    fn rmse_is_zero_only_for_perfect_forecasts(values in prop::collection::vec((1.0..1e4f64, 1.0..1e4f64), 1..50)) {
        let perfect = pairs(&values.iter().map(|&(_, a)| (a, a)).collect::<Vec<_>>());
        prop_assert_eq!(rmse(&perfect).unwrap(), 0.0);
        prop_assert_eq!(mape(&perfect).unwrap(), 0.0);
        let any_miss = values.iter().any(|(f, a)| f != a);
        prop_assert_eq!(rmse(&pairs(&values)).unwrap() > 0.0, any_miss);
    }

    #[test]
    fn truncation_leaves_earlier_forecasts_alone(cl in closes(4..=80), cut in 0.0..1.0f64, n in 2usize..=12) {
        let series = PriceSeriesF64::from_closes(start(), &cl).unwrap();
        let t = 2 + ((series.len() - 3) as f64 * cut) as usize;
        let cfg = ForecastConfig::new(UniversePartition::daily_limit(n).unwrap());
        let window = BacktestWindow { to: Some(series.date(t)), ..BacktestWindow::expanding() };
        let full = backtest(&series, &cfg, &window).unwrap();
        let cut = backtest(&series.slice(0, t + 1), &cfg, &BacktestWindow::expanding()).unwrap();
        prop_assert_eq!(full.pairs, cut.pairs);
    }
}
