use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use fuzzy_lrs::io::{
    backtest_json, forecast_json, sweep_json, write_backtest_csv, write_forecast_table, write_json,
    write_series_csv, write_sweep_csv,
};
use fuzzy_lrs::selftest::run_selftest;
use fuzzy_lrs::{
    backtest, forecast_from_prices, ingest_csv, random_walk, sweep_intervals,
    sweep_training_length, synth_scenario, Error, IndexedMatcher, IngestSpec, OutputFormat,
    PercentScaling, PriceSeriesF64, RunConfig, TrainingLength,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "fuzzy-lrs",
    version,
    about = "Forecast next-day closes from fuzzified daily changes and repeated suffix patterns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Forecast the day after the last close, printing one row per matched degree.
    Forecast {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rolling one-day-ahead backtest with RMSE and MAPE.
    Backtest {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One backtest per interval count.
    SweepIntervals {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 31)]
        n_max: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One backtest per training-history length over the same forecast days.
    SweepTraining {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Comma-separated lengths: `full`, `<n>d` (closes) or `<n>y` (calendar years).
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit a synthetic series as `date,close` CSV.
    Synth {
        /// Trend scenario (`fig1` rising, `fig2` falling).
        #[arg(long, conflicts_with = "random_walk")]
        scenario: Option<String>,
        /// rise-then-rise, rise-then-fall (fig1); fall-then-fall, fall-then-rise (fig2).
        #[arg(long, requires = "scenario")]
        variant: Option<String>,
        /// Seeded random walk instead of a scenario.
        #[arg(long)]
        random_walk: bool,
        #[arg(long, default_value_t = 200)]
        days: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100.0)]
        start: f64,
        /// Daily standard deviation of changes, in percent.
        #[arg(long, default_value_t = 1.2)]
        sd: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-run the published worked examples.
    Selftest,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "date")]
    date_column: String,
    #[arg(long, default_value = "close")]
    close_column: String,
    #[arg(long, default_value = fuzzy_lrs::io::DEFAULT_DATE_FORMAT)]
    date_format: String,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// key=value file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of intervals (2..=35).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    d_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d_max: Option<f64>,
    #[arg(long)]
    max_degree: Option<usize>,
    /// Apply percents as `prev * (1 + pct)` like the published tables.
    #[arg(long)]
    compat_table3: bool,
}

#[derive(Args, Debug)]
struct WindowArgs {
    /// First forecast date (YYYY-MM-DD).
    #[arg(long)]
    from: Option<String>,
    /// Last forecast date (YYYY-MM-DD).
    #[arg(long)]
    to: Option<String>,
    /// Only the last N selected days.
    #[arg(long)]
    last: Option<usize>,
    /// History each forecast sees: `full`, `<n>d` or `<n>y`.
    #[arg(long)]
    training: Option<String>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Write here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { EXIT_USAGE } else { EXIT_DATA })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Forecast {
            input,
            model,
            output,
        } => {
            let cfg = run_config(&model, None, &output)?;
            let series = load(&input, &cfg)?;
            let f = forecast_from_prices(&series, &cfg.forecast_config::<f64>()?, &IndexedMatcher)?;
            emit(&output, |w| match cfg.format {
                OutputFormat::Csv => write_forecast_table(w, &f, cfg.intervals, &cfg),
                OutputFormat::Json => write_json(w, &forecast_json(&f, &cfg)),
            })?;
        }
        Command::Backtest {
            input,
            model,
            window,
            output,
        } => {
            let cfg = run_config(&model, Some(&window), &output)?;
            let series = load(&input, &cfg)?;
            let report = backtest(&series, &cfg.forecast_config()?, &cfg.window)?;
            emit(&output, |w| match cfg.format {
                OutputFormat::Csv => write_backtest_csv(w, &report, &cfg),
                OutputFormat::Json => write_json(w, &backtest_json(&report, &cfg)),
            })?;
        }
        Command::SweepIntervals {
            input,
            model,
            window,
            n_min,
            n_max,
            output,
        } => {
            let cfg = run_config(&model, Some(&window), &output)?;
            if n_min > n_max {
                return Err(Error::Argument(format!(
                    "--n-min {n_min} exceeds --n-max {n_max}"
                )));
            }
            let series = load(&input, &cfg)?;
            let counts: Vec<usize> = (n_min..=n_max).collect();
            let sweep = sweep_intervals(&series, &counts, &cfg.forecast_config()?, &cfg.window)?;
            emit(&output, |w| match cfg.format {
                OutputFormat::Csv => write_sweep_csv(w, &sweep, &cfg),
                OutputFormat::Json => write_json(w, &sweep_json(&sweep, &cfg)),
            })?;
        }
        Command::SweepTraining {
            input,
            model,
            window,
            lengths,
            output,
        } => {
            let cfg = run_config(&model, Some(&window), &output)?;
            let lengths = lengths
                .iter()
                .map(|s| s.parse::<TrainingLength>())
                .collect::<Result<Vec<_>, _>>()?;
            let series = load(&input, &cfg)?;
            let sweep =
                sweep_training_length(&series, &lengths, &cfg.forecast_config()?, &cfg.window)?;
            emit(&output, |w| match cfg.format {
                OutputFormat::Csv => write_sweep_csv(w, &sweep, &cfg),
                OutputFormat::Json => write_json(w, &sweep_json(&sweep, &cfg)),
            })?;
        }
        Command::Synth {
            scenario,
            variant,
            random_walk: walk,
            days,
            seed,
            start,
            sd,
            output,
        } => {
            let series: PriceSeriesF64 = match (scenario, walk) {
                (Some(s), _) => {
                    let variant = variant
                        .ok_or_else(|| Error::Argument("--scenario needs --variant".into()))?;
                    synth_scenario(s.parse()?, variant.parse()?)?
                }
                (None, true) => random_walk(days, seed, start, sd, 7.0)?,
                (None, false) => {
                    return Err(Error::Argument(
                        "synth needs --scenario or --random-walk".into(),
                    ));
                }
            };
            emit(&output, |w| write_series_csv(w, &series))?;
        }
        Command::Selftest => {
            let checks = run_selftest();
            let mut failed = 0;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                failed += usize::from(!c.passed);
            }
            println!(
                "{} of {} checks passed",
                checks.len() - failed,
                checks.len()
            );
            if failed > 0 {
                return Ok(ExitCode::from(EXIT_DATA));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Defaults, then the config file, then explicit flags.
fn run_config(
    model: &ModelArgs,
    window: Option<&WindowArgs>,
    output: &OutputArgs,
) -> Result<RunConfig, Error> {
    let mut cfg = match &model.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = model.n {
        cfg.intervals = n;
    }
    if let Some(v) = model.d_min {
        cfg.d_min = v;
    }
    if let Some(v) = model.d_max {
        cfg.d_max = v;
    }
    if let Some(v) = model.max_degree {
        cfg.max_degree = v;
    }
    if model.compat_table3 {
        cfg.percent_scaling = PercentScaling::Table3Compat;
    }
    if let Some(w) = window {
        if let Some(v) = &w.from {
            cfg.set("from", v)?;
        }
        if let Some(v) = &w.to {
            cfg.set("to", v)?;
        }
        if let Some(v) = w.last {
            cfg.window.last = Some(v);
        }
        if let Some(v) = &w.training {
            cfg.set("training", v)?;
        }
    }
    if let Some(f) = &output.format {
        cfg.format = f.parse()?;
    }
    // surface range errors before touching data
    cfg.forecast_config::<f64>()?;
    Ok(cfg)
}

fn load(input: &InputArgs, cfg: &RunConfig) -> Result<PriceSeriesF64, Error> {
    let spec = IngestSpec {
        date_column: input.date_column.clone(),
        close_column: input.close_column.clone(),
        date_format: input.date_format.clone(),
        bounds: (cfg.d_min, cfg.d_max),
        ..IngestSpec::new(&input.input)
    };
    let ingested = ingest_csv::<f64>(&spec)?;
    for finding in &ingested.report.findings {
        eprintln!("warning: {}: {finding}", input.input.display());
    }
    if ingested.report.out_of_range_changes > 0 {
        eprintln!(
            "warning: {}: {} daily changes outside [{}, {}] will be clamped",
            input.input.display(),
            ingested.report.out_of_range_changes,
            spec.bounds.0,
            spec.bounds.1
        );
    }
    Ok(ingested.series)
}

fn emit(
    output: &OutputArgs,
    body: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
) -> Result<(), Error> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    match &output.output {
        Some(path) => {
            let file = File::create(path).map_err(io_err(path))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(io_err(path))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush().map_err(io_err(Path::new("<stdout>")))
        }
    }
}
