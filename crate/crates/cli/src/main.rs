//! Command-line entry point: generate, validate, fit and inspect workflows.
//!
//! Exit codes: 0 success (and validation pass), 2 configuration error,
//! 3 data error (unreadable, unparseable or empty input), 4 validation
//! failure, 1 anything unexpected.

mod manifest;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cardflow_core::distmodel::{
    cpd, distributions_fingerprint, load_distributions, save_distributions,
};
use cardflow_core::generator::{write_transactions_csv, GenerationConfig};
use cardflow_core::ingest::{
    fit_distributions, parse_transactions, ColumnMap, FitOptions, ParseOptions,
};
use cardflow_core::stats::{
    compute_marginals, validate_marginals, write_panels, ComputeOptions, ValidationThresholds,
};
use cardflow_core::{Error as CoreError, ModelDistributions64, TransactionRecord64};

use manifest::RunManifest;

/// Env var naming a directory that holds `distributions.toml` to use when no
/// `--config` is given.
const CONFIG_DIR_ENV: &str = "CARDFLOW_CONFIG_DIR";

const EXIT_OK: u8 = 0;
const EXIT_UNEXPECTED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cardflow",
    version,
    about = "Synthetic card-transaction data sets: generate, validate, fit, inspect",
    after_help = "Exit codes: 0 success, 2 config error, 3 data error, 4 validation failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a synthetic transaction file plus a replayable run manifest.
    Generate(GenerateArgs),
    /// Check a transaction file against the configuration that produced it.
    Validate(ValidateArgs),
    /// Fit the five input distributions from an existing transaction log.
    Fit(FitArgs),
    /// Print summary statistics of a transaction file, no reference needed.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of cards.
    #[arg(long, default_value_t = 2000)]
    cards: u64,
    /// Number of stores.
    #[arg(long, default_value_t = 1000)]
    stores: u64,
    /// Number of simulated days.
    #[arg(long, default_value_t = 100)]
    days: u32,
    /// Master seed; identical seeds give byte-identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Day of week of day 0 (0 = Monday).
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(..7))]
    start_dow: u8,
    /// Distribution config file; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output transaction file.
    #[arg(long, short = 'o', default_value = "transactions.csv")]
    out: PathBuf,
    /// Manifest path; defaults to `<out>.manifest.toml`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Log-normal shape of the daily burst multiplier; 0 disables bursting.
    #[arg(long, default_value_t = 0.0)]
    burst_sigma: f64,
    /// Fraction of carried burst debt repaid per day.
    #[arg(long, default_value_t = 0.1)]
    burst_decay: f64,
    /// Per-card per-day probability of swapping activity with a similar card.
    #[arg(long, default_value_t = 0.0)]
    swap_prob: f64,
    /// Maximum expected-activity ratio between swap partners.
    #[arg(long, default_value_t = 2.0)]
    swap_ratio: f64,
    /// Spread amounts uniformly inside their 25-unit bin.
    #[arg(long)]
    amount_jitter: bool,
    /// Replay a previous run from its manifest; other flags are ignored.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Also dump the card population (card_id,expected_monthly_ops).
    #[arg(long)]
    dump_cards: Option<PathBuf>,
    /// Also dump the store population (store_id,size_weight).
    #[arg(long)]
    dump_stores: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Transaction file to validate.
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Run manifest; defaults to `<input>.manifest.toml`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Distribution config override; must match the manifest fingerprint.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the six histogram panel files.
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Transaction log to fit from.
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Distribution config file to write.
    #[arg(long, short = 'o', default_value = "fitted-distributions.toml")]
    out: PathBuf,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Input has no header line.
    #[arg(long)]
    no_header: bool,
    /// Column indices as day,card,hour,amount,store.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<usize>>,
    /// Window length in days for monthly rescaling; derived when absent.
    #[arg(long)]
    window_days: Option<u32>,
    /// Day of week of day 0 (0 = Monday).
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(..7))]
    start_dow: u8,
    /// Malformed lines tolerated before aborting.
    #[arg(long, default_value_t = 100)]
    max_errors: u64,
}

#[derive(Args)]
struct InspectArgs {
    /// Transaction file to summarize.
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Day of week of day 0 (0 = Monday).
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(..7))]
    start_dow: u8,
    /// Also write the six histogram panel files here.
    #[arg(long)]
    panels: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Validate(args) => run_validate(args),
        Command::Fit(args) => run_fit(args),
        Command::Inspect(args) => run_inspect(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(
            CoreError::Config(_)
            | CoreError::Domain(_)
            | CoreError::BinMismatch { .. }
            | CoreError::DegenerateDistribution,
        ) => EXIT_CONFIG,
        Some(
            CoreError::EmptyData(_)
            | CoreError::Parse { .. }
            | CoreError::ErrorBudgetExceeded { .. }
            | CoreError::UnsortedInput { .. }
            | CoreError::Io(_),
        ) => EXIT_DATA,
        None => EXIT_UNEXPECTED,
    }
}

/// Resolve the distribution tables: explicit file, then the env-var config
/// directory, then built-in defaults. Returns the tables plus a description
/// of where they came from.
fn resolve_distributions(config: Option<&Path>) -> anyhow::Result<(ModelDistributions64, String)> {
    if let Some(path) = config {
        let tables = load_distributions::<f64>(path)?;
        return Ok((tables, path.display().to_string()));
    }
    if let Ok(dir) = std::env::var(CONFIG_DIR_ENV) {
        let candidate = Path::new(&dir).join("distributions.toml");
        if candidate.is_file() {
            let tables = load_distributions::<f64>(&candidate)?;
            return Ok((tables, candidate.display().to_string()));
        }
    }
    Ok((
        ModelDistributions64::default(),
        manifest::BUILTIN_CONFIG.into(),
    ))
}

fn default_manifest_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.as_os_str().to_owned();
    name.push(".manifest.toml");
    PathBuf::from(name)
}

fn open_input(path: &Path) -> anyhow::Result<BufReader<File>> {
    let file = File::open(path).map_err(|e| {
        CoreError::Io(std::io::Error::new(
            e.kind(),
            format!("cannot open {}: {e}", path.display()),
        ))
    })?;
    Ok(BufReader::new(file))
}

fn run_generate(args: GenerateArgs) -> anyhow::Result<u8> {
    let (config, config_source) = match &args.replay {
        Some(path) => {
            let m = RunManifest::load(path)?;
            let source_path = (m.config_source != manifest::BUILTIN_CONFIG)
                .then(|| PathBuf::from(&m.config_source));
            let (tables, source) =
                resolve_distributions(args.config.as_deref().or(source_path.as_deref()))?;
            let fingerprint = distributions_fingerprint(&tables);
            if fingerprint != m.config_hash {
                return Err(CoreError::Config(format!(
                    "distribution fingerprint {fingerprint} does not match manifest {}",
                    m.config_hash
                ))
                .into());
            }
            (m.to_config(tables), source)
        }
        None => {
            let (tables, source) = resolve_distributions(args.config.as_deref())?;
            let mut config = GenerationConfig::new(args.cards, args.stores, args.days, args.seed);
            config.start_day_of_week = args.start_dow;
            config.distributions = tables;
            config.burst.enabled = args.burst_sigma > 0.0;
            config.burst.overdispersion = args.burst_sigma;
            config.burst.debt_decay = args.burst_decay;
            config.swap.probability = args.swap_prob;
            config.swap.similarity_ratio = args.swap_ratio;
            config.amount_jitter = args.amount_jitter;
            (config, source)
        }
    };
    config.validate()?;

    let out_file = File::create(&args.out)?;
    let summary = write_transactions_csv(&config, out_file)?;

    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&args.out));
    let manifest = RunManifest::for_run(&config, &config_source, summary.records, &args.out);
    manifest.save(&manifest_path)?;

    if let Some(path) = &args.dump_cards {
        let cards = cardflow_core::generator::initial_cards(&config)?;
        cardflow_core::entities::write_cards(&cards, BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = &args.dump_stores {
        let stores = cardflow_core::generator::initial_stores(&config)?;
        cardflow_core::entities::write_stores(&stores, BufWriter::new(File::create(path)?))?;
    }

    println!(
        "wrote {} transactions to {} (seed {})",
        summary.records,
        args.out.display(),
        config.seed
    );
    println!("manifest: {}", manifest_path.display());
    Ok(EXIT_OK)
}

/// Iterator shim: passes records through and parks the first hard error so a
/// streaming consumer can finish cleanly.
struct StopOnError<I> {
    inner: I,
    error: Option<CoreError>,
}

impl<I: Iterator<Item = cardflow_core::Result<TransactionRecord64>>> Iterator for StopOnError<I> {
    type Item = TransactionRecord64;

    fn next(&mut self) -> Option<Self::Item> {
        if self.error.is_some() {
            return None;
        }
        match self.inner.next()? {
            Ok(rec) => Some(rec),
            Err(e) => {
                self.error = Some(e);
                None
            }
        }
    }
}

fn run_validate(args: ValidateArgs) -> anyhow::Result<u8> {
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&args.input));
    let m = RunManifest::load(&manifest_path)?;

    let source_path =
        (m.config_source != manifest::BUILTIN_CONFIG).then(|| PathBuf::from(&m.config_source));
    let (tables, _) = resolve_distributions(args.config.as_deref().or(source_path.as_deref()))?;
    let fingerprint = distributions_fingerprint(&tables);
    if fingerprint != m.config_hash {
        return Err(CoreError::Config(format!(
            "distribution fingerprint {fingerprint} does not match manifest {}",
            m.config_hash
        ))
        .into());
    }
    let config = m.to_config(tables);

    let reader = parse_transactions::<_, f64>(open_input(&args.input)?, &ParseOptions::default())?;
    let mut stream = StopOnError {
        inner: reader,
        error: None,
    };
    let opts = ComputeOptions {
        start_day_of_week: config.start_day_of_week,
    };
    let marginals = compute_marginals(&mut stream, &opts);
    if let Some(err) = stream.error {
        return Err(err.into());
    }
    let marginals = marginals?;

    let report = validate_marginals(&marginals, &config, &ValidationThresholds::default())?;
    print!("{report}");

    if let Some(dir) = &args.report_dir {
        write_panels(&marginals, config.n_days.max(1), dir)?;
        println!("panels: {}", dir.display());
    }

    if report.passed {
        Ok(EXIT_OK)
    } else {
        let failed: Vec<&str> = report.failed_checks().map(|c| c.name).collect();
        if failed.is_empty() {
            eprintln!("validation failed: no 24h periodicity in inter-transaction gaps");
        } else {
            eprintln!("validation failed: {}", failed.join(", "));
        }
        Ok(EXIT_VALIDATION)
    }
}

fn run_fit(args: FitArgs) -> anyhow::Result<u8> {
    let mut parse_options = ParseOptions {
        delimiter: args.delimiter,
        has_header: !args.no_header,
        ..ParseOptions::default()
    };
    if let Some(cols) = &args.columns {
        if cols.len() != 5 {
            return Err(CoreError::Config(format!(
                "--columns needs 5 indices (day,card,hour,amount,store), got {}",
                cols.len()
            ))
            .into());
        }
        parse_options.columns = ColumnMap {
            day: cols[0],
            card: cols[1],
            hour: cols[2],
            amount: cols[3],
            store: cols[4],
        };
    }
    let fit_options = FitOptions {
        window_days: args.window_days,
        start_day_of_week: args.start_dow,
        max_parse_errors: args.max_errors,
    };

    let reader = parse_transactions::<_, f64>(open_input(&args.input)?, &parse_options)?;
    let (tables, summary) = fit_distributions(reader, &fit_options)?;
    save_distributions(&tables, &args.out)?;

    println!("fitted distributions written to {}", args.out.display());
    println!("records: {}", summary.records);
    println!("cards: {}", summary.cards);
    println!("stores: {}", summary.stores);
    println!("window_days: {}", summary.window_days);
    println!("cards_clamped: {}", summary.cards_clamped);
    println!("stores_clamped: {}", summary.stores_clamped);
    println!("parse_errors: {}", summary.parse_errors);
    Ok(EXIT_OK)
}

fn run_inspect(args: InspectArgs) -> anyhow::Result<u8> {
    let reader = parse_transactions::<_, f64>(open_input(&args.input)?, &ParseOptions::default())?;
    // Inspection is exploratory: skip malformed lines, but keep count.
    let mut parse_errors = 0u64;
    let mut records: Vec<TransactionRecord64> = Vec::new();
    for item in reader {
        match item {
            Ok(rec) => records.push(rec),
            Err(_) => parse_errors += 1,
        }
    }
    records.sort_by_key(|r| r.day);
    let opts = ComputeOptions {
        start_day_of_week: args.start_dow,
    };
    let m = compute_marginals(records.iter().copied(), &opts)?;

    println!("records: {}", m.total_records);
    if parse_errors > 0 {
        println!("skipped_lines: {parse_errors}");
    }
    println!("days: {}..={}", m.first_day, m.last_day);
    println!("cards: {}", m.ops_per_card.len());
    println!("stores: {}", m.ops_per_store.len());

    let total = m.total_records.max(1) as f64;
    let mut hours: Vec<(usize, u64)> = m.hour_counts.iter().copied().enumerate().collect();
    hours.sort_by_key(|(_, c)| std::cmp::Reverse(*c));
    let top: Vec<String> = hours
        .iter()
        .take(3)
        .map(|(h, c)| format!("{h:02}h ({:.1}%)", *c as f64 / total * 100.0))
        .collect();
    println!("busiest_hours: {}", top.join(", "));

    let dow: Vec<String> = m
        .dow_counts
        .iter()
        .map(|c| format!("{:.3}", *c as f64 / total))
        .collect();
    println!("day_of_week_profile: [{}]", dow.join(", "));

    let amounts: Vec<f64> = records.iter().map(|r| r.amount).collect();
    let mean_amount = amounts.iter().sum::<f64>() / total;
    println!("mean_amount: {mean_amount:.2}");
    let grid = [100.0, 300.0, 600.0, 900.0];
    let curve = cpd(&amounts, &grid)?;
    for (v, p) in grid.iter().zip(curve.probabilities()) {
        println!("amount_exceedance_{v}: {p:.4}");
    }

    println!("gap_samples: {}", m.total_gaps());
    println!("gap_peak_24h: {}", m.gap_peak_at(24, 4));
    println!("gap_peak_48h: {}", m.gap_peak_at(48, 3));

    let (new_total, rep_total) = m
        .day_activity
        .iter()
        .skip(1)
        .fold((0u64, 0u64), |(n, r), a| {
            (n + a.new_cards, r + a.repeating_cards)
        });
    if new_total + rep_total > 0 {
        println!(
            "new_card_fraction: {:.3}",
            new_total as f64 / (new_total + rep_total) as f64
        );
    }

    if let Some(dir) = &args.panels {
        write_panels(&m, m.window_days(), dir)?;
        println!("panels: {}", dir.display());
    }
    Ok(EXIT_OK)
}
