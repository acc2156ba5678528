//! Command-line front end: bootstrap curves, ingest and clean trades,
//! price the book, build exposure and quality reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure (bootstrap or shock scenario).

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use rateshift_core::pipeline::{
    run_bootstrap, run_ingest, run_price, run_quality, run_report, PipelineError, RunConfig,
    RunSummary,
};

#[derive(Parser)]
#[command(
    name = "rateshift",
    about = "Euro interest-rate risk engine: curve bootstrapping, swap revaluation, \
             bond delta-gamma, exposure aggregation and reporting-quality checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bootstrap spot curves from par quotes and write one CSV per curve
    Bootstrap(CommonArgs),
    /// Parse, filter, deduplicate and clean a trade file
    Ingest(CommonArgs),
    /// Fully revalue the cleaned trades under base and shocked curves
    Price(CommonArgs),
    /// End-to-end run: exposures, quality report and plot-ready data
    Report(CommonArgs),
    /// Reconciliation quality report only
    Quality(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Par swap quotes (as_of_date,index,tenor_months,rate_pct)
    #[arg(long)]
    quotes: PathBuf,
    /// Trade-state records
    #[arg(long)]
    trades: Option<PathBuf>,
    /// Bond holdings with optional duration/convexity
    #[arg(long)]
    holdings: Option<PathBuf>,
    /// CET1 equity per bank and date
    #[arg(long)]
    equity: Option<PathBuf>,
    /// Historical EURIBOR settings and daily overnight rates
    #[arg(long)]
    fixings: Option<PathBuf>,
    /// Parallel shock in basis points
    #[arg(long, default_value_t = 100)]
    shock_bp: i64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Keep only reporting dates on or after this date
    #[arg(long)]
    from: Option<NaiveDate>,
    /// Keep only reporting dates on or before this date
    #[arg(long)]
    to: Option<NaiveDate>,
    /// Discounting crossover tenor between the OIS and EURIBOR curves
    #[arg(long, default_value_t = 360)]
    crossover_months: u32,
    /// Absolute pricing error flagging an outlier pair, EUR
    #[arg(long = "outlier-eur", default_value_t = 25_000_000.0)]
    outlier_eur: f64,
}

impl CommonArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            quotes: self.quotes,
            trades: self.trades,
            holdings: self.holdings,
            equity: self.equity,
            fixings: self.fixings,
            out_dir: self.out,
            shock_bp: self.shock_bp,
            crossover_months: self.crossover_months,
            outlier_threshold_eur: self.outlier_eur,
            from: self.from,
            to: self.to,
        }
    }
}

fn require_trades(config: &RunConfig, command: &str) -> Result<(), String> {
    if config.trades.is_none() {
        return Err(format!("`{command}` requires --trades"));
    }
    Ok(())
}

fn report_summary(command: &str, summary: &RunSummary) {
    for warning in &summary.warnings {
        eprintln!("warning: {warning}");
    }
    match command {
        "bootstrap" => println!("wrote {} curve file(s)", summary.curves_written),
        "report" => println!(
            "priced {} trade-date rows ({} rejected), wrote {} exposure rows, {} quality pairs",
            summary.trades_priced,
            summary.trades_rejected,
            summary.exposures_written,
            summary.n_pairs
        ),
        "quality" => println!(
            "priced {} trade-date rows ({} rejected), {} quality pairs",
            summary.trades_priced, summary.trades_rejected, summary.n_pairs
        ),
        _ => println!(
            "processed {} trade-date rows ({} rejected)",
            summary.trades_priced, summary.trades_rejected
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let (name, config, runner): (
        &str,
        RunConfig,
        fn(&RunConfig) -> Result<RunSummary, PipelineError>,
    ) = match cli.command {
        Command::Bootstrap(args) => ("bootstrap", args.into_config(), run_bootstrap),
        Command::Ingest(args) => ("ingest", args.into_config(), run_ingest),
        Command::Price(args) => ("price", args.into_config(), run_price),
        Command::Report(args) => ("report", args.into_config(), run_report),
        Command::Quality(args) => ("quality", args.into_config(), run_quality),
    };

    if matches!(name, "ingest" | "price" | "quality") {
        if let Err(message) = require_trades(&config, name) {
            eprintln!("usage error: {message}");
            return ExitCode::from(1);
        }
    }

    match runner(&config) {
        Ok(summary) => {
            report_summary(name, &summary);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{name} failed: {err}");
            ExitCode::from(if err.is_numerical() { 3 } else { 2 })
        }
    }
}
