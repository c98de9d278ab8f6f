use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cryptotrend::fixture::FixtureConfig;
use cryptotrend::pipeline::{generate_fixture, run, Command, PipelineConfig, Stage};
use cryptotrend::Error;

#[derive(Parser)]
#[command(name = "cryptotrend", version, about = "Tweet sentiment features for minute-level crypto price prediction")]
struct Cli {
    /// Pipeline config (JSON).
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Restrict to one configured coin.
    #[arg(long, global = true)]
    coin: Option<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse tweets and price bars and join them.
    Ingest,
    /// Clean tweet text and apply the relevance filter.
    Preprocess,
    /// Score tweets and build the weighted sentiment series.
    Sentiment,
    /// Assemble feature rows and minute aggregates.
    Features,
    /// Fit LR, SGD, RF and LSTM.
    Train,
    /// Compute test metrics and write the report.
    Evaluate,
    /// PCA, word frequencies and engagement tables.
    Analyze,
    /// Run every stage in order.
    All,
    /// Write a synthetic dataset and a config pointing at it into --out.
    Genfixture {
        #[arg(long, default_value_t = 1200)]
        minutes: usize,
        #[arg(long, default_value_t = 3000)]
        corpus_size: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> cryptotrend::Result<()> {
    let stage = match cli.command {
        Cmd::Genfixture { minutes, corpus_size } => {
            let dir = cli.out.unwrap_or_else(|| PathBuf::from("fixture"));
            let mut fx = FixtureConfig { minutes, ..FixtureConfig::default() };
            if let Some(s) = cli.seed {
                fx.seed = s;
            }
            let path = generate_fixture(&dir, &fx, corpus_size)?;
            println!("{}", path.display());
            return Ok(());
        }
        Cmd::Ingest => Command::Stage(Stage::Ingest),
        Cmd::Preprocess => Command::Stage(Stage::Preprocess),
        Cmd::Sentiment => Command::Stage(Stage::Sentiment),
        Cmd::Features => Command::Stage(Stage::Features),
        Cmd::Train => Command::Stage(Stage::Train),
        Cmd::Evaluate => Command::Stage(Stage::Evaluate),
        Cmd::Analyze => Command::Stage(Stage::Analyze),
        Cmd::All => Command::All,
    };
    if !cli.config.exists() {
        return Err(Error::Config(vec![format!("config file {} not found", cli.config.display())]));
    }
    let mut cfg = PipelineConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.output_dir = o;
    }
    let summary = run(stage, &cfg, cli.coin.as_deref())?;
    for (coin, ev) in &summary.evaluations {
        for m in ev.metrics.iter().chain(std::iter::once(&ev.baseline)) {
            println!("{coin}\t{}\tmae={:.6}\trmse={:.6}\tmax_delta_pct={:.3}", m.model, m.mae, m.rmse, m.max_delta_pct);
        }
    }
    Ok(())
}
