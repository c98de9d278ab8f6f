//! Generate the synthetic fixture and run every stage on it.
//!
//! `cargo run --release --example full_pipeline [out_dir]`

use std::path::PathBuf;

use cryptotrend::fixture::FixtureConfig;
use cryptotrend::pipeline::{generate_fixture, run, Command, PipelineConfig};

fn main() -> cryptotrend::Result<()> {
    env_logger::init();
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cryptotrend-demo"));
    let config = generate_fixture(&dir, &FixtureConfig::default(), 3000)?;
    let cfg = PipelineConfig::load(&config)?;
    let summary = run(Command::All, &cfg, None)?;
    for (coin, ev) in &summary.evaluations {
        for m in ev.metrics.iter().chain([&ev.baseline]) {
            println!("{coin:<5} {:<6} MAE {:.6}  RMSE {:.6}  max δ {:.2}%", m.model, m.mae, m.rmse, m.max_delta_pct);
        }
    }
    println!("artifacts under {}", cfg.output_dir.display());
    Ok(())
}
