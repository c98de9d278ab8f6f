#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cryptotrend::fixture::FixtureConfig;
use cryptotrend::pipeline::{generate_fixture, run, Command, PipelineConfig, RunSummary};

/// Writes a fixture into `dir` and returns its loaded config.
pub fn fixture_config(dir: &Path, fixture: &FixtureConfig) -> PipelineConfig {
    let path = generate_fixture(dir, fixture, 3000).expect("fixture");
    PipelineConfig::load(&path).expect("config")
}

/// Runs every stage on a fresh fixture with the given seeds.
pub fn run_fixture(dir: &Path, fixture_seed: u64, tweak: impl FnOnce(&mut PipelineConfig)) -> (PipelineConfig, RunSummary) {
    let mut cfg = fixture_config(dir, &FixtureConfig { seed: fixture_seed, ..FixtureConfig::default() });
    tweak(&mut cfg);
    let summary = run(Command::All, &cfg, None).expect("pipeline run");
    (cfg, summary)
}

/// Every file under `root`, relative, sorted.
pub fn files_under(root: &Path) -> Vec<PathBuf> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, root, out);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
