//! Experiment configs, runners and CSV output for `nusc-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, EXPERIMENT_IDS};
pub use error::{LabError, LabResult};
pub use experiments::{run_experiment, Outcome};

/// Header lines: artifact version, experiment, seed, notes, config echo.
pub fn provenance(config: &ExperimentConfig, outcome: &Outcome) -> String {
    let mut s = format!(
        "{} {}\nexperiment = {}\nseed = {}\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        config.id(),
        config.seed()
    );
    for n in &outcome.notes {
        s.push_str(n);
        s.push('\n');
    }
    s.push_str("config:\n");
    for line in config.to_toml().lines() {
        if !line.is_empty() {
            s.push_str("  ");
            s.push_str(line);
        }
        s.push('\n');
    }
    s
}

/// Runs the experiment and writes one CSV per table into `dir`.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> LabResult<Vec<PathBuf>> {
    let outcome = run_experiment(config)?;
    let header = provenance(config, &outcome);
    let stem = config.output_stem();
    outcome.tables.iter().map(|t| t.write(dir, &stem, &header)).collect()
}
