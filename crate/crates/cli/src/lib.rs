//! Batch front end for the `scolab` experiment harnesses: JSON
//! configuration, orchestration, CSV/JSON/SVG artifacts and bound
//! evaluation.

pub mod artifacts;
pub mod bound;
pub mod config;
pub mod error;
pub mod plot;
pub mod runner;

pub use config::{parse_config, parse_config_str, ExperimentConfig, ExperimentKind, ValidatedConfig};
pub use error::{CliError, ConfigIssue};
pub use plot::emit_plot;
pub use runner::{run, RunSummary};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SCOLAB_OUTPUT_DIR";

/// Output directory precedence: explicit flag, then the config, then
/// [`OUTPUT_DIR_ENV`], then `scolab-out`.
pub fn resolve_output_dir(flag: Option<&std::path::Path>, config: &ExperimentConfig) -> std::path::PathBuf {
    flag.map(std::path::Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(Into::into))
        .unwrap_or_else(|| "scolab-out".into())
}
