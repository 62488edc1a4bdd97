use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scolab_cli::bound::{evaluate, BoundName, BoundParams};
use scolab_cli::config::{CaseKind, ExperimentConfig, ExperimentKind, ParallelismSetting};
use scolab_cli::{emit_plot, parse_config, resolve_output_dir, run, CliError};

#[derive(Parser)]
#[command(name = "scolab", version, about = "Stability and excess-risk experiments for strongly convex learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a closed-form bound and print its value.
    Bound {
        #[arg(value_enum)]
        name: BoundName,
        #[command(flatten)]
        params: Box<BoundParams>,
    },
    /// Uniform-stability estimate on the default problem.
    Stability(Shortcut),
    /// Bernstein-condition check on the default problem.
    Bernstein(Shortcut),
    /// Excess-risk scaling on the default problem.
    Scaling(Shortcut),
    /// Generalization-gap experiment on the default problem.
    Gap(Shortcut),
    /// Lower-tail concentration check.
    Concentration {
        #[command(flatten)]
        shortcut: Shortcut,
        #[arg(long, value_enum, default_value = "additive_uniform")]
        case: CaseArg,
        /// Number of variables or sample size of the case.
        #[arg(long, default_value_t = 20)]
        n: usize,
    },
    /// Render a scaling report as an SVG log-log plot.
    Plot {
        report: PathBuf,
        /// Defaults to the report path with an .svg extension.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Also read from SCOLAB_OUTPUT_DIR when neither flag nor config set it.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads, or "auto".
    #[arg(long)]
    parallelism: Option<ParallelismSetting>,
}

#[derive(Args, Clone)]
struct Shortcut {
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Clone, Copy, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
enum CaseArg {
    AdditiveUniform,
    ErmSecondMoment,
}

fn shortcut_config(kind: ExperimentKind, s: &Shortcut) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind);
    if let Some(r) = s.reps {
        cfg.reps = r;
    }
    if let Some(seed) = s.seed {
        cfg.base_seed = seed;
    }
    if let Some(g) = &s.n_grid {
        cfg.n_grid = g.clone();
    }
    if let Some(d) = s.delta {
        cfg.delta = d;
    }
    cfg
}

fn execute(cfg: ExperimentConfig, overrides: &Overrides) -> Result<(), CliError> {
    let mut cfg = cfg;
    if let Some(p) = overrides.parallelism {
        cfg.parallelism = p;
    }
    let out = resolve_output_dir(overrides.output_dir.as_deref(), &cfg);
    let validated = cfg.validate()?;
    let summary = run(&validated, &out)?;
    for line in &summary.highlights {
        println!("{line}");
    }
    println!("wrote {} files to {}", summary.files.len(), out.display());
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, overrides } => {
            let v = parse_config(&config)?;
            execute(v.config, &overrides)
        }
        Command::Bound { name, params } => {
            println!("{}", evaluate(name, &params)?);
            Ok(())
        }
        Command::Stability(s) => execute(shortcut_config(ExperimentKind::Stability, &s), &s.overrides),
        Command::Bernstein(s) => execute(shortcut_config(ExperimentKind::Bernstein, &s), &s.overrides),
        Command::Scaling(s) => execute(shortcut_config(ExperimentKind::Scaling, &s), &s.overrides),
        Command::Gap(s) => execute(shortcut_config(ExperimentKind::Gap, &s), &s.overrides),
        Command::Concentration { shortcut, case, n } => {
            let mut cfg = shortcut_config(ExperimentKind::Concentration, &shortcut);
            cfg.concentration.case = match case {
                CaseArg::AdditiveUniform => CaseKind::AdditiveUniform,
                CaseArg::ErmSecondMoment => CaseKind::ErmSecondMoment,
            };
            cfg.concentration.n = n;
            execute(cfg, &shortcut.overrides)
        }
        Command::Plot { report, output } => {
            let text = std::fs::read_to_string(&report).map_err(|e| CliError::io(&report, e))?;
            let parsed = serde_json::from_str(&text).map_err(|e| CliError::config(report.display().to_string(), e.to_string()))?;
            let out = output.unwrap_or_else(|| Path::new(&report).with_extension("svg"));
            emit_plot(&parsed, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(seed) = e.violating_seed() {
                eprintln!("reproduce with replication seed {seed}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
