use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sqglab::experiment::{emit_report, run_experiment, ExperimentConfig, ExperimentKind, LatticeConfig, ReportFormat};

/// Runs one named experiment and writes its report.
///
/// Exit status: 0 when every verdict passes, 1 when a verdict fails, 2 on an invalid
/// config or I/O error, 3 when the pipeline stopped early (partial report).
#[derive(Parser)]
#[command(name = "sqglab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition of unity, plateau, support and reconstruction checks.
    PartitionCheck(RunArgs),
    /// Agreement of the three bilinear routes and the closed-form product.
    VerifyIdentity(RunArgs),
    /// Sampled operator constants and their refinement stability.
    Constants(RunArgs),
    /// Picard solve at half the smallness threshold.
    Solve(RunArgs),
    /// Single-frequency forcing sweep.
    IllposeStep1(RunArgs),
    /// Lacunary sum of single-frequency forcings.
    IllposeStep2(RunArgs),
    /// Translated block forcings with a common carrier.
    IllposeStep3(RunArgs),
    /// Print the default config of an experiment as TOML.
    Defaults {
        /// Experiment name, e.g. `illpose-step1`.
        experiment: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults are used for everything it leaves out.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Lattice points per axis (overrides the config).
    #[arg(long)]
    m: Option<usize>,
    /// Frequency spacing (overrides the config).
    #[arg(long)]
    spacing: Option<f64>,
    /// Only validate the config.
    #[arg(long)]
    check: bool,
}

fn selected(cmd: &Command) -> Option<(ExperimentKind, &RunArgs)> {
    Some(match cmd {
        Command::PartitionCheck(a) => (ExperimentKind::PartitionCheck, a),
        Command::VerifyIdentity(a) => (ExperimentKind::VerifyIdentity, a),
        Command::Constants(a) => (ExperimentKind::Constants, a),
        Command::Solve(a) => (ExperimentKind::Solve, a),
        Command::IllposeStep1(a) => (ExperimentKind::IllposeStep1, a),
        Command::IllposeStep2(a) => (ExperimentKind::IllposeStep2, a),
        Command::IllposeStep3(a) => (ExperimentKind::IllposeStep3, a),
        Command::Defaults { .. } => return None,
    })
}

fn build_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_file(path).map_err(|e| format!("{}: {e}", path.display()))?;
            if cfg.experiment != kind {
                return Err(format!(
                    "{} configures `{}`, not `{}`",
                    path.display(),
                    cfg.experiment.name(),
                    kind.name()
                ));
            }
            cfg
        }
        None => ExperimentConfig::new(kind),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    if args.m.is_some() || args.spacing.is_some() {
        let base = cfg.lattice();
        cfg.lattice = Some(LatticeConfig {
            m: args.m.unwrap_or(base.m),
            spacing: args.spacing.unwrap_or(base.spacing),
        });
    }
    Ok(cfg.resolved())
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<ExitCode, String> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    let cfg = build_config(kind, args)?;
    sqglab::experiment::validate(&cfg).map_err(|e| e.to_string())?;
    if args.check {
        println!("{}: config is valid", kind.name());
        return Ok(ExitCode::SUCCESS);
    }
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let formats: &[ReportFormat] = match args.format {
        FormatArg::Csv => &[ReportFormat::Csv],
        FormatArg::Json => &[ReportFormat::Json],
        FormatArg::Both => &[ReportFormat::Csv, ReportFormat::Json],
    };
    for &f in formats {
        emit_report(&report, &dir, f).map_err(|e| e.to_string())?;
    }
    for v in &report.verdicts {
        println!(
            "{} {:<28} {:.6e} {} {:.6e}  {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.value,
            v.comparison.symbol(),
            v.threshold,
            v.detail
        );
    }
    println!("report written to {} ({:.1} s)", dir.display(), report.total_seconds());
    if let Some(msg) = &report.partial {
        eprintln!("partial report: {msg}");
        return Ok(ExitCode::from(3));
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match (&cli.command, selected(&cli.command)) {
        (_, Some((kind, args))) => run(kind, args),
        (Command::Defaults { experiment }, None) => match ExperimentKind::from_name(experiment) {
            Some(kind) => ExperimentConfig::new(kind)
                .to_toml_string()
                .map(|t| {
                    print!("{t}");
                    ExitCode::SUCCESS
                })
                .map_err(|e| e.to_string()),
            None => Err(format!("unknown experiment `{experiment}`")),
        },
        (_, None) => unreachable!("every other verb runs an experiment"),
    };
    outcome.unwrap_or_else(|msg| {
        eprintln!("error: {msg}");
        ExitCode::from(2)
    })
}
