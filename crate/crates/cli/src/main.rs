use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use cllab::lab::{
    emit, run, ExperimentConfig, ExperimentKind, ExperimentReport, RunContext, CACHE_DIR_VAR,
};
use cllab::Exec;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cllab",
    version,
    about = "Cauchy-Leray and Kerzman-Stein experiments on domains in C^2"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides `output.dir` of the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Mesh cache directory (overrides the CLLAB_CACHE_DIR environment variable).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Run every loop sequentially.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh diagnostics and the surface-measure oracle.
    Mesh(RunArgs),
    /// Derivative audit, convexity and Levi probes, hypothesis matrix.
    Audit(RunArgs),
    /// Reproducing property and holomorphy contrast.
    Reproduce(RunArgs),
    /// Lp blow-up of concentrating bumps against the control domain.
    Blowup(RunArgs),
    /// Kerzman-Stein construction of the Szego projection.
    Ks(RunArgs),
    /// Every experiment with its default configuration.
    All,
    /// Print the default configuration of an experiment as TOML.
    Config { experiment: String },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
}

fn kind_from_name(name: &str) -> Result<ExperimentKind> {
    ExperimentKind::ALL
        .into_iter()
        .find(|k| k.name() == name)
        .with_context(|| format!("unknown experiment `{name}`"))
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig> {
    let Some(path) = &args.config else {
        return Ok(ExperimentConfig::default_for(kind));
    };
    let cfg =
        ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    if cfg.experiment != kind {
        bail!(
            "{} configures `{}`, not `{}`",
            path.display(),
            cfg.experiment.name(),
            kind.name()
        );
    }
    Ok(cfg)
}

fn summarize(report: &ExperimentReport) {
    for a in &report.assertions {
        println!(
            "{} {}: {}",
            if a.passed { "PASS" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
}

fn execute(cli: &Cli, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<bool> {
    let report = run(cfg, ctx).with_context(|| format!("running {}", cfg.experiment.name()))?;
    summarize(&report);
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    for p in emit(&report, &dir, cfg.output.json, cfg.output.csv)? {
        log::info!("wrote {}", p.display());
    }
    println!(
        "{} {}: {}/{} assertions pass",
        if report.passed { "PASS" } else { "FAIL" },
        report.experiment,
        report.assertions.iter().filter(|a| a.passed).count(),
        report.assertions.len()
    );
    Ok(report.passed)
}

fn main() -> Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let cache_dir = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_DIR_VAR).map(PathBuf::from));
    let ctx = RunContext::new(exec, cache_dir);
    let configs = match &cli.command {
        Command::Mesh(a) => vec![load(ExperimentKind::Mesh, a)?],
        Command::Audit(a) => vec![load(ExperimentKind::Audit, a)?],
        Command::Reproduce(a) => vec![load(ExperimentKind::Reproduce, a)?],
        Command::Blowup(a) => vec![load(ExperimentKind::Blowup, a)?],
        Command::Ks(a) => vec![load(ExperimentKind::Ks, a)?],
        Command::All => ExperimentKind::ALL
            .into_iter()
            .map(ExperimentConfig::default_for)
            .collect(),
        Command::Config { experiment } => {
            print!(
                "{}",
                ExperimentConfig::default_for(kind_from_name(experiment)?).to_toml_string()?
            );
            return Ok(ExitCode::SUCCESS);
        }
    };
    let mut ok = true;
    for cfg in &configs {
        ok &= execute(&cli, cfg, &ctx)?;
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
