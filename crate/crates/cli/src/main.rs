use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::error;

use phenowear_core::config::Config;
use phenowear_core::pipeline::{run_extract, run_report, ExtractOutcome};
use phenowear_core::store::WindowCounts;
use phenowear_core::synth::{generate_cohort, CohortSpec};

const LOG_ENV: &str = "PHENOWEAR_LOG";

/// Wearable feature extraction and group comparison pipeline.
#[derive(Parser, Debug)]
#[command(name = "phenowear", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract per-window features for every subject in the config.
    Extract(ExtractArgs),
    /// Compare groups and write the Markdown/CSV report and boxplot JSON.
    Report(RunArgs),
    /// Generate a synthetic cohort from a JSON spec.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Recompute subjects even when cached features are current.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Cohort spec (JSON).
    #[arg(long, visible_alias = "spec", value_name = "PATH")]
    config: PathBuf,
    /// Directory receiving the subject directories.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

fn init_pool(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

fn load_config(args: &RunArgs) -> Result<(Config, PathBuf)> {
    let config = Config::load(&args.config)?;
    let out = args.out.clone().unwrap_or_else(|| config.output_dir());
    Ok((config, out))
}

fn print_counts(
    out: &mut impl Write,
    rows: &[(String, String, Option<WindowCounts>)],
) -> std::io::Result<()> {
    let labels = WindowCounts::default().rows().map(|(label, _)| label);
    write!(out, "{:<12} {:<8}", "subject", "group")?;
    for label in labels {
        write!(out, " {label:>22}")?;
    }
    writeln!(out)?;
    let mut total = WindowCounts::default();
    for (id, group, counts) in rows {
        write!(out, "{id:<12} {group:<8}")?;
        match counts {
            Some(c) => {
                for (_, n) in c.rows() {
                    write!(out, " {n:>22}")?;
                }
                total.add(c);
            }
            None => write!(out, " {:>22}", "failed")?,
        }
        writeln!(out)?;
    }
    write!(out, "{:<12} {:<8}", "total", "")?;
    for (_, n) in total.rows() {
        write!(out, " {n:>22}")?;
    }
    writeln!(out)
}

fn cmd_extract(args: &ExtractArgs) -> Result<()> {
    let (config, out) = load_config(&args.run)?;
    let outcomes = run_extract(&config, &out, args.force)?;
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut failed = 0;
    for outcome in &outcomes {
        match outcome {
            ExtractOutcome::Computed(e) | ExtractOutcome::Cached(e) => {
                rows.push((e.subject_id.clone(), e.group.to_string(), Some(e.counts)));
            }
            ExtractOutcome::Failed { dir, error } => {
                error!("{}: {error}", dir.display());
                failed += 1;
                let name = dir.file_name().map(|n| n.to_string_lossy().into_owned());
                rows.push((name.unwrap_or_default(), String::new(), None));
            }
        }
    }
    let mut stdout = std::io::stdout().lock();
    print_counts(&mut stdout, &rows)?;
    let cached = outcomes
        .iter()
        .filter(|o| matches!(o, ExtractOutcome::Cached(_)))
        .count();
    writeln!(
        stdout,
        "{} subjects: {} computed, {cached} cached, {failed} failed",
        outcomes.len(),
        outcomes.len() - cached - failed
    )?;
    if failed == outcomes.len() {
        bail!("every subject failed");
    }
    Ok(())
}

fn cmd_report(args: &RunArgs) -> Result<()> {
    let (config, out) = load_config(args)?;
    let comparison = run_report(&config, &out)?;
    let significant = comparison.results.iter().filter(|r| r.significant).count();
    println!(
        "{} tests, {significant} significant at {} (adjusted), {} skipped; written to {}",
        comparison.results.len(),
        comparison.alpha,
        comparison.skipped.len(),
        out.display()
    );
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec = CohortSpec::load(&args.config)?;
    let truth = generate_cohort(&spec, args.seed, &args.out)?;
    println!(
        "{} subjects written to {}",
        truth.subjects.len(),
        args.out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Extract(a) => {
            init_pool(a.run.jobs)?;
            cmd_extract(a)
        }
        Command::Report(a) => {
            init_pool(a.jobs)?;
            cmd_report(a)
        }
        Command::Synth(a) => {
            init_pool(a.jobs)?;
            cmd_synth(a)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
