//! Command-line harness around the oversmoothing-regularization library:
//! parameter-choice tables, minimizer figures, rate fits, and the
//! acceptance checks.
//!
//! Exit codes: 0 on success, 2 when any acceptance check fails, 3 on a
//! configuration error, 1 on unexpected runtime errors.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use oversmooth::experiment::{median_errors, rate_slope, run_figure, run_grid};
use oversmooth::verify;

#[derive(Parser)]
#[command(name = "oversmooth", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the (delta, seed) grid of the configured rule and emit table.csv
    Table(RunArgs),
    /// Emit per-parameter reconstruction data files along a fixed ladder
    Figure(RunArgs),
    /// Fit the rate slope of median error against noise level
    Rates(RunArgs),
    /// Run the acceptance checks and print one line per check
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (plain key = value sections)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the configuration
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent grid cells
    #[arg(long)]
    jobs: Option<usize>,
    /// Offset added to every seed in the configuration
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated subset of checks (default: all)
    #[arg(long)]
    only: Option<String>,
    /// Worker threads for independent grid cells
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Table(args) => run_with_config(args, emit_table),
        Command::Figure(args) => run_with_config(args, emit_figure),
        Command::Rates(args) => run_with_config(args, emit_rates),
        Command::Verify(args) => run_verify(args),
    }
}

fn configure_pool(jobs: Option<usize>) -> Result<()> {
    if let Some(k) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    Ok(())
}

fn run_with_config(args: RunArgs, body: fn(&config::ExperimentConfig) -> Result<()>) -> ExitCode {
    if let Err(e) = configure_pool(args.jobs) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let mut cfg = match config::load(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(3);
        }
    };
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    for seed in &mut cfg.grid.seeds {
        *seed += args.seed_base;
    }
    if let Some(fig) = &mut cfg.figure {
        fig.seed += args.seed_base;
    }
    match body(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit_table(cfg: &config::ExperimentConfig) -> Result<()> {
    let records = run_grid(&cfg.grid)?;
    let failures = records.iter().filter(|r| r.failed).count();
    output::write_file(&cfg.output_dir, "table.csv", &output::table_csv(&records))?;
    println!(
        "table.csv: {} rows ({} failures) in {}",
        records.len(),
        failures,
        cfg.output_dir.display()
    );
    Ok(())
}

fn emit_figure(cfg: &config::ExperimentConfig) -> Result<()> {
    let fig = cfg
        .figure
        .as_ref()
        .ok_or_else(|| anyhow!("the figure subcommand needs a [figure] section"))?;
    let fd = run_figure(&cfg.grid, fig.delta, &fig.alphas, fig.seed)?;
    let setup = cfg.grid.setup()?;
    for (k, run) in fd.runs.iter().enumerate() {
        output::write_file(
            &cfg.output_dir,
            &format!("figure_rung_{}.dat", k + 1),
            &output::rung_data(&run.u, setup.u_true()),
        )?;
        if cfg.emit_plots {
            output::write_file(
                &cfg.output_dir,
                &format!("figure_rung_{}.svg", k + 1),
                &output::rung_svg(&run.u, setup.u_true(), fd.alphas[k], fd.errors[k]),
            )?;
        }
    }
    output::write_file(
        &cfg.output_dir,
        "figure_summary.txt",
        &output::figure_summary(&fd),
    )?;
    println!(
        "figure: {} rungs, selected alpha {} (error {:.4}) in {}",
        fd.alphas.len(),
        fd.selected_alpha,
        fd.selected_error,
        cfg.output_dir.display()
    );
    Ok(())
}

fn emit_rates(cfg: &config::ExperimentConfig) -> Result<()> {
    let records = run_grid(&cfg.grid)?;
    let medians = median_errors(&records, &cfg.grid.deltas)?;
    let slope = rate_slope(&cfg.grid.deltas, &medians)?;
    let target = cfg.grid.p_true / (cfg.grid.p_true + cfg.grid.a);
    output::write_file(
        &cfg.output_dir,
        "rates.csv",
        &output::rates_csv(&cfg.grid.deltas, &medians),
    )?;
    output::write_file(
        &cfg.output_dir,
        "rates_report.txt",
        &output::rates_report(slope, target, &cfg.grid.deltas, &medians),
    )?;
    println!(
        "rates: slope {slope:.4} (target {target:.4}) in {}",
        cfg.output_dir.display()
    );
    Ok(())
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    if let Err(e) = configure_pool(args.jobs) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let selected: Vec<&str> = match &args.only {
        Some(list) => list.split(',').map(str::trim).collect(),
        None => verify::check_names(),
    };
    let mut all_passed = true;
    for name in selected {
        match verify::run_check(name) {
            Some(result) => {
                println!("{}", result.line());
                all_passed &= result.passed;
            }
            None => {
                eprintln!(
                    "unknown check {name:?}; available: {}",
                    verify::check_names().join(", ")
                );
                return ExitCode::from(3);
            }
        }
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
