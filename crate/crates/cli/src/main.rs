use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use disklab::lab::{run_scenario, verify_suite_with, Level, Pipeline, RunOptions, Scenario, VerifyOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Experiments on holomorphic semigroups and Möbius-invariant spaces of the disk.
#[derive(Parser)]
#[command(name = "disklab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run whatever pipeline the scenario names.
    Run(RunArgs),
    Norm(RunArgs),
    Flow(RunArgs),
    Continuity(RunArgs),
    BlochCheck(RunArgs),
    SymbolClass(RunArgs),
    Witness(RunArgs),
    /// Built-in acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory; defaults to $DISKLAB_OUT, then the scenario's `output.dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Override the scenario tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "smoke")]
    level: String,
    /// Scale every quadrature tolerance in the checks.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn run(args: &RunArgs, expect: Option<Pipeline>) -> Result<()> {
    if let Some(want) = expect {
        let sc = Scenario::load(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
        if sc.pipeline != want {
            bail!(
                "{} describes a `{}` scenario, not `{}`",
                args.config.display(),
                sc.pipeline.as_str(),
                want.as_str()
            );
        }
    }
    let opts = RunOptions {
        out_dir: args.out.clone(),
        tol: args.tol,
    };
    let (report, files) = run_scenario(&args.config, &opts).with_context(|| format!("running {}", args.config.display()))?;
    let failed = report
        .column("status")
        .map_or(0, |i| report.rows.iter().filter(|r| r[i].render() != "ok").count());
    println!("{}: {} rows ({} with errors)", report.scenario.name, report.rows.len(), failed);
    println!("  {}", files.csv.display());
    println!("  {}", files.json.display());
    for p in &files.plots {
        println!("  {}", p.display());
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let level: Level = args.level.parse()?;
    let summary = verify_suite_with(VerifyOptions {
        level,
        tol_scale: args.tol_scale,
    });
    let json = serde_json::to_string_pretty(&summary)?;
    match &args.summary {
        Some(path) => {
            for c in &summary.checks {
                println!("{}", c.line());
            }
            std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            for c in &summary.checks {
                eprintln!("{}", c.line());
            }
            println!("{json}");
        }
    }
    Ok(summary.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => run(a, None).map(|_| true),
        Command::Norm(a) => run(a, Some(Pipeline::Norm)).map(|_| true),
        Command::Flow(a) => run(a, Some(Pipeline::Flow)).map(|_| true),
        Command::Continuity(a) => run(a, Some(Pipeline::Continuity)).map(|_| true),
        Command::BlochCheck(a) => run(a, Some(Pipeline::BlochCheck)).map(|_| true),
        Command::SymbolClass(a) => run(a, Some(Pipeline::SymbolClass)).map(|_| true),
        Command::Witness(a) => run(a, Some(Pipeline::Witness)).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
