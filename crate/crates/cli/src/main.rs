use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use rse_core::diagnostics::record;
use rse_core::GOperator;
use rse_lab::output::{csv_header, csv_row, Snapshot};
use rse_lab::run::{batch_dir, run, RunReport};
use rse_lab::suites::run_suite;
use rse_lab::{coeffs_csv, load_config, symbol_csv, CliError, Result, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "rse-lab",
    version,
    about = "Pseudospectral runs of a nonlinear Madelung flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one or more scenarios and write series, snapshots and a report.
    Run {
        /// Scenario file; repeat to run a batch in parallel.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Output directory; overrides output.dir in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in property suites.
    Check {
        /// all, grid, gfunc, recurrence, dynamics or diagnostics.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        json: bool,
    },
    /// Taylor coefficients c_0..c_N of G as CSV.
    Coeffs { order: usize },
    /// The G symbol on a scenario's grid as CSV.
    Symbol {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute the diagnostics row of a snapshot.
    Diag {
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn threads() -> Option<usize> {
    std::env::var("RSE_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn summary(path: &Path, out: &Path, rep: &RunReport) -> serde_json::Value {
    let last = rep.records.last();
    serde_json::json!({
        "config": path,
        "out": out,
        "complete": rep.complete,
        "error": rep.error,
        "projected_modes": rep.projected_modes,
        "final_t": last.map(|r| r.t),
        "final_norm": last.map(|r| r.norm),
        "warnings": rep.warnings,
        "separability_error": rep.separability.as_ref().map(|s| s.error),
    })
}

fn run_one(path: &Path, out: Option<&Path>, batch: Option<usize>) -> Result<(PathBuf, RunReport)> {
    let cfg: ScenarioConfig = load_config(path)?;
    let dir = match (out, batch) {
        (Some(base), Some(i)) => batch_dir(base, &cfg, i),
        (None, Some(i)) => batch_dir(&cfg.output.dir, &cfg, i),
        (Some(base), None) => base.to_path_buf(),
        (None, None) => cfg.output.dir.clone(),
    };
    let rep = run(&cfg, &dir)?;
    Ok((dir, rep))
}

fn cmd_run(configs: &[PathBuf], out: Option<&Path>, json: bool) -> i32 {
    let batch = configs.len() > 1;
    let job = |(i, p): (usize, &PathBuf)| (p.clone(), run_one(p, out, batch.then_some(i)));
    let results: Vec<(PathBuf, Result<(PathBuf, RunReport)>)> = if batch {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads() {
            pool = pool.num_threads(n);
        }
        match pool.build() {
            Ok(pool) => pool.install(|| configs.par_iter().enumerate().map(job).collect()),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                return 2;
            }
        }
    } else {
        configs.iter().enumerate().map(job).collect()
    };

    let mut code = 0;
    let mut rows = Vec::new();
    for (path, res) in results {
        match res {
            Ok((dir, rep)) => {
                for w in &rep.warnings {
                    eprintln!("warning: {}: {w}", path.display());
                }
                if !rep.complete {
                    eprintln!(
                        "error: {}: run stopped early: {}",
                        path.display(),
                        rep.error.as_deref().unwrap_or("unknown")
                    );
                    code = code.max(2);
                }
                if json {
                    rows.push(summary(&path, &dir, &rep));
                } else {
                    println!(
                        "{}: {} records, complete = {}, output in {}",
                        path.display(),
                        rep.records.len(),
                        rep.complete,
                        dir.display()
                    );
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                code = code.max(e.exit_code());
            }
        }
    }
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("summary serializes")
        );
    }
    code
}

fn cmd_check(suite: &str, json: bool) -> i32 {
    let Some(results) = run_suite(suite) else {
        eprintln!("error: unknown suite `{suite}`");
        return 1;
    };
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    if json {
        let doc = serde_json::json!({
            "suite": suite,
            "passed": results.len() - failed.len(),
            "failed": failed.len(),
            "checks": results,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("summary serializes")
        );
    } else {
        for r in &results {
            let tag = if r.passed { "PASS" } else { "FAIL" };
            println!("{tag} {}::{}  {}", r.suite, r.name, r.detail);
        }
        println!(
            "{} passed, {} failed",
            results.len() - failed.len(),
            failed.len()
        );
    }
    for r in &failed {
        eprintln!("failed: {}::{}: {}", r.suite, r.name, r.detail);
    }
    if failed.is_empty() {
        0
    } else {
        2
    }
}

fn cmd_diag(path: &Path, json: bool) -> Result<()> {
    let snap = Snapshot::read(path)?;
    let grid = snap.grid.build()?;
    let params = snap.physics.params();
    let gop = GOperator::new(&grid, params.lambda_c, snap.g_policy).map_err(CliError::from)?;
    let rec = record(&grid, &snap.state(), &params, &gop, snap.mode)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&rec).expect("record serializes")
        );
    } else {
        println!("{}", csv_header(grid.dim()));
        println!("{}", csv_row(&rec));
    }
    Ok(())
}

fn report(res: Result<()>) -> i32 {
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { configs, out, json } => cmd_run(&configs, out.as_deref(), json),
        Command::Check { suite, json } => cmd_check(&suite, json),
        Command::Coeffs { order } => report(coeffs_csv(order).map(|t| print!("{t}"))),
        Command::Symbol { config } => report(
            load_config(&config)
                .and_then(|c| symbol_csv(&c))
                .map(|t| print!("{t}")),
        ),
        Command::Diag { snapshot, json } => report(cmd_diag(&snapshot, json)),
    };
    ExitCode::from(code as u8)
}
