use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use contactfib::harness::{
    emit_report, explain, load_builtin, load_scenario, run_suite, RunReport, Settings, Status,
    TaskKind, BUILTINS,
};

#[derive(Parser)]
#[command(name = "contactfib", version, about = "Certify contact structures on symplectic fibrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a scenario file (or a built-in, by name).
    Verify {
        scenario: String,
        /// Grid points per axis, overriding every task.
        #[arg(long)]
        grid: Option<usize>,
        /// Positivity threshold τ.
        #[arg(long)]
        threshold: Option<f64>,
        /// Number of t-samples for family tasks.
        #[arg(long = "t-samples")]
        t_samples: Option<usize>,
        /// Seed for random-point checks.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the scenarios shipped with the tool.
    ListBuiltins,
    /// Describe what a task checks.
    Explain { task: String },
}

fn load(arg: &str) -> contactfib::Result<contactfib::harness::Scenario> {
    let path = Path::new(arg);
    if path.exists() {
        load_scenario(path)
    } else {
        load_builtin(arg)
    }
}

fn print_report(report: &RunReport) {
    println!("scenario {} ({})", report.scenario, &report.digest[..12.min(report.digest.len())]);
    for t in &report.tasks {
        let tag = match t.status {
            Status::Passed => "ok",
            Status::Failed => "FAILED",
            Status::Error => "ERROR",
        };
        let values: Vec<String> = t.values.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        print!("  [{}] {} {} (expect {}): {tag}", t.index, t.task, t.target, t.expect);
        if !values.is_empty() {
            print!("  {}", values.join(" "));
        }
        println!("  {:.2}s", t.wall_time_s);
        if let Some(m) = &t.message {
            println!("      {m}");
        }
        if let Some(r) = t.reports.first() {
            let leaf = r.worst_leaf();
            if !leaf.passed {
                println!(
                    "      worst: {} = {:.6e} at {:?}{}",
                    leaf.quantity,
                    leaf.min_value,
                    leaf.argmin_point,
                    leaf.t.map(|t| format!(" t = {t}")).unwrap_or_default()
                );
            }
        }
    }
    let failed = report.failures().count();
    if failed == 0 {
        println!("{} tasks passed", report.tasks.len());
    } else {
        println!("{failed} of {} tasks did not pass", report.tasks.len());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            scenario,
            grid,
            threshold,
            t_samples,
            seed,
            out,
        } => {
            let doc = match load(&scenario) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let settings = Settings {
                grid,
                threshold,
                t_samples,
                seed,
            };
            let report = run_suite(&doc, &settings);
            print_report(&report);
            if let Some(path) = out {
                if let Err(e) = emit_report(&report, &path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::ListBuiltins => {
            for (name, _) in BUILTINS {
                let desc = load_builtin(name)
                    .ok()
                    .and_then(|d| d.description)
                    .unwrap_or_default();
                println!("{name:<20} {desc}");
            }
            ExitCode::SUCCESS
        }
        Command::Explain { task } => match explain(&task) {
            Some(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            None => {
                let names: Vec<&str> = TaskKind::ALL.iter().map(|k| k.name()).collect();
                eprintln!("unknown task `{task}`; known tasks: {}", names.join(", "));
                ExitCode::from(2)
            }
        },
    }
}
