use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mbqc_core::experiment::{self, ExperimentConfig};
use mbqc_core::mbqec::Code;
use mbqc_core::verify::{self, Suite, CRITERIA};
use mbqc_core::SimError;

/// Graph-state purification and measurement-based encoded communication simulator.
#[derive(Parser)]
#[command(name = "mbqcsim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment described by a JSON config.
    Run { config: PathBuf },
    /// Run the acceptance checks.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        suite: SuiteArg,
        /// Write verify-report.json here; the full suite also writes the figure data.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the zero-error read-in patterns of a code as CSV.
    Patterns {
        #[arg(long, default_value = "repetition3")]
        code: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

const OK: u8 = 0;
const CRITERION_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;

fn diagnostic(e: &SimError) -> ExitCode {
    let kind = format!("{e:?}");
    let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Error");
    eprintln!("{}", serde_json::json!({ "error": kind, "message": e.to_string() }));
    ExitCode::from(CONFIG_ERROR)
}

fn init_workers() -> Result<(), SimError> {
    let Ok(v) = std::env::var("MBQCSIM_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| SimError::Config(format!("MBQCSIM_WORKERS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| SimError::Config(e.to_string()))
}

fn run(path: &PathBuf) -> Result<u8, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
    let config = ExperimentConfig::from_json(&text)?;
    let m = experiment::run(&config)?;
    for f in &m.files {
        println!("{} ({} rows, {} failed)", f.path.display(), f.rows, f.failed_rows);
    }
    Ok(OK)
}

fn verify(suite: Suite, output: Option<PathBuf>) -> Result<u8, SimError> {
    let mut reports = Vec::new();
    for (id, _) in CRITERIA {
        let r = verify::check(id, suite);
        println!("{}", r.line());
        reports.push(r);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    if let Some(dir) = output {
        std::fs::create_dir_all(&dir).map_err(|e| SimError::Config(format!("{}: {e}", dir.display())))?;
        let text = serde_json::to_string_pretty(&reports).map_err(|e| SimError::Config(e.to_string()))?;
        let path = dir.join("verify-report.json");
        std::fs::write(&path, text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        if suite == Suite::Full {
            for c in experiment::figure_configs(&dir.join("figures")) {
                let m = experiment::run(&c)?;
                println!("{}: {} files", c.output.display(), m.files.len());
            }
        }
    }
    Ok(if failed == 0 { OK } else { CRITERION_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_workers() {
        return diagnostic(&e);
    }
    let r = match cli.cmd {
        Cmd::Run { config } => run(&config),
        Cmd::Verify { suite, output } => {
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::Full => Suite::Full,
            };
            verify(suite, output)
        }
        Cmd::Patterns { code } => Code::from_name(&code).and_then(|c| experiment::patterns_csv(&c)).map(|t| {
            print!("{t}");
            OK
        }),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(e) => diagnostic(&e),
    }
}
