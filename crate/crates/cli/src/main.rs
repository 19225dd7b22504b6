mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use run::{Report, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pfr",
    version,
    about = "Periodic control experiments for an isothermal plug flow reactor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        /// Exit with status 4 when an acceptance check fails.
        #[arg(long)]
        check: bool,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config file without running it.
    Validate { config: PathBuf },
}

fn exit_for(e: &RunError) -> u8 {
    match e {
        RunError::Config(_) => EXIT_CONFIG,
        RunError::Infeasible(_) => EXIT_INFEASIBLE,
        RunError::Failed(_) => 1,
    }
}

fn write_outputs(report: &Report, cfg: &Config, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if cfg.output.csv {
        for table in &report.tables {
            let path = dir.join(&table.name);
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            written.push(path);
        }
        for file in &report.raw {
            let path = dir.join(&file.name);
            fs::write(&path, &file.contents)?;
            written.push(path);
        }
    }
    if cfg.output.json {
        let path = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(&report.summary)?;
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

fn load(path: &Path) -> Result<Config, RunError> {
    Ok(Config::load(path)?)
}

fn run(config: &Path, check: bool, out: Option<PathBuf>) -> Result<u8, RunError> {
    let cfg = load(config)?;
    let threads = cfg.thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Failed(e.to_string()))?;
    let report = pool.install(|| run::execute(&cfg))?;
    print!("{}", report.text);
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    let written = write_outputs(&report, &cfg, &dir)
        .map_err(|e| RunError::Failed(format!("{}: {e}", dir.display())))?;
    for path in written {
        println!("wrote {}", path.display());
    }
    if check {
        if report.failures.is_empty() {
            println!("check: PASS");
        } else {
            for f in &report.failures {
                println!("check: FAIL {f}");
            }
            return Ok(EXIT_CHECK);
        }
    }
    Ok(0)
}

fn validate(config: &Path) -> Result<u8, RunError> {
    let cfg = load(config)?;
    let params = cfg.params()?;
    let spec = cfg.spec()?;
    cfg.thread_count()?;
    // builds the controls so that signal definitions are checked as well
    run::controls(&cfg, &params, &spec).map_err(|e| match e {
        RunError::Failed(m) => RunError::Config(config::ConfigError::Field {
            field: "control".into(),
            reason: m,
        }),
        other => other,
    })?;
    println!("{}: ok (run = {})", config.display(), cfg.run);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, check, out } => run(&config, check, out),
        Command::Validate { config } => validate(&config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
