use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgqed_cli::bench::{benchmark, render};
use wgqed_cli::compare::compare;
use wgqed_cli::manifest::RunManifest;
use wgqed_cli::run::{execute, write_outputs};
use wgqed_cli::sweep::{parse_axis, run_sweep};
use wgqed_cli::table::Table;
use wgqed_cli::CliError;

#[derive(Parser)]
#[command(name = "wgqed", version, about = "Time-delayed waveguide QED simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration; `--key value` pairs override the file.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Distance between two result tables.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        /// Comma-separated observables; default is every common column.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
    },
    /// Wall-clock timing of each configuration, median of `repeats` runs.
    Benchmark {
        configs: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
    /// Cartesian grid over one or more keys.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `key=v1,v2,...`; repeat for more axes.
        #[arg(long, required = true)]
        grid: Vec<String>,
        #[arg(long)]
        prefix: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
}

fn read_text(path: &Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e)),
        None => Ok(String::new()),
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, overrides } => {
            let m = RunManifest::from_sources(&read_text(&config)?, &overrides)?;
            let out = execute(&m)?;
            match m.output.clone() {
                Some(prefix) => print_written(&write_outputs(&m, &prefix, &out)?),
                None => {
                    for (_, t) in &out.tables {
                        print!("{}", t.to_csv());
                    }
                }
            }
        }
        Command::Compare { a, b, tolerance, columns } => {
            let only = (!columns.is_empty()).then_some(columns.as_slice());
            let report = compare(&Table::read(&a)?, &Table::read(&b)?, tolerance, only)?;
            print!("{}", report.render());
            if !report.pass() {
                return Err(CliError::CompareFailed(format!("{} vs {}", a.display(), b.display())));
            }
        }
        Command::Benchmark { configs, repeats } => {
            let manifests = configs
                .iter()
                .map(|p| {
                    let text = read_text(&Some(p.clone()))?;
                    Ok((stem(p), RunManifest::from_sources(&text, &[])?))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            print!("{}", render(&benchmark(&manifests, repeats)?));
        }
        Command::Sweep { config, grid, prefix, overrides } => {
            let axes = grid.iter().map(|g| parse_axis(g)).collect::<Result<Vec<_>, _>>()?;
            print_written(&run_sweep(&read_text(&config)?, &overrides, &axes, &prefix)?);
        }
    }
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
