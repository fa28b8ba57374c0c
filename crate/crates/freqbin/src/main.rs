//! Command-line front end: run one circuit description, sweep a parameter
//! grid, or run the built-in verification suite.
//!
//! Exit codes: 0 success, 1 simulation error, 2 parse/validation error,
//! 3 verification-suite failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use freqbin::circuit_file::{parse_grid_axis, parse_override, CircuitFile, ParamValue};
use freqbin::report::{render_structured, render_sweep_structured, render_sweep_text, render_text};
use freqbin::{checks, run, sweep};

#[derive(Parser)]
#[command(
    name = "freqbin",
    version,
    about = "Simulate frequency-bin-encoded photonic circuits"
)]
struct Args {
    /// Circuit description file (.circuit) to run.
    #[arg(long, value_name = "PATH")]
    circuit: Option<PathBuf>,

    /// Override a parameter, NAME=VALUE (repeatable). Values follow the
    /// circuit-file grammar: real, [re,im], mag@phase, or an envelope block.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,

    /// Sweep a parameter axis, NAME=V1,V2,... (repeatable; axes combine as a
    /// Cartesian product and the first axis varies slowest).
    #[arg(long = "grid", value_name = "NAME=V1,V2,...")]
    grid: Vec<String>,

    /// Write the report to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report flavour: human-readable text or machine-readable JSON.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Run the built-in verification suite and exit (0 on success, 3 on any
    /// failure).
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

const EXIT_SIMULATION: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();

    if args.check {
        let (text, all_passed) = checks::report(&checks::run_all());
        return match emit(&args.out, &text) {
            Ok(()) if all_passed => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(EXIT_CHECK_FAILED),
            Err(code) => code,
        };
    }

    let Some(path) = &args.circuit else {
        eprintln!("freqbin: --circuit <PATH> is required (or --check)");
        return ExitCode::from(EXIT_INVALID);
    };

    let file = match CircuitFile::load(path) {
        Ok(file) => file,
        Err(err) => {
            eprintln!("freqbin: {}: {err}", path.display());
            return ExitCode::from(EXIT_INVALID);
        }
    };

    let mut overrides: BTreeMap<String, ParamValue> = BTreeMap::new();
    for text in &args.set {
        match parse_override(text) {
            Ok((name, value)) => {
                overrides.insert(name, value);
            }
            Err(err) => {
                eprintln!("freqbin: --set {text}: {err}");
                return ExitCode::from(EXIT_INVALID);
            }
        }
    }

    let mut grid: Vec<(String, Vec<ParamValue>)> = Vec::new();
    for text in &args.grid {
        match parse_grid_axis(text) {
            Ok(axis) => grid.push(axis),
            Err(err) => {
                eprintln!("freqbin: --grid {text}: {err}");
                return ExitCode::from(EXIT_INVALID);
            }
        }
    }
    for name in overrides.keys().chain(grid.iter().map(|(n, _)| n)) {
        if !file.accepts_parameter(name) {
            eprintln!(
                "freqbin: unknown parameter `{name}` for {} (declared: {})",
                file.name(),
                file.declared_parameters().join(", ")
            );
            return ExitCode::from(EXIT_INVALID);
        }
    }

    if grid.is_empty() {
        run_one(&args, &file, &overrides)
    } else {
        run_sweep(&args, &file, &overrides, &grid)
    }
}

fn run_one(args: &Args, file: &CircuitFile, overrides: &BTreeMap<String, ParamValue>) -> ExitCode {
    let circuit = match file.instantiate(overrides) {
        Ok(circuit) => circuit,
        Err(err) => {
            eprintln!("freqbin: {}: {err}", file.name());
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let parameters = file
        .resolved_parameters(overrides)
        .expect("instantiate already resolved these parameters");
    let result = match run(&circuit) {
        Ok(result) => result,
        Err(err) => {
            eprintln!("freqbin: {}: {err}", file.name());
            return ExitCode::from(EXIT_SIMULATION);
        }
    };
    let text = match args.format {
        Format::Text => render_text(&circuit, file.device(), &parameters, &result),
        Format::Structured => render_structured(&circuit, file.device(), &parameters, &result),
    };
    match emit(&args.out, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn run_sweep(
    args: &Args,
    file: &CircuitFile,
    overrides: &BTreeMap<String, ParamValue>,
    grid: &[(String, Vec<ParamValue>)],
) -> ExitCode {
    let rows = sweep(grid, |assignment| {
        let mut merged = overrides.clone();
        for (name, value) in assignment {
            merged.insert(name.clone(), value.clone());
        }
        let circuit = file.instantiate(&merged)?;
        run(&circuit)
    });
    let text = match args.format {
        Format::Text => render_sweep_text(file.name(), file.device(), &rows),
        Format::Structured => render_sweep_structured(file.name(), file.device(), &rows),
    };
    if let Err(code) = emit(&args.out, &text) {
        return code;
    }
    if rows.iter().any(|row| row.result.is_err()) {
        ExitCode::from(EXIT_SIMULATION)
    } else {
        ExitCode::SUCCESS
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), ExitCode> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|err| {
            eprintln!("freqbin: cannot write {}: {err}", path.display());
            ExitCode::from(EXIT_SIMULATION)
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
