//! Command-line front end: scenario files, CSV/SVG output and exit codes.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid physics or
//! scenario, 3 ray stopped early (partial output kept), 64 usage error.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use mhdpol_core::symbols::{PhasePoint, Sheet};
use mhdpol_core::verify::Mutation;

use crate::commands::{Context, Output, VerifyArgs};
use crate::config::Scenario;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Slow, Alfven and fast speeds for one or more directions
    Speeds,
    /// Phase-speed polar diagram in a plane containing H
    Friedrichs,
    /// Regime of a phase point
    Classify,
    /// Bicharacteristic of one sheet
    Ray,
    /// Polarization transport along a bicharacteristic
    Transport,
    /// Randomized identity suite
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MutationArg {
    P2CrossSign,
}

#[derive(Debug, Parser)]
#[command(name = "mhdpol", version, about = "Characteristic structure and polarization transport for linearized ideal MHD")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// JSON scenario file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Direction a,b,c (repeatable for `speeds`)
    #[arg(long, value_name = "a,b,c", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub xi: Vec<[f64; 3]>,

    /// Phase point t,x1,x2,x3,tau,xi1,xi2,xi3
    #[arg(long, value_name = "t,x1,x2,x3,tau,xi1,xi2,xi3", value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Option<PhasePoint>,

    /// Characteristic sheet: 1 Alfven, 2 slow, 3 fast
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub sheet: Option<u8>,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Samples per check (`verify`) or number of angles (`friedrichs`)
    #[arg(long)]
    pub samples: Option<usize>,

    /// Output file; standard output when absent
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// SVG polar plot (`friedrichs`)
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,

    #[arg(long, value_enum, hide = true)]
    pub mutate: Option<MutationArg>,
}

fn parse_numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    parse_numbers::<3>(s)
}

fn parse_point(s: &str) -> Result<PhasePoint, String> {
    let v = parse_numbers::<8>(s)?;
    Ok(PhasePoint::new(v[0], [v[1], v[2], v[3]], v[4], [v[5], v[6], v[7]]))
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("MHDPOL_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("MHDPOL_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn execute(cli: &Cli, command_line: &str) -> Result<Output, CliError> {
    let scenario = cli.config.as_deref().map(Scenario::load).transpose()?;
    let ctx = Context {
        command_line,
        scenario: scenario.as_ref(),
    };
    let sheet = cli.sheet.and_then(|s| Sheet::from_index(usize::from(s)));
    match cli.command {
        Command::Speeds => commands::speeds(&ctx, &cli.xi),
        Command::Friedrichs => commands::friedrichs(&ctx, cli.samples, cli.svg.clone()),
        Command::Classify => commands::classify(&ctx, cli.point),
        Command::Ray => commands::ray(&ctx, cli.point, sheet),
        Command::Transport => commands::transport(&ctx, cli.point, sheet),
        Command::Verify => commands::verify(
            &ctx,
            &VerifyArgs {
                seed: cli.seed,
                samples: cli.samples.unwrap_or(1000),
                threads: threads_from_env()?,
                mutation: cli.mutate.map(|MutationArg::P2CrossSign| Mutation::P2CrossSign),
            },
        ),
    }
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

fn emit(cli: &Cli, out: &Output, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    for w in &out.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    for (path, text) in &out.files {
        write_file(path, text)?;
    }
    let stdout_err = |e| CliError::Io { path: PathBuf::from("<stdout>"), source: e };
    match (&cli.out, &out.csv) {
        (Some(path), Some(csv)) => {
            write_file(path, csv)?;
            stdout.write_all(out.body.as_bytes()).map_err(stdout_err)?;
        }
        (Some(path), None) => write_file(path, &out.body)?,
        (None, _) => stdout.write_all(out.body.as_bytes()).map_err(stdout_err)?,
    }
    Ok(())
}

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit code.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let command_line = argv.get(1..).unwrap_or_default().join(" ");
    let result = execute(&cli, &command_line).and_then(|out| {
        emit(&cli, &out, stdout, stderr)?;
        Ok(out.status())
    });
    match result {
        Ok(status) => status.code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}
