//! `ptbreak`: checks, metrics, sweeps and grid scans of PT-symmetric
//! matrix families from JSON family files.

mod commands;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ptbreak::{Error, Tolerances};
use serde::Serialize;

use commands::{parse_assign, parse_binding, parse_range, Ctx};

#[derive(Parser)]
#[command(
    name = "ptbreak",
    version,
    about = "PT-symmetry breaking analysis of parameterized matrix families"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Relative radius for clustering eigenvalues.
    #[arg(long, global = true)]
    tol_eig_cluster: Option<f64>,
    /// Relative residual accepted by checks.
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    /// Relative distance from the imaginary axis counted as on-axis.
    #[arg(long, global = true)]
    tol_axis: Option<f64>,
    /// Seed for randomized fixtures. No current command draws random numbers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Args)]
struct Instance {
    /// Family file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Parameter overrides, e.g. `a=1 b=sqrt(3)/2`.
    #[arg(long, num_args = 1.., value_parser = parse_assign)]
    params: Vec<(String, f64)>,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetry, metric and stability report for one family member (JSON on stdout).
    Check(Instance),
    /// The metric G and Hermitian S with A = iG⁻¹S for one family member.
    Metric(Instance),
    /// Track the spectrum along a path; writes `<out>.samples.csv` and `<out>.events.json`.
    Sweep {
        #[command(flatten)]
        instance: Instance,
        /// Path as `var=lo:hi:steps`; defaults to the file's path.
        #[arg(long, value_parser = parse_range)]
        path: Option<(String, f64, f64, usize)>,
        /// Parameter bindings in terms of the path variable, e.g. `a=1+sqrt(2)*cos(t)`.
        #[arg(long, num_args = 1.., value_parser = parse_binding)]
        bind: Vec<(String, String)>,
        /// Output prefix.
        #[arg(long)]
        out: PathBuf,
        /// Also write `<out>.svg` with the eigenvalue trajectories.
        #[arg(long)]
        svg: bool,
    },
    /// Classify a 2-D parameter grid; writes `<out>.grid.csv` and `<out>.boundary.csv`.
    Grid {
        #[command(flatten)]
        instance: Instance,
        /// Horizontal axis as `param=lo:hi:n`; defaults to the file's grid.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        x: Option<(String, f64, f64, usize)>,
        /// Vertical axis as `param=lo:hi:n`; defaults to the file's grid.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        y: Option<(String, f64, f64, usize)>,
        /// Output prefix.
        #[arg(long)]
        out: PathBuf,
        /// Also write `<out>.svg` with the shaded regions.
        #[arg(long)]
        svg: bool,
    },
    /// Built-in example families.
    Examples {
        #[command(subcommand)]
        action: Examples,
    },
}

#[derive(Subcommand)]
enum Examples {
    /// Print the preset names.
    List,
    /// Print a preset's family file.
    Show { name: String },
    /// Write a preset's family file to disk.
    Emit {
        name: String,
        /// Destination; defaults to `<name>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io { path: String, message: String },
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn csv(path: &Path, e: csv::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if !e.is_input_error() => 3,
            _ => 2,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.code(),
            CliError::Io { .. } => "IoError",
            CliError::Usage(_) => "UsageError",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Io { path, message } => format!("{path}: {message}"),
            CliError::Usage(m) => m.clone(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

#[derive(Serialize)]
struct ErrorReport {
    error: ErrorBody,
}

#[derive(Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
    exit_code: u8,
}

fn tolerances(g: &Global) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    if let Some(v) = g.tol_eig_cluster {
        tol.eig_cluster = v;
    }
    if let Some(v) = g.tol_residual {
        tol.residual = v;
    }
    if let Some(v) = g.tol_axis {
        tol.axis = v;
    }
    tol.validate()?;
    Ok(tol)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Ctx {
        tol: tolerances(&cli.global)?,
        quiet: cli.global.quiet,
    };
    match cli.command {
        Command::Check(i) => commands::check(&ctx, &i.input, &i.params),
        Command::Metric(i) => commands::metric(&ctx, &i.input, &i.params),
        Command::Sweep {
            instance,
            path,
            bind,
            out,
            svg,
        } => commands::sweep(
            &ctx,
            commands::SweepArgs {
                input: &instance.input,
                params: &instance.params,
                path,
                bind: &bind,
                out: &out,
                svg,
            },
        ),
        Command::Grid {
            instance,
            x,
            y,
            out,
            svg,
        } => commands::grid(
            &ctx,
            commands::GridArgs {
                input: &instance.input,
                params: &instance.params,
                x,
                y,
                out: &out,
                svg,
            },
        ),
        Command::Examples {
            action: Examples::List,
        } => {
            commands::examples_list();
            Ok(())
        }
        Command::Examples {
            action: Examples::Show { name },
        } => commands::examples_show(&name),
        Command::Examples {
            action: Examples::Emit { name, out },
        } => commands::examples_emit(&ctx, &name, out.as_deref()),
    }
}

fn fail(e: CliError) -> ExitCode {
    let exit_code = e.exit_code();
    let report = ErrorReport {
        error: ErrorBody {
            code: e.code(),
            message: e.message(),
            exit_code,
        },
    };
    eprint!("{}", output::to_json(&report));
    ExitCode::from(exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return fail(CliError::Usage(
                e.render().to_string().trim_end().to_string(),
            ))
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
