//! `gonodyn`: simulate, locate and classify fixed points, predict limits,
//! map basins and sweep parameters of gonosomal evolution operators.

mod commands;
mod config;
mod error;
mod spec;
mod svg;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Output;
use error::CliError;

#[derive(Parser)]
#[command(name = "gonodyn", version, about = "Dynamics of gonosomal evolution operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OperatorArgs {
    /// Parameter file: JSON (hemophilia or general operator) or name,value CSV.
    #[arg(long, value_name = "FILE", conflicts_with = "preset", required_unless_present = "preset")]
    params: Option<PathBuf>,
    /// Built-in parameter set: classical or w0.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Override one coefficient, e.g. --set c1=0.3 (repeatable; not rebalanced).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct SeedArgs {
    /// Newton seed grid per coordinate, lo:hi:count (default -3:3:5).
    #[arg(long, value_name = "LO:HI:N")]
    seeds: Option<String>,
    /// Closed forms only; skip the interior Newton search.
    #[arg(long)]
    no_search: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the operator from a state; one row per generation.
    Simulate {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Initial state x,y,u,v (or x1..,y1.. for a general operator).
        #[arg(long, allow_hyphen_values = true)]
        state: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Symmetric-log y axis in SVG output.
        #[arg(long)]
        log_y: bool,
    },
    /// Closed-form and Newton fixed points with spectra and classes.
    FixedPoints {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Spectrum and stability class of a fixed point (or of all found ones).
    Classify {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, allow_hyphen_values = true)]
        state: Option<String>,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Predicted limit of the orbit of a state, with its justification.
    Predict {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, allow_hyphen_values = true)]
        state: String,
        /// Step cap of the cross-checking simulation.
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Outcome of every point of a 2-D slice, e.g. --grid x=0:5:100,u=0:5:100,y=0,v=0.
    Basin {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Two ranges NAME=LO:HI:N plus optional fixed coordinates; unnamed ones are 0
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Boundary fixed points across a coefficient range, e.g. --vary c1=0:1:201.
    Sweep {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Coefficient range; give once or twice (the group is rescaled to sum to 1)
        #[arg(long, value_name = "NAME=LO:HI:N", required = true)]
        vary: Vec<String>,
    },
    /// Write the resolved parameters as JSON or name,value CSV.
    Params {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn load(op: &OperatorArgs) -> Result<gonodyn_core::io::LoadedOperator, CliError> {
    config::load(op.params.as_deref(), op.preset.as_deref(), &op.set)
}

fn no_svg(out: &OutputArgs, command: &str) -> Result<(), CliError> {
    if out.format == Format::Svg {
        return Err(CliError::Usage(format!("{command}: SVG output is available for simulate and basin only")));
    }
    Ok(())
}

fn render(output: Output, format: Format) -> String {
    match (output, format) {
        (Output::Svg(s), _) => s,
        (Output::Table(t), Format::Json) => t.to_json(),
        (Output::Table(t), _) => t.to_csv(),
    }
}

fn run(cli: Cli) -> Result<(String, Option<PathBuf>), CliError> {
    let (output, out) = match cli.command {
        Command::Simulate { op, out, state, steps, log_y } => {
            let svg = out.format == Format::Svg;
            let opts = commands::SimulateOpts { state: &state, steps, svg, log_y };
            (commands::simulate(&load(&op)?, &opts)?, out)
        }
        Command::FixedPoints { op, out, seeds } => {
            no_svg(&out, "fixed-points")?;
            let grid = commands::seed_grid(seeds.seeds.as_deref(), !seeds.no_search)?;
            (commands::fixed_points(&load(&op)?, &grid)?, out)
        }
        Command::Classify { op, out, state, seeds } => {
            no_svg(&out, "classify")?;
            let grid = commands::seed_grid(seeds.seeds.as_deref(), !seeds.no_search)?;
            (commands::classify_cmd(&load(&op)?, state.as_deref(), &grid)?, out)
        }
        Command::Predict { op, out, state, steps } => {
            no_svg(&out, "predict")?;
            (commands::predict(&load(&op)?, &state, steps)?, out)
        }
        Command::Basin { op, out, grid, steps } => {
            let grid = spec::Grid::parse(&grid)?;
            let svg = out.format == Format::Svg;
            (commands::basin(&load(&op)?, &grid, steps, svg)?, out)
        }
        Command::Sweep { op, out, vary } => {
            no_svg(&out, "sweep")?;
            let vary = vary.iter().map(|v| spec::Vary::parse(v)).collect::<Result<Vec<_>, _>>()?;
            (commands::sweep(&load(&op)?, &vary)?, out)
        }
        Command::Params { op, out } => {
            no_svg(&out, "params")?;
            let doc = config::document(&load(&op)?);
            let text = match (&doc, out.format) {
                (gonodyn_core::io::ParamsFile::Hemophilia(p), Format::Csv) => config::params_csv(p),
                (_, Format::Json) => doc.to_json() + "\n",
                (_, _) => return Err(CliError::Usage("general operators are written as JSON only".into())),
            };
            return Ok((text, out.out));
        }
    };
    Ok((render(output, out.format), out.out))
}

/// Worker count from `GONODYN_THREADS`, if set.
fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("GONODYN_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("GONODYN_THREADS must be a positive integer, got '{s}'"))),
        },
    }
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    let (text, out) = match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(|| run(cli))?,
        None => run(cli)?,
    };
    match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gonodyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
