//! `pss`: verify, generate, solve and transport systems describing
//! pseudospherical or spherical surfaces.

mod commands;
mod error;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pss_core::config::Tolerances;
use serde_json::Value;

use crate::error::{input, CliResult};
use crate::source::{DataArgs, Source};

#[derive(Parser, Debug)]
#[command(name = "pss", version, about = "Verify, generate and numerically validate systems describing pseudospherical or spherical surfaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Seed for identity testing and random draws (decimal or 0x hex).
    #[arg(long, global = true, default_value = "0xC0FFEE", value_parser = parse_seed)]
    pub seed: u64,
    /// Directory for report and grid files; reports always go to stdout.
    #[arg(long, global = true, env = "PSS_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Override a tolerance, e.g. `--tol curvature=1e-3` or `--tol zero.trials=200`.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the structure equations, nondegeneracy and frame dependencies.
    Verify(Source),
    /// Build a system and frame from a constant-row parameter set.
    Generate(commands::GenerateArgs),
    /// Solve the Goursat problem on the unit square and write the grid.
    Solve {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        data: DataArgs,
        /// Nodes per side.
        #[arg(long, default_value_t = 129)]
        n: usize,
    },
    /// Refinement study of the PDE residual, structure equations and
    /// Gaussian curvature.
    Curvature {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        data: DataArgs,
        /// Grid sizes, coarse to fine.
        #[arg(long, value_delimiter = ',', default_value = "33,65,129,257")]
        levels: Vec<usize>,
    },
    /// Transport the linear problem along a lattice path of a solution.
    Transport(commands::TransportArgs),
    /// Linear problem: zero-curvature check or transport.
    #[command(subcommand)]
    Linear(LinearCommand),
    /// Browse the catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Certify that a family member reproduces a catalog system.
    Reduce {
        /// Family key, e.g. cor5.1.
        from: String,
        /// Target key, e.g. plr.
        to: String,
        /// Target parameter `name=value`.
        #[arg(short = 'p', long = "param", value_parser = source::parse_binding)]
        params: Vec<(String, f64)>,
    },
}

#[derive(Subcommand, Debug)]
enum LinearCommand {
    /// Zero-curvature condition for the 2x2 and 3x3 pairs.
    Check(Source),
    /// Same as `pss transport`.
    Transport(commands::TransportArgs),
}

#[derive(Subcommand, Debug)]
enum CatalogCommand {
    List,
    Show {
        key: String,
    },
}

fn parse_seed(text: &str) -> Result<u64, String> {
    let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => text.parse(),
    };
    parsed.map_err(|_| format!("`{text}` is not a seed"))
}

impl Global {
    pub fn tolerances(&self) -> CliResult<Tolerances> {
        let mut value = serde_json::to_value(Tolerances::default().with_seed(self.seed)).expect("tolerances serialize");
        for item in &self.tol {
            let (path, raw) = item.split_once('=').ok_or_else(|| input(format!("--tol expects NAME=VALUE, got `{item}`")))?;
            let mut slot = &mut value;
            for key in path.split('.') {
                slot = slot.get_mut(key).ok_or_else(|| input(format!("unknown tolerance `{path}`")))?;
            }
            let new: Value = serde_json::from_str(raw.trim()).map_err(|_| input(format!("`{raw}` is not a number")))?;
            if !new.is_number() || slot.is_object() {
                return Err(input(format!("tolerance `{path}` needs a number")));
            }
            *slot = new;
        }
        serde_json::from_value(value).map_err(|e| input(format!("tolerance override: {e}")))
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Verify(s) => commands::verify(g, s),
        Command::Generate(a) => commands::generate(g, a),
        Command::Solve { source, data, n } => commands::solve(g, source, data, *n),
        Command::Curvature { source, data, levels } => commands::curvature(g, source, data, levels),
        Command::Transport(a) | Command::Linear(LinearCommand::Transport(a)) => commands::transport(g, a),
        Command::Linear(LinearCommand::Check(s)) => commands::linear_check(g, s),
        Command::Catalog(CatalogCommand::List) => commands::catalog_list(g),
        Command::Catalog(CatalogCommand::Show { key }) => commands::catalog_show(g, key),
        Command::Reduce { from, to, params } => commands::reduce(g, from, to, params),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
