//! `nlamp`: writes the amplifier's table and figure data as CSV/JSON.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_grid, parse_reflectivity, BranchSel, FileConfig, Reflectivity, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "nlamp",
    version,
    about = "Heralded noiseless amplifier simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Branch table: table1.csv
    Table1,
    /// Success-branch gain, fidelity and probability over |α| and r: sweep.csv
    Sweep,
    /// Maximal success probability per gain threshold: optimize.csv
    Optimize,
    /// Wigner grids for the selected branches: wigner_*.csv
    Wigner,
    /// Raw branch results: branches.json
    Branches,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON config; flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Input amplitude |α|
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Reflectivity, shared ("0.4") or per splitter ("0.3,0.4,0.5")
    #[arg(long, global = true, value_parser = parse_reflectivity)]
    r: Option<Reflectivity>,
    /// Fock truncation
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    eta_qnd: Option<f64>,
    #[arg(long, global = true)]
    eta_pd1: Option<f64>,
    #[arg(long, global = true)]
    eta_pd2: Option<f64>,
    #[arg(long = "geff0-min", global = true)]
    geff0_min: Option<f64>,
    #[arg(long = "geff0-max", global = true)]
    geff0_max: Option<f64>,
    #[arg(long = "geff0-step", global = true)]
    geff0_step: Option<f64>,
    /// "xmin,xmax,pmin,pmax,nx,np"
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = |s: &str| parse_grid(s).map(|_| s.to_string()))]
    grid: Option<String>,
    /// 1..8 or `input`; repeatable
    #[arg(long = "branch", global = true, value_parser = |s: &str| s.parse::<BranchSel>().map(|_| s.to_string()))]
    branches: Vec<String>,
}

impl Flags {
    fn as_overrides(&self) -> FileConfig {
        FileConfig {
            alpha: self.alpha,
            r: self.r.clone(),
            dim: self.dim,
            eta_qnd: self.eta_qnd,
            eta_pd1: self.eta_pd1,
            eta_pd2: self.eta_pd2,
            geff0_min: self.geff0_min,
            geff0_max: self.geff0_max,
            geff0_step: self.geff0_step,
            grid: self.grid.clone(),
            branches: (!self.branches.is_empty()).then(|| self.branches.clone()),
            out: self.out.clone(),
            ..Default::default()
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let file = match &cli.flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(file.overlay(cli.flags.as_overrides()))?;
    match cli.command {
        Command::Table1 => commands::table1(&cfg),
        Command::Sweep => commands::sweep_cmd(&cfg),
        Command::Optimize => commands::optimize(&cfg),
        Command::Wigner => commands::wigner(&cfg),
        Command::Branches => commands::branches(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nlamp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
