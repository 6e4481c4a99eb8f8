use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "iwasawa", version, about = "Exact verification sweeps for mod-p Iwasawa algebras of Chevalley congruence kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Root system data and the highest-root maximum coefficient.
    Roots(RunConfig),
    /// Leading terms of generator commutators against the matrix oracle.
    Prop31(RunConfig),
    /// Leading-term identity for commutators with random polynomials.
    Pde(RunConfig),
    /// Normal-element obstruction for a candidate or a seeded catalog.
    Normality(RunConfig),
    /// Divisibility chase on a synthetic instance and a mutated copy.
    Chase(RunConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Cartan type label such as `A2`, `E8`, or a bare family letter with --rank.
    #[arg(long = "type", default_value = "A2")]
    pub type_label: String,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    /// Level of the first argument; all of {0,1} when omitted.
    #[arg(long)]
    pub r: Option<u32>,
    /// Level of the second argument; all of {0,1} when omitted.
    #[arg(long)]
    pub s: Option<u32>,
    /// Degree budget D.
    #[arg(long)]
    pub trunc: Option<u32>,
    /// Matrix model precision N.
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Candidate series in the series JSON format.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, run): (&RunConfig, fn(&RunConfig) -> commands::Outcome) = match &cli.command {
        Command::Roots(c) => (c, commands::roots),
        Command::Prop31(c) => (c, commands::prop31),
        Command::Pde(c) => (c, commands::pde),
        Command::Normality(c) => (c, commands::normality),
        Command::Chase(c) => (c, commands::chase),
    };
    commands::finish(config, run(config))
}
