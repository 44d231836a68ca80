//! `adaptscan`: causal ordering, perfect adaptation analysis, simulation and
//! independence testing for ODE models.
//!
//! Exit codes: 0 success, 1 usage error, 2 model, graph or data error, 3 numerical
//! non-convergence.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "adaptscan", version, about = "Causal ordering and perfect adaptation analysis for ODE models")]
pub struct Cli {
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Dynamic,
    Equilibrium,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Csv,
}

/// Integrator settings shared by the simulation commands.
#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    /// RK4 step size.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Integration horizon (for equilibrium searches, the give-up time).
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Equilibrium tolerance on max |dX/dt|.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Override a parameter value, as NAME=VALUE (repeatable).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Causal ordering graph of a model.
    Order {
        /// Model file, or the name of a bundled model.
        model: String,
        #[arg(long, value_enum, default_value = "equilibrium")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// Markov ordering graph of a model.
    Markov {
        model: String,
        #[arg(long, value_enum, default_value = "equilibrium")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// d-separation query in the Markov ordering graph.
    Dsep {
        model: String,
        #[arg(long, value_enum, default_value = "equilibrium")]
        mode: Mode,
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Spearman (partial) rank correlation tests over all pairs of columns.
    IndepTable {
        /// Dataset CSV.
        data: PathBuf,
        /// Columns to test (default: all).
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        #[arg(long = "max-cond", default_value_t = 1)]
        max_cond: usize,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// Add the d-separation implied by this model's equilibrium Markov ordering graph.
        #[arg(long)]
        model: Option<String>,
    },
    /// Variables that perfectly adapt to an input signal.
    Adapt {
        model: String,
        #[arg(long)]
        input: String,
    },
    /// Integrate the dynamics and print the trajectory.
    Simulate {
        model: String,
        #[command(flatten)]
        sim: SimArgs,
        /// Change an input during the run, as TIME:NAME=VALUE (repeatable).
        #[arg(long = "schedule", value_name = "TIME:NAME=VALUE")]
        schedule: Vec<String>,
        /// Record every this many time units.
        #[arg(long, default_value_t = 0.1)]
        every: f64,
    },
    /// Equilibrate, step an input, and equilibrate again.
    Step {
        model: String,
        #[arg(long)]
        input: String,
        #[arg(long)]
        pre: f64,
        #[arg(long)]
        post: f64,
        #[command(flatten)]
        sim: SimArgs,
        /// Also write the post-step trajectory here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Soft intervention: equilibrate, change a parameter, and equilibrate again.
    Intervene {
        model: String,
        #[arg(long)]
        param: String,
        #[arg(long)]
        pre: f64,
        #[arg(long)]
        post: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sample equilibria over random exogenous draws.
    Sample {
        model: String,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Randomise a parameter, as NAME=uniform(LO,HI) or NAME=constant(C) (repeatable).
        #[arg(long = "vary", value_name = "NAME=DIST")]
        vary: Vec<String>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Local causal discovery triples with a context column.
    Lcd {
        data: PathBuf,
        #[arg(long)]
        context: String,
        /// Candidate columns (default: all others).
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<String>,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Detect perfect adaptation from a soft intervention on an equilibrium equation.
    ///
    /// Without data the verdict comes from the graphs; with --baseline and
    /// --intervened it comes from two-sample shift tests.
    Detect {
        model: String,
        /// Target equation (or its naturally labelled variable).
        #[arg(long)]
        target: String,
        #[arg(long, requires = "intervened")]
        baseline: Option<PathBuf>,
        #[arg(long, requires = "baseline")]
        intervened: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
