use std::path::PathBuf;
use std::process::ExitCode;

use calabi_cli::{exit_code, run, Command, EngineKind, EngineOptions, JobSpec};
use calabi_core::Convention;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "calabi", version, about = "Quasi-state and Calabi computations on toric base spaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// ζ, Calabi and σ terms of a toric Hamiltonian.
    Eval(Common),
    /// Ball quasimorphism values, closed form against the pullback construction.
    MuDelta(Common),
    /// Rank certificate for the μ_δ matrix.
    Independence(Common),
    /// Symmetry certificate for a point, a set of balls, or a function's support.
    Displace(Common),
    /// Median of a measured tree.
    Median(Common),
    /// Partition-of-unity decomposition of a function.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// Run the γ ladder 0.2, 0.1, 0.05, 0.025 instead of a single γ.
        #[arg(long)]
        gamma_sweep: bool,
    },
    /// Runs the acceptance checks.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Corrupt the Dirichlet oracle (mutation check).
        #[arg(long)]
        tamper_dirichlet: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    Quad,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Paper,
    Derived,
}

#[derive(Args)]
struct Common {
    /// Space description (JSON).
    #[arg(long)]
    space: Option<PathBuf>,
    /// Use the unit simplex of this dimension as the space.
    #[arg(long)]
    n: Option<usize>,
    /// Function, or list of profiles (JSON).
    #[arg(long)]
    function: Option<PathBuf>,
    /// Tree description (JSON with an `edges` list).
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Balls to displace (JSON list of `{center, radius}`).
    #[arg(long)]
    balls: Option<PathBuf>,
    /// Point to displace, comma separated.
    #[arg(long, value_delimiter = ',')]
    point: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "exact")]
    engine: EngineArg,
    #[arg(long, default_value_t = 6)]
    order: usize,
    #[arg(long, default_value_t = 1)]
    subdivisions: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma separated δ values.
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<f64>,
    /// Radius of the matched bumps used when no profiles are given.
    #[arg(long, default_value_t = 0.02)]
    radius: f64,
    #[arg(long, value_enum, default_value = "derived")]
    convention: ConventionArg,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    power: i64,
    /// Directory for CSV/JSON artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rounded human-readable tables instead of CSV on stdout.
    #[arg(long)]
    table: bool,
}

impl Common {
    fn job(self, command: Command) -> JobSpec {
        let mut job = JobSpec::new(command);
        job.space = self.space;
        job.n = self.n;
        job.function = self.function;
        job.tree = self.tree;
        job.balls = self.balls;
        job.point = self.point;
        job.engine = EngineOptions {
            engine: match self.engine {
                EngineArg::Exact => EngineKind::Exact,
                EngineArg::Quad => EngineKind::Quad,
                EngineArg::Mc => EngineKind::Mc,
            },
            order: self.order,
            subdivisions: self.subdivisions,
            samples: self.samples,
            seed: self.seed,
        };
        job.deltas = self.deltas;
        job.radius = self.radius;
        job.convention = match self.convention {
            ConventionArg::Paper => Convention::Paper,
            ConventionArg::Derived => Convention::Derived,
        };
        job.gamma = self.gamma;
        job.power = self.power;
        job.out = self.out;
        job.table = self.table;
        job
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let job = match Cli::parse().command {
        Cmd::Eval(c) => c.job(Command::Eval),
        Cmd::MuDelta(c) => c.job(Command::MuDelta),
        Cmd::Independence(c) => c.job(Command::Independence),
        Cmd::Displace(c) => c.job(Command::Displace),
        Cmd::Median(c) => c.job(Command::Median),
        Cmd::Decompose { common, gamma_sweep } => {
            let mut job = common.job(Command::Decompose);
            job.gamma_sweep = gamma_sweep;
            job
        }
        Cmd::Selftest { common, tamper_dirichlet } => {
            let mut job = common.job(Command::Selftest);
            job.tamper_dirichlet = tamper_dirichlet;
            job
        }
    };
    let result = run(&job).and_then(|a| {
        if let Some(dir) = &job.out {
            a.write(&job, dir)?;
        }
        Ok(a)
    });
    match result {
        Ok(a) => {
            print!("{}", a.stdout);
            if a.failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
