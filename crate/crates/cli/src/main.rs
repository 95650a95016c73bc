#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ppde_lab::viscosity::Role;

use commands::Ctx;
use config::{ExperimentConfig, Extremum};
use output::{Artifacts, Summary};

/// Exit code when a run completes but one of its assertions fails.
const EXIT_FAILED: u8 = 1;
/// Exit code for configuration and usage errors.
const EXIT_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "ppde-lab", version, about = "Viscosity-solution experiments for semilinear path-dependent PDEs on binary path trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV tables and JSON reports.
    #[arg(long, default_value = "ppde-out")]
    out: PathBuf,
    /// Tolerance override; defaults depend on the subcommand.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for randomized fixtures; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "PPDE_LAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RoleArg {
    Sub,
    Super,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Role {
        match r {
            RoleArg::Sub => Role::Sub,
            RoleArg::Super => Role::Super,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the subcommand named by the config's `operation` field.
    Run(Common),
    /// Oracle solution and its sub/supersolution checks.
    Solve(Common),
    /// Perron supremum over a validated subsolution family.
    Perron(Common),
    /// Comparison of a subsolution against a supersolution.
    Compare(Common),
    /// Maximum principle for the Pucci extremal equation.
    Maxprinciple(Common),
    /// Snell envelope and first-contact stopping rule of the obstacle.
    Snell(Common),
    /// Doob-Meyer decomposition of the Snell envelope and backward reflection.
    Decompose(Common),
    /// Sup- or inf-convolution of the obstacle (or terminal) functional.
    Regularize {
        #[command(flatten)]
        common: Common,
        /// Penalty weight.
        #[arg(long)]
        n: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<Extremum>,
    },
    /// Viscosity sub- or supersolution check.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        role: Option<RoleArg>,
        /// Registry name, or an inline JSON object such as '{"name":"pucci","L":1}'.
        #[arg(long)]
        generator: Option<String>,
    },
    /// Nonlinear expectation of the terminal functional.
    Expect {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<Extremum>,
    },
    /// List generators and path functionals with their parameters.
    Registry {
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Solve(_) => "solve",
            Command::Perron(_) => "perron",
            Command::Compare(_) => "compare",
            Command::Maxprinciple(_) => "maxprinciple",
            Command::Snell(_) => "snell",
            Command::Decompose(_) => "decompose",
            Command::Regularize { .. } => "regularize",
            Command::Check { .. } => "check",
            Command::Expect { .. } => "expect",
            Command::Registry { .. } => "registry",
        }
    }

    fn common(&self) -> Option<&Common> {
        match self {
            Command::Run(c)
            | Command::Solve(c)
            | Command::Perron(c)
            | Command::Compare(c)
            | Command::Maxprinciple(c)
            | Command::Snell(c)
            | Command::Decompose(c) => Some(c),
            Command::Regularize { common, .. } | Command::Check { common, .. } | Command::Expect { common, .. } => {
                Some(common)
            }
            Command::Registry { .. } => None,
        }
    }
}

fn init_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let Some(common) = cli.command.common() else {
        if let Command::Registry { json } = cli.command {
            print!("{}", commands::registry_text(json)?);
        }
        return Ok(true);
    };
    init_threads(common.threads)?;
    let cfg = ExperimentConfig::load(&common.config)?;
    let mut op = cli.command.name().to_string();
    match (&cli.command, cfg.operation.as_deref()) {
        (Command::Run(_), Some(sel)) => op = sel.to_string(),
        (Command::Run(_), None) => bail!("field `operation`: required by `run`"),
        (_, Some(sel)) if sel != op => bail!("field `operation`: config selects {sel:?} but the subcommand is {op:?}"),
        _ => {}
    }
    let ctx = Ctx::new(&cfg, common.seed, common.tol)?;
    let mut out = Artifacts::create(&common.out)?;
    let mut s = Summary::default();
    s.add("command", op.as_str());
    let (mut n, mut mode, mut role, mut generator, mut emode) = (None, None, None, None, None);
    match &cli.command {
        Command::Regularize { n: a, mode: b, .. } => (n, mode) = (*a, *b),
        Command::Check { role: r, generator: g, .. } => (role, generator) = (r.map(Role::from), g.as_deref()),
        Command::Expect { mode: m, .. } => emode = *m,
        _ => {}
    }
    let passed = match op.as_str() {
        "solve" => commands::solve(&ctx, &mut out, &mut s)?,
        "perron" => commands::perron(&ctx, &mut out, &mut s)?,
        "compare" => commands::compare(&ctx, &mut out, &mut s)?,
        "maxprinciple" => commands::maxprinciple(&ctx, &mut out, &mut s)?,
        "snell" => commands::snell(&ctx, &mut out, &mut s)?,
        "decompose" => commands::decompose(&ctx, &mut out, &mut s)?,
        "regularize" => commands::regularize(&ctx, n, mode, &mut out, &mut s)?,
        "check" => commands::check(&ctx, role, generator, &mut out, &mut s)?,
        "expect" => commands::expect(&ctx, emode, &mut out, &mut s)?,
        other => bail!("field `operation`: unknown operation {other:?}"),
    };
    for p in out.written() {
        s.add("wrote", p.display().to_string());
    }
    print!("{}", s.render());
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
