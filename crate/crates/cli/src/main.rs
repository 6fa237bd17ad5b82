use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corbf_cli::bound::bound_probe;
use corbf_cli::report::compare_report;
use corbf_cli::{run_experiment, Arch, CliError, ExperimentConfig, Manifest, Task};
use corbf_core::tasks::{FunApproxTarget, SysIdCenters};

#[derive(Parser)]
#[command(name = "corbf", version, about = "Multi-kernel RBF network benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the selected architectures over several seeds and write artifacts.
    Run(RunArgs),
    /// Re-run an experiment from its manifest.
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare an experiment directory with the published figures.
    Report { dir: PathBuf },
    /// Print 1/lambda_max for a task's training set.
    Bound(BoundArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    #[value(name = "exp-x1sq-minus-x2sq")]
    ExpX1sqMinusX2sq,
    /// exp(c1*x1^2 + c2*x2^2) with --funapprox-coeffs
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum CentersArg {
    Symmetric,
    PaperLiteral,
}

impl From<CentersArg> for SysIdCenters {
    fn from(c: CentersArg) -> Self {
        match c {
            CentersArg::Symmetric => SysIdCenters::Symmetric,
            CentersArg::PaperLiteral => SysIdCenters::PaperLiteral,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    task: Task,
    #[arg(long, value_delimiter = ',')]
    arch: Option<Vec<Arch>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Root seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Present samples in a fresh random order every epoch.
    #[arg(long)]
    shuffle: bool,
    #[arg(long, value_enum, default_value = "exp-x1sq-minus-x2sq")]
    funapprox_target: TargetArg,
    /// C1,C2 for the custom target.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    funapprox_coeffs: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "symmetric")]
    sysid_centers: CentersArg,
    #[arg(long)]
    sysid_period: Option<usize>,
}

#[derive(Args)]
struct BoundArgs {
    task: Task,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "symmetric")]
    sysid_centers: CentersArg,
}

fn config(args: RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::new(args.task);
    if let Some(a) = args.arch {
        cfg.archs = a;
    }
    if let Some(n) = args.runs {
        cfg.runs = n;
    }
    if let Some(t) = args.epochs {
        cfg.train.epochs = t;
    }
    if let Some(eta) = args.eta {
        cfg.train.eta = eta;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(p) = args.sysid_period {
        cfg.sysid_period = p;
    }
    cfg.train.shuffle = args.shuffle;
    cfg.sysid_centers = args.sysid_centers.into();
    cfg.funapprox_target = match (args.funapprox_target, args.funapprox_coeffs) {
        (TargetArg::ExpX1sqMinusX2sq, None) => FunApproxTarget::EXP_X1SQ_MINUS_X2SQ,
        (TargetArg::Custom, Some(c)) if c.len() == 2 => FunApproxTarget { c1: c[0], c2: c[1] },
        (TargetArg::Custom, _) => return Err(CliError::Config("custom target needs --funapprox-coeffs C1,C2".into())),
        (TargetArg::ExpX1sqMinusX2sq, Some(_)) => {
            return Err(CliError::Config("--funapprox-coeffs requires --funapprox-target custom".into()))
        }
    };
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = config(args)?;
            finish(run_experiment(&cfg)?);
        }
        Command::Rerun { manifest, out, jobs } => {
            let dir = manifest.parent().unwrap_or(&manifest);
            let dir = if manifest.is_dir() { manifest.as_path() } else { dir };
            let mut cfg = Manifest::load(dir)?.config;
            cfg.out = out;
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            finish(run_experiment(&cfg)?);
        }
        Command::Report { dir } => print!("{}", compare_report(&dir)?),
        Command::Bound(args) => {
            let mut cfg = ExperimentConfig::new(args.task);
            if let Some(eta) = args.eta {
                cfg.train.eta = eta;
            }
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            cfg.sysid_centers = args.sysid_centers.into();
            println!("{}", bound_probe(&cfg)?);
        }
    }
    Ok(())
}

fn finish(m: Manifest) {
    let cfg = &m.config;
    println!("{} -> {}", cfg.task, cfg.out.display());
    for s in &m.architectures {
        println!("  {}: {} completed, {} diverged", s.architecture, s.completed, s.diverged.len());
    }
    println!("  wall clock {:.1}s", m.wall_clock_secs);
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
