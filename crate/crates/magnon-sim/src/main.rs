//! Thin CLI over the library commands. Exit codes: 0 success, 2 config
//! error, 3 insufficient statistics, 4 non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use magnon_sim::commands::{
    cmd_concurrence, cmd_fiducials, cmd_g2, cmd_rate, cmd_run, cmd_theta_sweep, OutputFormat,
    OutputOptions,
};
use magnon_sim::plan::{Config, PlanMode};

#[derive(Parser)]
#[command(
    name = "magnon-sim",
    about = "Heralded polarization-memory simulator and analysis runner",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the plan's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the plan's out_dir, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the plan's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Restrict report files to one format (default: both).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the config's plan mode as-is.
    Run(CommonArgs),
    /// Six-fiducial storage-fidelity table.
    Fiducials(CommonArgs),
    /// Zenith-angle sweep with sinusoid fits.
    ThetaSweep(CommonArgs),
    /// Conditional autocorrelation of the retrieved field.
    G2(CommonArgs),
    /// Photonic concurrence of the dual-rail state.
    Concurrence(CommonArgs),
    /// Herald probability and success-rate projection.
    Rate(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Run(a)
            | Command::Fiducials(a)
            | Command::ThetaSweep(a)
            | Command::G2(a)
            | Command::Concurrence(a)
            | Command::Rate(a) => a,
        }
    }

    /// Mode the subcommand requires; `run` takes the config's mode.
    fn required_mode(&self) -> Option<PlanMode> {
        match self {
            Command::Run(_) => None,
            Command::Fiducials(_) => Some(PlanMode::Fiducials),
            Command::ThetaSweep(_) => Some(PlanMode::ThetaSweep),
            Command::G2(_) => Some(PlanMode::G2),
            Command::Concurrence(_) => Some(PlanMode::Concurrence),
            Command::Rate(_) => Some(PlanMode::RateProjection),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();

    let mut config = match Config::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        config.plan.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.plan.trials = trials;
    }
    if let Some(mode) = cli.command.required_mode() {
        config.plan.mode = mode;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    let out_dir = args
        .out
        .clone()
        .or_else(|| config.plan.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = OutputOptions {
        out_dir,
        format: match args.format {
            None => OutputFormat::Both,
            Some(FormatArg::Csv) => OutputFormat::Csv,
            Some(FormatArg::Json) => OutputFormat::Json,
        },
    };

    let result = match config.plan.mode {
        PlanMode::Fiducials => cmd_fiducials(&config, &out).map(|r| {
            println!(
                "fiducials: mean F = {:.4} ± {:.4} over {} states -> {}",
                r.mean_fidelity.value,
                r.mean_fidelity.sigma,
                r.rows.len(),
                out.out_dir.display()
            );
        }),
        PlanMode::ThetaSweep => cmd_theta_sweep(&config, &out).map(|r| {
            println!(
                "theta-sweep: {} points, fidelity spread {:.4} ({:.2} sigma) -> {}",
                r.fidelities.len(),
                r.fidelity_spread,
                r.fidelity_spread / r.spread_sigma.max(f64::MIN_POSITIVE),
                out.out_dir.display()
            );
        }),
        PlanMode::G2 => cmd_g2(&config, &out).map(|r| {
            println!(
                "g2 = {:.4} ± {:.4} (N1 = {}, N123 = {}) -> {}",
                r.g2,
                r.err,
                r.n1,
                r.n123,
                out.out_dir.display()
            );
        }),
        PlanMode::Concurrence => cmd_concurrence(&config, &out).map(|r| {
            for row in &r.rows {
                println!(
                    "concurrence[{}] = {:.4} ± {:.4}",
                    row.input, row.estimate.concurrence.value, row.estimate.concurrence.sigma
                );
            }
        }),
        PlanMode::RateProjection => cmd_rate(&config, &out).map(|r| {
            println!(
                "herald probability = {:.3e}, success rate = {:.3e} /s",
                r.herald_probability, r.success_rate
            );
        }),
        PlanMode::Run => cmd_run(&config, &out).map(|r| {
            println!(
                "run: {} trials, {} heralds -> {}",
                r.trials,
                r.heralds,
                out.out_dir.display()
            );
        }),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
