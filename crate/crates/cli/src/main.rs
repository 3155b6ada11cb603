use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use curvband::OperatorMode;
use curvband_cli::run::{load_config, run_command, Command, Overrides};

#[derive(Parser)]
#[command(name = "curvband", version, about = "Charged particle on a curved surface of revolution")]
struct Cli {
    #[command(subcommand)]
    command: CommandArg,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (`output_path`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// `as-written` or `hermitian-corrected`.
    #[arg(long, global = true)]
    mode: Option<OperatorMode>,
    /// Comma-separated azimuthal indices (`m_list`).
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    m: Option<Vec<i32>>,
    /// Radial grid size (`grid.n_points`).
    #[arg(long, global = true)]
    n_points: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum CommandArg {
    /// Z, H, K, H^2 - K and F(0) at every grid node.
    Geometry,
    /// Divergence of the configured field on the surface.
    GaugeCheck,
    /// Lowest eigenvalues for each m.
    Spectrum,
    /// Crank-Nicolson evolution of each m-channel ground state.
    Evolve,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Some(config_path) = cli.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    let command = match cli.command {
        CommandArg::Geometry => Command::Geometry,
        CommandArg::GaugeCheck => Command::GaugeCheck,
        CommandArg::Spectrum => Command::Spectrum,
        CommandArg::Evolve => Command::Evolve,
    };
    let overrides = Overrides {
        output: cli.output,
        mode: cli.mode,
        m_list: cli.m,
        n_points: cli.n_points,
        dt: cli.dt,
        steps: cli.steps,
    };
    let outcome = load_config(&config_path).and_then(|mut config| {
        overrides.apply(&mut config)?;
        run_command(&config, command)
    });
    match outcome {
        Ok(dir) => {
            println!("{} finished; results in {}", command.name(), dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
