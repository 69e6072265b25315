use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use proca_harness::{converge, run, workers_from_env, CliError, RunConfig};
use proca_core::modes::{dispersion_longitudinal, dispersion_transverse};
use proca_core::{classify_symbol, MediumSpec};

#[derive(Parser)]
#[command(name = "proca", version, about = "Constrained evolution of Proca fields in dielectric media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run { config: PathBuf },
    /// Run a resolution ladder and report convergence orders.
    Converge {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Print the plane-wave dispersion table.
    Modes {
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        /// Comma-separated wavenumbers.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<f64>,
    },
    /// Classify the principal symbol for a mass-metric parameter.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
}

fn load(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot read {}: {e}", path.display())))?;
    RunConfig::parse(&text)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let c = load(&config)?;
            let s = run(&c)?;
            println!(
                "{} steps of {:.6e} to t = {}, output in {}",
                s.steps,
                s.dt,
                c.evolution.t_end,
                s.dir.display()
            );
        }
        Command::Converge { config, levels } => {
            let c = load(&config)?;
            let table = converge(&c, levels, workers_from_env()?)?;
            println!("points: {:?}", table.points);
            for q in &table.orders {
                println!("{:<10} {}", q.quantity, q.fit);
            }
        }
        Command::Modes { n, lambda, mu, k } => {
            let medium = MediumSpec::constant(n, lambda, mu)?;
            println!("k,omega_transverse,omega_longitudinal");
            for k in k {
                let t = dispersion_transverse(k, &medium)?;
                let l = dispersion_longitudinal(k, &medium)
                    .map(|w| w.to_string())
                    .unwrap_or_else(|_| "none".into());
                println!("{k},{t},{l}");
            }
            let class = classify_symbol(lambda);
            if class.speed.is_none() {
                eprintln!("no longitudinal branch: lambda = {lambda} is {class}");
            }
        }
        Command::Classify { lambda } => println!("{}", classify_symbol(lambda)),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
