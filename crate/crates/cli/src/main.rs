//! `isac-sim`: run or validate a hybrid-RIS ISAC sweep configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use isac_core::sim::{self, load_config};
use isac_core::{IsacError, Profile, Scheme, SimulationConfig, SweepVariable};

#[derive(Parser)]
#[command(name = "isac-sim", version, about = "Hybrid-RIS ISAC beamforming sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Pt,
    Eta,
    #[value(name = "L", alias = "l")]
    L,
    Gamma,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write the CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Base values for fields the file omits.
        #[arg(long, value_enum, default_value = "paper")]
        profile: ProfileArg,
        #[arg(long, value_enum)]
        sweep: Option<SweepArg>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of hybrid,passive,random,noris.
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and range-check a configuration.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "paper")]
        profile: ProfileArg,
    },
}

fn profile(p: ProfileArg) -> Profile {
    match p {
        ProfileArg::Desk => Profile::Desk,
        ProfileArg::Paper => Profile::Paper,
    }
}

fn exit_code(e: &IsacError) -> ExitCode {
    match e {
        IsacError::Io { .. } => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn summarize(cfg: &SimulationConfig) {
    eprintln!(
        "M={} N={} L={} K={} T={} sweep {} over {:?}, {} realizations, schemes {}",
        cfg.geometry.antennas,
        cfg.ris.elements,
        cfg.ris.active,
        cfg.geometry.users,
        cfg.geometry.targets,
        cfg.sweep.variable,
        cfg.sweep.values,
        cfg.realizations,
        cfg.schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(",")
    );
    if let Ok(v) = cfg.budget_not_redundant() {
        if !v.is_empty() {
            eprintln!("warning: RIS power bound exceeds the budget at sweep values {v:?}");
        }
    }
}

fn run(cli: Cli) -> Result<(), IsacError> {
    match cli.command {
        Command::Validate { config, profile: p } => {
            let cfg = load_config(&config, profile(p))?;
            summarize(&cfg);
            println!("ok");
        }
        Command::Run {
            config,
            profile: p,
            sweep,
            seed,
            schemes,
            out,
        } => {
            let mut cfg = load_config(&config, profile(p))?;
            if let Some(s) = sweep {
                let v = match s {
                    SweepArg::Pt => SweepVariable::Pt,
                    SweepArg::Eta => SweepVariable::Eta,
                    SweepArg::L => SweepVariable::L,
                    SweepArg::Gamma => SweepVariable::Gamma,
                };
                cfg = cfg.with_sweep(v)?;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(names) = schemes {
                cfg.schemes = names
                    .iter()
                    .map(|n| n.parse::<Scheme>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| IsacError::Range {
                        field: "--schemes".into(),
                        message: e.to_string(),
                    })?;
            }
            if let Some(out) = out {
                cfg.output = out;
            }
            cfg.validate()?;
            summarize(&cfg);
            let rows = sim::run_sweep(&cfg)?;
            sim::emit_csv(&rows, &cfg.output)?;
            let infeasible = rows.iter().filter(|r| r.status == isac_core::RowStatus::Infeasible).count();
            eprintln!("wrote {} rows ({infeasible} infeasible) to {}", rows.len(), cfg.output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
