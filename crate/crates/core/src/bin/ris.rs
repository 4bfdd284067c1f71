use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_sim::cli::{cmd_export_frame, cmd_linkbudget, cmd_localize, cmd_pattern, Mode};
use ris_sim::config::ScenarioConfig;

/// 1-bit coding RIS simulator.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// Scenario TOML; the prototype setup is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radiation pattern cut (CSV) and lobe metrics (JSON).
    Pattern {
        #[arg(long, value_enum, default_value_t = Mode::Far)]
        mode: Mode,
        #[arg(long, allow_hyphen_values = true)]
        steer: f64,
    },
    /// Codebook sweep localization for one or more true angles.
    Localize {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        truths: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Received power, SNR and the dB breakdown.
    Linkbudget,
    /// Shift-register frame (hex) for a steering mask.
    ExportFrame {
        #[arg(long, value_enum, default_value_t = Mode::Near)]
        mode: Mode,
        #[arg(long, allow_hyphen_values = true)]
        steer: f64,
    },
}

fn run(args: Args) -> ris_sim::Result<()> {
    let cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    }
    .with_env_overrides()?;
    match args.command {
        Command::Pattern { mode, steer } => {
            let out = cmd_pattern(&cfg, mode, steer, &args.out)?;
            let m = out.summary.metrics;
            println!(
                "main lobe {:.2}°  mirror lobe {:.2} dB  SLL {:.2} dB  -> {}",
                m.main_lobe_deg,
                m.mirror_lobe_db,
                m.sidelobe_level_db,
                out.csv.display()
            );
        }
        Command::Localize { truths, seed } => {
            let s = cmd_localize(&cfg, &truths, seed, &args.out)?;
            for m in &s.measurements {
                println!("truth {:>6.2}°  estimate {:>6.2}°  error {:>+6.2}°", m.truth_deg, m.estimate_deg, m.error_deg);
            }
            println!("RMSE {:.3}°", s.rmse_deg);
        }
        Command::Linkbudget => {
            let report = cmd_linkbudget(&cfg, &args.out)?;
            print!("{}", report.breakdown_table());
        }
        Command::ExportFrame { mode, steer } => {
            let frame = cmd_export_frame(&cfg, mode, steer, &args.out)?;
            println!("{}", frame.to_hex());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
