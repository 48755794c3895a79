//! `uscstirap`: spectra, amplitude tables and STIRAP runs from a TOML
//! scenario file.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::ScenarioFile;
use output::{resolve_path, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "uscstirap", version, about = "Dressed-state spectra and STIRAP runs in the ultrastrong coupling regime")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Labeled energies over the [scan] grid.
    Spectrum(Common),
    /// Dressed amplitudes and Stokes elements against their oracles.
    Amplitudes(Common),
    /// One STIRAP run: population history and summary.
    Stirap(Common),
    /// One STIRAP summary row per [sweep] value.
    Sweep(Common),
    /// Stray-channel selectivity.
    Selectivity(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output table; defaults to output.path, then the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// `section.key=value`, applied before parsing. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Default output directory.
    #[arg(long, env = OUT_DIR_ENV, hide_env_values = true)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ScenarioFile> {
        let mut overrides = self.overrides.clone();
        if let Some(n) = self.n_max {
            overrides.push(format!("numerics.n_max={n}"));
        }
        if let Some(t) = self.tol {
            overrides.push(format!("numerics.tol={t:e}"));
        }
        ScenarioFile::load(&self.config, &overrides)
    }

    fn out_path(&self, file: &ScenarioFile, name: &str) -> PathBuf {
        resolve_path(self.out.as_deref(), file.output.path.as_deref(), self.out_dir.as_deref(), name)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (common, name) = match &cli.command {
        Command::Spectrum(c) => (c, "spectrum"),
        Command::Amplitudes(c) => (c, "amplitudes"),
        Command::Stirap(c) => (c, "stirap"),
        Command::Sweep(c) => (c, "sweep"),
        Command::Selectivity(c) => (c, "selectivity"),
    };
    let file = common.load()?;
    let out = common.out_path(&file, &format!("{name}.csv"));
    match &cli.command {
        Command::Spectrum(_) => commands::cmd_spectrum(&file, &out)?,
        Command::Amplitudes(_) => commands::cmd_amplitudes(&file, &out)?,
        Command::Stirap(_) => {
            let s = commands::cmd_stirap(&file, &out)?;
            println!("{s}");
            println!("summary: {}", output::summary_path(&out).display());
        }
        Command::Sweep(_) => {
            let failed = commands::cmd_sweep(&file, &out)?;
            if failed > 0 {
                eprintln!("{failed} sweep row(s) failed; see the error column");
            }
        }
        Command::Selectivity(_) => commands::cmd_selectivity(&file, &out)?,
    }
    println!("wrote {}", out.display());
    Ok(())
}
