mod commands;
mod config;
mod output;
mod reproduce;
mod sims;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::Format;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit status 2.
    Config(String),
    /// The numerics failed: exit status 3.
    Numerical(String),
}

impl CliError {
    pub fn io(e: impl fmt::Display) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<mimcav::Error> for CliError {
    fn from(e: mimcav::Error) -> Self {
        use mimcav::Error as E;
        // a precondition or size limit is something the user can fix
        if e.is_config() || matches!(e, E::Precondition(_) | E::Dimension { .. }) {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mimcav", version, about = "Membrane-in-the-middle cavity spectra, couplings and dynamics")]
struct Cli {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write tables and summary.json here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Overrides mode_count.
    #[arg(long = "k-max", global = true)]
    k_max: Option<usize>,
    /// Overrides position_m (metres).
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Overrides seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mode frequencies, wavelengths, parities and position derivatives.
    Modes,
    /// g, ζ, f, λ and ξ± for the mode block, with identity checks.
    Couplings,
    /// Single-mode frequency shift and its per-mode terms.
    Shift,
    /// Resonant two-mode coupling rate.
    Eta,
    /// Classical field and membrane integration (times in metres, c = 1).
    Classical {
        #[arg(long)]
        scenario: Option<config::Scenario>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Truncated Fock-space evolution (times in seconds).
    Quantum {
        #[arg(long)]
        scenario: Option<config::Scenario>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Recompute the reference estimates and mark each pass or fail.
    ReproducePaper,
    /// Print the effective configuration as TOML.
    PrintConfig,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut rc = RunConfig::load(cli.config.as_deref())?;
    if let Some(k) = cli.k_max {
        rc.mode_count = k;
    }
    if let Some(q) = cli.q {
        rc.position_m = q;
    }
    if let Some(s) = cli.seed {
        rc.seed = s;
    }
    if let Command::Classical { scenario: Some(s), .. } | Command::Quantum { scenario: Some(s), .. } = &cli.command {
        rc.scenario = *s;
    }
    // flags go through the same checks as the file
    let rc = RunConfig::parse(&rc.to_toml())?;
    let out = cli.out.as_deref();

    let mut report = match cli.command {
        Command::PrintConfig => {
            let text = rc.to_toml();
            return match out {
                Some(d) => {
                    std::fs::create_dir_all(d).map_err(CliError::io)?;
                    output::write_atomic(&d.join("config.toml"), text.as_bytes())
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
        }
        Command::Modes => commands::modes(&rc)?,
        Command::Couplings => commands::couplings(&rc)?,
        Command::Shift => commands::shift(&rc)?,
        Command::Eta => commands::eta(&rc)?,
        Command::Classical { t_end, .. } => sims::classical(&rc, t_end)?,
        Command::Quantum { t_end, .. } => sims::quantum(&rc, t_end)?,
        Command::ReproducePaper => reproduce::reproduce(&rc),
    };
    report.note("seed", rc.seed);
    report.emit(cli.format, out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // stderr may already be closed
            let _ = writeln!(std::io::stderr(), "mimcav: {e}");
            ExitCode::from(e.code())
        }
    }
}
