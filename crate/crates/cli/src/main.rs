mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{Format, Mode, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "corrqec", version, about = "QEC cycles in a correlated dephasing bath")]
struct Cli {
    /// TOML config with [bath] and [run] sections.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Every flag overrides the config key of the same name.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    omega_c: Option<f64>,
    #[arg(long, global = true)]
    v_b: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    cycles: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    qubit_positions: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pulses_per_cycle: Option<usize>,
    /// `re,im`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_delimiter = ',')]
    separations: Option<Vec<usize>>,
    #[arg(long, global = true)]
    format: Option<Format>,
    #[arg(long, short, global = true)]
    output: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the single-cycle error scale ε over Δ and s.
    Epsilon {
        /// Cycle lengths; defaults to 1, 10, 100, 1000 in units of 1/ω_c.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Spectral exponents; defaults to the configured s.
        #[arg(long, value_delimiter = ',')]
        s_values: Option<Vec<f64>>,
    },
    /// Enumerate (exact) or sample (montecarlo) syndrome histories.
    Histories,
    /// Connected two-error correlation against separation, with the OPE law.
    Correlations {
        #[arg(long, default_value_t = 0)]
        qubit: usize,
    },
    /// Power-law fits of the connected correlation with and without a pulse.
    DecayFit {
        #[arg(long, default_value_t = 0)]
        qubit: usize,
    },
    /// Run the oracle suite; exits with status 2 if any check fails.
    Validate,
    /// Print the coset/recovery table of the three-qubit code.
    Partition,
}

impl Overrides {
    fn apply(&self, c: &mut RunConfig) -> Result<()> {
        macro_rules! set {
            ($field:ident, $target:expr) => {
                if let Some(v) = &self.$field {
                    $target = v.clone();
                }
            };
        }
        set!(s, c.bath.s);
        set!(lambda, c.bath.lambda);
        set!(omega_c, c.bath.omega_c);
        set!(v_b, c.bath.v_b);
        set!(delta, c.run.delta);
        set!(cycles, c.run.cycles);
        set!(qubit_positions, c.run.qubit_positions);
        set!(pulses_per_cycle, c.run.pulses_per_cycle);
        set!(mode, c.run.mode);
        set!(samples, c.run.samples);
        set!(seed, c.run.seed);
        set!(separations, c.run.separations);
        set!(format, c.run.format);
        if let Some(o) = &self.output {
            c.run.output_path = Some(o.clone());
        }
        for (flag, value, target) in [("alpha", &self.alpha, &mut c.run.alpha), ("beta", &self.beta, &mut c.run.beta)] {
            if let Some(v) = value {
                match v.as_slice() {
                    &[re, im] => *target = [re, im],
                    _ => anyhow::bail!("--{flag} takes two numbers re,im, got {v:?}"),
                }
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    cfg.validate()?;
    let out = match cli.command {
        Command::Epsilon { deltas, s_values } => commands::epsilon(&cfg, deltas, s_values)?,
        Command::Histories => commands::histories(&cfg)?,
        Command::Correlations { qubit } => commands::correlations(&cfg, qubit)?,
        Command::DecayFit { qubit } => commands::decay_fit(&cfg, qubit)?,
        Command::Validate => commands::validate(&cfg)?,
        Command::Partition => commands::partition(&cfg)?,
    };
    out.write(&cfg)?;
    Ok(out.success)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
