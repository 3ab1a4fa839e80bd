use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bvm::config::parse_pairs;
use bvm::{
    bounds_from_json, run_experiment, Artifacts, BvmError, CritdimConfig, ExperimentConfig,
    GlmCheckConfig, Regime, SweepConfig,
};
use bvm_core::models::GlmFamily;

#[derive(Parser)]
#[command(
    name = "bvm",
    version,
    about = "Finite-sample Bernstein-von Mises experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory; summary.json goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Grouped-Poisson critical-dimension experiment.
    Critdim {
        #[arg(long, default_value_t = 1000)]
        p: usize,
        #[arg(long, value_enum, conflicts_with = "m_n")]
        regime: Option<Regime>,
        /// Group size, instead of a regime.
        #[arg(long)]
        m_n: Option<u64>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        prior_bound: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        single_data: bool,
        #[arg(long)]
        keep_draws: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Posterior shift across (p, n) pairs.
    Sweep {
        /// Comma-separated `p:n` pairs.
        #[arg(long)]
        pairs: String,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        prior_bound: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// GLM posterior against its Gaussian approximation.
    GlmCheck {
        #[arg(long, value_enum, default_value = "logistic")]
        family: FamilyArg,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p_star: usize,
        #[arg(long, default_value_t = 1)]
        target_dim: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5.0)]
        x: f64,
        /// CSV design matrix with a header row.
        #[arg(long)]
        design: Option<String>,
        #[arg(long, default_value_t = 20_000)]
        rw_draws: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Error budget from a bounds.json file.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Any experiment from a JSON configuration (e.g. the `config` block of a summary.json).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FamilyArg {
    Gaussian,
    Logistic,
    Poisson,
    Exponential,
}

impl From<FamilyArg> for GlmFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gaussian => GlmFamily::Gaussian,
            FamilyArg::Logistic => GlmFamily::Logistic,
            FamilyArg::Poisson => GlmFamily::Poisson,
            FamilyArg::Exponential => GlmFamily::Exponential,
        }
    }
}

fn emit(artifacts: &Artifacts, common: &Common) -> Result<(), BvmError> {
    match &common.out {
        Some(dir) => artifacts.write_to(dir),
        None => {
            std::io::stdout().write_all(artifacts.summary.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), BvmError> {
    let (cfg, common) = match cli.command {
        Command::Critdim {
            p,
            regime,
            m_n,
            reps,
            draws,
            mu,
            prior_bound,
            seed,
            single_data,
            keep_draws,
            common,
        } => {
            let regime = match (regime, m_n) {
                (None, None) => Some(Regime::Unit),
                (r, _) => r,
            };
            let cfg = CritdimConfig {
                p_n: p,
                regime,
                m_n,
                reps,
                draws,
                mu,
                prior_bound,
                seed,
                single_data,
                keep_draws,
            };
            (ExperimentConfig::Critdim(cfg), common)
        }
        Command::Sweep {
            pairs,
            reps,
            draws,
            mu,
            prior_bound,
            seed,
            common,
        } => {
            let cfg = SweepConfig {
                pairs: parse_pairs(&pairs)?,
                reps,
                draws,
                mu,
                prior_bound,
                seed,
            };
            (ExperimentConfig::Sweep(cfg), common)
        }
        Command::GlmCheck {
            family,
            n,
            p_star,
            target_dim,
            seed,
            x,
            design,
            rw_draws,
            common,
        } => {
            let cfg = GlmCheckConfig {
                family: family.into(),
                n,
                p_star,
                target_dim,
                seed,
                x,
                design,
                rw_draws,
                ..GlmCheckConfig::default()
            };
            (ExperimentConfig::GlmCheck(cfg), common)
        }
        Command::Bounds { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let json = bounds_from_json(&text)?;
            match out {
                Some(path) => std::fs::write(path, json)?,
                None => std::io::stdout().write_all(json.as_bytes())?,
            }
            return Ok(());
        }
        Command::Run { config, common } => {
            let text = std::fs::read_to_string(&config)?;
            (ExperimentConfig::from_json(&text)?, common)
        }
    };
    cfg.validate()?;
    let artifacts = run_experiment(&cfg, common.threads)?;
    emit(&artifacts, &common)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bvm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
