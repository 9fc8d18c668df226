//! `corrseq`: runs each verification step and writes CSV/JSON reports.
//!
//! Exit status: 0 when every checked invariant holds, 1 when a verdict is
//! false, 2 on usage or precondition errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use corrseq::config::{parse_config, PartialConfig, OUT_DIR_ENV};
use corrseq::nets::Family;
use corrseq::rng::RngKind;

#[derive(Parser, Debug)]
#[command(name = "corrseq", version, about = "Finite-scale checks of a triple-correlation counterexample")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Flat TOML config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// "default-shifted" or a comma-separated modulus list.
    #[arg(long, global = true)]
    basis: Option<String>,
    /// Number of basis levels.
    #[arg(long = "levels", short = 'K', global = true)]
    levels: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    rng: Option<RngKind>,
    /// Bits for outward-rounded enclosures.
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true)]
    exact_limit: Option<usize>,
    #[arg(long, global = true)]
    k_max_brute: Option<usize>,
    /// Permit the literal sum up to the hard limit.
    #[arg(long, global = true)]
    allow_big: bool,
    #[arg(long, global = true, env = OUT_DIR_ENV, hide_env_values = true)]
    out_dir: Option<PathBuf>,
    /// Serialized sign pattern (JSON object "n": "+1" | "-1/3").
    #[arg(long, global = true)]
    eta_file: Option<PathBuf>,
    /// Inline signs, e.g. "13=-1/3,325=+1"; unlisted elements get +1.
    #[arg(long, global = true)]
    eta: Option<String>,
    #[arg(long = "epsilon", global = true, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    families: Option<Vec<Family>>,
    /// Total-variation budget.
    #[arg(long = "budget", global = true)]
    budget: Option<f64>,
    #[arg(long, global = true)]
    max_members: Option<u64>,
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Print reports to stdout instead of writing files.
    #[arg(long, global = true)]
    stdout: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Basis conditions and the growth of |S[N_k]|.
    BasisReport,
    /// Enumerate S up to a horizon.
    #[command(name = "gen-S", alias = "gen-s")]
    GenS {
        #[arg(long)]
        horizon: Option<String>,
        /// Use N_level as the horizon.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Draw a sign pattern on S[N_level].
    EtaSample {
        #[arg(long)]
        level: Option<usize>,
    },
    /// Correlation S_k(d).
    Corr {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: String,
        #[arg(long, default_value = "brute")]
        method: commands::CorrMethod,
    },
    /// S_k(d)/gamma_k over a range of levels.
    Converge {
        #[arg(long, value_delimiter = ',', default_values_t = vec!["13".to_string(), "325".to_string(), "336".to_string()])]
        d: Vec<String>,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 12)]
        k_max: usize,
    },
    /// Net sizes and a randomized covering audit.
    NetsAudit {
        #[arg(long, default_value = "quadratic")]
        family: Family,
        #[arg(long, default_value_t = 16)]
        n: u64,
        #[arg(long = "net-epsilon", default_value_t = 0.1)]
        net_epsilon: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Grid sup of |(1/m) sum eta(n) e(alpha n)| for synthetic signs.
    SupCorr {
        #[arg(long, default_value_t = 100_000)]
        m: usize,
        #[arg(long, default_value_t = 1 << 18)]
        grid: u64,
        /// Fail when the sup exceeds this value.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Certified bounds on ||theta N_j|| and the partial sums of theta.
    ThetaCheck {
        #[arg(long, default_value_t = 10)]
        j_max: usize,
        /// Terms used; defaults to K - 1.
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Interval cover of theta S and its audit.
    Cover {
        /// Rational or decimal, e.g. 1/5 or 0.2.
        #[arg(long = "cover-epsilon", default_value = "1/5")]
        cover_epsilon: String,
        #[arg(long)]
        horizon: Option<String>,
        #[arg(long, default_value_t = 8)]
        level: usize,
    },
    /// Obstruction certificate against phase nets on S[N_level].
    Certify {
        #[arg(long, default_value_t = 4)]
        level: usize,
    },
}

impl GlobalArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            basis: self.basis.clone(),
            levels: self.levels,
            seed: self.seed,
            rng: self.rng,
            k_max_brute: self.k_max_brute,
            allow_big: self.allow_big.then_some(true),
            epsilon: self.epsilon.clone(),
            families: self.families.clone(),
            budget: self.budget,
            out_dir: None,
            precision: self.precision,
            exact_limit: self.exact_limit,
            max_members: self.max_members,
            omega: self.omega,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli.global.config.as_deref().map(PartialConfig::from_file).transpose() {
        Ok(f) => f,
        Err(e) => return usage(e),
    };
    let cfg = match parse_config(file, cli.global.partial(), cli.global.out_dir.clone()) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    match commands::run(&cli.command, &cfg, &cli.global) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => usage(e),
    }
}

fn usage(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}
