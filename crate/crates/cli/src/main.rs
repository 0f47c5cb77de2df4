//! Command-line entry point for running and comparing switching experiments.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use exp3iss::{
    compare_algorithms, recommended_params, run_experiment, AlgorithmKind, CertParams, DEFAULT_C_ETA,
    Experiment, FileConfig, Preset,
};

#[derive(Parser)]
#[command(name = "exp3iss", about = "Online switching control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm over many trials and write CSV/JSON reports.
    Run(RunArgs),
    /// Run several algorithms on paired noise and write a joined comparison.
    Compare(CompareArgs),
    /// Print the recommended learning rate and batch length.
    Params(ParamsArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated list, e.g. exp3iss,exp3batch,fbs
    #[arg(long, value_delimiter = ',', required = true)]
    algorithms: Vec<String>,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's preset.
    #[arg(long)]
    preset: Option<String>,
    /// Override the number of trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ParamsArgs {
    /// Pool size N.
    #[arg(long)]
    n: usize,
    /// Horizon T.
    #[arg(long)]
    t: usize,
    /// Envelope overshoot kappa.
    #[arg(long)]
    kappa: f64,
    /// Envelope decay rho.
    #[arg(long)]
    rho: f64,
}

fn load_experiment(common: &CommonArgs) -> Result<Experiment> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let mut file: FileConfig = toml::from_str(&text)
        .with_context(|| format!("parsing {}", common.config.display()))?;
    if let Some(p) = &common.preset {
        Preset::parse(p)?; // fail fast with the full preset list
        file.preset = Some(p.clone());
    }
    if let Some(n) = common.trials {
        file.trials = Some(n);
    }
    if let Some(s) = common.seed {
        file.master_seed = Some(s);
    }
    if let Some(w) = common.workers {
        file.workers = Some(w);
    }
    let mut exp = Experiment::resolve(&file)?;
    if let Some(out) = &common.out {
        exp.out_dir = out.clone();
    }
    Ok(exp)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let exp = load_experiment(&args.common)?;
            let summary = run_experiment(&exp)?;
            report(&summary, &exp);
        }
        Command::Compare(args) => {
            let algorithms: Vec<AlgorithmKind> = args
                .algorithms
                .iter()
                .map(|s| AlgorithmKind::parse(s).map_err(Into::into))
                .collect::<Result<_>>()?;
            if algorithms.is_empty() {
                bail!("--algorithms must name at least one algorithm");
            }
            let exp = load_experiment(&args.common)?;
            let summary = compare_algorithms(&exp, &algorithms)?;
            report(&summary, &exp);
        }
        Command::Params(args) => {
            let cert = CertParams::new(args.kappa, args.rho, 1.0)?;
            let (eta, tau) = recommended_params(args.n, args.t, &cert, DEFAULT_C_ETA);
            println!("eta = {eta}");
            println!("tau = {tau}");
        }
    }
    Ok(())
}

fn report(summary: &exp3iss::RunSummary, exp: &Experiment) {
    for alg in &summary.algorithms {
        println!(
            "{}: {} trials, {} completed, {} diverged, mean regret {}",
            alg.algorithm.name(),
            alg.trials,
            alg.completed,
            alg.diverged,
            alg.mean_regret
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "n/a".into()),
        );
    }
    println!("reports written to {}", exp.out_dir.display());
}
