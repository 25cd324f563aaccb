use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tape::error::{Result, TapeError};
use tape::gain::AlphaDomain;
use tape::harness::{self, FitModel, RunConfig, ScenarioSpec};
use tape::model::NoiseModel;
use tape::policy::{
    contraction_sigma_threshold, KSearch, KSubset, Method, SearchUpVariant, StrategyConfig, StrategyKind, TimeModel,
};

#[derive(Parser)]
#[command(name = "tape", version, about = "Time-adaptive Bayesian phase estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo estimation campaigns and write a CSV of accuracies.
    Simulate(SimulateArgs),
    /// Fit a scaling law to a campaign CSV.
    Fit(FitArgs),
    /// Print the contraction standard-deviation threshold for an error probability.
    Threshold {
        #[arg(long)]
        epsilon: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Selector {
    RateFib,
    RateBrute,
    Multistep,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON campaign config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// noiseless | dephasing:η | bitflip-spont:p
    #[arg(long)]
    scenario: Option<String>,
    /// sharpness | entropy | hybrid
    #[arg(long)]
    method: Option<String>,
    #[arg(long, value_enum)]
    selector: Option<Selector>,
    /// metrology | shots | affine:a,b
    #[arg(long)]
    time_model: Option<String>,
    /// all | pow2
    #[arg(long)]
    k_subset: Option<String>,
    /// Estimator noise model: ideal | matched | dephasing:η | constant:λ,ζ | flat-error:p.
    /// `matched` follows the scenario.
    #[arg(long)]
    noise_model: Option<String>,
    /// Total time budget; repeat or comma-separate for several points.
    #[arg(long, value_delimiter = ',')]
    budget: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disable contractions.
    #[arg(long)]
    no_contraction: bool,
    /// Contract once √V < π/2^c.
    #[arg(long)]
    threshold_exponent: Option<u32>,
    /// Largest lab-frame k allowed.
    #[arg(long)]
    k_max: Option<u64>,
    /// Search α over [0, 2π) instead of [0, π).
    #[arg(long)]
    full_alpha: bool,
    /// Use the corrected upward search in the multi-step method.
    #[arg(long)]
    corrected_search_up: bool,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_parser = parse_fit_model)]
    model: FitModel,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    min_x: Option<f64>,
    #[arg(long)]
    max_x: Option<f64>,
}

fn parse_fit_model(s: &str) -> std::result::Result<FitModel, String> {
    s.parse().map_err(|e: TapeError| e.to_string())
}

fn parse_noise_model(s: &str, scenario: &ScenarioSpec) -> Result<NoiseModel> {
    let bad = |what: &str| TapeError::InvalidArgument(format!("bad {what} in noise model '{s}'"));
    let num = |v: &str, what: &str| v.trim().parse::<f64>().map_err(|_| bad(what));
    let (name, arg) = s.split_once(':').map_or((s, None), |(n, a)| (n, Some(a)));
    match (name.trim(), arg) {
        ("ideal" | "model-free", None) => Ok(NoiseModel::ideal()),
        ("matched" | "model-aware", None) => Ok(match scenario.channel()? {
            tape::simqubit::Channel::Noiseless => NoiseModel::ideal(),
            tape::simqubit::Channel::Dephasing { eta } => NoiseModel::dephasing(eta)?,
            tape::simqubit::Channel::BitflipSpont { p_s, .. } => NoiseModel::flat_error(p_s)?,
        }),
        ("dephasing", Some(a)) => NoiseModel::dephasing(num(a, "eta")?),
        ("flat-error", Some(a)) => NoiseModel::flat_error(num(a, "p")?),
        ("constant", Some(a)) => {
            let (l, z) = a.split_once(',').ok_or_else(|| bad("λ,ζ"))?;
            NoiseModel::constant(num(l, "lambda")?, num(z, "zeta")?)
        }
        _ => Err(TapeError::InvalidArgument(format!("unknown noise model '{s}'"))),
    }
}

fn build_config(args: &SimulateArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig {
            strategy: StrategyConfig::default(),
            scenario: ScenarioSpec::noiseless(),
            noise_model: NoiseModel::ideal(),
            budgets: vec![],
            trials: 1000,
            seed: 0,
            out: None,
        },
    };
    if let Some(s) = &args.scenario {
        cfg.scenario = s.parse()?;
    }
    let st = &mut cfg.strategy;
    if let Some(m) = &args.method {
        st.method = m.parse::<Method>()?;
    }
    match args.selector {
        Some(Selector::RateFib) => {
            st.kind = StrategyKind::GainRate;
            st.search = KSearch::Fibonacci;
        }
        Some(Selector::RateBrute) => {
            st.kind = StrategyKind::GainRate;
            st.search = KSearch::BruteForce;
        }
        Some(Selector::Multistep) => st.kind = StrategyKind::MultiStep,
        None => {}
    }
    if let Some(t) = &args.time_model {
        st.time_model = t.parse::<TimeModel>()?;
    }
    if let Some(k) = &args.k_subset {
        st.k_subset = k.parse::<KSubset>()?;
    }
    if args.no_contraction {
        st.contraction.enabled = false;
    }
    if let Some(c) = args.threshold_exponent {
        st.contraction.threshold_exponent = Some(c);
    }
    if args.k_max.is_some() {
        st.k_max = args.k_max;
    }
    if args.full_alpha {
        st.alpha_domain = AlphaDomain::Full;
    }
    if args.corrected_search_up {
        st.search_up = SearchUpVariant::Corrected;
    }
    if let Some(n) = &args.noise_model {
        cfg.noise_model = parse_noise_model(n, &cfg.scenario)?;
    }
    if !args.budget.is_empty() {
        cfg.budgets = args.budget.clone();
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let rows = harness::run_campaign(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| TapeError::Io(format!("{}: {e}", path.display())))?;
            harness::write_rows(f, &rows)
        }
        None => harness::write_rows(io::stdout().lock(), &rows),
    }
}

fn fit(args: &FitArgs) -> Result<()> {
    let f = File::open(&args.input).map_err(|e| TapeError::Io(format!("{}: {e}", args.input.display())))?;
    let rows = harness::read_rows(f)?;
    let points = harness::filter_range(&harness::scaling_points(&rows), args.min_x, args.max_x);
    let result = harness::fit(args.model, &points)?;
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &result)?;
    writeln!(out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Threshold { epsilon } => contraction_sigma_threshold(*epsilon).map(|s| println!("{s}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "kind": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
