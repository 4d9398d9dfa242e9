use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use cake_core::allocation::{allocation_from_json, intervals_to_json, Allocation, WelfareReport};
use cake_core::discretize::{maximize_rho_mean, min_epsilon_for_budget, DEFAULT_DISCRETIZE_BUDGET};
use cake_core::exhaustive::{exhaustive_nsw, DEFAULT_EXHAUSTIVE_BUDGET};
use cake_core::hardness::{build_nsw_instance, build_rho_instance, CnfFormula};
use cake_core::knife::{alg_three_ef, alg_two_ef, ef_bound, trace_to_jsonl, KnifeOutcome};
use cake_core::oracle::{
    check_ef_nsw_theorem, check_envy_bound, check_nash_optimal_4ef, check_nsw_factor, check_price_of_ef,
    grid_optimal, Status, Verdict, Welfare, DEFAULT_ORACLE_BUDGET,
};
use cake_core::random::random_instance;
use cake_core::rational::{from_usize, int, parse_rat, rat, Rat};
use cake_core::{CakeError, CakeInstance};

#[derive(Parser)]
#[command(name = "cake", version, about = "Connected-piece cake division solvers and checkers")]
struct Cli {
    /// Work budget for exhaustive search, discretization and the grid oracle.
    #[arg(long, global = true, env = "CAKE_BUDGET")]
    budget: Option<u128>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver on an instance.
    Solve(SolveArgs),
    /// Generate an instance.
    Gen(GenArgs),
    /// Check an allocation against a guarantee.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Ef3,
    Ef2,
    NswExhaustive,
    RhoMean,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    instance: PathBuf,
    /// Defaults to 1/3 for the knife algorithms and 1/2 for rho-mean.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, default_value = "2")]
    alpha: String,
    #[arg(long, default_value = "1")]
    rho: String,
    /// Write the iteration trace as JSON lines (knife algorithms only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the allocation here; the full report still goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    HardnessNsw,
    HardnessRho,
    Random,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    /// DIMACS formula for the hardness gadgets.
    #[arg(long)]
    cnf: Option<PathBuf>,
    /// Add padding clauses so every variable occurs with both polarities.
    #[arg(long)]
    pad: bool,
    #[arg(long, default_value = "1/2")]
    rho: String,
    #[arg(long, default_value_t = 3)]
    agents: usize,
    #[arg(long, default_value_t = 4)]
    pieces: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gadget layout sidecar; defaults to `<out>.layout.json` when `--out` is given.
    #[arg(long)]
    layout: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    Ef3,
    Ef2,
    Nsw3,
    Efnsw,
    Price,
    #[value(name = "4ef")]
    FourEf,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    allocation: PathBuf,
    /// Checks to run; `efnsw` and `price` when absent.
    #[arg(long, value_enum)]
    theorem: Vec<Theorem>,
    /// Grid oracle resolution; 1/32, or 1/64 for `4ef`.
    #[arg(long)]
    resolution: Option<String>,
    #[arg(long, default_value = "1/3")]
    epsilon: String,
    #[arg(long, default_value = "1")]
    rho: String,
    #[arg(long, default_value = "1/4")]
    slack: String,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] CakeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CakeError::BudgetExceeded { .. }) => 3,
            CliError::Core(CakeError::Internal(_)) => 1,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn flag_rat(name: &str, s: &str) -> Result<Rat> {
    parse_rat(s).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

fn load_instance(path: &Path) -> Result<CakeInstance> {
    Ok(CakeInstance::from_json_str(&read(path)?)?)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn solve(args: &SolveArgs, budget: Option<u128>) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    let rho = flag_rat("rho", &args.rho)?;
    let epsilon = |default: Rat| match &args.epsilon {
        Some(s) => flag_rat("epsilon", s),
        None => Ok(default),
    };
    let knife_summary = |out: &KnifeOutcome| {
        json!({
            "iterations": out.iterations,
            "gaps_at_merge": out.gaps_at_merge,
            "max_gaps_after_attained": out.max_gaps_after_attained,
            "n": instance.n(),
        })
    };
    let (allocation, summary, trace) = match args.algo {
        Algo::Ef3 | Algo::Ef2 => {
            let eps = epsilon(rat(1, 3))?;
            let out = match args.algo {
                Algo::Ef3 => alg_three_ef(&instance, &eps)?,
                _ => alg_two_ef(&instance, &eps)?,
            };
            (out.allocation.clone(), knife_summary(&out), Some(trace_to_jsonl(&out.trace)))
        }
        Algo::NswExhaustive => {
            let alpha = flag_rat("alpha", &args.alpha)?;
            let out = exhaustive_nsw(&instance, &alpha, budget.unwrap_or(DEFAULT_EXHAUSTIVE_BUDGET))?;
            let summary = json!({ "realizations": out.realizations.to_string() });
            (out.allocation, summary, None)
        }
        Algo::RhoMean => {
            let eps = epsilon(rat(1, 2))?;
            let budget = budget.unwrap_or(DEFAULT_DISCRETIZE_BUDGET);
            let out = maximize_rho_mean(&instance, &rho, &eps, budget).inspect_err(|e| {
                if matches!(e, CakeError::BudgetExceeded { .. }) {
                    match min_epsilon_for_budget(&instance, &rho, budget) {
                        Some(m) => eprintln!("smallest epsilon within the budget: {m}"),
                        None => eprintln!("no epsilon of the form 1/m fits the budget"),
                    }
                }
            })?;
            let summary = json!({ "cut_points": out.cut_points });
            (out.allocation, summary, None)
        }
    };
    if let Some(path) = &args.trace {
        let trace = trace.ok_or_else(|| CliError::Usage("--trace needs --algo ef3 or ef2".into()))?;
        write(path, &trace)?;
    }
    let alloc_json = intervals_to_json(&instance, &allocation.assigned);
    if let Some(path) = &args.out {
        write(path, &alloc_json)?;
    }
    let report = WelfareReport::compute(&instance, &allocation.assigned, std::slice::from_ref(&rho))?;
    let doc = json!({
        "allocation": serde_json::from_str::<Value>(&alloc_json).expect("allocation JSON round-trips"),
        "report": report.to_json(&instance),
        "summary": summary,
    });
    println!("{}", pretty(&doc));
    Ok(0)
}

fn gen(args: &GenArgs) -> Result<u8> {
    let (instance, layout) = match args.kind {
        GenKind::Random => {
            if args.agents == 0 || args.pieces == 0 {
                return Err(CliError::Usage("--agents and --pieces must be positive".into()));
            }
            (random_instance(args.seed, args.agents, args.pieces), None)
        }
        GenKind::HardnessNsw | GenKind::HardnessRho => {
            let path = args
                .cnf
                .as_ref()
                .ok_or_else(|| CliError::Usage("hardness gadgets need --cnf".into()))?;
            let mut phi = CnfFormula::from_dimacs(&read(path)?)?;
            if args.pad {
                phi = phi.pad_polarities();
            }
            let violations = phi.violations();
            if !violations.is_empty() {
                return Err(CakeError::InvalidFormula(violations).into());
            }
            let (inst, lay) = match args.kind {
                GenKind::HardnessNsw => build_nsw_instance(&phi)?,
                _ => build_rho_instance(&phi, &flag_rat("rho", &args.rho)?)?,
            };
            (inst, Some(lay))
        }
    };
    let text = instance.to_json_string();
    match &args.out {
        Some(path) => write(path, &text)?,
        None => println!("{text}"),
    }
    if let Some(lay) = layout {
        let sidecar = args.layout.clone().or_else(|| {
            args.out.as_ref().map(|p| {
                let mut s = p.clone().into_os_string();
                s.push(".layout.json");
                PathBuf::from(s)
            })
        });
        if let Some(path) = sidecar {
            write(&path, &lay.to_json_string())?;
        }
    }
    Ok(0)
}

/// Accepts a bare allocation file or the document printed by `solve`.
fn load_allocation(instance: &CakeInstance, path: &Path) -> Result<Allocation> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(CakeError::from)?;
    let text = match value.get("allocation") {
        Some(inner) => inner.to_string(),
        None => text,
    };
    Ok(allocation_from_json(instance, &text)?)
}

fn verify(args: &VerifyArgs, budget: Option<u128>) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    let allocation = load_allocation(&instance, &args.allocation)?;
    let budget = budget.unwrap_or(DEFAULT_ORACLE_BUDGET);
    let eps = flag_rat("epsilon", &args.epsilon)?;
    let rho = flag_rat("rho", &args.rho)?;
    let slack = flag_rat("slack", &args.slack)?;
    let resolution = |default: Rat| match &args.resolution {
        Some(s) => flag_rat("resolution", s),
        None => Ok(default),
    };
    let theorems = if args.theorem.is_empty() {
        vec![Theorem::Efnsw, Theorem::Price]
    } else {
        args.theorem.clone()
    };
    let n = instance.n();
    let mut verdicts: Vec<Verdict> = Vec::new();
    for t in theorems {
        let v = match t {
            Theorem::Ef3 => check_envy_bound("ef3", &instance, &allocation, &ef_bound(3, &eps, n)),
            Theorem::Ef2 => check_envy_bound("ef2", &instance, &allocation, &ef_bound(2, &eps, n)),
            Theorem::Nsw3 | Theorem::Efnsw => {
                let oracle = grid_optimal(&instance, &Welfare::Nsw, &resolution(rat(1, 32))?, budget)?;
                if t == Theorem::Efnsw {
                    check_ef_nsw_theorem(&instance, &allocation, &oracle.report)
                } else {
                    let mine = WelfareReport::compute(&instance, &allocation.assigned, &[])?;
                    let factor = int(3) + int(5) / from_usize(n);
                    check_nsw_factor("nsw3", &mine, &oracle.report, &factor)
                }
            }
            Theorem::Price => {
                let oracle = grid_optimal(&instance, &Welfare::RhoMean(rho.clone()), &resolution(rat(1, 32))?, budget)?;
                check_price_of_ef(&instance, &allocation, &rho, &oracle.report)?
            }
            Theorem::FourEf => {
                let oracle = grid_optimal(&instance, &Welfare::Nsw, &resolution(rat(1, 64))?, budget)?;
                check_nash_optimal_4ef(&instance, &oracle.allocation, &slack)
            }
        };
        println!("{v}");
        verdicts.push(v);
    }
    Ok(if verdicts.iter().any(|v| v.status == Status::Fail) { 1 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(a, cli.budget),
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify(a, cli.budget),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
