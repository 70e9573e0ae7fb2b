//! Command-line front end. Every subcommand reads the JSON instance document of
//! [`crate::instance`] and writes JSON (or CSV/SVG for sweeps).
//!
//! Exit codes: 0 success, 1 input error (bad flags, unreadable or invalid
//! input), 2 solver failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::distort::{solve_distr_approx_with, XiBarStrategy};
use crate::error::{Error, Result};
use crate::experiments::{generate_instance, sample_costs, run_experiment, ExperimentConfig, Method};
use crate::instance::{read_instance, write_instance, Instance, InstanceDocument, FeasibleSetDoc, SupportDoc};
use crate::model::{AmbiguitySpec, Norm, RiskSpec, Selection, SupportSet};
use crate::problems::{reduce_minmax_rs_to_cvar_rs, RepSelectionInstance};
use crate::risk::solve_cvar;
use crate::rowgen::solve_distr_rowgen;
use crate::unrestricted::{solve_box_q1_two_solve, solve_distr_unrestricted};
use crate::worst_case::worst_case;

/// Default output directory for `experiment` when `--out-dir` is absent.
pub const OUT_DIR_ENV: &str = "WDRO_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "wdro", version, about = "Wasserstein robust CVaR minimisation for 0-1 problems")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random knapsack instance document.
    Gen(GenArgs),
    /// Minimise the empirical CVaR.
    SolveCvar(SolveArgs),
    /// Minimise the worst-case CVaR over the Wasserstein ball.
    SolveDistr(DistrArgs),
    /// Worst distribution in the ball for a given solution.
    WorstDist(WorstArgs),
    /// Distorted-sample approximation with its certified ratio.
    Approx(ApproxArgs),
    /// Build the CVaR instance encoding a min-max representatives selection instance.
    Reduce(ReduceArgs),
    /// Run a knapsack sweep comparing SAA with the robust methods.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "inf")]
    Inf,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Norm {
        match n {
            NormArg::One => Norm::L1,
            NormArg::Two => Norm::L2,
            NormArg::Inf => Norm::LInf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SupportKind {
    Box,
    Unrestricted,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Sample size N.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "inf")]
    pub q: NormArg,
    #[arg(long, value_enum, default_value = "box")]
    pub support: SupportKind,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Instance document.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Override the document's alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Override the document's radius.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Override the document's norm.
    #[arg(long, value_enum)]
    pub q: Option<NormArg>,
    /// Absolute optimality gap of the branch and bound.
    #[arg(long, default_value_t = 1e-9)]
    pub gap: f64,
}

impl Common {
    fn load(&self) -> Result<Instance> {
        let mut inst = read_instance(&self.input)?;
        if let Some(a) = self.alpha {
            RiskSpec::new(a, inst.dist.len())?;
            inst.alpha = a;
        }
        let eps = self.epsilon.unwrap_or(inst.spec.epsilon);
        let norm = self.q.map(Norm::from).unwrap_or(inst.spec.norm);
        inst.spec = AmbiguitySpec::new(eps, norm)?;
        Ok(inst)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistrMethod {
    /// Unrestricted support: closed form; box with q=1 and alpha=l/N: two-solve; otherwise row generation.
    Auto,
    Thm4,
    TwoSolve,
    Rowgen,
}

#[derive(Debug, Args)]
pub struct DistrArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: DistrMethod,
    #[arg(long, default_value_t = 1e-4)]
    pub rel_gap: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Write the row generation trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Include wall-clock timings in the trace.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct WorstArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated 0/1 solution, e.g. `1,0,1`.
    #[arg(long, conflicts_with = "solution")]
    pub x: Option<String>,
    /// A solution report written by one of the solve subcommands.
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    MaxSum,
    Closest,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "max-sum")]
    pub strategy: StrategyArg,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// JSON `{"groups": [[...], ...], "scenarios": [[...], ...]}`.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExperimentName {
    Exp1,
    Exp2,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: ExperimentName,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory; falls back to the WDRO_OUT_DIR variable, then `out`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Record solve times in the CSV.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub n: Option<usize>,
    /// Size N of each sample.
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Comma-separated subset of saa,rowgen,distort.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Monte Carlo sample size of the quantile estimates.
    #[arg(long)]
    pub mc_size: Option<usize>,
    #[arg(long)]
    pub rel_gap: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct Solved<'a, T: Serialize> {
    method: &'a str,
    #[serde(flatten)]
    report: T,
}

fn gen(args: &GenArgs) -> Result<()> {
    let generated = generate_instance(args.n, args.seed)?;
    let dist = sample_costs(&generated, args.samples, args.seed.wrapping_add(1))?;
    let support = match args.support {
        SupportKind::Box => generated.support()?,
        SupportKind::Unrestricted => SupportSet::Unrestricted,
    };
    RiskSpec::new(args.alpha, args.samples)?;
    let inst = Instance {
        set: generated.knapsack()?.encode()?,
        support,
        dist,
        spec: AmbiguitySpec::new(args.epsilon, args.q.into())?,
        alpha: args.alpha,
    };
    match &args.out {
        Some(p) => write_instance(p, &inst),
        None => emit(&inst.to_document(), None),
    }
}

fn resolve_method(inst: &Instance, requested: DistrMethod) -> Result<DistrMethod> {
    if requested != DistrMethod::Auto {
        return Ok(requested);
    }
    Ok(match &inst.support {
        SupportSet::Unrestricted => DistrMethod::Thm4,
        SupportSet::Box { .. } if inst.spec.norm == Norm::L1 && RiskSpec::new(inst.alpha, inst.dist.len())?.is_exact_fraction => {
            DistrMethod::TwoSolve
        }
        _ => DistrMethod::Rowgen,
    })
}

fn solve_distr(args: &DistrArgs) -> Result<()> {
    let c = &args.common;
    let inst = c.load()?;
    let method = resolve_method(&inst, args.method)?;
    let report = match method {
        DistrMethod::Thm4 => {
            if !matches!(inst.support, SupportSet::Unrestricted) {
                return Err(Error::invalid("thm4 needs the unrestricted support"));
            }
            solve_distr_unrestricted(&inst.set, &inst.dist, &inst.spec, inst.alpha, c.gap)?
        }
        DistrMethod::TwoSolve => {
            let SupportSet::Box { upper, .. } = &inst.support else {
                return Err(Error::invalid("two-solve needs a box support"));
            };
            if inst.spec.norm != Norm::L1 {
                return Err(Error::invalid("two-solve needs q = 1"));
            }
            solve_box_q1_two_solve(&inst.set, &inst.dist, upper, inst.spec.epsilon, inst.alpha, c.gap)?
        }
        DistrMethod::Rowgen => {
            let risk = RiskSpec::new(inst.alpha, inst.dist.len())?;
            let (report, trace) =
                solve_distr_rowgen(&inst.set, &inst.dist, &inst.support, &inst.spec, &risk, args.rel_gap, args.max_iter)?;
            if let Some(p) = &args.trace {
                fs::write(p, trace.to_csv(args.timing))?;
            }
            report
        }
        DistrMethod::Auto => unreachable!("resolved above"),
    };
    let name = match method {
        DistrMethod::Thm4 => "thm4",
        DistrMethod::TwoSolve => "two-solve",
        _ => "rowgen",
    };
    emit(&Solved { method: name, report }, c.out.as_deref())
}

fn parse_x(text: &str, n: usize) -> Result<Selection> {
    let bits = text
        .split(',')
        .map(|t| match t.trim() {
            "1" => Ok(true),
            "0" => Ok(false),
            other => Err(Error::invalid(format!("solution entries must be 0 or 1, got {other:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    crate::error::check_dim(n, bits.len())?;
    Ok(Selection::new(bits))
}

fn worst_dist(args: &WorstArgs) -> Result<()> {
    let inst = args.common.load()?;
    let n = inst.set.n();
    let x = match (&args.x, &args.solution) {
        (Some(text), None) => parse_x(text, n)?,
        (None, Some(path)) => {
            #[derive(serde::Deserialize)]
            struct WithX {
                x: Selection,
            }
            let parsed: WithX = serde_json::from_str(&fs::read_to_string(path)?)?;
            crate::error::check_dim(n, parsed.x.len())?;
            parsed.x
        }
        _ => return Err(Error::invalid("pass exactly one of --x or --solution")),
    };
    let cert = worst_case(&x, &inst.dist, &inst.support, &inst.spec, inst.alpha)?;
    emit(&cert, args.common.out.as_deref())
}

fn approx(args: &ApproxArgs) -> Result<()> {
    let c = &args.common;
    let inst = c.load()?;
    let risk = RiskSpec::new(inst.alpha, inst.dist.len())?;
    let strategy = match args.strategy {
        StrategyArg::MaxSum => XiBarStrategy::MaxSum,
        StrategyArg::Closest => XiBarStrategy::ClosestToZeta,
    };
    let sol = solve_distr_approx_with(&inst.set, &inst.dist, &inst.support, &inst.spec, &risk, c.gap, strategy)?;
    emit(&sol, c.out.as_deref())
}

#[derive(serde::Deserialize)]
struct MinMaxDocument {
    groups: Vec<Vec<usize>>,
    scenarios: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct ReductionOutput {
    instance: InstanceDocument,
    l: usize,
    n_samples: usize,
    big_m: f64,
}

fn reduce(args: &ReduceArgs) -> Result<()> {
    let doc: MinMaxDocument = serde_json::from_str(&fs::read_to_string(&args.input)?)?;
    let rs = RepSelectionInstance::new(doc.groups)?;
    let red = reduce_minmax_rs_to_cvar_rs(&rs, &doc.scenarios, args.alpha)?;
    let out = ReductionOutput {
        instance: InstanceDocument {
            n: red.instance.n(),
            support: SupportDoc::Unrestricted,
            feasible_set: FeasibleSetDoc::RepSelection {
                groups: red.instance.groups().to_vec(),
            },
            samples: red.distribution.realizations().to_vec(),
            alpha: red.alpha,
            epsilon: 0.0,
            q: Norm::L1,
        },
        l: red.l,
        n_samples: red.n_samples,
        big_m: red.big_m,
    };
    emit(&out, args.out.as_deref())
}

/// The configuration `experiment` would run, after applying the overrides.
pub fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match args.kind {
        ExperimentName::Exp1 => ExperimentConfig::exp1(args.seed),
        ExperimentName::Exp2 => ExperimentConfig::exp2(args.seed),
    };
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.sample_size {
        cfg.sample_size = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = &args.grid {
        cfg.epsilon_grid = v.clone();
    }
    if let Some(v) = &args.methods {
        cfg.methods = v.iter().map(|m| Method::parse(m)).collect::<Result<_>>()?;
    }
    if let Some(v) = args.mc_size {
        cfg.mc_size = v;
    }
    if let Some(v) = args.rel_gap {
        cfg.rel_gap = v;
    }
    if let Some(v) = args.max_iter {
        cfg.max_iter = v;
    }
    Ok(cfg)
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    if args.jobs == Some(0) {
        return Err(Error::invalid("--jobs must be positive"));
    }
    let cfg = experiment_config(args)?;
    let dir = args
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let result = run_experiment(&cfg, args.jobs)?;
    let failed = result.records.iter().filter(|r| r.q90.is_none()).count();
    for path in result.write_outputs(&dir, args.timing)? {
        println!("{}", path.display());
    }
    if failed > 0 {
        eprintln!("{failed} of {} cells failed; see the status column", result.records.len());
    }
    Ok(())
}

/// Run a parsed command.
pub fn execute(config: &RunConfig) -> Result<()> {
    match &config.command {
        Command::Gen(a) => gen(a),
        Command::SolveCvar(a) => {
            let inst = a.common.load()?;
            let report = solve_cvar(&inst.set, &inst.dist, inst.alpha, a.common.gap)?;
            emit(&Solved { method: "cvar", report }, a.common.out.as_deref())
        }
        Command::SolveDistr(a) => solve_distr(a),
        Command::WorstDist(a) => worst_dist(a),
        Command::Approx(a) => approx(a),
        Command::Reduce(a) => reduce(a),
        Command::Experiment(a) => experiment(a),
    }
}

/// Exit code of an error: 1 for input problems, 2 for solver failures.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() || matches!(err, Error::Io(_)) {
        1
    } else {
        2
    }
}

/// Parse `argv`, run it, and return the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn parser_is_consistent() {
        RunConfig::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(dispatch(["wdro", "solve-cvar", "--bogus"]), 1);
        assert_eq!(dispatch(["wdro", "--help"]), 0);
    }

    #[test]
    fn solver_failures_exit_two() {
        assert_eq!(exit_code(&Error::Solver("node limit".into())), 2);
        assert_eq!(exit_code(&Error::Infeasible), 2);
        assert_eq!(exit_code(&Error::Unbounded), 2);
        assert_eq!(exit_code(&Error::invalid("bad")), 1);
        assert_eq!(exit_code(&Error::DimensionMismatch { expected: 1, found: 2 }), 1);
    }

    #[test]
    fn parse_solution() {
        assert_eq!(parse_x("1, 0,1", 3).unwrap().indices().collect::<Vec<_>>(), vec![0, 2]);
        assert!(parse_x("1,2", 2).is_err());
        assert!(parse_x("1,0", 3).unwrap_err().is_input_error());
    }
}
