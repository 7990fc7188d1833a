//! Command-line front end. Each subcommand writes one JSON report; failures
//! print a JSON diagnostic on stderr. Exit codes: 0 success, 1 invalid input
//! or failed validation, 2 budget exceeded, refusal or non-convergence.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::budget::{budget_or, DEFAULT_BUDGET};
use crate::decision::Decision;
use crate::error::{Error, Result};
use crate::gadgets::{
    build_gadget_mdp, check_integrity, first_independent_set, fixtures, load_graph, verify_separation,
    waiting_policy_value, Graph,
};
use crate::generate::{random_mdp, random_scores, RandomMdpSpec};
use crate::io::{load_mdp, save_mdp, AnyMdp};
use crate::lookahead::build_augmented_mdp;
use crate::mdp::TabularMdp;
use crate::onestep::{
    expected_max_bruteforce, expected_max_sorted, solve_onestep_average, solve_onestep_average_cg,
    solve_onestep_discounted, solve_onestep_discounted_cg,
};
use crate::planners::{
    average_residual, average_reward_solve, linear_program_discounted, value_iteration_discounted,
};
use crate::report::{named_table, write_values_csv, InputDigest, RunReport};
use crate::reset::{reset_transform, reset_transform_augmented};
use crate::scalar::{parse_rational, Scalar};
use crate::unichain::check_unichain_exhaustive;

#[derive(Parser, Debug)]
#[command(name = "mdplook", version, about = "Planning for tabular MDPs with transition look-ahead")]
pub struct Cli {
    /// Worker threads for the parallel planners; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Enumeration budget; defaults to MDPLOOK_BUDGET or 1000000.
    #[arg(long, global = true)]
    pub budget: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an MDP file against every structural invariant.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Build the explicit look-ahead MDP over reachable trees.
    Augment(AugmentArgs),
    /// Solve for optimal values or gain.
    Plan(PlanArgs),
    /// Compare the sorting trick with brute-force enumeration on random scores.
    Oracle(OracleArgs),
    /// Compile a 3-regular graph into the hardness instance.
    Gadget(GadgetArgs),
    /// Mix every transition with a reset to a fixed state.
    Reset(ResetArgs),
}

#[derive(Args, Debug)]
pub struct AugmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub lookahead: usize,
    /// Root state names, comma separated; all states when omitted.
    #[arg(long, value_delimiter = ',')]
    pub roots: Vec<String>,
    /// Augmented MDP output file.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Block decomposition of every augmented state.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    Discounted,
    Average,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    SortedVi,
    CgLp,
    AugmentedBrute,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::SortedVi => "sorted-vi",
            Method::CgLp => "cg-lp",
            Method::AugmentedBrute => "augmented-brute",
        }
    }
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub lookahead: usize,
    #[arg(long, value_enum, default_value_t = Criterion::Discounted)]
    pub criterion: Criterion,
    #[arg(long, value_enum, default_value_t = Method::SortedVi)]
    pub method: Method,
    /// Discount; defaults to the file's `gamma`.
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    /// Decide whether the optimum at `--state` (or the gain) reaches this value.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Reference state for `--theta`; defaults to the initial state, else the first.
    #[arg(long)]
    pub state: Option<String>,
    /// Value table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// MDP to test; a random one is drawn from `--seed` when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub states: usize,
    #[arg(long, default_value_t = 2)]
    pub actions: usize,
}

#[derive(Args, Debug)]
pub struct GadgetArgs {
    /// Edge-list file: `n m`, then `m` lines `u v`.
    #[arg(long, conflicts_with = "fixture")]
    pub graph: Option<PathBuf>,
    /// Built-in graph: k4, k33, q3 or petersen.
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long)]
    pub k: usize,
    /// Override of `μ` as an exact fraction.
    #[arg(long)]
    pub mu: Option<String>,
    /// Run the exhaustive soundness/completeness check.
    #[arg(long)]
    pub verify: bool,
    /// Evaluate the waiting policy exactly on the depth-2 look-ahead chain.
    #[arg(long)]
    pub waiting: bool,
    /// Gadget MDP output file (rational mode).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ResetArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub gamma: String,
    /// Reset target state name.
    #[arg(long)]
    pub state: String,
    /// Reset the depth-`L` look-ahead MDP, redrawing the tree on reset.
    #[arg(long, default_value_t = 0)]
    pub lookahead: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = writeln!(err, "{}", json!({ "error": "usage", "message": e.to_string().trim(), "exit_code": 1 }));
            return 1;
        }
    };
    let start = Instant::now();
    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Error::InvalidInput(format!("thread pool: {e}"))),
        },
        None => execute(&cli),
    };
    match outcome {
        Ok((mut report, code)) => {
            report.timing = Some(start.elapsed());
            let written = match &cli.report {
                Some(path) => report.write(path),
                None => out.write_all(report.body().as_bytes()).map_err(Error::from),
            };
            if let Err(e) = written {
                return fail(err, &e);
            }
            let _ = writeln!(err, "elapsed: {:.3} s", start.elapsed().as_secs_f64());
            code
        }
        Err(e) => fail(err, &e),
    }
}

fn fail(err: &mut dyn Write, e: &Error) -> i32 {
    let mut diag = json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() });
    if let Error::NotConverged { last_iterate, .. } = e {
        diag["last_iterate"] = json!(last_iterate);
    }
    let _ = writeln!(err, "{diag}");
    e.exit_code()
}

fn execute(cli: &Cli) -> Result<(RunReport, i32)> {
    let budget = cli.budget.unwrap_or_else(|| budget_or(DEFAULT_BUDGET));
    let mut report = match &cli.command {
        Command::Validate { input } => return validate(input),
        Command::Augment(args) => augment(args, budget)?,
        Command::Plan(args) => plan(args, budget)?,
        Command::Oracle(args) => oracle(args, budget)?,
        Command::Gadget(args) => gadget(args)?,
        Command::Reset(args) => reset(args, budget)?,
    };
    report.setting("budget", budget);
    Ok((report, 0))
}

fn read_input(path: &Path, digest: &mut InputDigest) -> Result<AnyMdp> {
    let bytes = fs::read(path)?;
    digest.add("input", &bytes);
    load_mdp(path)
}

fn validate(input: &Path) -> Result<(RunReport, i32)> {
    let mut digest = InputDigest::new();
    let any = read_input(input, &mut digest)?;
    let violations = match &any {
        AnyMdp::Float(m) => m.validate(),
        AnyMdp::Rational(m) => m.validate(),
    };
    let mut report = RunReport::new("validate", "validator", any.mode().as_str());
    report.inputs_digest = digest.finish();
    report.result("passed", violations.passed()).result("violations", &violations.violations);
    Ok((report, if violations.passed() { 0 } else { 1 }))
}

fn root_indices<T: Scalar>(mdp: &TabularMdp<T>, names: &[String]) -> Result<Vec<usize>> {
    if names.is_empty() {
        Ok((0..mdp.n_states()).collect())
    } else {
        names.iter().map(|n| mdp.state_index(n)).collect()
    }
}

fn augment_in<T: Scalar>(mdp: &TabularMdp<T>, args: &AugmentArgs, budget: u64, report: &mut RunReport) -> Result<()> {
    mdp.validate().into_result()?;
    let roots = root_indices(mdp, &args.roots)?;
    let aug = build_augmented_mdp(mdp, &roots, args.lookahead, budget)?;
    report
        .result("augmented_states", aug.mdp.n_states())
        .result("roots", roots.iter().map(|&r| mdp.state_name(r)).collect::<Vec<_>>())
        .result("rows_exact", aug.mdp.validate().passed());
    if let Some(path) = &args.output {
        save_mdp(&aug.mdp, path)?;
    }
    if let Some(path) = &args.sidecar {
        let text = serde_json::to_string_pretty(&aug.sidecar(mdp)).expect("sidecar serializes");
        fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn augment(args: &AugmentArgs, budget: u64) -> Result<RunReport> {
    let mut digest = InputDigest::new();
    let any = read_input(&args.input, &mut digest)?;
    let mut report = RunReport::new("augment", "reachable-closure", any.mode().as_str());
    report.inputs_digest = digest.finish();
    report.setting("lookahead", args.lookahead).setting("roots", &args.roots);
    match &any {
        AnyMdp::Float(m) => augment_in(m, args, budget, &mut report)?,
        AnyMdp::Rational(m) => augment_in(m, args, budget, &mut report)?,
    }
    Ok(report)
}

fn reference_state(mdp: &TabularMdp<f64>, name: &Option<String>) -> Result<usize> {
    match name {
        Some(n) => mdp.state_index(n),
        None => Ok(mdp.initial_state().unwrap_or(0)),
    }
}

fn plan(args: &PlanArgs, budget: u64) -> Result<RunReport> {
    let mut digest = InputDigest::new();
    let any = read_input(&args.input, &mut digest)?;
    any_validate(&any)?;
    let mdp = match &any {
        AnyMdp::Float(m) => m.clone(),
        AnyMdp::Rational(m) => m.to_f64_checked()?,
    };
    let l = args.lookahead;
    if l >= 2 && args.method != Method::AugmentedBrute {
        return Err(Error::InvalidInput(format!("look-ahead {l} requires --method augmented-brute")));
    }
    let mut report = RunReport::new("plan", args.method.as_str(), "float");
    report.inputs_digest = digest.finish();
    if any.mode().as_str() == "rational" {
        report.note("rational input planned in float64");
    }
    report
        .setting("lookahead", l)
        .setting("criterion", format!("{:?}", args.criterion).to_lowercase())
        .setting("method", args.method.as_str())
        .setting("epsilon", args.epsilon)
        .setting("theta", args.theta);
    let s0 = reference_state(&mdp, &args.state)?;
    report.setting("state", mdp.state_name(s0));
    let names = mdp.states().to_vec();
    let (headline, table) = match args.criterion {
        Criterion::Discounted => {
            let gamma = match (&args.gamma, mdp.discount()) {
                (Some(g), _) => f64::parse_literal(g).map_err(Error::InvalidInput)?,
                (None, Some(g)) => *g,
                (None, None) => return Err(Error::InvalidInput("no --gamma and no gamma in the file".into())),
            };
            report.setting("gamma", gamma);
            let values = plan_discounted(&mdp, l, args.method, gamma, args.epsilon, budget, &mut report)?;
            report.result("values", named_table(&names, &values));
            (values[s0], values)
        }
        Criterion::Average => {
            match check_unichain_exhaustive(&mdp, budget) {
                Ok(v) if !v.unichain => {
                    return Err(Error::NotUnichain {
                        classes: v.witness_classes.map_or(0, |c| c.len()),
                        witness: v.witness.unwrap_or_default(),
                    })
                }
                Ok(_) => report.result("unichain_checked", true),
                Err(Error::BudgetExceeded { .. }) => {
                    report.note("unichain assumed: exhaustive check exceeds the budget").result("unichain_checked", false)
                }
                Err(e) => return Err(e),
            };
            let (gain, bias) = plan_average(&mdp, l, args.method, budget, &mut report)?;
            report.result("gain", gain).result("bias", named_table(&names, &bias));
            (gain, bias)
        }
    };
    if let Some(theta) = args.theta {
        report.result("decision", Decision::new(headline, theta, args.method.as_str()));
    }
    if let Some(path) = &args.csv {
        let column = if args.criterion == Criterion::Discounted { "value" } else { "bias" };
        write_values_csv(path, &names, &[(column, table.iter().map(|v| v.to_string()).collect())])?;
    }
    Ok(report)
}

fn any_validate(any: &AnyMdp) -> Result<()> {
    match any {
        AnyMdp::Float(m) => m.validate().into_result(),
        AnyMdp::Rational(m) => m.validate().into_result(),
    }
}

fn plan_discounted(
    mdp: &TabularMdp<f64>,
    l: usize,
    method: Method,
    gamma: f64,
    epsilon: f64,
    budget: u64,
    report: &mut RunReport,
) -> Result<Vec<f64>> {
    match (l, method) {
        (0, Method::CgLp) => {
            let sol = linear_program_discounted(mdp, gamma)?;
            report.note("no look-ahead: cg-lp solved as the full discounted LP");
            report.residual("bellman", sol.residual);
            report.result("policy", action_names(mdp, &sol.policy));
            Ok(sol.values)
        }
        (0, _) => {
            let sol = value_iteration_discounted(mdp, gamma, epsilon)?;
            if method == Method::AugmentedBrute {
                report.note("no look-ahead: augmented MDP is the input itself, solved by value iteration");
            }
            report.residual("bellman", sol.residual).result("iterations", sol.iterations);
            report.result("policy", action_names(mdp, &sol.policy));
            Ok(sol.values)
        }
        (1, Method::SortedVi) | (1, Method::CgLp) => {
            let sol = if method == Method::SortedVi {
                solve_onestep_discounted(mdp, gamma, epsilon)?
            } else {
                solve_onestep_discounted_cg(mdp, gamma, None)?
            };
            report
                .residual("reduced_bellman", sol.residual)
                .result("iterations", sol.iterations)
                .result("oracle_calls", sol.oracle_calls)
                .result("constraints", sol.constraints);
            Ok(sol.values)
        }
        _ => {
            let roots: Vec<usize> = (0..mdp.n_states()).collect();
            let aug = build_augmented_mdp(mdp, &roots, l, budget)?;
            let sol = value_iteration_discounted(&aug.mdp, gamma, epsilon)?;
            report
                .result("augmented_states", aug.mdp.n_states())
                .result("iterations", sol.iterations)
                .residual("bellman", sol.residual);
            (0..mdp.n_states()).map(|s| aug.expectation_at(mdp, s, &sol.values, budget)).collect()
        }
    }
}

fn plan_average(
    mdp: &TabularMdp<f64>,
    l: usize,
    method: Method,
    budget: u64,
    report: &mut RunReport,
) -> Result<(f64, Vec<f64>)> {
    match (l, method) {
        (0, _) => {
            if method == Method::CgLp {
                report.note("cg-lp with the average criterion and no look-ahead falls back to relative value iteration");
            }
            let sol = average_reward_solve(mdp)?;
            report.residual("optimality", average_residual(mdp, sol.gain, &sol.bias)).result("iterations", sol.iterations);
            report.result("policy", action_names(mdp, &sol.policy));
            Ok((sol.gain, sol.bias))
        }
        (1, Method::SortedVi) | (1, Method::CgLp) => {
            let sol = if method == Method::SortedVi { solve_onestep_average(mdp)? } else { solve_onestep_average_cg(mdp)? };
            report
                .residual("reduced_optimality", sol.residual)
                .result("iterations", sol.iterations)
                .result("oracle_calls", sol.oracle_calls)
                .result("constraints", sol.constraints);
            Ok((sol.gain, sol.bias))
        }
        _ => {
            let roots: Vec<usize> = (0..mdp.n_states()).collect();
            let aug = build_augmented_mdp(mdp, &roots, l, budget)?;
            let sol = average_reward_solve(&aug.mdp)?;
            report
                .result("augmented_states", aug.mdp.n_states())
                .result("iterations", sol.iterations)
                .residual("optimality", average_residual(&aug.mdp, sol.gain, &sol.bias));
            let bias = (0..mdp.n_states()).map(|s| aug.expectation_at(mdp, s, &sol.bias, budget)).collect::<Result<_>>()?;
            Ok((sol.gain, bias))
        }
    }
}

fn action_names(mdp: &TabularMdp<f64>, policy: &[usize]) -> serde_json::Map<String, serde_json::Value> {
    let actions: Vec<&str> = policy.iter().map(|&a| mdp.action_name(a)).collect();
    named_table(mdp.states(), &actions)
}

/// Worst `|sorted − brute|` over states and `trials` random score tables.
fn oracle_gap<T: Scalar>(mdp: &TabularMdp<T>, tables: &[Vec<Vec<T>>], budget: u64) -> Result<T> {
    let mut worst = T::zero();
    for u in tables {
        for s in 0..mdp.n_states() {
            let gap = (expected_max_sorted(mdp, s, u) - expected_max_bruteforce(mdp, s, u, budget)?).abs();
            if gap > worst {
                worst = gap;
            }
        }
    }
    Ok(worst)
}

fn oracle(args: &OracleArgs, budget: u64) -> Result<RunReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut digest = InputDigest::new();
    let any = match &args.input {
        Some(path) => read_input(path, &mut digest)?,
        None => AnyMdp::Float(random_mdp(&mut rng, RandomMdpSpec::dense(args.states, args.actions))),
    };
    any_validate(&any)?;
    let mut report = RunReport::new("oracle", "sorted-vs-brute", any.mode().as_str());
    report.inputs_digest = digest.finish();
    report.setting("trials", args.trials).setting("seed", args.seed);
    if args.input.is_none() {
        report.setting("states", args.states).setting("actions", args.actions);
    }
    let (n, k) = match &any {
        AnyMdp::Float(m) => (m.n_states(), m.n_actions()),
        AnyMdp::Rational(m) => (m.n_states(), m.n_actions()),
    };
    let tables: Vec<Vec<Vec<f64>>> = (0..args.trials).map(|_| random_scores(&mut rng, n, k)).collect();
    let (gap, pass) = match &any {
        AnyMdp::Float(m) => {
            let gap = oracle_gap(m, &tables, budget)?;
            (gap, gap <= 1e-10)
        }
        AnyMdp::Rational(m) => {
            let exact: Vec<Vec<Vec<BigRational>>> = tables
                .iter()
                .map(|t| t.iter().map(|r| r.iter().map(|x| BigRational::from_float(*x).expect("finite")).collect()).collect())
                .collect();
            let gap = oracle_gap(m, &exact, budget)?;
            (gap.to_f64_lossy(), num_traits::Zero::is_zero(&gap))
        }
    };
    let bound = if any.mode().as_str() == "rational" { "= 0" } else { "≤ 1e-10" };
    report
        .result("max_abs_diff", gap)
        .result("passed", pass)
        .result("verdict", format!("sorted vs brute max-abs-diff {bound}: {}", if pass { "pass" } else { "fail" }));
    Ok(report)
}

fn gadget(args: &GadgetArgs) -> Result<RunReport> {
    let mut digest = InputDigest::new();
    let (graph, source): (Graph, String) = match (&args.graph, &args.fixture) {
        (Some(path), _) => {
            digest.add("graph", &fs::read(path)?);
            (load_graph(path)?, path.display().to_string())
        }
        (None, Some(name)) => {
            let g = fixtures::by_name(name).ok_or_else(|| Error::InvalidInput(format!("unknown fixture `{name}`")))?;
            digest.add("graph", g.to_edge_list().as_bytes());
            (g, name.clone())
        }
        (None, None) => return Err(Error::InvalidInput("give --graph or --fixture".into())),
    };
    let mu = args.mu.as_deref().map(parse_rational).transpose().map_err(Error::InvalidInput)?;
    let instance = build_gadget_mdp(&graph, args.k, mu)?;
    let mut report = RunReport::new("gadget", "exact-rational", "rational");
    report.inputs_digest = digest.finish();
    report
        .setting("graph", source)
        .setting("k", args.k)
        .setting("mu", args.mu.as_deref().unwrap_or("default"))
        .setting("verify", args.verify)
        .setting("waiting", args.waiting);
    report.note(format!(
        "action count |A| = max(k, 2) = {} is an interpretation: it lets a depth-2 look-ahead reveal k vertices",
        instance.n_actions()
    ));
    report
        .result("n", graph.n)
        .result("m", graph.m())
        .result("n_actions", instance.n_actions())
        .result("n_states", instance.mdp.n_states())
        .result("thresholds", &instance.thresholds)
        .result("integrity", check_integrity(&instance)?);
    if args.verify {
        report.result("separation", verify_separation(&instance)?);
    }
    if args.waiting {
        let target = first_independent_set(&graph, args.k)
            .ok_or_else(|| Error::InvalidInput(format!("no independent set of size {}", args.k)))?;
        report.result("waiting_policy", waiting_policy_value(&instance, &target)?);
    }
    if let Some(path) = &args.output {
        save_mdp(&instance.mdp, path)?;
    }
    Ok(report)
}

fn reset_in<T: Scalar>(mdp: &TabularMdp<T>, args: &ResetArgs, budget: u64, report: &mut RunReport) -> Result<()> {
    mdp.validate().into_result()?;
    let gamma = T::parse_literal(&args.gamma).map_err(Error::InvalidInput)?;
    let s0 = mdp.state_index(&args.state)?;
    let out = if args.lookahead == 0 {
        reset_transform(mdp, &gamma, s0)?
    } else {
        let aug = build_augmented_mdp(mdp, &[s0], args.lookahead, budget)?;
        report.result("augmented_states", aug.mdp.n_states());
        reset_transform_augmented(&aug, mdp, &gamma, s0, budget)?
    };
    report.result("rows_exact", out.validate().passed());
    match check_unichain_exhaustive(&out, budget) {
        Ok(v) => report.result("unichain", v.unichain),
        Err(Error::BudgetExceeded { .. }) => report.note("unichain check skipped: policy count exceeds the budget"),
        Err(e) => return Err(e),
    };
    if let Some(path) = &args.output {
        save_mdp(&out, path)?;
    }
    Ok(())
}

fn reset(args: &ResetArgs, budget: u64) -> Result<RunReport> {
    let mut digest = InputDigest::new();
    let any = read_input(&args.input, &mut digest)?;
    let mut report = RunReport::new("reset", "reset-transform", any.mode().as_str());
    report.inputs_digest = digest.finish();
    report.setting("gamma", &args.gamma).setting("state", &args.state).setting("lookahead", args.lookahead);
    match &any {
        AnyMdp::Float(m) => reset_in(m, args, budget, &mut report)?,
        AnyMdp::Rational(m) => reset_in(m, args, budget, &mut report)?,
    }
    Ok(report)
}
