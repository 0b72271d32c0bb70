use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mobb::bench::{self, BenchError, ExperimentPlan, VerifyStatus};
use mobb::branching::BranchRule;
use mobb::dominance::DominanceTest;
use mobb::engine::{combo_label, solve, SearchConfig, Selection};
use mobb::instances::{self, GeneratorSpec};

#[derive(Parser)]
#[command(name = "mobb", version, about = "Multi-objective branch and bound for integer programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file and print its nondominated set.
    Solve(SolveArgs),
    /// Run every combination over a set of instances.
    Bench(PlanArgs),
    /// Generate seeded random instances.
    Gen(GenArgs),
    /// Check every combination against exhaustive enumeration.
    Verify(PlanArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Exact,
    ExtremePointsOnly,
}

impl From<TestArg> for DominanceTest {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::Exact => DominanceTest::Exact,
            TestArg::ExtremePointsOnly => DominanceTest::ExtremePointsOnly,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long = "select", default_value = "hvg")]
    selection: Selection,
    #[arg(long, default_value = "hf")]
    rule: BranchRule,
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, value_enum, default_value = "exact")]
    dominance_test: TestArg,
    /// Re-evaluate scores when a node is popped.
    #[arg(long)]
    rescore_on_pop: bool,
}

#[derive(Args)]
struct PlanArgs {
    /// JSON plan; flags below override its fields.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Instance files or glob patterns.
    #[arg(long = "instances", num_args = 1..)]
    instances: Vec<String>,
    #[arg(long = "select", value_delimiter = ',')]
    selections: Vec<Selection>,
    #[arg(long = "rule", value_delimiter = ',')]
    rules: Vec<BranchRule>,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Knapsack,
    Gap,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// Items (knapsack).
    #[arg(long)]
    n: Option<usize>,
    /// Machines (gap).
    #[arg(long)]
    machines: Option<usize>,
    /// Jobs (gap).
    #[arg(long)]
    jobs: Option<usize>,
    /// `a..b` (inclusive), `a..=b`, a comma list, or one seed.
    #[arg(long, default_value = "1..10")]
    seeds: String,
    #[arg(long, default_value = "instances")]
    out: PathBuf,
    #[arg(long)]
    capacity_ratio: Option<f64>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad seed `{t}`"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty seed range `{s}`"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

fn build_plan(args: PlanArgs) -> Result<ExperimentPlan, BenchError> {
    let mut plan = match &args.plan {
        Some(path) => ExperimentPlan::from_json_file(path)?,
        None => ExperimentPlan::new(Vec::new()),
    };
    if !args.instances.is_empty() {
        plan.instances = args.instances;
    }
    if !args.selections.is_empty() {
        plan.selections = args.selections;
    }
    if !args.rules.is_empty() {
        plan.rules = args.rules;
    }
    if let Some(t) = args.time_limit {
        plan.time_limit_seconds = t;
    }
    if args.node_limit.is_some() {
        plan.node_limit = args.node_limit;
    }
    if let Some(r) = args.repetitions {
        plan.repetitions = r;
    }
    if let Some(o) = args.out {
        plan.output_dir = o;
    }
    if let Some(j) = args.jobs {
        plan.jobs = j;
    }
    plan.apply_env()?;
    if plan.instances.is_empty() {
        return Err(BenchError::Usage("no instances given (use --instances or --plan)".into()));
    }
    Ok(plan)
}

fn run_solve(args: SolveArgs) -> Result<i32, String> {
    let inst = instances::load(&args.file).map_err(|e| e.to_string())?;
    let config = SearchConfig {
        selection: args.selection,
        rule: args.rule,
        time_limit_seconds: args.time_limit,
        node_limit: args.node_limit,
        dominance_test: args.dominance_test.into(),
        rng_seed: 0,
        rescore_on_pop: args.rescore_on_pop,
    };
    let res = solve(&inst, &config).map_err(|e| e.to_string())?;
    println!("combo {}", combo_label(config.selection, config.rule));
    println!("status {}", res.status.as_str());
    println!(
        "nodes_created {} nodes_processed {} time_s {:.3}",
        res.nodes_created, res.nodes_processed, res.wall_time_seconds
    );
    println!(
        "fathomed infeasible {} optimal {} dominated {}",
        res.fathomed.infeasible, res.fathomed.optimal, res.fathomed.dominated
    );
    println!("nondominated {}", res.nondominated_set.len());
    for s in &res.nondominated_set {
        let y: Vec<String> = s.display_y.iter().map(|v| v.to_string()).collect();
        let x: Vec<String> = s.x.iter().map(|v| v.to_string()).collect();
        println!("{}  x={}", y.join(" "), x.join(""));
    }
    Ok(0)
}

fn run_gen(args: GenArgs) -> Result<i32, String> {
    let seeds = parse_seeds(&args.seeds)?;
    let mut spec = match args.family {
        FamilyArg::Knapsack => GeneratorSpec::knapsack(args.p, args.n.ok_or("--n is required for knapsack")?, 0),
        FamilyArg::Gap => GeneratorSpec::gap(
            args.p,
            args.machines.ok_or("--machines is required for gap")?,
            args.jobs.ok_or("--jobs is required for gap")?,
            0,
        ),
    };
    if let Some(r) = args.capacity_ratio {
        spec.capacity_ratio = r;
    }
    let written = instances::generate_to_dir(&spec, &seeds, &args.out).map_err(|e| e.to_string())?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(0)
}

fn run_bench(args: PlanArgs) -> Result<i32, BenchError> {
    let plan = build_plan(args)?;
    let outcome = bench::run(&plan)?;
    println!("wrote {}", outcome.csv_path.display());
    println!("wrote {}", outcome.summary_path.display());
    Ok(outcome.exit_code())
}

fn run_verify(args: PlanArgs) -> Result<i32, BenchError> {
    let plan = build_plan(args)?;
    let report = bench::verify(&plan)?;
    for l in &report.lines {
        let status = match &l.status {
            VerifyStatus::Pass => "PASS".to_string(),
            VerifyStatus::Fail(why) => format!("FAIL {why}"),
            VerifyStatus::Skipped(why) => format!("SKIP {why}"),
        };
        println!("{} {} {}", l.instance, l.combo, status);
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(a) => run_solve(a).unwrap_or_else(|e| {
            eprintln!("error: {e}");
            2
        }),
        Command::Gen(a) => run_gen(a).unwrap_or_else(|e| {
            eprintln!("error: {e}");
            1
        }),
        Command::Bench(a) => run_bench(a).unwrap_or_else(|e| {
            eprintln!("error: {e}");
            e.exit_code()
        }),
        Command::Verify(a) => run_verify(a).unwrap_or_else(|e| {
            eprintln!("error: {e}");
            e.exit_code()
        }),
    };
    ExitCode::from(code as u8)
}
