use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dnnsplit_core::experiment::{run_experiment, write_csv, Algorithm, ExperimentConfig};
use dnnsplit_core::formulations::{solve_service, CostOptions, ServiceIlpOptions, DEFAULT_DELTA, DEFAULT_MEM_PENALTY};
use dnnsplit_core::policies::{PolicyContext, PolicyRegistry, RoutePlan, System};
use dnnsplit_core::topology::{build_layered_graph, Component};
use dnnsplit_core::verify::{run_suite, SUITES};
use dnnsplit_core::workload::{generate_scenario, Scenario};
use dnnsplit_core::{Error, Result};
use dnnsplit_linprog::IlpOptions;

#[derive(Parser)]
#[command(name = "dnnsplit", version, about = "Route split DNN inference jobs over a multi-hop network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario and print it as JSON.
    GenScenario {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the service program or its relaxation.
    Solve {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long, value_enum, default_value = "service-ilp")]
        formulation: Formulation,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Route every job with a policy and evaluate the plan in both systems.
    Route {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long, default_value = "greedy")]
        policy: String,
        #[command(flatten)]
        costs: CostArgs,
        /// System the exhaustive policy optimizes.
        #[arg(long, value_enum, default_value = "fictitious")]
        system: SystemArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Route with a policy and write the event log of the simulated system.
    Simulate {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long, default_value = "greedy")]
        policy: String,
        #[command(flatten)]
        costs: CostArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a parameter sweep and write one CSV row per instance and algorithm.
    Experiment {
        /// JSON or TOML sweep description; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        jobs: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<String>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        time_limit_ms: Option<u64>,
        #[arg(long, value_enum)]
        budgets: Option<Toggle>,
        /// Record wall-clock runtimes (makes the output run-dependent).
        #[arg(long)]
        timing: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run invariant suites; exits nonzero if any fails.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Instance count (or per-cell count) overriding the suite default.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 15)]
    nodes: usize,
    #[arg(long, default_value_t = 3)]
    jobs: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON; generated from the flags below when absent.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        match &self.scenario {
            Some(path) => Scenario::from_json(&std::fs::read_to_string(path)?),
            None => generate_scenario(self.gen.nodes, self.gen.jobs, self.gen.gamma, self.gen.seed),
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    time_limit_ms: u64,
    #[arg(long, value_enum, default_value = "on")]
    budgets: Toggle,
}

#[derive(Args)]
struct CostArgs {
    /// Ignore transmission times and link backlogs.
    #[arg(long)]
    zero_delay: bool,
    /// Inflate compute time of layers that exceed a node's memory.
    #[arg(long)]
    mem_penalty: bool,
}

impl CostArgs {
    fn costs(&self) -> CostOptions {
        CostOptions { zero_delay: self.zero_delay, mem_penalty: self.mem_penalty.then_some(DEFAULT_MEM_PENALTY) }
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Formulation {
    ServiceIlp,
    LpRelax,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Fictitious,
    Actual,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8"))
}

fn finite(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn cmd_solve(input: &ScenarioArgs, formulation: Formulation, solver: &SolverArgs, output: &OutputArgs) -> Result<()> {
    let scenario = input.load()?;
    let opts = ServiceIlpOptions {
        budgets: solver.budgets == Toggle::On,
        delta: solver.delta,
        relax: matches!(formulation, Formulation::LpRelax),
        costs: CostOptions::default(),
    };
    let ilp = IlpOptions { time_limit: Some(Duration::from_millis(solver.time_limit_ms)), ..Default::default() };
    let sol = solve_service(&scenario, &opts, &ilp)?;
    let routes: Vec<(usize, Vec<usize>, Vec<Vec<usize>>)> = sol
        .paths
        .iter()
        .flatten()
        .enumerate()
        .map(|(j, p)| {
            let g = build_layered_graph(&scenario.network, p.layers);
            let phys = p.to_physical(&g);
            (j, phys.compute, phys.segments)
        })
        .collect();
    let text = match output.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "status": sol.status.to_string(),
            "objective_s": finite(sol.objective),
            "service_s": finite(sol.raw_objective),
            "integral": sol.integral,
            "nodes": sol.nodes,
            "routes": routes.iter().map(|(j, c, s)| json!({"job": j, "compute": c, "segments": s})).collect::<Vec<_>>(),
        }))?,
        Format::Csv => csv_string(
            &["job", "status", "compute", "links"],
            routes
                .iter()
                .map(|(j, c, s)| {
                    vec![j.to_string(), sol.status.to_string(), join(c, ";"), join(s.iter().map(|seg| join(seg, " ")), ";")]
                })
                .collect(),
        )?,
    };
    write_text(&output.out, &text)?;
    eprintln!("status {}, service {} s, integral {}", sol.status, sol.raw_objective, sol.integral);
    Ok(())
}

fn routed(input: &ScenarioArgs, policy: &str, costs: &CostArgs, system: System) -> Result<(Scenario, RoutePlan)> {
    let scenario = input.load()?;
    let registry = PolicyRegistry::with_builtin();
    let ctx = PolicyContext { costs: costs.costs(), opt_system: system, ..Default::default() };
    let plan = registry.get(policy)?.route(&scenario, &ctx)?;
    Ok((scenario, plan))
}

fn plan_text(plan: &RoutePlan, policy: &str, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "policy": policy,
            "c_max_fict_s": plan.c_max_fict(),
            "c_max_actual_s": plan.c_max_actual(),
            "routes": plan,
        }))?,
        Format::Csv => csv_string(
            &["job", "priority", "compute", "c_fict_s", "c_actual_s"],
            plan.routes
                .iter()
                .map(|r| {
                    vec![
                        r.job.to_string(),
                        r.priority.to_string(),
                        join(r.compute.values(), ";"),
                        r.c_fict_s.to_string(),
                        r.c_actual_s.map_or(String::new(), |c| c.to_string()),
                    ]
                })
                .collect(),
        )?,
    })
}

fn cmd_route(input: &ScenarioArgs, policy: &str, costs: &CostArgs, system: SystemArg, output: &OutputArgs) -> Result<()> {
    let system = match system {
        SystemArg::Fictitious => System::Fictitious,
        SystemArg::Actual => System::Actual,
    };
    let (scenario, mut plan) = routed(input, policy, costs, system)?;
    plan.simulate(&scenario, &costs.costs());
    write_text(&output.out, &plan_text(&plan, policy, output.format)?)
}

fn cmd_simulate(input: &ScenarioArgs, policy: &str, costs: &CostArgs, output: &OutputArgs) -> Result<()> {
    let (scenario, mut plan) = routed(input, policy, costs, System::Fictitious)?;
    let log = plan.simulate(&scenario, &costs.costs());
    match output.format {
        Format::Csv => log.write_csv(sink(&output.out)?)?,
        Format::Json => {
            let events: Vec<_> = log
                .events
                .iter()
                .map(|e| {
                    let (kind, id) = match e.component {
                        Component::Node(u) => ("node", u),
                        Component::Link(l) => ("link", l),
                    };
                    json!({"time_s": e.time_s, "component": id, "kind": kind, "job": e.job, "event": e.kind})
                })
                .collect();
            let text = serde_json::to_string_pretty(&json!({
                "completion_s": plan.routes.iter().map(|r| json!({"job": r.job, "actual_s": r.c_actual_s, "fict_s": r.c_fict_s})).collect::<Vec<_>>(),
                "events": events,
            }))?;
            write_text(&output.out, &text)?;
        }
    }
    for r in &plan.routes {
        eprintln!("job {}: actual {} s, estimate {} s", r.job, r.c_actual_s.unwrap_or(f64::NAN), r.c_fict_s);
    }
    Ok(())
}

fn parse_algorithm(name: &str) -> Result<Algorithm> {
    serde_json::from_value(json!(name)).map_err(|_| Error::UnknownPolicy(name.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    config: &Option<PathBuf>,
    nodes: &[usize],
    jobs: &[usize],
    gamma: &[f64],
    instances: Option<usize>,
    seed: Option<u64>,
    algorithms: &[String],
    delta: Option<f64>,
    time_limit_ms: Option<u64>,
    budgets: Option<Toggle>,
    timing: bool,
    format: Format,
    out: &Option<PathBuf>,
) -> Result<()> {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(vec![15], vec![3], vec![0.2, 2.0], 10, 0),
    };
    if !nodes.is_empty() {
        cfg.nodes = nodes.to_vec();
    }
    if !jobs.is_empty() {
        cfg.jobs = jobs.to_vec();
    }
    if !gamma.is_empty() {
        cfg.gammas = gamma.to_vec();
    }
    if !algorithms.is_empty() {
        cfg.algorithms = algorithms.iter().map(|a| parse_algorithm(a)).collect::<Result<_>>()?;
    }
    cfg.instances = instances.unwrap_or(cfg.instances);
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.delta = delta.unwrap_or(cfg.delta);
    cfg.time_limit_ms = time_limit_ms.unwrap_or(cfg.time_limit_ms);
    if let Some(b) = budgets {
        cfg.budgets = b == Toggle::On;
    }
    cfg.timing |= timing;
    let out = out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let rows = run_experiment(&cfg)?;
    match format {
        Format::Csv => write_csv(&rows, sink(&out)?),
        Format::Json => write_text(&out, &serde_json::to_string_pretty(&rows)?),
    }
}

fn cmd_verify(suite: &str, instances: Option<usize>, format: Format) -> Result<bool> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut all_passed = true;
    for name in names {
        let report = run_suite(name, instances)?;
        match format {
            Format::Json => println!("{}", serde_json::to_string(&report)?),
            Format::Csv => println!("{}", report.line()),
        }
        if !report.passed {
            all_passed = false;
            if let Some(cx) = &report.counterexample {
                eprintln!("{name}: first counterexample: {cx}");
            }
        }
    }
    Ok(all_passed)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenScenario { gen, out } => {
            let s = generate_scenario(gen.nodes, gen.jobs, gen.gamma, gen.seed)?;
            write_text(&out, &s.to_json()?)?;
        }
        Command::Solve { input, formulation, solver, output } => cmd_solve(&input, formulation, &solver, &output)?,
        Command::Route { input, policy, costs, system, output } => cmd_route(&input, &policy, &costs, system, &output)?,
        Command::Simulate { input, policy, costs, output } => cmd_simulate(&input, &policy, &costs, &output)?,
        Command::Experiment {
            config,
            nodes,
            jobs,
            gamma,
            instances,
            seed,
            algorithms,
            delta,
            time_limit_ms,
            budgets,
            timing,
            format,
            out,
        } => cmd_experiment(
            &config,
            &nodes,
            &jobs,
            &gamma,
            instances,
            seed,
            &algorithms,
            delta,
            time_limit_ms,
            budgets,
            timing,
            format,
            &out,
        )?,
        Command::Verify { suite, instances, format } => return cmd_verify(&suite, instances, format),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
