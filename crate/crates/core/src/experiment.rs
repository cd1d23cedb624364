//! Seeded parameter sweeps that run every algorithm on generated scenarios
//! and emit one result row per (instance, algorithm).

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dnnsplit_linprog::{IlpOptions, Status};

use crate::error::{Error, Result};
use crate::formulations::{
    assignment_baseline_route, solve_service, CostOptions, ServiceIlpOptions, ServiceSolution,
    DEFAULT_DELTA,
};
use crate::policies::{PolicyContext, PolicyRegistry, RoutePlan};
use crate::topology::LayeredPath;
use crate::workload::{generate_scenario, Scenario};

/// Environment variable that fixes the worker count.
pub const THREADS_ENV: &str = "DNNSPLIT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ilp")]
    Ilp,
    #[serde(rename = "lp-relax")]
    LpRelax,
    #[serde(rename = "baseline")]
    Baseline,
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "nfs")]
    Nfs,
    #[serde(rename = "ss")]
    Ss,
    #[serde(rename = "sw")]
    Sw,
    #[serde(rename = "opt")]
    Opt,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ilp => "ilp",
            Algorithm::LpRelax => "lp-relax",
            Algorithm::Baseline => "baseline",
            Algorithm::Greedy => "greedy",
            Algorithm::Nfs => "nfs",
            Algorithm::Ss => "ss",
            Algorithm::Sw => "sw",
            Algorithm::Opt => "opt",
        }
    }

    fn all() -> Vec<Algorithm> {
        use Algorithm::*;
        vec![Ilp, LpRelax, Baseline, Greedy, Nfs, Opt]
    }
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::all()
}
fn default_instances() -> usize {
    10
}
fn default_time_limit_ms() -> u64 {
    10_000
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nodes: Vec<usize>,
    pub jobs: Vec<usize>,
    pub gammas: Vec<f64>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_time_limit_ms")]
    pub time_limit_ms: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_true")]
    pub budgets: bool,
    #[serde(default)]
    pub zero_delay: bool,
    /// Record wall-clock runtimes; off by default so output is reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(nodes: Vec<usize>, jobs: Vec<usize>, gammas: Vec<f64>, instances: usize, seed: u64) -> Self {
        ExperimentConfig {
            nodes,
            jobs,
            gammas,
            instances,
            seed,
            algorithms: default_algorithms(),
            time_limit_ms: default_time_limit_ms(),
            delta: default_delta(),
            budgets: true,
            zero_delay: false,
            timing: false,
            output: None,
        }
    }

    /// Reads JSON, or TOML when the path ends in `.toml`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::InvalidScenario(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() || self.jobs.is_empty() || self.gammas.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidScenario("experiment sweeps must be non-empty".into()));
        }
        if self.instances == 0 {
            return Err(Error::InvalidScenario("need at least one instance per cell".into()));
        }
        Ok(())
    }

    /// `(n, J, γ)` cells in sweep order.
    pub fn cells(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for &n in &self.nodes {
            for &j in &self.jobs {
                for &g in &self.gammas {
                    out.push((n, j, g));
                }
            }
        }
        out
    }

    /// Scenario seeds for cell `cell`: one ChaCha stream per cell.
    pub fn instance_seeds(&self, cell: usize) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(cell as u64);
        (0..self.instances).map(|_| rng.gen()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub seed: u64,
    pub n: usize,
    pub jobs: usize,
    pub gamma: f64,
    pub algorithm: String,
    pub objective_s: Option<f64>,
    pub c_max_fict_s: Option<f64>,
    pub c_max_actual_s: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub integral: Option<bool>,
    pub integrality_gap: Option<f64>,
    pub relative_gap_pct: Option<f64>,
    pub notes: String,
}

impl ResultRow {
    fn new(instance: &str, seed: u64, scenario: &Scenario, algorithm: Algorithm) -> Self {
        ResultRow {
            instance: instance.to_string(),
            seed,
            n: scenario.params.n,
            jobs: scenario.params.jobs,
            gamma: scenario.params.gamma,
            algorithm: algorithm.name().to_string(),
            objective_s: None,
            c_max_fict_s: None,
            c_max_actual_s: None,
            runtime_ms: None,
            integral: None,
            integrality_gap: None,
            relative_gap_pct: None,
            notes: String::new(),
        }
    }

    fn note(&mut self, text: &str) {
        if !self.notes.is_empty() {
            self.notes.push(';');
        }
        self.notes.push_str(text);
    }

    fn fill_plan(&mut self, scenario: &Scenario, plan: &mut RoutePlan, costs: &CostOptions) {
        plan.simulate(scenario, costs);
        self.c_max_fict_s = Some(plan.c_max_fict());
        self.c_max_actual_s = plan.c_max_actual();
        if !plan.all_simple(scenario) {
            self.note("non-simple-path");
        }
    }
}

/// Shared per-instance knobs derived from the config.
#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub costs: CostOptions,
    pub delta: f64,
    pub budgets: bool,
    pub time_limit: Duration,
    pub timing: bool,
}

impl RunSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        RunSettings {
            costs: CostOptions { zero_delay: cfg.zero_delay, mem_penalty: None },
            delta: cfg.delta,
            budgets: cfg.budgets,
            time_limit: Duration::from_millis(cfg.time_limit_ms),
            timing: cfg.timing,
        }
    }

    fn ilp(&self) -> IlpOptions {
        IlpOptions { time_limit: Some(self.time_limit), ..Default::default() }
    }

    fn service(&self, budgets: bool, relax: bool) -> ServiceIlpOptions {
        ServiceIlpOptions { budgets, delta: self.delta, relax, costs: self.costs }
    }
}

fn status_note(row: &mut ResultRow, status: Status) {
    match status {
        Status::Infeasible => row.note("infeasible"),
        Status::TimeLimit => row.note("time-limit"),
        Status::Optimal => {}
        other => row.note(&other.to_string().to_lowercase()),
    }
}

fn plan_of_paths(scenario: &Scenario, paths: &[LayeredPath], costs: &CostOptions) -> RoutePlan {
    let ordered: Vec<(usize, LayeredPath)> = paths.iter().cloned().enumerate().collect();
    RoutePlan::from_paths(scenario, &ordered, costs)
}

fn pct(value: f64, reference: f64) -> Option<f64> {
    (value.is_finite() && reference.is_finite() && reference > 0.0).then(|| (value - reference) / reference * 100.0)
}

/// Runs `algorithms` on one scenario. Failures become row notes.
pub fn run_instance(
    instance: &str,
    seed: u64,
    scenario: &Scenario,
    algorithms: &[Algorithm],
    settings: &RunSettings,
) -> Vec<ResultRow> {
    let registry = PolicyRegistry::with_builtin();
    let ctx = PolicyContext { costs: settings.costs, ..Default::default() };
    let mut ilp: Option<ServiceSolution> = None;
    let mut greedy_c: Option<f64> = None;
    let mut rows = Vec::with_capacity(algorithms.len());
    let solve = |budgets: bool, relax: bool| solve_service(scenario, &settings.service(budgets, relax), &settings.ilp());

    for &alg in algorithms {
        let mut row = ResultRow::new(instance, seed, scenario, alg);
        let started = Instant::now();
        match alg {
            Algorithm::Ilp => match solve(settings.budgets, false) {
                Ok(sol) => {
                    ilp = Some(sol.clone());
                    status_note(&mut row, sol.status);
                    row.integral = Some(sol.integral);
                    if sol.objective.is_finite() {
                        row.objective_s = Some(sol.raw_objective);
                    }
                    if let Some(paths) = &sol.paths {
                        let mut plan = plan_of_paths(scenario, paths, &settings.costs);
                        row.fill_plan(scenario, &mut plan, &settings.costs);
                    }
                }
                Err(e) => row.note(&e.to_string()),
            },
            Algorithm::LpRelax => match solve(settings.budgets, true) {
                Ok(sol) => {
                    status_note(&mut row, sol.status);
                    row.integral = Some(sol.integral);
                    if sol.objective.is_finite() {
                        row.objective_s = Some(sol.raw_objective);
                        if ilp.is_none() {
                            ilp = solve(settings.budgets, false).ok();
                        }
                        if let Some(int) = ilp.as_ref().filter(|s| s.status == Status::Optimal && sol.status == Status::Optimal) {
                            row.integrality_gap = Some(int.objective / sol.objective);
                        }
                    }
                }
                Err(e) => row.note(&e.to_string()),
            },
            Algorithm::Baseline => {
                let routes: Result<Vec<_>> =
                    scenario.jobs.iter().map(|j| assignment_baseline_route(&scenario.network, j, &settings.costs)).collect();
                match routes {
                    Ok(routes) => {
                        let service: f64 = routes.iter().map(|r| r.service).sum();
                        row.objective_s = Some(service);
                        let paths: Vec<LayeredPath> = routes.into_iter().map(|r| r.path).collect();
                        let penalized = service + settings.delta * paths.iter().map(|p| p.edges.len()).sum::<usize>() as f64;
                        let mut plan = plan_of_paths(scenario, &paths, &settings.costs);
                        row.fill_plan(scenario, &mut plan, &settings.costs);
                        // The baseline ignores budgets, so compare against the unbudgeted program.
                        let reference = match &ilp {
                            Some(s) if !settings.budgets => Some(s.clone()),
                            _ => solve(false, false).ok(),
                        };
                        match reference {
                            Some(r) if r.status == Status::Optimal => row.relative_gap_pct = pct(penalized, r.objective),
                            Some(r) => status_note(&mut row, r.status),
                            None => row.note("reference-failed"),
                        }
                    }
                    Err(e) => row.note(&e.to_string()),
                }
            }
            Algorithm::Greedy | Algorithm::Nfs | Algorithm::Ss | Algorithm::Sw | Algorithm::Opt => {
                let policy = registry.get(alg.name()).expect("built-in policy");
                match policy.route(scenario, &ctx) {
                    Ok(mut plan) => {
                        row.objective_s = Some(plan.c_max_fict());
                        row.fill_plan(scenario, &mut plan, &settings.costs);
                        let c = plan.c_max_fict();
                        if alg == Algorithm::Greedy {
                            greedy_c = Some(c);
                        } else {
                            if greedy_c.is_none() {
                                greedy_c = registry.get("greedy").ok().and_then(|p| p.route(scenario, &ctx).ok()).map(|p| p.c_max_fict());
                            }
                            if let Some(g) = greedy_c {
                                // opt reports how far greedy sits above it; the others report their own excess over greedy
                                row.relative_gap_pct = if alg == Algorithm::Opt { pct(g, c) } else { pct(c, g) };
                            }
                        }
                    }
                    Err(Error::SizeLimit(_)) => row.note("size-limit"),
                    Err(Error::InfeasibleTopology { .. }) => row.note("infeasible"),
                    Err(e) => row.note(&e.to_string()),
                }
            }
        }
        if settings.timing {
            row.runtime_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
        rows.push(row);
    }
    rows
}

/// Worker pool sized by [`THREADS_ENV`] when set, rayon's default otherwise.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| Error::InvalidScenario(format!("{THREADS_ENV}={v:?} is not a count")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidScenario(e.to_string()))
}

/// Runs the whole sweep. Rows come back in (cell, instance, algorithm) order
/// whatever the worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let settings = RunSettings::from_config(cfg);
    let mut tasks = Vec::new();
    for (c, (n, j, g)) in cfg.cells().into_iter().enumerate() {
        for (i, seed) in cfg.instance_seeds(c).into_iter().enumerate() {
            tasks.push((format!("n{n}-J{j}-g{g}-{i}"), seed, n, j, g));
        }
    }
    let pool = thread_pool()?;
    let per_task: Vec<Vec<ResultRow>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(id, seed, n, j, g)| match generate_scenario(*n, *j, *g, *seed) {
                Ok(s) => run_instance(id, *seed, &s, &cfg.algorithms, &settings),
                Err(e) => cfg
                    .algorithms
                    .iter()
                    .map(|&a| ResultRow {
                        instance: id.clone(),
                        seed: *seed,
                        n: *n,
                        jobs: *j,
                        gamma: *g,
                        algorithm: a.name().to_string(),
                        objective_s: None,
                        c_max_fict_s: None,
                        c_max_actual_s: None,
                        runtime_ms: None,
                        integral: None,
                        integrality_gap: None,
                        relative_gap_pct: None,
                        notes: e.to_string(),
                    })
                    .collect(),
            })
            .collect()
    });
    Ok(per_task.into_iter().flatten().collect())
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Mean of `f` over rows where it is defined.
pub fn mean_of(rows: &[&ResultRow], f: impl Fn(&ResultRow) -> Option<f64>) -> Option<f64> {
    let vals: Vec<f64> = rows.iter().filter_map(|r| f(r)).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}
