//! Routing policies behind a common trait, the plan type they produce, and
//! the approximation-ratio report for greedy routing.

use std::collections::BTreeMap;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use dnnsplit_linprog::{solve_ilp, solve_lp, IlpOptions, Status};

use crate::error::{Error, Result};
use crate::formulations::{
    assignment_baseline_route, build_single_job_lp, path_service, positive_components, CostOptions, SingleJobOptions,
    EXTRACT_TOL,
};
use crate::sim::{fictitious_completion, path_completion, simulate_actual, EventLog};
use crate::topology::{
    bfs_tree, build_layered_graph, edge_connectivity, hop_path_extremes, tree_path, LayeredGraph,
    LayeredPath, LayeredVertex, LinkId, NodeId, PhysicalNetwork, PhysicalRoute, QueueSnapshot,
};
use crate::workload::{DnnModel, Job, Scenario};

/// One job's place in a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRoute {
    pub job: usize,
    /// 1 is served first.
    pub priority: usize,
    pub source: NodeId,
    pub layers: usize,
    pub layered_edges: Vec<usize>,
    /// Layer number to the node computing it.
    pub compute: BTreeMap<usize, NodeId>,
    /// `segments[l]` carries the output of layer `l`.
    pub segments: Vec<Vec<LinkId>>,
    pub c_fict_s: f64,
    pub c_actual_s: Option<f64>,
}

impl JobRoute {
    fn new(g: &LayeredGraph<'_>, job: usize, priority: usize, path: &LayeredPath, c_fict_s: f64) -> Self {
        let phys = path.to_physical(g);
        JobRoute {
            job,
            priority,
            source: path.source,
            layers: path.layers,
            layered_edges: path.edges.clone(),
            compute: phys.compute.iter().enumerate().map(|(i, &u)| (i + 1, u)).collect(),
            segments: phys.segments,
            c_fict_s,
            c_actual_s: None,
        }
    }

    pub fn path(&self) -> LayeredPath {
        LayeredPath { source: self.source, layers: self.layers, edges: self.layered_edges.clone() }
    }
}

/// Routes in priority order, highest first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoutePlan {
    pub routes: Vec<JobRoute>,
}

impl RoutePlan {
    /// Builds a plan from `(job, path)` pairs in priority order and fills in
    /// closed-form completion times against the scenario's initial backlog.
    pub fn from_paths(scenario: &Scenario, ordered: &[(usize, LayeredPath)], costs: &CostOptions) -> Self {
        let refs: Vec<(usize, &LayeredPath)> = ordered.iter().map(|(j, p)| (*j, p)).collect();
        let c = fictitious_completion(scenario, &refs, &QueueSnapshot::initial(&scenario.network), costs);
        let routes = ordered
            .iter()
            .zip(c)
            .enumerate()
            .map(|(p, ((job, path), c))| {
                let g = build_layered_graph(&scenario.network, scenario.jobs[*job].model.layers());
                JobRoute::new(&g, *job, p + 1, path, c)
            })
            .collect();
        RoutePlan { routes }
    }

    pub fn order(&self) -> Vec<usize> {
        self.routes.iter().map(|r| r.job).collect()
    }

    pub fn paths(&self) -> Vec<(usize, LayeredPath)> {
        self.routes.iter().map(|r| (r.job, r.path())).collect()
    }

    pub fn c_max_fict(&self) -> f64 {
        self.routes.iter().map(|r| r.c_fict_s).fold(0.0, f64::max)
    }

    pub fn c_max_actual(&self) -> Option<f64> {
        self.routes.iter().map(|r| r.c_actual_s).try_fold(0.0, |m, c| c.map(|c| f64::max(m, c)))
    }

    /// Runs the event simulation and records each job's actual completion.
    pub fn simulate(&mut self, scenario: &Scenario, costs: &CostOptions) -> EventLog {
        let paths = self.paths();
        let refs: Vec<(usize, &LayeredPath)> = paths.iter().map(|(j, p)| (*j, p)).collect();
        let out = simulate_actual(scenario, &refs, &QueueSnapshot::initial(&scenario.network), costs);
        for (r, c) in self.routes.iter_mut().zip(out.completion) {
            r.c_actual_s = Some(c);
        }
        out.log
    }

    /// Checks that the plan covers every job once with well-formed paths.
    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let mut seen = vec![false; scenario.jobs.len()];
        for r in &self.routes {
            let job = scenario.jobs.get(r.job).ok_or_else(|| Error::InvalidScenario(format!("plan names job {}", r.job)))?;
            if std::mem::replace(&mut seen[r.job], true) {
                return Err(Error::InvalidScenario(format!("job {} routed twice", r.job)));
            }
            let g = build_layered_graph(&scenario.network, job.model.layers());
            if r.source != job.src {
                return Err(Error::MalformedPath(format!("job {} starts away from its source", r.job)));
            }
            LayeredPath::new(&g, job.src, job.dst, r.layered_edges.clone())?;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidScenario("plan leaves a job unrouted".into()));
        }
        Ok(())
    }

    /// Whether every route is free of repeated physical nodes.
    pub fn all_simple(&self, scenario: &Scenario) -> bool {
        self.routes.iter().all(|r| {
            let g = build_layered_graph(&scenario.network, r.layers);
            r.path().is_simple_in_physical(&g)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    #[default]
    Fictitious,
    Actual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptLimits {
    pub max_nodes: usize,
    pub max_jobs: usize,
    pub max_layers: usize,
    /// Completion evaluations allowed before giving up.
    pub max_evaluations: u64,
    /// Candidate paths allowed per job.
    pub max_paths: usize,
}

impl Default for OptLimits {
    fn default() -> Self {
        OptLimits { max_nodes: 5, max_jobs: 3, max_layers: 3, max_evaluations: 5_000_000, max_paths: 50_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolicyContext {
    pub costs: CostOptions,
    /// Which system the exhaustive search minimizes in.
    pub opt_system: System,
    pub opt_limits: OptLimits,
}

pub trait RoutingPolicy: Send + Sync {
    fn name(&self) -> &'static str;
    fn route(&self, scenario: &Scenario, ctx: &PolicyContext) -> Result<RoutePlan>;
}

/// Named policies, looked up by the name they report.
pub struct PolicyRegistry {
    policies: BTreeMap<&'static str, Box<dyn RoutingPolicy>>,
}

impl PolicyRegistry {
    pub fn empty() -> Self {
        PolicyRegistry { policies: BTreeMap::new() }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Greedy));
        r.register(Box::new(NodeFirst));
        r.register(Box::new(ShortestService));
        r.register(Box::new(ShortestWaiting));
        r.register(Box::new(BruteForce));
        r.register(Box::new(Baseline));
        r
    }

    pub fn register(&mut self, policy: Box<dyn RoutingPolicy>) {
        self.policies.insert(policy.name(), policy);
    }

    pub fn get(&self, name: &str) -> Result<&dyn RoutingPolicy> {
        self.policies.get(name).map(|p| p.as_ref()).ok_or_else(|| Error::UnknownPolicy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.policies.keys().copied().collect()
    }
}

impl Default for PolicyRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

macro_rules! policy {
    ($ty:ident, $name:literal, $f:ident) => {
        pub struct $ty;
        impl RoutingPolicy for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn route(&self, scenario: &Scenario, ctx: &PolicyContext) -> Result<RoutePlan> {
                $f(scenario, ctx)
            }
        }
    };
}

policy!(Greedy, "greedy", greedy_route);
policy!(NodeFirst, "nfs", nfs_route);
policy!(ShortestService, "ss", ss_route);
policy!(ShortestWaiting, "sw", sw_route);
policy!(BruteForce, "opt", brute_force_opt);
policy!(Baseline, "baseline", baseline_route);

/// Minimum-completion route for one job against backlog `queues`, via the
/// relaxed single-job program. A fractional relaxed optimum (possible when a
/// path may reuse a node at non-adjacent layers) is resolved by branching on
/// the same program.
pub fn single_job_route(net: &PhysicalNetwork, job: &Job, queues: &QueueSnapshot, costs: &CostOptions) -> Result<LayeredPath> {
    let opts = SingleJobOptions { relax: true, costs: *costs, delta: 0.0 };
    let p = build_single_job_lp(net, job, queues, &opts)?;
    let sol = solve_lp(&p.lp)?;
    if sol.status != Status::Optimal {
        return Err(Error::SolverStatus(format!("job {}: {}", job.id, sol.status)));
    }
    if sol.is_integral(EXTRACT_TOL) {
        return p.extract_path(&sol, EXTRACT_TOL);
    }
    let mut ip = p.lp.clone();
    ip.integer.iter_mut().for_each(|i| *i = true);
    let sol = solve_ilp(&ip, &IlpOptions::default())?;
    if sol.status != Status::Optimal {
        return Err(Error::SolverStatus(format!("job {}: {}", job.id, sol.status)));
    }
    p.extract_path(&sol, EXTRACT_TOL)
}

/// Repeatedly routes every remaining job against the current backlog and
/// commits the one that would finish first.
pub fn greedy_route(scenario: &Scenario, ctx: &PolicyContext) -> Result<RoutePlan> {
    let ordered = greedy_sequence(scenario, &ctx.costs)?;
    Ok(RoutePlan::from_paths(scenario, &ordered, &ctx.costs))
}

fn greedy_sequence(scenario: &Scenario, costs: &CostOptions) -> Result<Vec<(usize, LayeredPath)>> {
    let net = &scenario.network;
    let mut queues = QueueSnapshot::initial(net);
    let mut remaining: Vec<usize> = (0..scenario.jobs.len()).collect();
    let mut ordered = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut best: Option<(f64, usize, LayeredPath)> = None;
        for (k, &j) in remaining.iter().enumerate() {
            let job = &scenario.jobs[j];
            let path = single_job_route(net, job, &queues, costs)?;
            let g = build_layered_graph(net, job.model.layers());
            let c = path_completion(&g, &job.model, &path, &queues, costs);
            if best.as_ref().is_none_or(|b| c < b.0) {
                best = Some((c, k, path));
            }
        }
        let (_, k, path) = best.expect("remaining is non-empty");
        let j = remaining.remove(k);
        let job = &scenario.jobs[j];
        costs.add_path_load(&build_layered_graph(net, job.model.layers()), &job.model, &path, &mut queues);
        ordered.push((j, path));
    }
    Ok(ordered)
}

/// Link weights that compare lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
struct Lex(f64, f64, usize);

impl Add for Lex {
    type Output = Lex;
    fn add(self, o: Lex) -> Lex {
        Lex(self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }
}

/// Shortest paths from `src` with non-negative link weights. Ties go to the
/// lowest node id, then the lowest link id.
fn dijkstra<W: Copy + PartialOrd + Add<Output = W>>(
    net: &PhysicalNetwork,
    src: NodeId,
    zero: W,
    weight: impl Fn(LinkId) -> W,
) -> (Vec<Option<W>>, Vec<Option<LinkId>>) {
    let n = net.num_nodes();
    let mut dist: Vec<Option<W>> = vec![None; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    dist[src] = Some(zero);
    loop {
        let mut pick: Option<(NodeId, W)> = None;
        for u in 0..n {
            if let (false, Some(d)) = (done[u], dist[u]) {
                if pick.is_none_or(|(_, b)| d < b) {
                    pick = Some((u, d));
                }
            }
        }
        let Some((u, du)) = pick else { break };
        done[u] = true;
        for &e in net.out_links(u) {
            let v = net.link(e).to;
            let cand = du + weight(e);
            if !done[v] && dist[v].is_none_or(|d| cand < d) {
                dist[v] = Some(cand);
                parent[v] = Some(e);
            }
        }
    }
    (dist, parent)
}

/// Builds the path that sends the input over `to_node`, computes every layer
/// at `node`, and sends the output over `from_node`.
fn single_node_path(net: &PhysicalNetwork, job: &Job, node: NodeId, to_node: Vec<LinkId>, from_node: Vec<LinkId>) -> Result<LayeredPath> {
    let layers = job.model.layers();
    let mut segments = vec![Vec::new(); layers + 1];
    segments[0] = to_node;
    segments[layers] = from_node;
    let g = build_layered_graph(net, layers);
    LayeredPath::from_physical(&g, job.src, &PhysicalRoute { compute: vec![node; layers], segments })
}

/// Picks, for each job, the node that would finish the whole model first,
/// reaches it and leaves it along transfer-time shortest paths, and commits
/// the job with the earliest resulting completion.
pub fn nfs_route(scenario: &Scenario, ctx: &PolicyContext) -> Result<RoutePlan> {
    let net = &scenario.network;
    let costs = &ctx.costs;
    let mut queues = QueueSnapshot::initial(net);
    let mut remaining: Vec<usize> = (0..scenario.jobs.len()).collect();
    let mut ordered = Vec::new();
    while !remaining.is_empty() {
        let mut best: Option<(f64, usize, LayeredPath)> = None;
        for (k, &j) in remaining.iter().enumerate() {
            let job = &scenario.jobs[j];
            let model = &job.model;
            let mut node: Option<(NodeId, f64)> = None;
            for u in net.compute_nodes() {
                let load: f64 = (1..=model.layers()).map(|l| costs.compute_load(net, model, l, u)).sum();
                let c = (queues.node_mm[u] + load) / net.node(u).mu_mm_s;
                if node.is_none_or(|(_, b)| c < b) {
                    node = Some((u, c));
                }
            }
            let (u, c_cp) = node.ok_or(Error::InfeasibleTopology { job: j })?;
            let q = &queues;
            let transfer = |bits: f64| move |e: LinkId| costs.link_wait(net, q, e) + if bits > 0.0 { bits / net.link(e).mu_bps } else { 0.0 };
            let (d_in, p_in) = dijkstra(net, job.src, 0.0, transfer(costs.data_bits(model, 0)));
            let (d_out, p_out) = dijkstra(net, u, 0.0, transfer(costs.data_bits(model, model.layers())));
            let (Some(c_in), Some(c_out)) = (d_in[u], d_out[job.dst]) else {
                return Err(Error::InfeasibleTopology { job: j });
            };
            let total = c_in + c_cp + c_out;
            if best.as_ref().is_none_or(|b| total < b.0) {
                let path = single_node_path(net, job, u, tree_path(net, &p_in, u), tree_path(net, &p_out, job.dst))?;
                best = Some((total, k, path));
            }
        }
        let (_, k, path) = best.expect("remaining is non-empty");
        let j = remaining.remove(k);
        let job = &scenario.jobs[j];
        costs.add_path_load(&build_layered_graph(net, job.model.layers()), &job.model, &path, &mut queues);
        ordered.push((j, path));
    }
    Ok(RoutePlan::from_paths(scenario, &ordered, costs))
}

/// Route with the least pure service time and that time.
pub fn shortest_service_route(net: &PhysicalNetwork, job: &Job, costs: &CostOptions) -> Result<(LayeredPath, f64)> {
    let path = single_job_route(net, job, &QueueSnapshot::empty(net), costs)?;
    let g = build_layered_graph(net, job.model.layers());
    let s = path_service(&g, &job.model, &path, costs);
    Ok((path, s))
}

/// Shortest-service routes, prioritized by ascending service time.
pub fn ss_route(scenario: &Scenario, ctx: &PolicyContext) -> Result<RoutePlan> {
    let mut routes = scenario
        .jobs
        .iter()
        .map(|job| shortest_service_route(&scenario.network, job, &ctx.costs).map(|(p, s)| (s, job.id, p)))
        .collect::<Result<Vec<_>>>()?;
    routes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let ordered: Vec<_> = routes.into_iter().map(|(_, j, p)| (j, p)).collect();
    Ok(RoutePlan::from_paths(scenario, &ordered, &ctx.costs))
}

/// Single-node route for `job` against backlog `queues`: the node with the
/// least compute backlog in time, reached and left along paths with the
/// least link backlog (then service, then hops).
pub fn sw_job_route(net: &PhysicalNetwork, job: &Job, queues: &QueueSnapshot, costs: &CostOptions) -> Result<LayeredPath> {
    let mut node: Option<(NodeId, f64)> = None;
    for u in net.compute_nodes() {
        let w = costs.node_wait(net, queues, u);
        if node.is_none_or(|(_, b)| w < b) {
            node = Some((u, w));
        }
    }
    let (u, _) = node.ok_or(Error::InfeasibleTopology { job: job.id })?;
    let model = &job.model;
    let weight = |bits: f64| {
        move |e: LinkId| {
            let service = if bits > 0.0 { bits / net.link(e).mu_bps } else { 0.0 };
            Lex(costs.link_wait(net, queues, e), service, 1)
        }
    };
    let (d_in, p_in) = dijkstra(net, job.src, Lex::default(), weight(costs.data_bits(model, 0)));
    let (d_out, p_out) = dijkstra(net, u, Lex::default(), weight(costs.data_bits(model, model.layers())));
    if d_in[u].is_none() || d_out[job.dst].is_none() {
        return Err(Error::InfeasibleTopology { job: job.id });
    }
    single_node_path(net, job, u, tree_path(net, &p_in, u), tree_path(net, &p_out, job.dst))
}

/// Greedy's plan with the last job rerouted by [`sw_job_route`] against the
/// backlog of the jobs before it.
pub fn sw_route(scenario: &Scenario, ctx: &PolicyContext) -> Result<RoutePlan> {
    let net = &scenario.network;
    let mut ordered = greedy_sequence(scenario, &ctx.costs)?;
    let (last, _) = ordered.pop().expect("scenarios have at least one job");
    let mut queues = QueueSnapshot::initial(net);
    for (j, path) in &ordered {
        let model = &scenario.jobs[*j].model;
        ctx.costs.add_path_load(&build_layered_graph(net, model.layers()), model, path, &mut queues);
    }
    let path = sw_job_route(net, &scenario.jobs[last], &queues, &ctx.costs)?;
    ordered.push((last, path));
    Ok(RoutePlan::from_paths(scenario, &ordered, &ctx.costs))
}

/// Hop-count assignment routes for every job, prioritized by job id.
pub fn baseline_route(scenario: &Scenario, ctx: &PolicyContext) -> Result<RoutePlan> {
    let ordered = scenario
        .jobs
        .iter()
        .map(|job| assignment_baseline_route(&scenario.network, job, &ctx.costs).map(|b| (job.id, b.path)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RoutePlan::from_paths(scenario, &ordered, &ctx.costs))
}

struct Candidate {
    path: LayeredPath,
    service: f64,
}

/// Paths from source to destination that repeat no layered vertex and whose
/// service stays below `bound`, cheapest first. With zero network delay one
/// fewest-hop path per compute assignment stands in for all of them.
fn candidate_paths(net: &PhysicalNetwork, job: &Job, costs: &CostOptions, bound: f64, limits: &OptLimits) -> Result<Vec<Candidate>> {
    let g = build_layered_graph(net, job.model.layers());
    let model = &job.model;
    let mut out = Vec::new();
    if costs.zero_delay {
        let trees: Vec<_> = (0..net.num_nodes()).map(|s| bfs_tree(net, s)).collect();
        for compute in assignments(net, model.layers()) {
            let mut stops = vec![job.src];
            stops.extend(&compute);
            stops.push(job.dst);
            if stops.windows(2).any(|w| trees[w[0]].0[w[1]].is_none()) {
                continue;
            }
            let segments = stops.windows(2).map(|w| tree_path(net, &trees[w[0]].1, w[1])).collect();
            let path = LayeredPath::from_physical(&g, job.src, &PhysicalRoute { compute, segments })?;
            let service = path_service(&g, model, &path, costs);
            if service < bound {
                out.push(Candidate { path, service });
            }
        }
    } else {
        let target = LayeredVertex { node: job.dst, layer: model.layers() };
        let start = LayeredVertex { node: job.src, layer: 0 };
        let mut on_path = vec![false; g.num_vertices()];
        on_path[g.vertex_index(start)] = true;
        let mut edges = Vec::new();
        let mut ctx = PathSearch { g: &g, model, costs, bound, source: job.src, target, limit: limits.max_paths, out: &mut out };
        ctx.dfs(start, 0.0, &mut on_path, &mut edges)?;
    }
    out.sort_by(|a, b| a.service.total_cmp(&b.service).then_with(|| a.path.edges.cmp(&b.path.edges)));
    Ok(out)
}

struct PathSearch<'a, 'g> {
    g: &'a LayeredGraph<'g>,
    model: &'a DnnModel,
    costs: &'a CostOptions,
    bound: f64,
    source: NodeId,
    target: LayeredVertex,
    limit: usize,
    out: &'a mut Vec<Candidate>,
}

impl PathSearch<'_, '_> {
    fn dfs(&mut self, at: LayeredVertex, service: f64, on_path: &mut [bool], edges: &mut Vec<usize>) -> Result<()> {
        if at == self.target {
            if self.out.len() >= self.limit {
                return Err(Error::SizeLimit(format!("more than {} candidate paths", self.limit)));
            }
            let path = LayeredPath { source: self.source, layers: self.g.layers(), edges: edges.clone() };
            self.out.push(Candidate { path, service });
            return Ok(());
        }
        let outs: Vec<usize> = self.g.out_edges(at).collect();
        for e in outs {
            if !self.costs.edge_usable(self.g, self.model, e) {
                continue;
            }
            let s = service + self.costs.edge_service(self.g, self.model, e);
            let head = self.g.head(e);
            let hi = self.g.vertex_index(head);
            if s >= self.bound || on_path[hi] {
                continue;
            }
            on_path[hi] = true;
            edges.push(e);
            self.dfs(head, s, on_path, edges)?;
            edges.pop();
            on_path[hi] = false;
        }
        Ok(())
    }
}

/// Every way to place `layers` layers on compute nodes, lexicographically.
fn assignments(net: &PhysicalNetwork, layers: usize) -> Vec<Vec<NodeId>> {
    let nodes: Vec<NodeId> = net.compute_nodes().collect();
    let mut out = vec![Vec::new()];
    for _ in 0..layers {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<NodeId>| {
                nodes.iter().map(move |&u| {
                    let mut p = prefix.clone();
                    p.push(u);
                    p
                })
            })
            .collect();
    }
    out
}

/// Closed-form best route for a job that goes after everything in `queues`:
/// every compute assignment, joined by per-layer cheapest transfers.
fn best_last_route(net: &PhysicalNetwork, job: &Job, queues: &QueueSnapshot, costs: &CostOptions) -> Result<Option<(f64, LayeredPath)>> {
    let model = &job.model;
    let layers = model.layers();
    let g = build_layered_graph(net, layers);
    let trees: Vec<Vec<_>> = (0..=layers)
        .map(|l| {
            let bits = costs.data_bits(model, l);
            (0..net.num_nodes())
                .map(|s| {
                    dijkstra(net, s, 0.0, |e| {
                        costs.link_wait(net, queues, e) + if bits > 0.0 { bits / net.link(e).mu_bps } else { 0.0 }
                    })
                })
                .collect()
        })
        .collect();
    let mut best: Option<(f64, Vec<NodeId>)> = None;
    for compute in assignments(net, layers) {
        let mut stops = vec![job.src];
        stops.extend(&compute);
        stops.push(job.dst);
        let mut total = 0.0;
        let mut reachable = true;
        for (l, w) in stops.windows(2).enumerate() {
            match trees[l][w[0]].0[w[1]] {
                Some(d) => total += d,
                None => reachable = false,
            }
        }
        if !reachable {
            continue;
        }
        let mut charged = vec![false; net.num_nodes()];
        for (i, &u) in compute.iter().enumerate() {
            total += costs.compute_load(net, model, i + 1, u) / net.node(u).mu_mm_s;
            if !std::mem::replace(&mut charged[u], true) {
                total += costs.node_wait(net, queues, u);
            }
        }
        if best.as_ref().is_none_or(|b| total < b.0) {
            best = Some((total, compute));
        }
    }
    let Some((_, compute)) = best else { return Ok(None) };
    let mut stops = vec![job.src];
    stops.extend(&compute);
    stops.push(job.dst);
    let segments = stops.windows(2).enumerate().map(|(l, w)| tree_path(net, &trees[l][w[0]].1, w[1])).collect();
    let path = LayeredPath::from_physical(&g, job.src, &PhysicalRoute { compute, segments })?;
    let c = path_completion(&g, model, &path, queues, costs);
    Ok(Some((c, path)))
}

struct OptSearch<'a> {
    scenario: &'a Scenario,
    costs: CostOptions,
    system: System,
    candidates: Vec<Vec<Candidate>>,
    max_evaluations: u64,
    evaluations: u64,
    best: f64,
    best_plan: Option<Vec<(usize, LayeredPath)>>,
}

impl OptSearch<'_> {
    fn charge(&mut self, n: u64) -> Result<()> {
        self.evaluations += n;
        if self.evaluations > self.max_evaluations {
            return Err(Error::SizeLimit(format!("more than {} evaluations", self.max_evaluations)));
        }
        Ok(())
    }

    fn search(&mut self, used: &mut Vec<bool>, prefix: &mut Vec<(usize, usize)>, queues: &QueueSnapshot, cur_max: f64) -> Result<()> {
        let jobs = self.scenario.jobs.len();
        let net = &self.scenario.network;
        if self.system == System::Fictitious && prefix.len() + 1 == jobs {
            let j = used.iter().position(|u| !u).expect("one job left");
            let job = &self.scenario.jobs[j];
            self.charge(net.compute_nodes().count().pow(job.model.layers() as u32) as u64)?;
            if let Some((c, path)) = best_last_route(net, job, queues, &self.costs)? {
                let value = cur_max.max(c);
                if value < self.best {
                    self.best = value;
                    let mut plan: Vec<_> = prefix.iter().map(|&(j, k)| (j, self.candidates[j][k].path.clone())).collect();
                    plan.push((j, path));
                    self.best_plan = Some(plan);
                }
            }
            return Ok(());
        }
        for j in 0..jobs {
            if used[j] {
                continue;
            }
            let job = &self.scenario.jobs[j];
            let g = build_layered_graph(net, job.model.layers());
            used[j] = true;
            let rest = (0..jobs)
                .filter(|&i| !used[i])
                .map(|i| self.candidates[i].first().map_or(f64::INFINITY, |c| c.service))
                .fold(cur_max, f64::max);
            for k in 0..self.candidates[j].len() {
                if rest.max(self.candidates[j][k].service) >= self.best {
                    break;
                }
                self.charge(1)?;
                let c = match self.system {
                    System::Fictitious => path_completion(&g, &job.model, &self.candidates[j][k].path, queues, &self.costs),
                    System::Actual => {
                        let mut routes: Vec<(usize, &LayeredPath)> =
                            prefix.iter().map(|&(i, m)| (i, &self.candidates[i][m].path)).collect();
                        routes.push((j, &self.candidates[j][k].path));
                        let out = simulate_actual(self.scenario, &routes, &QueueSnapshot::initial(net), &self.costs);
                        *out.completion.last().expect("non-empty")
                    }
                };
                let value = cur_max.max(c);
                if value >= self.best {
                    continue;
                }
                prefix.push((j, k));
                if prefix.len() == jobs {
                    self.best = value;
                    self.best_plan = Some(prefix.iter().map(|&(i, m)| (i, self.candidates[i][m].path.clone())).collect());
                } else {
                    let mut next = queues.clone();
                    if self.system == System::Fictitious {
                        self.costs.add_path_load(&g, &job.model, &self.candidates[j][k].path, &mut next);
                    }
                    self.search(used, prefix, &next, value)?;
                }
                prefix.pop();
            }
            used[j] = false;
        }
        Ok(())
    }
}

/// Exhaustive min-max search over priority orders and routes, in the
/// closed-form or the simulated system. Starts from greedy's plan as the
/// incumbent and returns it unless something strictly better exists.
pub fn brute_force_opt(scenario: &Scenario, ctx: &PolicyContext) -> Result<RoutePlan> {
    let limits = &ctx.opt_limits;
    let net = &scenario.network;
    if net.num_nodes() > limits.max_nodes || scenario.jobs.len() > limits.max_jobs || scenario.max_layers() > limits.max_layers {
        return Err(Error::SizeLimit(format!(
            "{} nodes, {} jobs, {} layers exceed {} / {} / {}",
            net.num_nodes(),
            scenario.jobs.len(),
            scenario.max_layers(),
            limits.max_nodes,
            limits.max_jobs,
            limits.max_layers
        )));
    }
    let mut greedy = greedy_route(scenario, ctx)?;
    let incumbent = match ctx.opt_system {
        System::Fictitious => greedy.c_max_fict(),
        System::Actual => {
            greedy.simulate(scenario, &ctx.costs);
            greedy.c_max_actual().expect("just simulated")
        }
    };
    let exact_last = ctx.opt_system == System::Fictitious;
    let candidates = scenario
        .jobs
        .iter()
        .map(|job| {
            if exact_last && scenario.jobs.len() == 1 {
                Ok(Vec::new())
            } else {
                candidate_paths(net, job, &ctx.costs, incumbent, limits)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut search = OptSearch {
        scenario,
        costs: ctx.costs,
        system: ctx.opt_system,
        candidates,
        max_evaluations: limits.max_evaluations,
        evaluations: 0,
        best: incumbent,
        best_plan: None,
    };
    let mut used = vec![false; scenario.jobs.len()];
    search.search(&mut used, &mut Vec::new(), &QueueSnapshot::initial(net), 0.0)?;
    let mut plan = match search.best_plan {
        Some(ordered) => RoutePlan::from_paths(scenario, &ordered, &ctx.costs),
        None => {
            greedy.routes.iter_mut().for_each(|r| r.c_actual_s = None);
            greedy
        }
    };
    if ctx.opt_system == System::Actual {
        plan.simulate(scenario, &ctx.costs);
    }
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HopAggregate {
    /// Shortest source-destination hop count minimized over jobs.
    #[default]
    Min,
    Max,
}

/// Ingredients and value of the greedy approximation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub alpha: f64,
    pub alpha_tx: f64,
    pub alpha_cp: f64,
    pub h_l: usize,
    pub h_s: usize,
    pub k: usize,
    pub layers: usize,
    pub v_plus: usize,
    pub e_plus: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

pub fn compute_alpha(scenario: &Scenario, costs: &CostOptions, hops: HopAggregate) -> AlphaReport {
    let net = &scenario.network;
    let extremes: Vec<(usize, usize)> = scenario.jobs.iter().map(|j| hop_path_extremes(net, j.src, j.dst)).collect();
    let h_l = extremes.iter().map(|e| e.1).max().unwrap_or(0);
    let shortest = extremes.iter().map(|e| e.0);
    let h_s = match hops {
        HopAggregate::Min => shortest.min(),
        HopAggregate::Max => shortest.max(),
    }
    .unwrap_or(0);
    let layers = scenario.max_layers();
    let v_plus = net.compute_nodes().count();
    let e_plus = positive_components(net, costs) - v_plus;

    let rates: Vec<f64> = net.compute_nodes().map(|u| net.node(u).mu_mm_s).collect();
    let alpha_cp = rates.iter().copied().fold(0.0, f64::max) / rates.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha_tx = if costs.zero_delay {
        0.0
    } else if h_s == 0 {
        f64::INFINITY
    } else {
        let sizes = scenario.jobs.iter().flat_map(|j| (0..=j.model.layers()).map(move |l| j.model.data_bits(l)));
        let (d_min, d_max) = sizes.fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
        let link_rates = net.links().iter().map(|l| l.mu_bps);
        let (r_min, r_max) = link_rates.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        (h_l as f64 * d_max * r_max) / (h_s as f64 * d_min * r_min)
    };
    let k = edge_connectivity(net);
    let ve = (v_plus + e_plus) as f64;
    let tx_wait = if alpha_tx == 0.0 { 0.0 } else { 2.0 * (layers as f64 + 1.0) * alpha_tx / k as f64 };
    let alpha1 = f64::max(2.0 * alpha_tx, alpha_cp);
    let alpha2 = f64::max(alpha_cp / v_plus as f64, tx_wait);
    let alpha3 = f64::max(alpha2 * ve, alpha1);
    let alpha = [2.0 * alpha_tx, tx_wait * ve, (1.0 + e_plus as f64 / v_plus as f64) * alpha_cp]
        .into_iter()
        .fold(0.0, f64::max)
        * (2.0 - 1.0 / ve);
    AlphaReport { alpha, alpha_tx, alpha_cp, h_l, h_s, k, layers, v_plus, e_plus, alpha1, alpha2, alpha3 }
}
