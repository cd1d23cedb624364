//! Routing programs on the layered graph and their solution read-back.
//!
//! Single-job programs index `r` by layered edge id and put one `z` per
//! physical node after them. Multi-job programs are job-major: job `j`
//! owns columns `j·|E| .. (j+1)·|E|`.

use serde::{Deserialize, Serialize};

use dnnsplit_linprog::{solve_ilp, solve_lp_with, IlpOptions, LinearProgram, LpSolution, Relation, Status, INTEGRALITY_TOL};

use crate::error::{Error, Result};
use crate::topology::{
    bfs_tree, build_layered_graph, tree_path, LayeredEdge, LayeredGraph, LayeredPath, LayeredVertex, NodeId,
    PhysicalNetwork, PhysicalRoute, QueueSnapshot,
};
use crate::workload::{DnnModel, Job, Scenario};

/// Default penalty per traversed edge in the service program, in seconds.
pub const DEFAULT_DELTA: f64 = 1e-6;
/// Default memory slowdown factor when the memory penalty is switched on.
pub const DEFAULT_MEM_PENALTY: f64 = 1.0;

/// How tasks turn into time. Shared by every program, policy and evaluator
/// so they all charge the same costs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostOptions {
    /// Transfers take no time and links never queue.
    pub zero_delay: bool,
    /// Compute load of a layer whose memory need exceeds the node's memory
    /// is scaled by `1 + factor`.
    pub mem_penalty: Option<f64>,
}

impl CostOptions {
    /// Effective compute load (MM) of layer `l` of `model` at node `u`.
    pub fn compute_load(&self, net: &PhysicalNetwork, model: &DnnModel, l: usize, u: NodeId) -> f64 {
        let c = model.compute(l);
        match self.mem_penalty {
            Some(alpha) if model.memory(l) > net.node(u).mem_kb => c * (1.0 + alpha),
            _ => c,
        }
    }

    /// Bits sent over a link for the output of layer `l`.
    pub fn data_bits(&self, model: &DnnModel, l: usize) -> f64 {
        if self.zero_delay {
            0.0
        } else {
            model.data_bits(l)
        }
    }

    /// Whether `model` may traverse layered edge `e` at all.
    pub fn edge_usable(&self, g: &LayeredGraph<'_>, model: &DnnModel, e: usize) -> bool {
        match g.edge(e) {
            LayeredEdge::Intra { layer, .. } => layer <= model.layers(),
            LayeredEdge::Cross { layer, node } => layer <= model.layers() && g.network().node(node).mu_mm_s > 0.0,
        }
    }

    /// Pure service seconds of traversing layered edge `e`.
    pub fn edge_service(&self, g: &LayeredGraph<'_>, model: &DnnModel, e: usize) -> f64 {
        let net = g.network();
        match g.edge(e) {
            LayeredEdge::Intra { layer, link } => {
                if self.zero_delay {
                    0.0
                } else {
                    model.data_bits(layer) / net.link(link).mu_bps
                }
            }
            LayeredEdge::Cross { layer, node } => self.compute_load(net, model, layer, node) / net.node(node).mu_mm_s,
        }
    }

    /// Seconds a transfer waits behind `queues` on link `link`.
    pub fn link_wait(&self, net: &PhysicalNetwork, queues: &QueueSnapshot, link: usize) -> f64 {
        if self.zero_delay {
            0.0
        } else {
            queues.link_bits[link] / net.link(link).mu_bps
        }
    }

    /// Seconds a computation waits behind `queues` at node `u`.
    pub fn node_wait(&self, net: &PhysicalNetwork, queues: &QueueSnapshot, u: NodeId) -> f64 {
        let mu = net.node(u).mu_mm_s;
        if mu > 0.0 {
            queues.node_mm[u] / mu
        } else {
            0.0
        }
    }

    /// Adds the work a job puts on each physical component along `path`.
    pub fn add_path_load(&self, g: &LayeredGraph<'_>, model: &DnnModel, path: &LayeredPath, queues: &mut QueueSnapshot) {
        for &e in &path.edges {
            match g.edge(e) {
                LayeredEdge::Intra { layer, link } => queues.link_bits[link] += self.data_bits(model, layer),
                LayeredEdge::Cross { layer, node } => {
                    queues.node_mm[node] += self.compute_load(g.network(), model, layer, node)
                }
            }
        }
    }
}

/// Total service seconds along `path`.
pub fn path_service(g: &LayeredGraph<'_>, model: &DnnModel, path: &LayeredPath, costs: &CostOptions) -> f64 {
    path.edges.iter().map(|&e| costs.edge_service(g, model, e)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleJobOptions {
    pub relax: bool,
    pub costs: CostOptions,
    /// Penalty per traversed edge; zero keeps the objective equal to the
    /// completion-time estimate.
    pub delta: f64,
}

impl Default for SingleJobOptions {
    fn default() -> Self {
        SingleJobOptions { relax: true, costs: CostOptions::default(), delta: 0.0 }
    }
}

/// Waiting-aware routing program for one job.
#[derive(Debug, Clone)]
pub struct SingleJobLp<'a> {
    pub lp: LinearProgram,
    pub graph: LayeredGraph<'a>,
    pub source: NodeId,
    pub dest: NodeId,
    delta: f64,
}

impl<'a> SingleJobLp<'a> {
    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn z_var(&self, u: NodeId) -> usize {
        self.graph.num_edges() + u
    }

    /// Objective of `x` without the per-edge penalty.
    pub fn raw_objective(&self, x: &[f64]) -> f64 {
        self.lp.evaluate(x) - self.delta * x[..self.num_edges()].iter().sum::<f64>()
    }

    /// Reads the path out of an optimal point.
    pub fn extract_path(&self, solution: &LpSolution, tol: f64) -> Result<LayeredPath> {
        let x = &solution.x;
        if let Some((var, &value)) = x.iter().enumerate().find(|(_, v)| (*v - v.round()).abs() > tol) {
            return Err(Error::FractionalSolution { var, value });
        }
        let used: Vec<bool> = x[..self.num_edges()].iter().map(|v| v.round() >= 1.0).collect();
        walk_unit_flow(&self.graph, self.source, self.dest, &used)
    }
}

/// Builds the waiting-aware program for `job` against backlog `queues`.
pub fn build_single_job_lp<'a>(
    net: &'a PhysicalNetwork,
    job: &Job,
    queues: &QueueSnapshot,
    opts: &SingleJobOptions,
) -> Result<SingleJobLp<'a>> {
    let model = &job.model;
    let g = build_layered_graph(net, model.layers());
    if !reachable(&g, model, job.src, job.dst, &opts.costs) {
        return Err(Error::InfeasibleTopology { job: job.id });
    }
    let mut lp = LinearProgram::new();
    let (lo_hi, integer) = (1.0, !opts.relax);
    for e in 0..g.num_edges() {
        let usable = opts.costs.edge_usable(&g, model, e);
        let cost = if !usable {
            0.0
        } else {
            let wait = match g.edge(e) {
                LayeredEdge::Intra { link, .. } => opts.costs.link_wait(net, queues, link),
                LayeredEdge::Cross { .. } => 0.0,
            };
            opts.costs.edge_service(&g, model, e) + wait + opts.delta
        };
        let v = lp.add_var(cost, 0.0, if usable { lo_hi } else { 0.0 });
        lp.integer[v] = integer;
    }
    for u in 0..net.num_nodes() {
        let usable = net.node(u).mu_mm_s > 0.0;
        let v = lp.add_var(opts.costs.node_wait(net, queues, u), 0.0, if usable { lo_hi } else { 0.0 });
        lp.integer[v] = integer;
    }
    let (a1, a2, rhs) = constraint_rows(&g, job.src, job.dst);
    for row in a1 {
        lp.add_row(row, Relation::Le, 0.0);
    }
    for (row, b) in a2.into_iter().zip(rhs) {
        lp.add_row(row, Relation::Eq, b);
    }
    Ok(SingleJobLp { lp, graph: g, source: job.src, dest: job.dst, delta: opts.delta })
}

/// Node-selection rows (`r_cross(l,u) - z_u <= 0`, layer-major) and flow
/// conservation rows (out minus in, one per layered vertex) with their
/// right-hand sides. Columns follow the single-job layout.
fn constraint_rows(g: &LayeredGraph<'_>, src: NodeId, dst: NodeId) -> (Vec<Vec<(usize, f64)>>, Vec<Vec<(usize, f64)>>, Vec<f64>) {
    let n = g.network().num_nodes();
    let mut a1 = Vec::with_capacity(g.layers() * n);
    for l in 1..=g.layers() {
        for u in 0..n {
            a1.push(vec![(g.cross_edge(l, u), 1.0), (g.num_edges() + u, -1.0)]);
        }
    }
    let s0 = g.vertex_index(LayeredVertex { node: src, layer: 0 });
    let t_l = g.vertex_index(LayeredVertex { node: dst, layer: g.layers() });
    let mut a2 = Vec::with_capacity(g.num_vertices());
    let mut rhs = Vec::with_capacity(g.num_vertices());
    for vi in 0..g.num_vertices() {
        let v = g.vertex(vi);
        let mut row: Vec<(usize, f64)> = g.out_edges(v).map(|e| (e, 1.0)).collect();
        row.extend(g.in_edges(v).map(|e| (e, -1.0)));
        a2.push(row);
        rhs.push(match (vi == s0, vi == t_l) {
            (true, false) => 1.0,
            (false, true) => -1.0,
            _ => 0.0,
        });
    }
    (a1, a2, rhs)
}

/// Dense `[A1; A2]` of the single-job program on `g`.
pub fn node_flow_matrix(g: &LayeredGraph<'_>) -> Vec<Vec<i64>> {
    let cols = g.num_edges() + g.network().num_nodes();
    let (a1, a2, _) = constraint_rows(g, 0, 0);
    a1.iter()
        .chain(&a2)
        .map(|row| {
            let mut dense = vec![0i64; cols];
            for &(j, a) in row {
                dense[j] = a as i64;
            }
            dense
        })
        .collect()
}

/// Equality form of the relaxed single-job program:
/// `[[A1, I, 0], [A2, 0, 0], [I, 0, I]]` with one slack per node-selection
/// row and one per upper bound `y <= 1`.
pub fn slack_augmented_matrix(g: &LayeredGraph<'_>) -> Vec<Vec<i64>> {
    let base = node_flow_matrix(g);
    let y = g.num_edges() + g.network().num_nodes();
    let k1 = g.layers() * g.network().num_nodes();
    let cols = y + k1 + y;
    let mut out = Vec::with_capacity(base.len() + y);
    for (i, row) in base.into_iter().enumerate() {
        let mut r = row;
        r.resize(cols, 0);
        if i < k1 {
            r[y + i] = 1;
        }
        out.push(r);
    }
    for j in 0..y {
        let mut r = vec![0i64; cols];
        r[j] = 1;
        r[y + k1 + j] = 1;
        out.push(r);
    }
    out
}

fn reachable(g: &LayeredGraph<'_>, model: &DnnModel, src: NodeId, dst: NodeId, costs: &CostOptions) -> bool {
    let mut seen = vec![false; g.num_vertices()];
    let start = g.vertex_index(LayeredVertex { node: src, layer: 0 });
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(vi) = stack.pop() {
        for e in g.out_edges(g.vertex(vi)) {
            if !costs.edge_usable(g, model, e) {
                continue;
            }
            let h = g.vertex_index(g.head(e));
            if !seen[h] {
                seen[h] = true;
                stack.push(h);
            }
        }
    }
    seen[g.vertex_index(LayeredVertex { node: dst, layer: model.layers() })]
}

/// Follows a unit flow from `src` in copy 0 to `dst` in the last copy,
/// cutting out any loop the walk closes. Flow on cycles detached from the
/// walk is ignored.
pub fn walk_unit_flow(g: &LayeredGraph<'_>, src: NodeId, dst: NodeId, used: &[bool]) -> Result<LayeredPath> {
    let target = LayeredVertex { node: dst, layer: g.layers() };
    let mut at = LayeredVertex { node: src, layer: 0 };
    let mut edges: Vec<usize> = Vec::new();
    let mut taken = vec![false; g.num_edges()];
    let mut pos: Vec<Option<usize>> = vec![None; g.num_vertices()];
    pos[g.vertex_index(at)] = Some(0);
    while at != target {
        let next = g
            .out_edges(at)
            .find(|&e| used[e] && !taken[e])
            .ok_or_else(|| Error::MalformedPath(format!("flow stops at {at:?}")))?;
        taken[next] = true;
        edges.push(next);
        at = g.head(next);
        let vi = g.vertex_index(at);
        match pos[vi] {
            Some(p) => {
                for e in edges.drain(p..) {
                    pos[g.vertex_index(g.head(e))] = None;
                }
                pos[vi] = Some(p);
            }
            None => pos[vi] = Some(edges.len()),
        }
    }
    LayeredPath::new(g, src, dst, edges)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceIlpOptions {
    pub budgets: bool,
    pub delta: f64,
    pub relax: bool,
    pub costs: CostOptions,
}

impl Default for ServiceIlpOptions {
    fn default() -> Self {
        ServiceIlpOptions { budgets: true, delta: DEFAULT_DELTA, relax: false, costs: CostOptions::default() }
    }
}

/// Service-time program for all jobs at once, with optional compute and
/// memory budget rows.
#[derive(Debug, Clone)]
pub struct ServiceIlp<'a> {
    pub lp: LinearProgram,
    pub graph: LayeredGraph<'a>,
    delta: f64,
}

impl<'a> ServiceIlp<'a> {
    pub fn edges_per_job(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn var(&self, job: usize, edge: usize) -> usize {
        job * self.edges_per_job() + edge
    }

    pub fn raw_objective(&self, x: &[f64]) -> f64 {
        self.lp.evaluate(x) - self.delta * x.iter().sum::<f64>()
    }

    /// Per-job paths, each expressed on the job's own layered graph.
    pub fn extract_paths(&self, scenario: &'a Scenario, solution: &LpSolution, tol: f64) -> Result<Vec<LayeredPath>> {
        if let Some((var, &value)) = solution.x.iter().enumerate().find(|(_, v)| (*v - v.round()).abs() > tol) {
            return Err(Error::FractionalSolution { var, value });
        }
        let m = self.edges_per_job();
        scenario
            .jobs
            .iter()
            .map(|job| {
                let used: Vec<bool> = (0..m).map(|e| solution.x[self.var(job.id, e)].round() >= 1.0).collect();
                let wide = walk_unit_flow_to(&self.graph, job.src, job.dst, job.model.layers(), &used)?;
                let own = build_layered_graph(&scenario.network, job.model.layers());
                let edges = wide.iter().map(|&e| own.edge_id(self.graph.edge(e))).collect();
                LayeredPath::new(&own, job.src, job.dst, edges)
            })
            .collect()
    }
}

/// Like [`walk_unit_flow`] but stopping in copy `last_layer`, returning raw edge ids.
fn walk_unit_flow_to(g: &LayeredGraph<'_>, src: NodeId, dst: NodeId, last_layer: usize, used: &[bool]) -> Result<Vec<usize>> {
    let narrowed = build_layered_graph(g.network(), last_layer);
    let mut narrow_used = vec![false; narrowed.num_edges()];
    for (e, &u) in used.iter().enumerate() {
        if !u {
            continue;
        }
        let edge = g.edge(e);
        let layer = match edge {
            LayeredEdge::Intra { layer, .. } | LayeredEdge::Cross { layer, .. } => layer,
        };
        if layer <= last_layer {
            narrow_used[narrowed.edge_id(edge)] = true;
        }
    }
    let path = walk_unit_flow(&narrowed, src, dst, &narrow_used)?;
    Ok(path.edges.iter().map(|&e| g.edge_id(narrowed.edge(e))).collect())
}

pub fn build_service_ilp<'a>(scenario: &'a Scenario, opts: &ServiceIlpOptions) -> ServiceIlp<'a> {
    let net = &scenario.network;
    let g = build_layered_graph(net, scenario.max_layers());
    let m = g.num_edges();
    let mut lp = LinearProgram::new();
    for job in &scenario.jobs {
        for e in 0..m {
            let usable = opts.costs.edge_usable(&g, &job.model, e);
            let cost = if usable { opts.costs.edge_service(&g, &job.model, e) + opts.delta } else { 0.0 };
            let v = lp.add_var(cost, 0.0, if usable { 1.0 } else { 0.0 });
            lp.integer[v] = !opts.relax;
        }
    }
    for job in &scenario.jobs {
        let base = job.id * m;
        let s0 = LayeredVertex { node: job.src, layer: 0 };
        let t = LayeredVertex { node: job.dst, layer: job.model.layers() };
        for vi in 0..g.num_vertices() {
            let v = g.vertex(vi);
            if v.layer > job.model.layers() {
                continue;
            }
            let mut row: Vec<(usize, f64)> = g.out_edges(v).map(|e| (base + e, 1.0)).collect();
            row.extend(g.in_edges(v).map(|e| (base + e, -1.0)));
            let rhs = match (v == s0, v == t) {
                (true, false) => 1.0,
                (false, true) => -1.0,
                _ => 0.0,
            };
            lp.add_row(row, Relation::Eq, rhs);
        }
    }
    if opts.budgets {
        for u in 0..net.num_nodes() {
            if net.node(u).mu_mm_s <= 0.0 {
                continue;
            }
            let mut compute = Vec::new();
            let mut memory = Vec::new();
            for job in &scenario.jobs {
                for l in 1..=job.model.layers() {
                    let v = job.id * m + g.cross_edge(l, u);
                    compute.push((v, job.model.compute(l)));
                    memory.push((v, job.model.memory(l)));
                }
            }
            lp.add_row(compute, Relation::Le, net.node(u).cbar_mm);
            lp.add_row(memory, Relation::Le, net.node(u).mem_kb);
        }
    }
    ServiceIlp { lp, graph: g, delta: opts.delta }
}

/// Outcome of solving the service program.
#[derive(Debug, Clone)]
pub struct ServiceSolution {
    pub status: Status,
    /// Objective including the per-edge penalty; `NaN` without a point.
    pub objective: f64,
    pub raw_objective: f64,
    pub integral: bool,
    /// Per-job paths when the point is integral.
    pub paths: Option<Vec<LayeredPath>>,
    pub nodes: usize,
}

/// Solves the service program, as an ILP or its relaxation per `opts.relax`.
pub fn solve_service(scenario: &Scenario, opts: &ServiceIlpOptions, ilp: &IlpOptions) -> Result<ServiceSolution> {
    let program = build_service_ilp(scenario, opts);
    let sol = if opts.relax { solve_lp_with(&program.lp, &ilp.simplex)? } else { solve_ilp(&program.lp, ilp)? };
    if sol.x.is_empty() {
        return Ok(ServiceSolution {
            status: sol.status,
            objective: f64::NAN,
            raw_objective: f64::NAN,
            integral: false,
            paths: None,
            nodes: sol.nodes,
        });
    }
    let integral = sol.is_integral(EXTRACT_TOL);
    let paths = if integral { Some(program.extract_paths(scenario, &sol, EXTRACT_TOL)?) } else { None };
    Ok(ServiceSolution {
        status: sol.status,
        objective: sol.objective,
        raw_objective: program.raw_objective(&sol.x),
        integral,
        paths,
        nodes: sol.nodes,
    })
}

/// A route chosen by the shortest-hop assignment baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRoute {
    pub path: LayeredPath,
    /// The baseline's own latency estimate (hop count over mean rate).
    pub estimate: f64,
    /// Service time of the route on the real link rates.
    pub service: f64,
}

/// Per-layer node assignment that prices a transfer between two nodes as
/// `hops · size / mean rate` along a shortest-hop path, solved exactly by
/// dynamic programming over the layer chain. Data then follows those
/// shortest-hop paths.
pub fn assignment_baseline_route(net: &PhysicalNetwork, job: &Job, costs: &CostOptions) -> Result<BaselineRoute> {
    let n = net.num_nodes();
    let model = &job.model;
    let layers = model.layers();
    let trees: Vec<_> = (0..n).map(|s| bfs_tree(net, s)).collect();
    let hop_path = |a: NodeId, b: NodeId| tree_path(net, &trees[a].1, b);
    let transfer = |a: NodeId, b: NodeId, bits: f64| -> f64 {
        if a == b || bits == 0.0 {
            return 0.0;
        }
        let links = hop_path(a, b);
        let mean = links.iter().map(|&e| net.link(e).mu_bps).sum::<f64>() / links.len() as f64;
        links.len() as f64 * bits / mean
    };
    let compute_nodes: Vec<NodeId> = net.compute_nodes().collect();
    if compute_nodes.is_empty() {
        return Err(Error::InfeasibleTopology { job: job.id });
    }

    // best[l][i]: cheapest estimate with layer l+1 placed on compute_nodes[i].
    let mut best = vec![vec![f64::INFINITY; compute_nodes.len()]; layers];
    let mut parent = vec![vec![0usize; compute_nodes.len()]; layers];
    for (i, &u) in compute_nodes.iter().enumerate() {
        let comp = costs.compute_load(net, model, 1, u) / net.node(u).mu_mm_s;
        best[0][i] = transfer(job.src, u, costs.data_bits(model, 0)) + comp;
    }
    for l in 1..layers {
        for (i, &u) in compute_nodes.iter().enumerate() {
            let comp = costs.compute_load(net, model, l + 1, u) / net.node(u).mu_mm_s;
            for (k, &v) in compute_nodes.iter().enumerate() {
                let c = best[l - 1][k] + transfer(v, u, costs.data_bits(model, l)) + comp;
                if c < best[l][i] {
                    best[l][i] = c;
                    parent[l][i] = k;
                }
            }
        }
    }
    let mut last = 0;
    let mut estimate = f64::INFINITY;
    for (i, &u) in compute_nodes.iter().enumerate() {
        let c = best[layers - 1][i] + transfer(u, job.dst, costs.data_bits(model, layers));
        if c < estimate {
            estimate = c;
            last = i;
        }
    }
    let mut placement = vec![0; layers];
    placement[layers - 1] = last;
    for l in (1..layers).rev() {
        placement[l - 1] = parent[l][placement[l]];
    }
    let compute: Vec<NodeId> = placement.iter().map(|&i| compute_nodes[i]).collect();
    let mut segments = Vec::with_capacity(layers + 1);
    segments.push(hop_path(job.src, compute[0]));
    for l in 1..layers {
        segments.push(hop_path(compute[l - 1], compute[l]));
    }
    segments.push(hop_path(compute[layers - 1], job.dst));

    let g = build_layered_graph(net, layers);
    let path = LayeredPath::from_physical(&g, job.src, &PhysicalRoute { compute, segments })?;
    let service = path_service(&g, model, &path, costs);
    Ok(BaselineRoute { path, estimate, service })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBounds {
    pub lb_max: f64,
    pub lb_avg: f64,
}

/// Lower bounds on the optimal makespan from per-job shortest service times.
/// The average spreads total service over nodes that can compute and links
/// that take time.
pub fn compute_lower_bounds(net: &PhysicalNetwork, shortest_service: &[f64], costs: &CostOptions) -> LowerBounds {
    let lb_max = shortest_service.iter().copied().fold(0.0, f64::max);
    let components = positive_components(net, costs);
    let lb_avg = shortest_service.iter().sum::<f64>() / components as f64;
    LowerBounds { lb_max, lb_avg }
}

/// `(nodes with positive compute rate) + (links with finite rate)`.
pub fn positive_components(net: &PhysicalNetwork, costs: &CostOptions) -> usize {
    let links = if costs.zero_delay { 0 } else { net.num_links() };
    net.compute_nodes().count() + links
}

/// Default tolerance for reading binary values.
pub const EXTRACT_TOL: f64 = INTEGRALITY_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Link, Node};
    use dnnsplit_linprog::solve_lp;

    fn node(id: usize, mu: f64, q: f64) -> Node {
        Node { id, mu_mm_s: mu, mem_kb: 1e9, cbar_mm: 1e9, q_mm: q, x_m: None, y_m: None }
    }

    fn one_layer(c: f64, d0_kb: f64, d1_kb: f64) -> DnnModel {
        DnnModel::new("T", vec![d0_kb, d1_kb], vec![c], vec![1.0]).unwrap()
    }

    #[test]
    fn isolated_node_with_and_without_backlog() {
        for (q, expected) in [(0.0, 1.0), (360.0, 2.0)] {
            let net = PhysicalNetwork::new(vec![node(0, 360.0, q)], vec![]).unwrap();
            let job = Job { id: 0, model: one_layer(360.0, 1.0, 1.0), src: 0, dst: 0 };
            let p = build_single_job_lp(&net, &job, &QueueSnapshot::initial(&net), &SingleJobOptions::default()).unwrap();
            let sol = solve_lp(&p.lp).unwrap();
            assert!((sol.objective - expected).abs() < 1e-12);
            assert_eq!(p.extract_path(&sol, EXTRACT_TOL).unwrap().edges, vec![p.graph.cross_edge(1, 0)]);
        }
    }

    #[test]
    fn offloading_beats_a_slow_source() {
        // 1 MB/s both ways; d0 = 2 MB, d1 = 1 MB, c = 4 MM.
        let mbps = 1000.0 * 8192.0;
        let links = vec![Link { from: 0, to: 1, mu_bps: mbps, q_bits: 0.0 }, Link { from: 1, to: 0, mu_bps: mbps, q_bits: 0.0 }];
        let net = PhysicalNetwork::new(vec![node(0, 0.5, 0.0), node(1, 4.0, 0.0)], links).unwrap();
        let job = Job { id: 0, model: one_layer(4.0, 2000.0, 1000.0), src: 0, dst: 0 };
        let p = build_single_job_lp(&net, &job, &QueueSnapshot::initial(&net), &SingleJobOptions::default()).unwrap();
        let sol = solve_lp(&p.lp).unwrap();
        assert!((sol.objective - 4.0).abs() < 1e-12);
        let route = p.extract_path(&sol, EXTRACT_TOL).unwrap().to_physical(&p.graph);
        assert_eq!(route.compute, vec![1]);
    }

    #[test]
    fn walk_strips_detached_and_attached_loops() {
        let mbps = 1e6;
        let links = vec![
            Link { from: 0, to: 1, mu_bps: mbps, q_bits: 0.0 },
            Link { from: 1, to: 0, mu_bps: mbps, q_bits: 0.0 },
            Link { from: 1, to: 2, mu_bps: mbps, q_bits: 0.0 },
            Link { from: 2, to: 1, mu_bps: mbps, q_bits: 0.0 },
        ];
        let net = PhysicalNetwork::new(vec![node(0, 1.0, 0.0), node(1, 1.0, 0.0), node(2, 1.0, 0.0)], links).unwrap();
        let g = build_layered_graph(&net, 1);
        let mut used = vec![false; g.num_edges()];
        // Path: compute at 0, then 0 -> 1 in layer 1; plus a 0<->1 loop in layer 0
        // and a detached 1<->2 loop in layer 1.
        let m = net.num_links();
        for e in [0, 1, g.cross_edge(1, 0), m, m + 2, m + 3] {
            used[e] = true;
        }
        let path = walk_unit_flow(&g, 0, 1, &used).unwrap();
        assert_eq!(path.edges, vec![g.cross_edge(1, 0), m]);
    }

    #[test]
    fn matrices_have_expected_shape() {
        let links = vec![Link { from: 0, to: 1, mu_bps: 1.0, q_bits: 0.0 }, Link { from: 1, to: 0, mu_bps: 1.0, q_bits: 0.0 }];
        let net = PhysicalNetwork::new(vec![node(0, 1.0, 0.0), node(1, 1.0, 0.0)], links).unwrap();
        let g = build_layered_graph(&net, 2);
        let a = node_flow_matrix(&g);
        assert_eq!(a.len(), 2 * 2 + 3 * 2);
        assert_eq!(a[0].len(), 3 * (2 + 2));
        let full = slack_augmented_matrix(&g);
        assert_eq!(full.len(), a.len() + 12);
        assert_eq!(full[0].len(), 12 + 4 + 12);
    }

    #[test]
    fn lower_bounds_count_positive_components() {
        let net = PhysicalNetwork::new(vec![node(0, 2.0, 0.0)], vec![]).unwrap();
        let lb = compute_lower_bounds(&net, &[1.0, 1.0, 1.0], &CostOptions::default());
        assert_eq!(lb, LowerBounds { lb_max: 1.0, lb_avg: 3.0 });
    }
}
