//! Evaluating a prioritized set of routes: the closed-form estimate used by
//! the policies, and an event-driven simulation of preemptive priority
//! service.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::formulations::CostOptions;
use crate::topology::{build_layered_graph, Component, LayeredEdge, LayeredGraph, LayeredPath, QueueSnapshot};
use crate::workload::{DnnModel, Scenario};

/// Completion estimate of one job routed along `path`, given the backlog
/// `ahead` of everything with higher priority. Link backlog is charged on
/// every traversal, node backlog once per distinct compute node.
pub fn path_completion(
    g: &LayeredGraph<'_>,
    model: &DnnModel,
    path: &LayeredPath,
    ahead: &QueueSnapshot,
    costs: &CostOptions,
) -> f64 {
    let net = g.network();
    let mut total = 0.0;
    let mut charged = vec![false; net.num_nodes()];
    for &e in &path.edges {
        total += costs.edge_service(g, model, e);
        match g.edge(e) {
            LayeredEdge::Intra { link, .. } => total += costs.link_wait(net, ahead, link),
            LayeredEdge::Cross { node, .. } => {
                if !std::mem::replace(&mut charged[node], true) {
                    total += costs.node_wait(net, ahead, node);
                }
            }
        }
    }
    total
}

/// Closed-form completion of each route, in the order given (highest
/// priority first). Each route is a job id and a path on that job's own
/// layered graph.
pub fn fictitious_completion(
    scenario: &Scenario,
    routes: &[(usize, &LayeredPath)],
    initial: &QueueSnapshot,
    costs: &CostOptions,
) -> Vec<f64> {
    let mut ahead = initial.clone();
    routes
        .iter()
        .map(|&(job, path)| {
            let model = &scenario.jobs[job].model;
            let g = build_layered_graph(&scenario.network, model.layers());
            let c = path_completion(&g, model, path, &ahead, costs);
            costs.add_path_load(&g, model, path, &mut ahead);
            c
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub component: Component,
    /// MM at nodes, bits on links.
    pub size: f64,
    pub duration: f64,
}

/// Tasks of one job in precedence order.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskChain {
    pub job: usize,
    pub tasks: Vec<Task>,
}

pub fn task_chain(g: &LayeredGraph<'_>, job: usize, model: &DnnModel, path: &LayeredPath, costs: &CostOptions) -> TaskChain {
    let tasks = path
        .edges
        .iter()
        .map(|&e| {
            let (component, size) = match g.edge(e) {
                LayeredEdge::Intra { layer, link } => (Component::Link(link), costs.data_bits(model, layer)),
                LayeredEdge::Cross { layer, node } => {
                    (Component::Node(node), costs.compute_load(g.network(), model, layer, node))
                }
            };
            Task { component, size, duration: costs.edge_service(g, model, e) }
        })
        .collect();
    TaskChain { job, tasks }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
/// Declared in the order events of one time step are logged: a task's
/// finish comes before the start of its successor.
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Finish,
    Preempt,
    Resume,
    Start,
}

impl EventKind {
    fn as_str(self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::Preempt => "preempt",
            EventKind::Resume => "resume",
            EventKind::Finish => "finish",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub time_s: f64,
    pub component: Component,
    /// `None` is background work that was queued before any job arrived.
    pub job: Option<usize>,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<SimEvent>,
}

impl EventLog {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", "component", "kind", "job", "event"])?;
        for ev in &self.events {
            let (kind, id) = match ev.component {
                Component::Node(u) => ("node", u),
                Component::Link(e) => ("link", e),
            };
            let job = ev.job.map_or_else(|| "bg".to_string(), |j| j.to_string());
            w.write_record([ev.time_s.to_string(), id.to_string(), kind.to_string(), job, ev.kind.as_str().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Events of one job (or of background work for `None`).
    pub fn for_job(&self, job: Option<usize>) -> Vec<SimEvent> {
        self.events.iter().filter(|e| e.job == job).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    /// Completion time per route, in the order given.
    pub completion: Vec<f64>,
    pub log: EventLog,
}

struct Entity {
    /// 0 for background work, `p + 1` for the route at position `p`.
    priority: usize,
    job: Option<usize>,
    tasks: Vec<Task>,
    current: usize,
    remaining: f64,
    started: bool,
    done_at: Option<f64>,
}

impl Entity {
    fn skip_empty(&mut self, now: f64) {
        while self.current < self.tasks.len() && self.tasks[self.current].duration <= 0.0 {
            self.current += 1;
        }
        match self.tasks.get(self.current) {
            Some(t) => {
                self.remaining = t.duration;
                self.started = false;
            }
            None => self.done_at = Some(now),
        }
    }

    fn component(&self) -> Option<Component> {
        self.tasks.get(self.current).filter(|_| self.done_at.is_none()).map(|t| t.component)
    }
}

struct Station {
    /// Entity indices present; served is the one with the smallest priority.
    present: Vec<usize>,
    served: Option<usize>,
    since: f64,
}

/// Runs every component as a single-server preemptive-resume priority queue.
/// Initial backlog is served first; routes are prioritized in the order
/// given and all released at time zero.
pub fn simulate_actual(
    scenario: &Scenario,
    routes: &[(usize, &LayeredPath)],
    initial: &QueueSnapshot,
    costs: &CostOptions,
) -> SimOutcome {
    let net = &scenario.network;
    let n = net.num_nodes();
    let slot = |c: Component| match c {
        Component::Node(u) => u,
        Component::Link(e) => n + e,
    };
    let mut stations: Vec<Station> =
        (0..n + net.num_links()).map(|_| Station { present: Vec::new(), served: None, since: 0.0 }).collect();

    let mut entities = Vec::new();
    for u in 0..n {
        let mu = net.node(u).mu_mm_s;
        if mu > 0.0 && initial.node_mm[u] > 0.0 {
            let task = Task { component: Component::Node(u), size: initial.node_mm[u], duration: initial.node_mm[u] / mu };
            entities.push(background(task));
        }
    }
    if !costs.zero_delay {
        for e in 0..net.num_links() {
            if initial.link_bits[e] > 0.0 {
                let bits = initial.link_bits[e];
                let task = Task { component: Component::Link(e), size: bits, duration: bits / net.link(e).mu_bps };
                entities.push(background(task));
            }
        }
    }
    let first_job = entities.len();
    for (p, &(job, path)) in routes.iter().enumerate() {
        let model = &scenario.jobs[job].model;
        let g = build_layered_graph(net, model.layers());
        let chain = task_chain(&g, job, model, path, costs);
        entities.push(Entity {
            priority: p + 1,
            job: Some(job),
            tasks: chain.tasks,
            current: 0,
            remaining: 0.0,
            started: false,
            done_at: None,
        });
    }
    for (i, ent) in entities.iter_mut().enumerate() {
        ent.skip_empty(0.0);
        if let Some(c) = ent.component() {
            stations[slot(c)].present.push(i);
        }
    }

    let mut log = EventLog::default();
    let mut now = 0.0;
    let mut step: Vec<(usize, SimEvent)> = Vec::new();
    loop {
        for st in stations.iter_mut() {
            let best = st.present.iter().copied().min_by_key(|&i| entities[i].priority);
            if best == st.served {
                continue;
            }
            if let Some(old) = st.served {
                let ent = &mut entities[old];
                ent.remaining -= now - st.since;
                step.push((ent.priority, event(now, ent, EventKind::Preempt)));
            }
            if let Some(new) = best {
                let ent = &mut entities[new];
                let kind = if ent.started { EventKind::Resume } else { EventKind::Start };
                ent.started = true;
                step.push((ent.priority, event(now, ent, kind)));
            }
            st.served = best;
            st.since = now;
        }
        flush(&mut step, &mut log);

        let next = stations
            .iter()
            .filter_map(|st| st.served.map(|i| st.since + entities[i].remaining))
            .fold(f64::INFINITY, f64::min);
        if !next.is_finite() {
            break;
        }
        now = next;
        for s in 0..stations.len() {
            let Some(i) = stations[s].served else { continue };
            if stations[s].since + entities[i].remaining > now {
                continue;
            }
            let ent = &mut entities[i];
            step.push((ent.priority, event(now, ent, EventKind::Finish)));
            ent.current += 1;
            ent.skip_empty(now);
            let st = &mut stations[s];
            st.present.retain(|&k| k != i);
            st.served = None;
            if let Some(c) = entities[i].component() {
                stations[slot(c)].present.push(i);
            }
        }
    }

    let completion = entities[first_job..].iter().map(|e| e.done_at.expect("every chain finishes")).collect();
    SimOutcome { completion, log }
}

fn background(task: Task) -> Entity {
    Entity { priority: 0, job: None, tasks: vec![task], current: 0, remaining: 0.0, started: false, done_at: None }
}

fn event(time_s: f64, ent: &Entity, kind: EventKind) -> SimEvent {
    SimEvent { time_s, component: ent.tasks[ent.current].component, job: ent.job, kind }
}

fn flush(step: &mut Vec<(usize, SimEvent)>, log: &mut EventLog) {
    step.sort_by(|a, b| {
        (a.0, a.1.component, a.1.job, a.1.kind)
            .partial_cmp(&(b.0, b.1.component, b.1.job, b.1.kind))
            .expect("keys are totally ordered")
    });
    log.events.extend(step.drain(..).map(|(_, e)| e));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Link, Node, PhysicalNetwork};
    use crate::workload::{Job, ScenarioParams};

    fn chain_scenario(q0: f64) -> Scenario {
        // Source 0 cannot compute; node 1 computes at 10 MM/s. 1 MB/s links.
        let nodes = vec![
            Node { id: 0, mu_mm_s: 0.0, mem_kb: 1e9, cbar_mm: 1e9, q_mm: 0.0, x_m: None, y_m: None },
            Node { id: 1, mu_mm_s: 10.0, mem_kb: 1e9, cbar_mm: 1e9, q_mm: q0, x_m: None, y_m: None },
        ];
        let rate = 8_192_000.0;
        let links = vec![Link { from: 0, to: 1, mu_bps: rate, q_bits: 0.0 }, Link { from: 1, to: 0, mu_bps: rate, q_bits: 0.0 }];
        let net = PhysicalNetwork::new(nodes, links).unwrap();
        let model = DnnModel::new("C", vec![1000.0, 1.0], vec![10.0], vec![1.0]).unwrap();
        let jobs = (0..2).map(|id| Job { id, model: model.clone(), src: 0, dst: 1 }).collect();
        Scenario::new(ScenarioParams { n: 2, jobs: 2, gamma: 1.0, seed: 0 }, net, jobs).unwrap()
    }

    fn routes(s: &Scenario) -> Vec<LayeredPath> {
        let g = build_layered_graph(&s.network, 1);
        (0..2).map(|_| LayeredPath::new(&g, 0, 1, vec![0, g.cross_edge(1, 1)]).unwrap()).collect()
    }

    #[test]
    fn shared_chain_low_priority_gains_from_pipelining() {
        let s = chain_scenario(0.0);
        let paths = routes(&s);
        let r: Vec<_> = paths.iter().enumerate().collect();
        let q = QueueSnapshot::initial(&s.network);
        let costs = CostOptions::default();
        // Fictitious: job 1 waits for job 0's whole transfer and compute: 1 + 1 + 1 + 1.
        assert_eq!(fictitious_completion(&s, &r, &q, &costs), vec![2.0, 4.0]);
        // Actual: job 1's transfer ends at 2, job 0's compute ended at 2, so 3.
        let out = simulate_actual(&s, &r, &q, &costs);
        assert_eq!(out.completion, vec![2.0, 3.0]);
    }

    #[test]
    fn background_preempts_nothing_but_delays() {
        let s = chain_scenario(15.0);
        let paths = routes(&s);
        let r = vec![(0, &paths[0])];
        let q = QueueSnapshot::initial(&s.network);
        let out = simulate_actual(&s, &r, &q, &CostOptions::default());
        // Backlog of 1.5 s at node 1; the job arrives at 1 and starts at 1.5.
        assert_eq!(out.completion, vec![2.5]);
        let csv = out.log.to_csv_string();
        assert!(csv.starts_with("time_s,component,kind,job,event\n0,1,node,bg,start\n"));
    }

    #[test]
    fn higher_priority_arrival_preempts() {
        // Job 1 sits at node 1 with its source there; job 0 arrives after its transfer.
        let mut s = chain_scenario(0.0);
        s.jobs[1].src = 1;
        let g = build_layered_graph(&s.network, 1);
        let p0 = LayeredPath::new(&g, 0, 1, vec![0, g.cross_edge(1, 1)]).unwrap();
        let model = DnnModel::new("B", vec![1.0, 1.0], vec![30.0], vec![1.0]).unwrap();
        s.jobs[1].model = model;
        let p1 = LayeredPath::new(&g, 1, 1, vec![g.cross_edge(1, 1)]).unwrap();
        let out = simulate_actual(&s, &[(0, &p0), (1, &p1)], &QueueSnapshot::empty(&s.network), &CostOptions::default());
        assert_eq!(out.completion, vec![2.0, 4.0]);
        let kinds: Vec<_> = out.log.for_job(Some(1)).iter().map(|e| (e.time_s, e.kind)).collect();
        assert_eq!(
            kinds,
            vec![(0.0, EventKind::Start), (1.0, EventKind::Preempt), (2.0, EventKind::Resume), (4.0, EventKind::Finish)]
        );
    }
}
