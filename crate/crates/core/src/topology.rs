//! Physical network, its layered expansion, and graph utilities.
//!
//! A layered graph with `L` layers stacks `L+1` copies of the physical
//! network. Copy `l` carries the output of DNN layer `l` (copy 0 carries the
//! raw input) and the cross edge `u_{l-1} -> u_l` means "layer `l` is
//! computed at `u`". Edge ids: intra edges of layer `l` come first as
//! `l·|E_P| + link`, followed by cross edges `(L+1)·|E_P| + (l-1)·|V_P| + node`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type LinkId = usize;

/// Maximum number of connectivity resampling attempts.
pub const GENERATION_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    /// Compute rate in MM/s; zero means the node cannot compute.
    pub mu_mm_s: f64,
    pub mem_kb: f64,
    pub cbar_mm: f64,
    /// Initial compute backlog in MM.
    pub q_mm: f64,
    pub x_m: Option<f64>,
    pub y_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub mu_bps: f64,
    /// Initial transmission backlog in bits.
    pub q_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NetworkFile {
    nodes: Vec<Node>,
    links: Vec<Link>,
}

/// Directed network of compute nodes and links. Construction validates ids,
/// rates, queues and undirected connectivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkFile", into = "NetworkFile")]
pub struct PhysicalNetwork {
    nodes: Vec<Node>,
    links: Vec<Link>,
    out_links: Vec<Vec<LinkId>>,
    in_links: Vec<Vec<LinkId>>,
}

impl TryFrom<NetworkFile> for PhysicalNetwork {
    type Error = Error;
    fn try_from(f: NetworkFile) -> Result<Self> {
        PhysicalNetwork::new(f.nodes, f.links)
    }
}

impl From<PhysicalNetwork> for NetworkFile {
    fn from(n: PhysicalNetwork) -> Self {
        NetworkFile { nodes: n.nodes, links: n.links }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidNetwork(msg.into())
}

impl PhysicalNetwork {
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(invalid("no nodes"));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(invalid(format!("node at position {i} has id {}", node.id)));
            }
            let values = [node.mu_mm_s, node.mem_kb, node.cbar_mm, node.q_mm];
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(invalid(format!("node {i} has a negative or non-finite parameter")));
            }
        }
        let mut out_links = vec![Vec::new(); n];
        let mut in_links = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for (e, link) in links.iter().enumerate() {
            if link.from >= n || link.to >= n {
                return Err(invalid(format!("link {e} references a missing node")));
            }
            if link.from == link.to {
                return Err(invalid(format!("link {e} is a self-loop")));
            }
            if !(link.mu_bps.is_finite() && link.mu_bps > 0.0) {
                return Err(invalid(format!("link {e} needs a positive finite rate")));
            }
            if !(link.q_bits.is_finite() && link.q_bits >= 0.0) {
                return Err(invalid(format!("link {e} has a negative queue")));
            }
            if !seen.insert((link.from, link.to)) {
                return Err(invalid(format!("duplicate link {} -> {}", link.from, link.to)));
            }
            out_links[link.from].push(e);
            in_links[link.to].push(e);
        }
        let net = PhysicalNetwork { nodes, links, out_links, in_links };
        if !net.is_connected() {
            return Err(invalid("undirected view is disconnected"));
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, u: NodeId) -> &Node {
        &self.nodes[u]
    }

    pub fn link(&self, e: LinkId) -> &Link {
        &self.links[e]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn out_links(&self, u: NodeId) -> &[LinkId] {
        &self.out_links[u]
    }

    pub fn in_links(&self, u: NodeId) -> &[LinkId] {
        &self.in_links[u]
    }

    pub fn find_link(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.out_links[from].iter().copied().find(|&e| self.links[e].to == to)
    }

    /// Nodes with a positive compute rate.
    pub fn compute_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| n.mu_mm_s > 0.0).map(|n| n.id)
    }

    /// Updates capacities and budgets in place; the topology is unchanged.
    pub fn set_node_params(&mut self, u: NodeId, mu_mm_s: f64, mem_kb: f64, cbar_mm: f64) {
        let node = &mut self.nodes[u];
        node.mu_mm_s = mu_mm_s;
        node.mem_kb = mem_kb;
        node.cbar_mm = cbar_mm;
    }

    pub fn set_link_rate(&mut self, e: LinkId, mu_bps: f64) {
        assert!(mu_bps > 0.0 && mu_bps.is_finite());
        self.links[e].mu_bps = mu_bps;
    }

    pub fn set_initial_queues(&mut self, queues: &QueueSnapshot) {
        for (node, &q) in self.nodes.iter_mut().zip(&queues.node_mm) {
            node.q_mm = q;
        }
        for (link, &q) in self.links.iter_mut().zip(&queues.link_bits) {
            link.q_bits = q;
        }
    }

    /// Undirected neighbour lists without duplicates, in ascending order.
    pub fn undirected_neighbors(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for l in &self.links {
            adj[l.from].push(l.to);
            adj[l.to].push(l.from);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    fn is_connected(&self) -> bool {
        let adj = self.undirected_neighbors();
        let mut seen = vec![false; adj.len()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == adj.len()
    }
}

/// Backlog per physical component: MM at nodes, bits on links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSnapshot {
    pub node_mm: Vec<f64>,
    pub link_bits: Vec<f64>,
}

impl QueueSnapshot {
    pub fn empty(net: &PhysicalNetwork) -> Self {
        QueueSnapshot { node_mm: vec![0.0; net.num_nodes()], link_bits: vec![0.0; net.num_links()] }
    }

    /// The backlog recorded in the network description.
    pub fn initial(net: &PhysicalNetwork) -> Self {
        QueueSnapshot {
            node_mm: net.nodes.iter().map(|n| n.q_mm).collect(),
            link_bits: net.links.iter().map(|l| l.q_bits).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LayeredVertex {
    pub node: NodeId,
    pub layer: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayeredEdge {
    /// Output of `layer` sent over `link`.
    Intra { layer: usize, link: LinkId },
    /// Layer `layer` (1-based) computed at `node`.
    Cross { layer: usize, node: NodeId },
}

/// Physical resource a layered edge consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Node(NodeId),
    Link(LinkId),
}

/// `L+1` copies of a physical network joined by cross-layer edges. Holds a
/// reference to the network, so capacities always read through.
#[derive(Debug, Clone, Copy)]
pub struct LayeredGraph<'a> {
    net: &'a PhysicalNetwork,
    layers: usize,
}

pub fn build_layered_graph(net: &PhysicalNetwork, layers: usize) -> LayeredGraph<'_> {
    LayeredGraph { net, layers }
}

impl<'a> LayeredGraph<'a> {
    pub fn network(&self) -> &'a PhysicalNetwork {
        self.net
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn num_vertices(&self) -> usize {
        (self.layers + 1) * self.net.num_nodes()
    }

    pub fn num_edges(&self) -> usize {
        (self.layers + 1) * self.net.num_links() + self.layers * self.net.num_nodes()
    }

    pub fn num_intra_edges(&self) -> usize {
        (self.layers + 1) * self.net.num_links()
    }

    pub fn vertex_index(&self, v: LayeredVertex) -> usize {
        v.layer * self.net.num_nodes() + v.node
    }

    pub fn vertex(&self, index: usize) -> LayeredVertex {
        let n = self.net.num_nodes();
        LayeredVertex { node: index % n, layer: index / n }
    }

    pub fn edge(&self, id: usize) -> LayeredEdge {
        let intra = self.num_intra_edges();
        if id < intra {
            let m = self.net.num_links();
            LayeredEdge::Intra { layer: id / m, link: id % m }
        } else {
            let n = self.net.num_nodes();
            let k = id - intra;
            LayeredEdge::Cross { layer: k / n + 1, node: k % n }
        }
    }

    pub fn edge_id(&self, edge: LayeredEdge) -> usize {
        match edge {
            LayeredEdge::Intra { layer, link } => layer * self.net.num_links() + link,
            LayeredEdge::Cross { layer, node } => self.num_intra_edges() + (layer - 1) * self.net.num_nodes() + node,
        }
    }

    pub fn cross_edge(&self, layer: usize, node: NodeId) -> usize {
        self.edge_id(LayeredEdge::Cross { layer, node })
    }

    pub fn tail(&self, id: usize) -> LayeredVertex {
        match self.edge(id) {
            LayeredEdge::Intra { layer, link } => LayeredVertex { node: self.net.link(link).from, layer },
            LayeredEdge::Cross { layer, node } => LayeredVertex { node, layer: layer - 1 },
        }
    }

    pub fn head(&self, id: usize) -> LayeredVertex {
        match self.edge(id) {
            LayeredEdge::Intra { layer, link } => LayeredVertex { node: self.net.link(link).to, layer },
            LayeredEdge::Cross { layer, node } => LayeredVertex { node, layer },
        }
    }

    pub fn component(&self, id: usize) -> Component {
        match self.edge(id) {
            LayeredEdge::Intra { link, .. } => Component::Link(link),
            LayeredEdge::Cross { node, .. } => Component::Node(node),
        }
    }

    /// Rate of the underlying component: bit/s for intra edges, MM/s for cross edges.
    pub fn capacity(&self, id: usize) -> f64 {
        match self.component(id) {
            Component::Link(e) => self.net.link(e).mu_bps,
            Component::Node(u) => self.net.node(u).mu_mm_s,
        }
    }

    /// Backlog of the underlying component in `queues`.
    pub fn queue(&self, id: usize, queues: &QueueSnapshot) -> f64 {
        match self.component(id) {
            Component::Link(e) => queues.link_bits[e],
            Component::Node(u) => queues.node_mm[u],
        }
    }

    /// Edge ids leaving `v`, in ascending order.
    pub fn out_edges(&self, v: LayeredVertex) -> impl Iterator<Item = usize> + '_ {
        let m = self.net.num_links();
        let intra = self.net.out_links(v.node).iter().map(move |&e| v.layer * m + e);
        let cross = (v.layer < self.layers).then(|| self.cross_edge(v.layer + 1, v.node));
        intra.chain(cross)
    }

    pub fn in_edges(&self, v: LayeredVertex) -> impl Iterator<Item = usize> + '_ {
        let m = self.net.num_links();
        let cross = (v.layer > 0).then(|| self.cross_edge(v.layer, v.node));
        cross.into_iter().chain(self.net.in_links(v.node).iter().map(move |&e| v.layer * m + e))
    }
}

/// Edge sequence from `source` in copy 0 to the destination in copy `layers`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayeredPath {
    pub source: NodeId,
    pub layers: usize,
    pub edges: Vec<usize>,
}

/// Physical reading of a layered path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalRoute {
    /// `compute[l-1]` runs layer `l`.
    pub compute: Vec<NodeId>,
    /// `segments[l]` carries the output of layer `l` (the input for `l = 0`).
    pub segments: Vec<Vec<LinkId>>,
}

impl LayeredPath {
    /// Validates contiguity and the one-cross-edge-per-layer rule, ending at `dest`.
    pub fn new(graph: &LayeredGraph<'_>, source: NodeId, dest: NodeId, edges: Vec<usize>) -> Result<Self> {
        let path = LayeredPath { source, layers: graph.layers(), edges };
        path.check(graph, dest)?;
        Ok(path)
    }

    fn check(&self, graph: &LayeredGraph<'_>, dest: NodeId) -> Result<()> {
        if graph.layers() != self.layers {
            return Err(Error::MalformedPath(format!("path has {} layers, graph {}", self.layers, graph.layers())));
        }
        let mut at = LayeredVertex { node: self.source, layer: 0 };
        for &e in &self.edges {
            if e >= graph.num_edges() {
                return Err(Error::MalformedPath(format!("edge {e} out of range")));
            }
            if graph.tail(e) != at {
                return Err(Error::MalformedPath(format!("edge {e} does not start at {at:?}")));
            }
            at = graph.head(e);
        }
        let end = LayeredVertex { node: dest, layer: self.layers };
        if at != end {
            return Err(Error::MalformedPath(format!("path ends at {at:?}, expected {end:?}")));
        }
        Ok(())
    }

    pub fn destination(&self, graph: &LayeredGraph<'_>) -> NodeId {
        self.edges.last().map_or(self.source, |&e| graph.head(e).node)
    }

    pub fn to_physical(&self, graph: &LayeredGraph<'_>) -> PhysicalRoute {
        let mut compute = Vec::with_capacity(self.layers);
        let mut segments = vec![Vec::new(); self.layers + 1];
        for &e in &self.edges {
            match graph.edge(e) {
                LayeredEdge::Intra { layer, link } => segments[layer].push(link),
                LayeredEdge::Cross { node, .. } => compute.push(node),
            }
        }
        PhysicalRoute { compute, segments }
    }

    /// Rebuilds the layered path from its physical reading.
    pub fn from_physical(graph: &LayeredGraph<'_>, source: NodeId, route: &PhysicalRoute) -> Result<Self> {
        if route.compute.len() != graph.layers() || route.segments.len() != graph.layers() + 1 {
            return Err(Error::MalformedPath("route does not match layer count".into()));
        }
        let mut edges = Vec::new();
        let mut at = source;
        for l in 0..=graph.layers() {
            for &link in &route.segments[l] {
                if link >= graph.network().num_links() || graph.network().link(link).from != at {
                    return Err(Error::MalformedPath(format!("segment {l} is not contiguous")));
                }
                at = graph.network().link(link).to;
                edges.push(graph.edge_id(LayeredEdge::Intra { layer: l, link }));
            }
            if l < graph.layers() {
                if route.compute[l] != at {
                    return Err(Error::MalformedPath(format!("layer {} computed away from the data", l + 1)));
                }
                edges.push(graph.cross_edge(l + 1, at));
            }
        }
        Ok(LayeredPath { source, layers: graph.layers(), edges })
    }

    /// Physical nodes in visiting order; consecutive layers at one node count once.
    pub fn physical_visits(&self, graph: &LayeredGraph<'_>) -> Vec<NodeId> {
        let mut visits = vec![self.source];
        for &e in &self.edges {
            if let LayeredEdge::Intra { link, .. } = graph.edge(e) {
                visits.push(graph.network().link(link).to);
            }
        }
        visits
    }

    /// True when no physical node is visited twice. A path that ends where it
    /// started (source equal to destination) may revisit the source once at
    /// the very end.
    pub fn is_simple_in_physical(&self, graph: &LayeredGraph<'_>) -> bool {
        let mut visits = self.physical_visits(graph);
        if visits.len() > 1 && visits.first() == visits.last() {
            visits.pop();
        }
        let mut seen = vec![false; graph.network().num_nodes()];
        visits.into_iter().all(|u| !std::mem::replace(&mut seen[u], true))
    }

    /// True when no layered vertex repeats.
    pub fn is_simple_in_layers(&self, graph: &LayeredGraph<'_>) -> bool {
        let mut seen = vec![false; graph.num_vertices()];
        seen[graph.vertex_index(LayeredVertex { node: self.source, layer: 0 })] = true;
        self.edges.iter().all(|&e| !std::mem::replace(&mut seen[graph.vertex_index(graph.head(e))], true))
    }
}

/// Uniform points on `[0, side]²`, linked in both directions when within
/// `range`; resampled until connected. Nodes carry no compute, links unit
/// rates and queues are empty; callers assign capacities afterwards.
pub fn generate_random_geometric(n: usize, side: f64, range: f64, seed: u64) -> Result<PhysicalNetwork> {
    assert!(n >= 2, "a geometric graph needs at least two nodes");
    for attempt in 0..GENERATION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..=side), rng.gen_range(0.0..=side))).collect();
        let mut links = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let (dx, dy) = (pos[u].0 - pos[v].0, pos[u].1 - pos[v].1);
                if dx.hypot(dy) <= range {
                    links.push(Link { from: u, to: v, mu_bps: 1.0, q_bits: 0.0 });
                    links.push(Link { from: v, to: u, mu_bps: 1.0, q_bits: 0.0 });
                }
            }
        }
        let nodes = pos
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| Node { id, mu_mm_s: 0.0, mem_kb: 0.0, cbar_mm: 0.0, q_mm: 0.0, x_m: Some(x), y_m: Some(y) })
            .collect();
        match PhysicalNetwork::new(nodes, links) {
            Ok(net) => return Ok(net),
            Err(Error::InvalidNetwork(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed { attempts: GENERATION_ATTEMPTS })
}

/// Minimum number of undirected edges whose removal disconnects the network.
pub fn edge_connectivity(net: &PhysicalNetwork) -> usize {
    let n = net.num_nodes();
    if n < 2 {
        return 0;
    }
    let adj = net.undirected_neighbors();
    (1..n).map(|t| unit_max_flow(&adj, 0, t)).min().unwrap_or(0)
}

/// Edmonds–Karp with unit capacity in each direction of every undirected edge.
fn unit_max_flow(adj: &[Vec<NodeId>], s: NodeId, t: NodeId) -> usize {
    let n = adj.len();
    let mut residual = vec![vec![0i32; n]; n];
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            residual[u][v] = 1;
        }
    }
    let mut flow = 0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for v in 0..n {
                if residual[u][v] > 0 && parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return flow;
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            residual[u][v] -= 1;
            residual[v][u] += 1;
            v = u;
        }
        flow += 1;
    }
}

/// Largest network for which the longest simple path is found exactly.
pub const EXACT_LONGEST_PATH_NODES: usize = 15;

/// `(shortest hop count, longest simple-path hop count)` from `s` to `t`
/// over directed links. The longest count falls back to `|V_P| - 1` beyond
/// [`EXACT_LONGEST_PATH_NODES`] nodes.
pub fn hop_path_extremes(net: &PhysicalNetwork, s: NodeId, t: NodeId) -> (usize, usize) {
    if s == t {
        return (0, 0);
    }
    let shortest = bfs_hops(net, s)[t].expect("network is connected");
    let n = net.num_nodes();
    if n > EXACT_LONGEST_PATH_NODES {
        return (shortest, n - 1);
    }
    let mut on_path = vec![false; n];
    on_path[s] = true;
    let mut best = 0;
    longest_dfs(net, s, t, 0, &mut on_path, &mut best);
    (shortest, best)
}

fn longest_dfs(net: &PhysicalNetwork, u: NodeId, t: NodeId, depth: usize, on_path: &mut [bool], best: &mut usize) {
    if *best == net.num_nodes() - 1 {
        return;
    }
    for &e in net.out_links(u) {
        let v = net.link(e).to;
        if on_path[v] {
            continue;
        }
        if v == t {
            *best = (*best).max(depth + 1);
            continue;
        }
        on_path[v] = true;
        longest_dfs(net, v, t, depth + 1, on_path, best);
        on_path[v] = false;
    }
}

/// Hop distances from `s` along directed links.
pub fn bfs_hops(net: &PhysicalNetwork, s: NodeId) -> Vec<Option<usize>> {
    bfs_tree(net, s).0
}

/// Hop distances and the lowest-id-first BFS parent link of every node.
pub fn bfs_tree(net: &PhysicalNetwork, s: NodeId) -> (Vec<Option<usize>>, Vec<Option<LinkId>>) {
    let n = net.num_nodes();
    let mut dist = vec![None; n];
    let mut parent = vec![None; n];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let mut outs: Vec<LinkId> = net.out_links(u).to_vec();
        outs.sort_by_key(|&e| net.link(e).to);
        for e in outs {
            let v = net.link(e).to;
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                parent[v] = Some(e);
                queue.push_back(v);
            }
        }
    }
    (dist, parent)
}

/// Links of the BFS-tree path from the tree root to `t`.
pub fn tree_path(net: &PhysicalNetwork, parent: &[Option<LinkId>], t: NodeId) -> Vec<LinkId> {
    let mut links = Vec::new();
    let mut v = t;
    while let Some(e) = parent[v] {
        links.push(e);
        v = net.link(e).from;
    }
    links.reverse();
    links
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn undirected(n: usize, pairs: &[(usize, usize)]) -> PhysicalNetwork {
        let nodes = (0..n)
            .map(|id| Node { id, mu_mm_s: 1.0, mem_kb: 0.0, cbar_mm: 0.0, q_mm: 0.0, x_m: None, y_m: None })
            .collect();
        let links = pairs
            .iter()
            .flat_map(|&(u, v)| {
                [
                    Link { from: u, to: v, mu_bps: 1.0, q_bits: 0.0 },
                    Link { from: v, to: u, mu_bps: 1.0, q_bits: 0.0 },
                ]
            })
            .collect();
        PhysicalNetwork::new(nodes, links).unwrap()
    }

    #[test]
    fn layered_counts() {
        let net = undirected(2, &[(0, 1)]);
        let g = build_layered_graph(&net, 1);
        assert_eq!((g.num_vertices(), g.num_edges()), (4, 6));
        let g0 = build_layered_graph(&net, 0);
        assert_eq!((g0.num_vertices(), g0.num_edges()), (2, 2));
    }

    #[test]
    fn edge_ids_round_trip() {
        let net = undirected(3, &[(0, 1), (1, 2)]);
        let g = build_layered_graph(&net, 2);
        for id in 0..g.num_edges() {
            assert_eq!(g.edge_id(g.edge(id)), id);
            let (t, h) = (g.tail(id), g.head(id));
            assert!(g.out_edges(t).any(|e| e == id));
            assert!(g.in_edges(h).any(|e| e == id));
        }
    }

    #[test]
    fn map_round_trip_and_simplicity() {
        let net = undirected(2, &[(0, 1)]);
        let g = build_layered_graph(&net, 1);
        // s_0 -> u_0 -> u_1 -> s_1 with s = 0, u = 1.
        let edges = vec![0, g.cross_edge(1, 1), net.num_links() + 1];
        let path = LayeredPath::new(&g, 0, 0, edges).unwrap();
        let route = path.to_physical(&g);
        assert_eq!(route.compute, vec![1]);
        assert_eq!(route.segments, vec![vec![0], vec![1]]);
        assert_eq!(LayeredPath::from_physical(&g, 0, &route).unwrap(), path);
        assert!(path.is_simple_in_physical(&g));

        let local = LayeredPath::new(&g, 0, 0, vec![g.cross_edge(1, 0)]).unwrap();
        assert!(local.is_simple_in_physical(&g));
        assert!(LayeredPath::new(&g, 0, 1, vec![g.cross_edge(1, 0)]).is_err());
    }

    #[test]
    fn revisit_across_layers_is_not_simple() {
        let net = undirected(3, &[(0, 1), (1, 2)]);
        let g = build_layered_graph(&net, 1);
        let l01 = net.find_link(0, 1).unwrap();
        let l12 = net.find_link(1, 2).unwrap();
        let l21 = net.find_link(2, 1).unwrap();
        let m = net.num_links();
        // 0 -> 1 -> 2 in layer 0, compute at 2, then back to 1 in layer 1.
        let edges = vec![l01, l12, g.cross_edge(1, 2), m + l21];
        let path = LayeredPath::new(&g, 0, 1, edges).unwrap();
        assert!(!path.is_simple_in_physical(&g));
        assert!(path.is_simple_in_layers(&g));
    }

    #[test]
    fn connectivity_and_hops() {
        let tri = undirected(3, &[(0, 1), (1, 2), (0, 2)]);
        let path = undirected(3, &[(0, 1), (1, 2)]);
        let k4 = undirected(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(edge_connectivity(&tri), 2);
        assert_eq!(edge_connectivity(&path), 1);
        assert_eq!(edge_connectivity(&k4), 3);
        assert_eq!(hop_path_extremes(&path, 0, 2), (2, 2));
        assert_eq!(hop_path_extremes(&tri, 0, 1), (1, 2));
        assert_eq!(hop_path_extremes(&k4, 0, 3), (1, 3));
    }

    #[test]
    fn rejects_bad_networks() {
        let node = |id| Node { id, mu_mm_s: 1.0, mem_kb: 0.0, cbar_mm: 0.0, q_mm: 0.0, x_m: None, y_m: None };
        assert!(PhysicalNetwork::new(vec![node(0), node(1)], vec![]).is_err());
        let self_loop = Link { from: 0, to: 0, mu_bps: 1.0, q_bits: 0.0 };
        assert!(PhysicalNetwork::new(vec![node(0)], vec![self_loop]).is_err());
        assert!(PhysicalNetwork::new(vec![node(1)], vec![]).is_err());
    }

    #[test]
    fn geometric_pair_within_range_is_linked() {
        let net = generate_random_geometric(2, 1.0, 7.5, 9).unwrap();
        assert_eq!(net.num_links(), 2);
    }
}
