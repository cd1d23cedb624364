//! Cross-checks the pruned exhaustive search against plain enumeration.

use dnnsplit_core::formulations::CostOptions;
use dnnsplit_core::policies::{brute_force_opt, greedy_route, PolicyContext, System};
use dnnsplit_core::sim::{fictitious_completion, simulate_actual};
use dnnsplit_core::topology::{build_layered_graph, LayeredGraph, LayeredPath, LayeredVertex, QueueSnapshot};
use dnnsplit_core::verify::tiny_scenario;
use dnnsplit_core::workload::Scenario;

/// All paths that never revisit a layered vertex, by plain DFS.
fn all_paths(g: &LayeredGraph<'_>, src: usize, dst: usize, usable: &dyn Fn(usize) -> bool) -> Vec<LayeredPath> {
    fn go(
        g: &LayeredGraph<'_>,
        at: LayeredVertex,
        end: LayeredVertex,
        seen: &mut Vec<LayeredVertex>,
        edges: &mut Vec<usize>,
        usable: &dyn Fn(usize) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        if at == end {
            out.push(edges.clone());
            return;
        }
        for e in g.out_edges(at).collect::<Vec<_>>() {
            let h = g.head(e);
            if !usable(e) || seen.contains(&h) {
                continue;
            }
            seen.push(h);
            edges.push(e);
            go(g, h, end, seen, edges, usable, out);
            edges.pop();
            seen.pop();
        }
    }
    let start = LayeredVertex { node: src, layer: 0 };
    let end = LayeredVertex { node: dst, layer: g.layers() };
    let mut out = Vec::new();
    go(g, start, end, &mut vec![start], &mut Vec::new(), usable, &mut out);
    out.into_iter().map(|edges| LayeredPath::new(g, src, dst, edges).unwrap()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn naive_opt(s: &Scenario, system: System) -> f64 {
    let net = &s.network;
    let paths: Vec<Vec<LayeredPath>> = s
        .jobs
        .iter()
        .map(|j| {
            let g = build_layered_graph(net, j.model.layers());
            let usable = |e: usize| match g.edge(e) {
                dnnsplit_core::topology::LayeredEdge::Cross { node, .. } => net.node(node).mu_mm_s > 0.0,
                _ => true,
            };
            all_paths(&g, j.src, j.dst, &usable)
        })
        .collect();
    let q = QueueSnapshot::initial(net);
    let costs = CostOptions::default();
    let mut best = f64::INFINITY;
    for order in permutations(s.jobs.len()) {
        let mut idx = vec![0usize; order.len()];
        loop {
            let routes: Vec<(usize, &LayeredPath)> = order.iter().zip(&idx).map(|(&j, &k)| (j, &paths[j][k])).collect();
            let c = match system {
                System::Fictitious => fictitious_completion(s, &routes, &q, &costs),
                System::Actual => simulate_actual(s, &routes, &q, &costs).completion,
            };
            best = best.min(c.into_iter().fold(0.0, f64::max));
            let mut p = 0;
            while p < idx.len() {
                idx[p] += 1;
                if idx[p] < paths[order[p]].len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
            if p == idx.len() {
                break;
            }
        }
    }
    best
}

fn small_enough(s: &Scenario) -> bool {
    s.network.num_links() <= 6 && s.jobs.iter().all(|j| j.model.layers() <= 2)
}

#[test]
fn pruned_search_matches_plain_enumeration() {
    let (mut checked, mut improved) = (0, 0);
    for seed in 0..400 {
        let s = tiny_scenario(seed, false).unwrap();
        if !small_enough(&s) {
            continue;
        }
        for system in [System::Fictitious, System::Actual] {
            let ctx = PolicyContext { opt_system: system, ..Default::default() };
            let plan = brute_force_opt(&s, &ctx).unwrap();
            let value = match system {
                System::Fictitious => plan.c_max_fict(),
                System::Actual => plan.c_max_actual().unwrap(),
            };
            let naive = naive_opt(&s, system);
            if system == System::Fictitious && naive < greedy_route(&s, &ctx).unwrap().c_max_fict() - 1e-9 {
                improved += 1;
            }
            assert!((value - naive).abs() <= 1e-9 * naive.max(1.0), "seed {seed} {system:?}: {value} vs {naive}");
        }
        checked += 1;
        if checked == 25 {
            break;
        }
    }
    assert_eq!(checked, 25);
    // Greedy is not optimal everywhere, so the comparison has teeth.
    assert!(improved > 0);
}

#[test]
fn search_never_loses_to_greedy() {
    for seed in 0..30 {
        let s = tiny_scenario(seed, false).unwrap();
        let ctx = PolicyContext::default();
        let Ok(opt) = brute_force_opt(&s, &ctx) else { continue };
        let greedy = greedy_route(&s, &ctx).unwrap();
        assert!(opt.c_max_fict() <= greedy.c_max_fict());
        opt.validate(&s).unwrap();
    }
}
