use dnnsplit_core::topology::{build_layered_graph, edge_connectivity, generate_random_geometric, PhysicalNetwork};
use dnnsplit_core::workload::*;
use proptest::prelude::*;

#[test]
fn model_catalog_values() {
    let sln = builtin_model("SLN").unwrap();
    assert_eq!(sln.layers(), 5);
    assert_eq!((sln.data_kb[0], sln.compute(1), sln.memory(2)), (9.41, 3.81, 409.60));
    let an = builtin_model("AN").unwrap();
    assert_eq!(an.layers(), 8);
    assert_eq!((an.data_kb[0], an.compute(2)), (618.35, 224.34));
    let rn = builtin_model("RN").unwrap();
    assert_eq!(rn.layers(), 9);
    assert_eq!((rn.compute(5), rn.data_kb[9]), (1156.06, 4.00));
}

#[test]
fn device_catalog_values() {
    let t = builtin_node_types();
    let get = |n: &str| t.iter().find(|x| x.name == n).unwrap().clone();
    assert_eq!((get("OPZ").mu_mm_s, get("OPZ").mem_mb), (360.0, 524.288));
    assert_eq!((get("BAI").mu_mm_s, get("BAI").mem_mb), (480.0, 131.072));
    assert_eq!((get("RP3").mu_mm_s, get("RP3").cbar_mm), (560.0, 100000.0));
}

#[test]
fn transmission_uses_binary_kilobytes() {
    let t = transmission_time(kb_to_bits(9.41), 72.2e6);
    let expected = 9.41 * 8.0 * 1024.0 / 72.2e6;
    assert!((t - expected).abs() < 1e-18);
    assert!((t - 1.0676e-3).abs() < 1e-6);
}

#[test]
fn link_rate_grid_follows_gamma() {
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..20 {
        for l in generate_scenario(20, 1, 1.0, seed).unwrap().network.links() {
            seen.insert((l.mu_bps / 1e4).round() as u64);
        }
    }
    assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![1444, 2888, 4332, 5776, 7220]);
    let slow = generate_scenario(20, 1, 0.2, 3).unwrap();
    let max = slow.network.links().iter().map(|l| l.mu_bps).fold(0.0, f64::max);
    assert!(max <= 14.44e6 + 1e-6);
}

#[test]
fn same_seed_same_bytes() {
    let a = generate_scenario(20, 4, 0.2, 77).unwrap().to_json().unwrap();
    let b = generate_scenario(20, 4, 0.2, 77).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let back = Scenario::from_json(&a).unwrap();
    assert_eq!(back.to_json().unwrap(), a);
    assert_ne!(a, generate_scenario(20, 4, 0.2, 78).unwrap().to_json().unwrap());
}

#[test]
fn geometric_graph_is_reproducible_and_short_ranged() {
    let a = generate_random_geometric(20, 30.0, 7.5, 5).unwrap();
    assert_eq!(a, generate_random_geometric(20, 30.0, 7.5, 5).unwrap());
    for seed in 0..100 {
        let net = generate_random_geometric(20, 30.0, 7.5, seed).unwrap();
        for l in net.links() {
            let (p, q) = (net.node(l.from), net.node(l.to));
            let d = (p.x_m.unwrap() - q.x_m.unwrap()).hypot(p.y_m.unwrap() - q.y_m.unwrap());
            assert!(d <= 7.5, "seed {seed}: link of {d} m");
        }
    }
}

#[test]
fn layered_sizes_at_benchmark_scale() {
    let net = generate_random_geometric(20, 30.0, 7.5, 1).unwrap();
    let g = build_layered_graph(&net, 9);
    assert_eq!(g.num_vertices(), 200);
    assert_eq!(g.num_edges(), 10 * net.num_links() + 9 * 20);
}

#[test]
fn custom_models_survive_serialization() {
    let mut cfg = ScenarioConfig::new(5, 2, 1.0, 3);
    cfg.models = vec![builtin_model("AN[3..5]").unwrap(), DnnModel::new("toy", vec![1.0, 2.0], vec![3.0], vec![4.0]).unwrap()];
    let s = cfg.generate().unwrap();
    assert_eq!(Scenario::from_json(&s.to_json().unwrap()).unwrap(), s);
}

fn connected(net: &PhysicalNetwork) -> bool {
    edge_connectivity(net) >= 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_scenarios_are_valid(n in 2usize..25, jobs in 1usize..6, g in prop::sample::select(vec![0.2, 1.0, 2.0]), seed in any::<u64>()) {
        let s = generate_scenario(n, jobs, g, seed).unwrap();
        prop_assert!(connected(&s.network));
        prop_assert_eq!(s.jobs.len(), jobs);
        for l in s.network.links() {
            prop_assert!(s.network.find_link(l.to, l.from).is_some());
        }
        for j in &s.jobs {
            prop_assert!(j.src < n && j.dst < n);
        }
    }
}
