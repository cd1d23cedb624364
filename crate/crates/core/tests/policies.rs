//! Properties every routing policy should satisfy on generated scenarios.

use dnnsplit_core::error::Error;
use dnnsplit_core::formulations::CostOptions;
use dnnsplit_core::policies::*;
use dnnsplit_core::verify::tiny_scenario;
use dnnsplit_core::workload::{generate_scenario, Scenario};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn scenarios() -> impl Strategy<Value = Scenario> {
    (4usize..=14, 1usize..=5, prop::sample::select(vec![0.2, 1.0, 2.0]), any::<u32>())
        .prop_map(|(n, j, g, seed)| generate_scenario(n, j, g, seed as u64).unwrap())
}

fn route(name: &str, s: &Scenario, ctx: &PolicyContext) -> RoutePlan {
    PolicyRegistry::with_builtin().get(name).unwrap().route(s, ctx).unwrap()
}

const HEURISTICS: [&str; 5] = ["greedy", "nfs", "ss", "sw", "baseline"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plans_are_valid_and_actual_never_exceeds_estimate(s in scenarios()) {
        let ctx = PolicyContext::default();
        for name in HEURISTICS {
            let mut plan = route(name, &s, &ctx);
            plan.validate(&s).unwrap();
            prop_assert_eq!(plan.routes.len(), s.jobs.len());
            let mut order = plan.order();
            order.sort_unstable();
            prop_assert_eq!(order, (0..s.jobs.len()).collect::<Vec<_>>());
            plan.simulate(&s, &ctx.costs);
            for r in &plan.routes {
                let actual = r.c_actual_s.unwrap();
                prop_assert!(actual <= r.c_fict_s * (1.0 + 1e-9) + TOL, "{name} job {}: {actual} > {}", r.job, r.c_fict_s);
            }
        }
    }

    #[test]
    fn completion_is_at_least_the_shortest_service(s in scenarios()) {
        let ctx = PolicyContext::default();
        let floor: Vec<f64> = s.jobs.iter().map(|j| shortest_service_route(&s.network, j, &ctx.costs).unwrap().1).collect();
        for name in HEURISTICS {
            for r in &route(name, &s, &ctx).routes {
                prop_assert!(r.c_fict_s >= floor[r.job] - TOL, "{name} job {}", r.job);
            }
        }
    }

    #[test]
    fn shortest_waiting_only_changes_the_last_job(s in scenarios()) {
        let ctx = PolicyContext::default();
        let g = route("greedy", &s, &ctx);
        let w = route("sw", &s, &ctx);
        prop_assert_eq!(g.order(), w.order());
        let k = g.routes.len() - 1;
        prop_assert_eq!(&g.routes[..k], &w.routes[..k]);
        prop_assert!(g.routes[k].c_fict_s <= w.routes[k].c_fict_s + TOL);
        prop_assert_eq!(w.routes[k].compute.values().collect::<std::collections::BTreeSet<_>>().len(), 1);
    }

    #[test]
    fn one_job_greedy_is_the_single_job_optimum(n in 4usize..=14, seed in any::<u32>()) {
        let s = generate_scenario(n, 1, 1.0, seed as u64).unwrap();
        let ctx = PolicyContext::default();
        let ss = shortest_service_route(&s.network, &s.jobs[0], &ctx.costs).unwrap().1;
        let init = s.network.nodes().iter().all(|u| u.q_mm == 0.0) && s.network.links().iter().all(|l| l.q_bits == 0.0);
        let greedy = route("greedy", &s, &ctx).c_max_fict();
        if init {
            prop_assert!((greedy - ss).abs() <= TOL * ss.max(1.0), "{greedy} vs {ss}");
        }
        prop_assert!(greedy <= route("nfs", &s, &ctx).c_max_fict() + TOL);
        prop_assert!(route("greedy", &s, &ctx).c_max_fict() <= route("sw", &s, &ctx).c_max_fict() + TOL);
    }

    #[test]
    fn routing_is_deterministic(s in scenarios()) {
        let ctx = PolicyContext::default();
        for name in HEURISTICS {
            prop_assert_eq!(route(name, &s, &ctx), route(name, &s, &ctx));
        }
    }
}

#[test]
fn exhaustive_search_is_never_beaten() {
    let ctx = PolicyContext::default();
    let mut checked = 0;
    for seed in 0..40 {
        let s = tiny_scenario(seed, false).unwrap();
        let opt = match brute_force_opt(&s, &ctx) {
            Ok(p) => p.c_max_fict(),
            Err(Error::SizeLimit(_)) => continue,
            Err(e) => panic!("seed {seed}: {e}"),
        };
        for name in HEURISTICS {
            let plan = route(name, &s, &ctx);
            if plan.all_simple(&s) {
                assert!(opt <= plan.c_max_fict() + TOL, "seed {seed} {name}: {opt} > {}", plan.c_max_fict());
            }
        }
        checked += 1;
    }
    assert!(checked >= 30);
}

#[test]
fn registry_lookup() {
    let r = PolicyRegistry::with_builtin();
    assert_eq!(r.names(), vec!["baseline", "greedy", "nfs", "opt", "ss", "sw"]);
    for name in r.names() {
        assert_eq!(r.get(name).unwrap().name(), name);
    }
    assert!(matches!(r.get("fastest"), Err(Error::UnknownPolicy(_))));
}

struct Reversed;

impl RoutingPolicy for Reversed {
    fn name(&self) -> &'static str {
        "reversed-ss"
    }
    fn route(&self, scenario: &Scenario, ctx: &PolicyContext) -> dnnsplit_core::error::Result<RoutePlan> {
        let mut paths = ss_route(scenario, ctx)?.paths();
        paths.reverse();
        Ok(RoutePlan::from_paths(scenario, &paths, &ctx.costs))
    }
}

#[test]
fn custom_policies_can_be_registered() {
    let mut r = PolicyRegistry::with_builtin();
    r.register(Box::new(Reversed));
    let s = generate_scenario(8, 3, 1.0, 5).unwrap();
    let ctx = PolicyContext::default();
    let plan = r.get("reversed-ss").unwrap().route(&s, &ctx).unwrap();
    let mut ss = ss_route(&s, &ctx).unwrap().order();
    ss.reverse();
    assert_eq!(plan.order(), ss);
}

#[test]
fn dropping_link_delay_never_slows_the_first_job() {
    let zero = PolicyContext { costs: CostOptions { zero_delay: true, mem_penalty: None }, ..Default::default() };
    for seed in 0..10 {
        let s = generate_scenario(10, 3, 1.0, seed).unwrap();
        let with = greedy_route(&s, &PolicyContext::default()).unwrap();
        let without = greedy_route(&s, &zero).unwrap();
        let first = |p: &RoutePlan| p.routes.iter().map(|r| r.c_fict_s).fold(f64::INFINITY, f64::min);
        assert!(first(&without) <= first(&with) + TOL, "seed {seed}");
    }
}
