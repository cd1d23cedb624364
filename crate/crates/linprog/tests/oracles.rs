use dnnsplit_linprog::{
    check_totally_unimodular, solve_ilp, solve_lp, IlpOptions, LinearProgram, Relation, Status, TuOptions, TuVerdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hyperplane `a·x = b` used by the vertex enumerator.
struct Plane {
    a: Vec<f64>,
    b: f64,
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for t in i + 1..k {
                idx[t] = idx[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimum of the objective over all basic feasible points, or `None` when
/// the (bounded) feasible region is empty.
fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut planes = Vec::new();
    for row in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &row.coeffs {
            a[j] += v;
        }
        planes.push(Plane { a, b: row.rhs });
    }
    for j in 0..n {
        for bound in [lp.lower[j], lp.upper[j]] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            planes.push(Plane { a, b: bound });
        }
    }
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&p| planes[p].a.clone()).collect();
        let b = idx.iter().map(|&p| planes[p].b).collect();
        if let Some(x) = solve_dense(a, b) {
            if lp.max_violation(&x) <= 1e-9 {
                let obj = lp.evaluate(&x);
                best = Some(best.map_or(obj, |v: f64| v.min(obj)));
            }
        }
        if !next_subset(&mut idx, planes.len()) {
            return best;
        }
    }
}

fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LinearProgram {
    let mut lp = LinearProgram::new();
    for _ in 0..n {
        let lo = rng.gen_range(-3..=1) as f64;
        let hi = lo + rng.gen_range(1..=5) as f64;
        lp.add_var(rng.gen_range(-5.0..5.0), lo, hi);
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, rng.gen_range(-4..=4) as f64));
            }
        }
        let relation = match rng.gen_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        lp.add_row(coeffs, relation, rng.gen_range(-6..=6) as f64);
    }
    lp
}

#[test]
fn random_five_variable_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..400 {
        let m = rng.gen_range(1..=5);
        let lp = random_lp(&mut rng, 5, m);
        let sol = solve_lp(&lp).unwrap();
        match vertex_enumeration(&lp) {
            Some(best) => {
                assert_eq!(sol.status, Status::Optimal, "case {case}");
                assert!((sol.objective - best).abs() <= 1e-7, "case {case}: {} vs {best}", sol.objective);
                assert!(lp.max_violation(&sol.x) <= 1e-7, "case {case}");
                optimal += 1;
            }
            None => {
                assert_eq!(sol.status, Status::Infeasible, "case {case}");
                infeasible += 1;
            }
        }
    }
    assert!(optimal > 100 && infeasible > 10, "{optimal} optimal, {infeasible} infeasible");
}

#[test]
fn random_binary_programs_match_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..150 {
        let n = 8;
        let mut lp = LinearProgram::new();
        for _ in 0..n {
            lp.add_binary(rng.gen_range(-10..=10) as f64);
        }
        for _ in 0..rng.gen_range(1..=4) {
            let mut coeffs = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.6) {
                    coeffs.push((j, rng.gen_range(-3..=5) as f64));
                }
            }
            let relation = if rng.gen_bool(0.8) { Relation::Le } else { Relation::Ge };
            lp.add_row(coeffs, relation, rng.gen_range(0..=8) as f64);
        }
        let mut best: Option<f64> = None;
        for mask in 0u32..1 << n {
            let x: Vec<f64> = (0..n).map(|j| f64::from((mask >> j) & 1)).collect();
            if lp.max_violation(&x) <= 1e-9 {
                let obj = lp.evaluate(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
        let sol = solve_ilp(&lp, &IlpOptions::default()).unwrap();
        match best {
            Some(b) => {
                assert_eq!(sol.status, Status::Optimal, "case {case}");
                assert!((sol.objective - b).abs() < 1e-9, "case {case}: {} vs {b}", sol.objective);
            }
            None => assert_eq!(sol.status, Status::Infeasible, "case {case}"),
        }
    }
}

/// Node-arc incidence matrix of a directed graph.
fn incidence(nodes: usize, arcs: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0; arcs.len()]; nodes];
    for (k, &(u, v)) in arcs.iter().enumerate() {
        m[u][k] = 1;
        m[v][k] = -1;
    }
    m
}

#[test]
fn directed_incidence_matrices_are_tu() {
    let arcs = [(0, 1), (1, 2), (2, 0), (0, 3), (3, 1), (2, 3), (1, 0)];
    let verdict = check_totally_unimodular(&incidence(4, &arcs), &TuOptions::default());
    assert!(matches!(verdict, TuVerdict::NoViolationFound { checked } if checked > 0), "{verdict:?}");
}

#[test]
fn sampling_finds_large_violations() {
    // A 5x5 circulant with det 2, invisible to exhaustive order <= 4 checks
    // because every proper minor is unimodular.
    let mut m = vec![vec![0i64; 5]; 5];
    for i in 0..5 {
        m[i][i] = 1;
        m[i][(i + 1) % 5] = 1;
    }
    let exhaustive_only = TuOptions { max_order: 4, samples: 0, ..TuOptions::default() };
    assert!(check_totally_unimodular(&m, &exhaustive_only).is_clean());
    let sampled = TuOptions { max_order: 4, samples: 200, sample_max_order: 5, seed: 1 };
    assert!(matches!(check_totally_unimodular(&m, &sampled), TuVerdict::Violated { det: 2, .. }));
}

#[test]
fn tu_flow_programs_have_integral_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let nodes = 6;
    for _ in 0..100 {
        let mut arcs = Vec::new();
        for u in 0..nodes {
            for v in 0..nodes {
                if u != v && rng.gen_bool(0.4) {
                    arcs.push((u, v));
                }
            }
        }
        let inc = incidence(nodes, &arcs);
        let mut lp = LinearProgram::new();
        for _ in &arcs {
            lp.add_var(rng.gen_range(0.1..10.0), 0.0, rng.gen_range(1..=3) as f64);
        }
        let supply = rng.gen_range(1..=3) as f64;
        for (u, row) in inc.iter().enumerate() {
            let rhs = if u == 0 { supply } else if u == nodes - 1 { -supply } else { 0.0 };
            let coeffs = row.iter().enumerate().filter(|e| *e.1 != 0).map(|(k, &a)| (k, a as f64)).collect();
            lp.add_row(coeffs, Relation::Eq, rhs);
        }
        let sol = solve_lp(&lp).unwrap();
        if sol.status == Status::Optimal {
            assert!(sol.is_integral(1e-6), "{:?}", sol.x);
            let ilp = {
                let mut p = lp.clone();
                p.integer.iter_mut().for_each(|b| *b = true);
                solve_ilp(&p, &IlpOptions::default()).unwrap()
            };
            assert_eq!(ilp.nodes, 1);
        }
    }
}
