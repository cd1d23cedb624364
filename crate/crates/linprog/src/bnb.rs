use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::model::{LinearProgram, LpError, LpSolution, Status};
use crate::simplex::{Prepared, SimplexOptions};
use crate::{INTEGRALITY_TOL, OBJECTIVE_REL_TOL};

#[derive(Debug, Clone, PartialEq)]
#[derive(Default)]
pub struct IlpOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub simplex: SimplexOptions,
}


struct Node {
    bound: f64,
    seq: usize,
    fixes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so that `BinaryHeap` pops the smallest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn prunes(bound: f64, incumbent: f64) -> bool {
    bound >= incumbent - OBJECTIVE_REL_TOL * incumbent.abs().max(1.0)
}

/// Best-first branch and bound over the LP relaxation.
///
/// Branches on the most fractional integer variable (lowest index on ties)
/// and explores the down branch first among nodes with equal bounds.
pub fn solve_ilp(lp: &LinearProgram, opts: &IlpOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let start = Instant::now();
    let prepared = Prepared::new(lp);
    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::NEG_INFINITY, seq: 0, fixes: Vec::new() });
    let mut seq = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut nodes = 0;
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();

    while let Some(node) = heap.peek() {
        let best_obj = incumbent.as_ref().map_or(f64::INFINITY, |i| i.0);
        if prunes(node.bound, best_obj) {
            heap.clear();
            break;
        }
        let out_of_time = opts.time_limit.is_some_and(|t| start.elapsed() >= t);
        let out_of_nodes = opts.node_limit.is_some_and(|n| nodes >= n);
        if out_of_time || out_of_nodes {
            let bound = node.bound.min(best_obj);
            return Ok(match incumbent {
                Some((objective, x)) => LpSolution { status: Status::TimeLimit, objective, x, iterations, nodes, bound },
                None => LpSolution { nodes, bound, ..LpSolution::without_point(Status::TimeLimit, iterations) },
            });
        }
        let node = heap.pop().expect("peeked");
        nodes += 1;

        lower.copy_from_slice(&lp.lower);
        upper.copy_from_slice(&lp.upper);
        for &(j, lo, hi) in &node.fixes {
            lower[j] = lo;
            upper[j] = hi;
        }
        let sol = prepared.solve(&lower, &upper, &opts.simplex)?;
        iterations += sol.iterations;
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => continue,
            Status::Unbounded if nodes == 1 => {
                return Ok(LpSolution { nodes, ..LpSolution::without_point(Status::Unbounded, iterations) });
            }
            Status::Unbounded | Status::IterLimit | Status::TimeLimit => {
                return Ok(LpSolution { nodes, ..LpSolution::without_point(Status::IterLimit, iterations) });
            }
        }
        if prunes(sol.objective, best_obj) {
            continue;
        }

        let mut branch: Option<(usize, f64)> = None;
        for (j, &v) in sol.x.iter().enumerate() {
            if !lp.integer[j] {
                continue;
            }
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > INTEGRALITY_TOL && branch.is_none_or(|(_, f)| frac > f) {
                branch = Some((j, frac));
            }
        }
        match branch {
            None => {
                let mut x = sol.x;
                for (j, v) in x.iter_mut().enumerate() {
                    if lp.integer[j] {
                        *v = v.round();
                    }
                }
                let objective = lp.evaluate(&x);
                incumbent = Some((objective, x));
            }
            Some((j, _)) => {
                let v = sol.x[j];
                let mut down = node.fixes.clone();
                down.push((j, lower[j], v.floor()));
                let mut up = node.fixes;
                up.push((j, v.ceil(), upper[j]));
                heap.push(Node { bound: sol.objective, seq, fixes: down });
                heap.push(Node { bound: sol.objective, seq: seq + 1, fixes: up });
                seq += 2;
            }
        }
    }

    Ok(match incumbent {
        Some((objective, x)) => LpSolution { status: Status::Optimal, objective, x, iterations, nodes, bound: objective },
        None => LpSolution { nodes, ..LpSolution::without_point(Status::Infeasible, iterations) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Relation;

    #[test]
    fn knapsack_picks_the_better_item() {
        let mut lp = LinearProgram::new();
        let a = lp.add_binary(-3.0);
        let b = lp.add_binary(-2.0);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Relation::Le, 1.0);
        let sol = solve_ilp(&lp, &IlpOptions::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.objective, -3.0);
        assert_eq!(sol.x, vec![1.0, 0.0]);
    }

    #[test]
    fn fractional_root_needs_branching() {
        // max x + y, 2x + 2y <= 3 over binaries: LP gives 1.5, ILP gives 1.
        let mut lp = LinearProgram::new();
        let a = lp.add_binary(-1.0);
        let b = lp.add_binary(-1.0);
        lp.add_row(vec![(a, 2.0), (b, 2.0)], Relation::Le, 3.0);
        let sol = solve_ilp(&lp, &IlpOptions::default()).unwrap();
        assert_eq!(sol.objective, -1.0);
        assert!(sol.nodes > 1);
    }

    #[test]
    fn node_limit_reports_incumbent_and_bound() {
        let mut lp = LinearProgram::new();
        let vars: Vec<_> = (0..6).map(|i| lp.add_binary(-(1.0 + i as f64 * 0.1))).collect();
        lp.add_row(vars.iter().map(|&v| (v, 2.0)).collect(), Relation::Le, 5.0);
        let opts = IlpOptions { node_limit: Some(1), ..IlpOptions::default() };
        let sol = solve_ilp(&lp, &opts).unwrap();
        assert_eq!(sol.status, Status::TimeLimit);
        assert!(sol.bound <= -2.9);
    }

    #[test]
    fn infeasible_ilp() {
        let mut lp = LinearProgram::new();
        let a = lp.add_binary(1.0);
        lp.add_row(vec![(a, 2.0)], Relation::Eq, 1.0);
        assert_eq!(solve_ilp(&lp, &IlpOptions::default()).unwrap().status, Status::Infeasible);
    }
}
