//! Bounded primal simplex on `A x + s = b`, one logical `s_i` per row.
//!
//! Phase 1 minimises the sum of bound violations of the basic variables
//! starting from the all-logical basis; phase 2 minimises the true cost
//! from the feasible basis phase 1 leaves behind.

use crate::lu::{factor, BasisInverse, Eta};
use crate::model::{LinearProgram, LpError, LpSolution, Relation, Status};
use crate::FEASIBILITY_TOL;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
const MAX_REPAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    /// Eta-file length that triggers a fresh factorisation.
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iterations: 1_000_000, bland_after: 50, refactor_every: 100 }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let prepared = Prepared::new(lp);
    prepared.solve(&lp.lower, &lp.upper, opts)
}

/// Column-major copy of a program with empty rows removed, reusable across
/// solves that only differ in variable bounds.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    logical_lo: Vec<f64>,
    logical_hi: Vec<f64>,
    offset: f64,
    empty_row_infeasible: bool,
}

impl Prepared {
    pub(crate) fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut kept = Vec::new();
        let mut empty_row_infeasible = false;
        let mut merged: Vec<Vec<(usize, f64)>> = Vec::new();
        for row in &lp.rows {
            let mut coeffs: Vec<(usize, f64)> = row.coeffs.iter().copied().filter(|e| e.1 != 0.0).collect();
            coeffs.sort_by_key(|e| e.0);
            coeffs.dedup_by(|later, earlier| {
                if later.0 == earlier.0 {
                    earlier.1 += later.1;
                    true
                } else {
                    false
                }
            });
            coeffs.retain(|e| e.1 != 0.0);
            if coeffs.is_empty() {
                let ok = match row.relation {
                    Relation::Le => 0.0 <= row.rhs + FEASIBILITY_TOL,
                    Relation::Ge => 0.0 >= row.rhs - FEASIBILITY_TOL,
                    Relation::Eq => row.rhs.abs() <= FEASIBILITY_TOL,
                };
                empty_row_infeasible |= !ok;
                continue;
            }
            kept.push(row);
            merged.push(coeffs);
        }
        let m = kept.len();
        let mut counts = vec![0usize; n + 1];
        for coeffs in &merged {
            for &(j, _) in coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, coeffs) in merged.iter().enumerate() {
            for &(j, a) in coeffs {
                col_row[fill[j]] = i;
                col_val[fill[j]] = a;
                fill[j] += 1;
            }
        }
        let (logical_lo, logical_hi) = kept
            .iter()
            .map(|r| match r.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            })
            .unzip();
        Prepared {
            n,
            m,
            col_start,
            col_row,
            col_val,
            cost: lp.objective.clone(),
            rhs: kept.iter().map(|r| r.rhs).collect(),
            logical_lo,
            logical_hi,
            offset: lp.objective_offset,
            empty_row_infeasible,
        }
    }

    pub(crate) fn solve(&self, lower: &[f64], upper: &[f64], opts: &SimplexOptions) -> Result<LpSolution, LpError> {
        if self.empty_row_infeasible || lower.iter().zip(upper).any(|(l, u)| l > u) {
            return Ok(LpSolution::without_point(Status::Infeasible, 0));
        }
        let mut engine = Engine::new(self, lower, upper);
        let status = engine.run(opts)?;
        Ok(engine.finish(status))
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = if j < self.n {
            (self.col_start[j], self.col_start[j + 1])
        } else {
            (0, 0)
        };
        let unit = (j >= self.n).then(|| (j - self.n, 1.0));
        self.col_row[a..b].iter().copied().zip(self.col_val[a..b].iter().copied()).chain(unit)
    }
}

const NONBASIC: usize = usize::MAX;

struct Engine<'a> {
    p: &'a Prepared,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    inv: BasisInverse,
    iterations: usize,
    /// Feasibility tolerance used to decide the phase; loosened to the
    /// public tolerance if phase 1 stalls on tiny residuals.
    feas_tol: f64,
}

impl<'a> Engine<'a> {
    fn new(p: &'a Prepared, lower: &[f64], upper: &[f64]) -> Self {
        let total = p.n + p.m;
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        lo.extend_from_slice(&p.logical_lo);
        hi.extend_from_slice(&p.logical_hi);
        let mut x = vec![0.0; total];
        for j in 0..p.n {
            x[j] = nonbasic_value(lo[j], hi[j], 0.0);
        }
        let basis: Vec<usize> = (p.n..total).collect();
        let mut pos = vec![NONBASIC; total];
        for (r, &j) in basis.iter().enumerate() {
            pos[j] = r;
        }
        let mut e = Engine {
            p,
            lo,
            hi,
            x,
            basis,
            pos,
            inv: BasisInverse::default(),
            iterations: 0,
            feas_tol: PRIMAL_TOL,
        };
        e.refactor();
        e
    }

    fn refactor(&mut self) {
        let cols: Vec<Vec<(usize, f64)>> = self.basis.iter().map(|&j| self.p.column(j).collect()).collect();
        let f = factor(self.p.m, &cols);
        for (r, row) in f.replaced {
            let out = self.basis[r];
            let logical = self.p.n + row;
            self.pos[out] = NONBASIC;
            self.x[out] = nonbasic_value(self.lo[out], self.hi[out], self.x[out]);
            self.basis[r] = logical;
            self.pos[logical] = r;
        }
        self.inv = BasisInverse { lu: f.lu, etas: Vec::new() };
        self.recompute_basics();
    }

    fn recompute_basics(&mut self) {
        let mut v = self.p.rhs.clone();
        for j in 0..self.p.n + self.p.m {
            if self.pos[j] == NONBASIC && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (i, a) in self.p.column(j) {
                    v[i] -= a * xj;
                }
            }
        }
        let mut z = vec![0.0; self.p.m];
        self.inv.ftran(&mut v, &mut z);
        for (r, &j) in self.basis.iter().enumerate() {
            self.x[j] = z[r];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        if self.x[j] < self.lo[j] - self.feas_tol {
            -1.0
        } else if self.x[j] > self.hi[j] + self.feas_tol {
            1.0
        } else {
            0.0
        }
    }

    fn max_violation(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    fn run(&mut self, opts: &SimplexOptions) -> Result<Status, LpError> {
        let m = self.p.m;
        let total = self.p.n + m;
        let mut y = vec![0.0; m];
        let mut cb = vec![0.0; m];
        let mut w = vec![0.0; m];
        let mut col = vec![0.0; m];
        let mut degenerate_streak = 0usize;
        let mut bland = false;
        let mut repairs = 0usize;

        loop {
            if self.iterations >= opts.max_iterations {
                return Ok(Status::IterLimit);
            }
            if self.inv.etas.len() >= opts.refactor_every {
                self.refactor();
            }

            let phase1 = self.basis.iter().any(|&j| self.infeasibility(j) != 0.0);
            for (r, &j) in self.basis.iter().enumerate() {
                cb[r] = if phase1 { self.infeasibility(j) } else { self.cost_of(j) };
            }
            self.inv.btran(&mut cb, &mut y);

            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..total {
                if self.pos[j] != NONBASIC || self.lo[j] == self.hi[j] {
                    continue;
                }
                let c = if phase1 { 0.0 } else { self.cost_of(j) };
                let d = c - self.p.column(j).map(|(i, a)| a * y[i]).sum::<f64>();
                let dir = if d < -DUAL_TOL && self.x[j] < self.hi[j] {
                    1.0
                } else if d > DUAL_TOL && self.x[j] > self.lo[j] {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir, d));
                    break;
                }
                if entering.is_none_or(|(_, _, best)| d.abs() > best.abs()) {
                    entering = Some((j, dir, d));
                }
            }

            let Some((q, dir, _)) = entering else {
                self.refactor();
                let violation = self.max_violation();
                if phase1 {
                    if violation > FEASIBILITY_TOL {
                        return Ok(Status::Infeasible);
                    }
                    self.feas_tol = FEASIBILITY_TOL;
                    continue;
                }
                if violation > self.feas_tol && repairs < MAX_REPAIRS {
                    repairs += 1;
                    continue;
                }
                return Ok(Status::Optimal);
            };

            col.iter_mut().for_each(|v| *v = 0.0);
            for (i, a) in self.p.column(q) {
                col[i] = a;
            }
            self.inv.ftran(&mut col, &mut w);

            let span = self.hi[q] - self.lo[q];
            let leave = self.ratio_test(&w, dir, phase1, bland);
            let (theta, leaving) = match leave {
                Some((r, theta, bound)) if !(span <= theta) => (theta, Some((r, bound))),
                _ if span.is_finite() => (span, None),
                Some((r, theta, bound)) => (theta, Some((r, bound))),
                None => {
                    if phase1 {
                        // Cannot happen in exact arithmetic; refresh and retry.
                        repairs += 1;
                        if repairs > MAX_REPAIRS {
                            return Err(LpError::Numerical);
                        }
                        self.refactor();
                        continue;
                    }
                    return Ok(Status::Unbounded);
                }
            };

            self.iterations += 1;
            if theta != 0.0 {
                for (r, &j) in self.basis.iter().enumerate() {
                    if w[r] != 0.0 {
                        self.x[j] -= theta * dir * w[r];
                    }
                }
            }
            self.x[q] += theta * dir;

            match leaving {
                None => {
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some((r, bound)) => {
                    let out = self.basis[r];
                    self.x[out] = bound;
                    self.pos[out] = NONBASIC;
                    self.basis[r] = q;
                    self.pos[q] = r;
                    self.inv.etas.push(Eta::new(r, &w));
                }
            }

            if theta <= DEGENERATE_STEP {
                degenerate_streak += 1;
                if degenerate_streak >= opts.bland_after {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
                bland = false;
            }
        }
    }

    fn cost_of(&self, j: usize) -> f64 {
        if j < self.p.n {
            self.p.cost[j]
        } else {
            0.0
        }
    }

    /// Returns `(position, step, bound reached by the leaving variable)`.
    fn ratio_test(&self, w: &[f64], dir: f64, phase1: bool, bland: bool) -> Option<(usize, f64, f64)> {
        // Each blocking candidate: (position, |alpha|, distance to its bound, bound).
        let mut blockers: Vec<(usize, f64, f64, f64)> = Vec::new();
        for (r, &j) in self.basis.iter().enumerate() {
            let alpha = dir * w[r];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let (xj, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
            let infeas = if phase1 { self.infeasibility(j) } else { 0.0 };
            let bound = if alpha > 0.0 {
                // x_j decreases.
                if infeas > 0.0 {
                    hi
                } else if infeas < 0.0 {
                    continue;
                } else {
                    lo
                }
            } else if infeas < 0.0 {
                lo
            } else if infeas > 0.0 {
                continue;
            } else {
                hi
            };
            if !bound.is_finite() {
                continue;
            }
            let dist = if alpha > 0.0 { xj - bound } else { bound - xj };
            blockers.push((r, alpha.abs(), dist, bound));
        }
        if blockers.is_empty() {
            return None;
        }

        if bland {
            let min = blockers.iter().map(|b| b.2.max(0.0) / b.1).fold(f64::INFINITY, f64::min);
            let chosen = blockers
                .iter()
                .filter(|b| b.2.max(0.0) / b.1 <= min + DEGENERATE_STEP)
                .min_by_key(|b| self.basis[b.0])
                .expect("non-empty");
            return Some((chosen.0, min, chosen.3));
        }

        let relaxed = blockers.iter().map(|b| (b.2 + PRIMAL_TOL) / b.1).fold(f64::INFINITY, f64::min);
        let chosen = blockers
            .iter()
            .filter(|b| b.2 / b.1 <= relaxed)
            .fold(None::<&(usize, f64, f64, f64)>, |best, b| match best {
                Some(c) if c.1 >= b.1 => Some(c),
                _ => Some(b),
            })
            .expect("the tightest blocker passes its own relaxed bound");
        Some((chosen.0, (chosen.2 / chosen.1).max(0.0), chosen.3))
    }

    fn finish(mut self, status: Status) -> LpSolution {
        match status {
            Status::Optimal | Status::IterLimit => {
                let n = self.p.n;
                for j in 0..n {
                    if (self.x[j] - self.lo[j]).abs() <= PRIMAL_TOL {
                        self.x[j] = self.lo[j];
                    } else if (self.x[j] - self.hi[j]).abs() <= PRIMAL_TOL {
                        self.x[j] = self.hi[j];
                    }
                }
                let x: Vec<f64> = self.x[..n].to_vec();
                let objective = self.p.offset + self.p.cost.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
                LpSolution {
                    status,
                    objective,
                    x,
                    iterations: self.iterations,
                    nodes: 1,
                    bound: if status == Status::Optimal { objective } else { f64::NEG_INFINITY },
                }
            }
            _ => LpSolution::without_point(status, self.iterations),
        }
    }
}

fn nonbasic_value(lo: f64, hi: f64, current: f64) -> f64 {
    if lo.is_finite() && hi.is_finite() {
        if (current - lo).abs() <= (hi - current).abs() {
            lo
        } else {
            hi
        }
    } else if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound_row() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, 10.0);
        lp.add_row(vec![(x, 1.0)], Relation::Ge, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn facet_optimum() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, 1.0);
        let y = lp.add_var(-1.0, 0.0, 1.0);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective + 1.0).abs() < 1e-12);
        assert!((sol.x[0] + sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, 1.0);
        lp.add_row(vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Infeasible);

        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(0.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn empty_rows_are_dropped_or_flag_infeasibility() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 1.0, 2.0);
        lp.add_row(vec![], Relation::Le, 5.0);
        lp.add_row(vec![(x, 0.0)], Relation::Eq, 0.0);
        assert_eq!(solve_lp(&lp).unwrap().objective, 1.0);
        lp.add_row(vec![], Relation::Ge, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn equality_network_flow() {
        // Two parallel routes from node 0 to node 2, unit supply.
        let mut lp = LinearProgram::new();
        let a = lp.add_var(1.0, 0.0, 1.0); // 0->1
        let b = lp.add_var(1.0, 0.0, 1.0); // 1->2
        let c = lp.add_var(3.0, 0.0, 1.0); // 0->2
        lp.add_row(vec![(a, 1.0), (c, 1.0)], Relation::Eq, 1.0);
        lp.add_row(vec![(a, -1.0), (b, 1.0)], Relation::Eq, 0.0);
        lp.add_row(vec![(b, -1.0), (c, -1.0)], Relation::Eq, -1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.x, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn free_variables_and_duplicate_entries() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(vec![(x, 0.5), (x, 0.5)], Relation::Ge, -4.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective + 4.0).abs() < 1e-12);
    }
}
