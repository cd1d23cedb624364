//! Sparse left-looking LU factorisation of a simplex basis, plus the
//! product-form eta file that carries it between refactorisations.

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;

/// `B = (elimination)^{-1} · U` with rows visited in `piv_row` order and
/// columns in `step_pos` order.
#[derive(Debug, Clone, Default)]
pub(crate) struct Lu {
    m: usize,
    piv_row: Vec<usize>,
    step_pos: Vec<usize>,
    lcols: Vec<Vec<(usize, f64)>>,
    ucols: Vec<Vec<(usize, f64)>>,
    udiag: Vec<f64>,
}

/// Result of factorising a basis. `replaced` lists basis positions whose
/// column was dependent and has been swapped for the unit column of `row`.
pub(crate) struct Factored {
    pub lu: Lu,
    pub replaced: Vec<(usize, usize)>,
}

/// Factorises the square matrix whose column at basis position `p` is `cols[p]`
/// (entries `(row, value)`).
pub(crate) fn factor(m: usize, cols: &[Vec<(usize, f64)>]) -> Factored {
    debug_assert_eq!(cols.len(), m);
    let mut row_count = vec![0usize; m];
    for col in cols {
        for &(i, _) in col {
            row_count[i] += 1;
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&p| (cols[p].len(), p));

    let mut lu = Lu {
        m,
        piv_row: Vec::with_capacity(m),
        step_pos: Vec::with_capacity(m),
        lcols: Vec::with_capacity(m),
        ucols: Vec::with_capacity(m),
        udiag: Vec::with_capacity(m),
    };
    let mut step_of_row = vec![usize::MAX; m];
    let mut x = vec![0.0f64; m];
    let mut mark = vec![false; m];
    let mut touched: Vec<usize> = Vec::new();
    let mut deficient = Vec::new();

    for &pos in &order {
        for &(i, v) in &cols[pos] {
            if !mark[i] {
                mark[i] = true;
                touched.push(i);
            }
            x[i] += v;
        }
        for j in 0..lu.piv_row.len() {
            let t = x[lu.piv_row[j]];
            if t == 0.0 {
                continue;
            }
            for &(i, l) in &lu.lcols[j] {
                if !mark[i] {
                    mark[i] = true;
                    touched.push(i);
                }
                x[i] -= l * t;
            }
        }

        let mut maxabs = 0.0f64;
        for &i in &touched {
            if step_of_row[i] == usize::MAX {
                maxabs = maxabs.max(x[i].abs());
            }
        }
        if maxabs < SINGULAR_TOL {
            deficient.push(pos);
        } else {
            let mut best: Option<usize> = None;
            for &i in &touched {
                if step_of_row[i] != usize::MAX || x[i].abs() < PIVOT_THRESHOLD * maxabs {
                    continue;
                }
                best = match best {
                    Some(b) if (row_count[b], b) <= (row_count[i], i) => Some(b),
                    _ => Some(i),
                };
            }
            let p = best.expect("a candidate above threshold exists");
            let piv = x[p];
            let mut ucol = Vec::new();
            let mut lcol = Vec::new();
            for &i in &touched {
                let v = x[i];
                if i == p || v.abs() <= DROP_TOL {
                    continue;
                }
                match step_of_row[i] {
                    usize::MAX => lcol.push((i, v / piv)),
                    s => ucol.push((s, v)),
                }
            }
            ucol.sort_unstable_by_key(|e| e.0);
            lcol.sort_unstable_by_key(|e| e.0);
            step_of_row[p] = lu.piv_row.len();
            lu.piv_row.push(p);
            lu.step_pos.push(pos);
            lu.lcols.push(lcol);
            lu.ucols.push(ucol);
            lu.udiag.push(piv);
        }
        for &i in &touched {
            x[i] = 0.0;
            mark[i] = false;
        }
        touched.clear();
    }

    let mut free_rows = (0..m).filter(|&i| step_of_row[i] == usize::MAX);
    let mut replaced = Vec::with_capacity(deficient.len());
    for pos in deficient {
        let row = free_rows.next().expect("rank deficiency leaves a free row");
        lu.piv_row.push(row);
        lu.step_pos.push(pos);
        lu.lcols.push(Vec::new());
        lu.ucols.push(Vec::new());
        lu.udiag.push(1.0);
        replaced.push((pos, row));
    }
    Factored { lu, replaced }
}

impl Lu {
    /// Solves `B z = v`; `v` is indexed by row and is consumed as scratch,
    /// `out` is indexed by basis position.
    pub(crate) fn ftran(&self, v: &mut [f64], out: &mut [f64]) {
        for j in 0..self.m {
            let t = v[self.piv_row[j]];
            if t != 0.0 {
                for &(i, l) in &self.lcols[j] {
                    v[i] -= l * t;
                }
            }
        }
        for k in (0..self.m).rev() {
            let z = v[self.piv_row[k]] / self.udiag[k];
            out[self.step_pos[k]] = z;
            if z != 0.0 {
                for &(j, u) in &self.ucols[k] {
                    v[self.piv_row[j]] -= u * z;
                }
            }
        }
    }

    /// Solves `Bᵀ y = c`; `c` is indexed by basis position, `out` by row.
    pub(crate) fn btran(&self, c: &[f64], out: &mut [f64]) {
        let mut v = vec![0.0; self.m];
        for k in 0..self.m {
            let mut s = c[self.step_pos[k]];
            for &(j, u) in &self.ucols[k] {
                s -= u * v[j];
            }
            v[k] = s / self.udiag[k];
        }
        for k in 0..self.m {
            out[self.piv_row[k]] = v[k];
        }
        for j in (0..self.m).rev() {
            let s: f64 = self.lcols[j].iter().map(|&(i, l)| l * out[i]).sum();
            if s != 0.0 {
                out[self.piv_row[j]] -= s;
            }
        }
    }
}

/// One basis change: column at position `r` replaced, `w = B⁻¹ a_q`.
#[derive(Debug, Clone)]
pub(crate) struct Eta {
    r: usize,
    pivot: f64,
    others: Vec<(usize, f64)>,
}

impl Eta {
    pub(crate) fn new(r: usize, w: &[f64]) -> Self {
        let others = w
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != r && v.abs() > DROP_TOL)
            .map(|(i, &v)| (i, v))
            .collect();
        Eta { r, pivot: w[r], others }
    }

    fn apply(&self, z: &mut [f64]) {
        let zr = z[self.r] / self.pivot;
        z[self.r] = zr;
        if zr != 0.0 {
            for &(i, w) in &self.others {
                z[i] -= w * zr;
            }
        }
    }

    fn apply_transposed(&self, c: &mut [f64]) {
        let s: f64 = self.others.iter().map(|&(i, w)| c[i] * w).sum();
        c[self.r] = (c[self.r] - s) / self.pivot;
    }
}

/// Factorised basis together with the etas accumulated since the last refactor.
#[derive(Debug, Clone, Default)]
pub(crate) struct BasisInverse {
    pub lu: Lu,
    pub etas: Vec<Eta>,
}

impl BasisInverse {
    pub(crate) fn ftran(&self, v: &mut [f64], out: &mut [f64]) {
        self.lu.ftran(v, out);
        for eta in &self.etas {
            eta.apply(out);
        }
    }

    pub(crate) fn btran(&self, c: &mut [f64], out: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            eta.apply_transposed(c);
        }
        self.lu.btran(c, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(a: &[[f64; 3]; 3]) -> Vec<Vec<(usize, f64)>> {
        (0..3)
            .map(|j| (0..3).filter(|&i| a[i][j] != 0.0).map(|i| (i, a[i][j])).collect())
            .collect()
    }

    #[test]
    fn ftran_and_btran_invert_a_small_matrix() {
        let a = [[2.0, 0.0, 1.0], [1.0, 3.0, 0.0], [0.0, 1.0, 4.0]];
        let f = factor(3, &dense_cols(&a));
        assert!(f.replaced.is_empty());

        let b = [3.0, 4.0, 5.0];
        let mut v = b.to_vec();
        let mut z = vec![0.0; 3];
        f.lu.ftran(&mut v, &mut z);
        for i in 0..3 {
            let lhs: f64 = (0..3).map(|j| a[i][j] * z[j]).sum();
            assert!((lhs - b[i]).abs() < 1e-12);
        }

        let mut y = vec![0.0; 3];
        f.lu.btran(&b, &mut y);
        for j in 0..3 {
            let lhs: f64 = (0..3).map(|i| a[i][j] * y[i]).sum();
            assert!((lhs - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_column_is_replaced_by_a_unit_column() {
        let a = [[1.0, 2.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
        let f = factor(3, &dense_cols(&a));
        assert_eq!(f.replaced.len(), 1);
    }

    #[test]
    fn eta_update_matches_refactor() {
        let a = [[2.0, 0.0, 1.0], [1.0, 3.0, 0.0], [0.0, 1.0, 4.0]];
        let mut cols = dense_cols(&a);
        let mut inv = BasisInverse { lu: factor(3, &cols).lu, etas: Vec::new() };
        let incoming = vec![(0, 1.0), (2, -1.0)];
        let mut v = vec![1.0, 0.0, -1.0];
        let mut w = vec![0.0; 3];
        inv.ftran(&mut v, &mut w);
        inv.etas.push(Eta::new(1, &w));
        cols[1] = incoming;
        let fresh = factor(3, &cols).lu;

        let rhs = [1.0, -2.0, 0.5];
        let (mut v1, mut v2) = (rhs.to_vec(), rhs.to_vec());
        let (mut z1, mut z2) = (vec![0.0; 3], vec![0.0; 3]);
        inv.ftran(&mut v1, &mut z1);
        fresh.ftran(&mut v2, &mut z2);
        for i in 0..3 {
            assert!((z1[i] - z2[i]).abs() < 1e-12);
        }

        let (mut c1, mut y1, mut y2) = (rhs.to_vec(), vec![0.0; 3], vec![0.0; 3]);
        inv.btran(&mut c1, &mut y1);
        fresh.btran(&rhs, &mut y2);
        for i in 0..3 {
            assert!((y1[i] - y2[i]).abs() < 1e-12);
        }
    }
}
