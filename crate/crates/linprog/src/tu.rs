//! Brute-force total-unimodularity checking for small dense matrices.
//!
//! Exhaustive up to `max_order`, then random sampling of larger square
//! submatrices. A submatrix with a row or column holding at most one nonzero
//! has determinant 0 or ±(a smaller minor), so such submatrices are skipped
//! once every smaller order has been checked.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuOptions {
    /// Every square submatrix up to this order is examined.
    pub max_order: usize,
    /// Number of random submatrices of order `max_order+1 ..= sample_max_order`.
    pub samples: usize,
    pub sample_max_order: usize,
    pub seed: u64,
}

impl Default for TuOptions {
    fn default() -> Self {
        Self { max_order: 4, samples: 5000, sample_max_order: 7, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TuVerdict {
    /// `checked` counts the determinants actually evaluated.
    NoViolationFound { checked: u64 },
    Violated { rows: Vec<usize>, cols: Vec<usize>, det: i64 },
    InvalidEntry { row: usize, col: usize, value: i64 },
}

impl TuVerdict {
    pub fn is_clean(&self) -> bool {
        matches!(self, TuVerdict::NoViolationFound { .. })
    }
}

pub fn check_totally_unimodular(matrix: &[Vec<i64>], opts: &TuOptions) -> TuVerdict {
    let nrows = matrix.len();
    let ncols = matrix.first().map_or(0, Vec::len);
    for (i, row) in matrix.iter().enumerate() {
        assert_eq!(row.len(), ncols, "ragged matrix");
        for (j, &v) in row.iter().enumerate() {
            if !(-1..=1).contains(&v) {
                return TuVerdict::InvalidEntry { row: i, col: j, value: v };
            }
        }
    }
    let mut checked = 0u64;
    let max_order = opts.max_order.min(nrows).min(ncols);

    for k in 2..=max_order {
        let mut rows: Vec<usize> = (0..k).collect();
        loop {
            let candidates: Vec<usize> = (0..ncols)
                .filter(|&j| rows.iter().filter(|&&i| matrix[i][j] != 0).count() >= 2)
                .collect();
            if candidates.len() >= k {
                let mut pick: Vec<usize> = (0..k).collect();
                loop {
                    let cols: Vec<usize> = pick.iter().map(|&p| candidates[p]).collect();
                    let rows_dense = rows
                        .iter()
                        .all(|&i| cols.iter().filter(|&&j| matrix[i][j] != 0).count() >= 2);
                    if rows_dense {
                        checked += 1;
                        let det = determinant(matrix, &rows, &cols);
                        if det.abs() > 1 {
                            return TuVerdict::Violated { rows: rows.clone(), cols, det };
                        }
                    }
                    if !next_combination(&mut pick, candidates.len()) {
                        break;
                    }
                }
            }
            if !next_combination(&mut rows, nrows) {
                break;
            }
        }
    }

    let top = opts.sample_max_order.min(nrows).min(ncols);
    if top > max_order && opts.samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let all_rows: Vec<usize> = (0..nrows).collect();
        for _ in 0..opts.samples {
            let k = rng.gen_range(max_order + 1..=top);
            let rows: Vec<usize> = all_rows.choose_multiple(&mut rng, k).copied().collect();
            let support: Vec<usize> = (0..ncols).filter(|&j| rows.iter().any(|&i| matrix[i][j] != 0)).collect();
            if support.len() < k {
                continue;
            }
            let cols: Vec<usize> = support.choose_multiple(&mut rng, k).copied().collect();
            checked += 1;
            let det = determinant(matrix, &rows, &cols);
            if det.abs() > 1 {
                return TuVerdict::Violated { rows, cols, det };
            }
        }
    }
    TuVerdict::NoViolationFound { checked }
}

/// Advances `idx` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
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

/// Fraction-free (Bareiss) determinant of the submatrix `rows × cols`.
fn determinant(matrix: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> i64 {
    let k = rows.len();
    let mut a: Vec<Vec<i64>> = rows.iter().map(|&i| cols.iter().map(|&j| matrix[i][j]).collect()).collect();
    let mut sign = 1;
    let mut prev = 1i64;
    for p in 0..k {
        if a[p][p] == 0 {
            match (p + 1..k).find(|&r| a[r][p] != 0) {
                Some(r) => {
                    a.swap(p, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in p + 1..k {
            for j in p + 1..k {
                a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
            }
        }
        prev = a[p][p];
    }
    sign * a[k - 1][k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_matches_hand_values() {
        let m = vec![vec![1, 1], vec![1, -1]];
        assert_eq!(determinant(&m, &[0, 1], &[0, 1]), -2);
        let m = vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]];
        assert_eq!(determinant(&m, &[0, 1, 2], &[0, 1, 2]), 2);
        let m = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(determinant(&m, &[0, 1], &[0, 1]), -1);
    }

    #[test]
    fn two_by_two_violation() {
        let m = vec![vec![1, 1], vec![1, -1]];
        match check_totally_unimodular(&m, &TuOptions::default()) {
            TuVerdict::Violated { det, .. } => assert_eq!(det, -2),
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn odd_cycle_incidence_is_not_tu() {
        // Undirected triangle incidence matrix has determinant ±2.
        let m = vec![vec![1, 0, 1], vec![1, 1, 0], vec![0, 1, 1]];
        assert!(!check_totally_unimodular(&m, &TuOptions::default()).is_clean());
    }

    #[test]
    fn rejects_entries_outside_unit_range() {
        let m = vec![vec![2]];
        assert_eq!(
            check_totally_unimodular(&m, &TuOptions::default()),
            TuVerdict::InvalidEntry { row: 0, col: 0, value: 2 }
        );
    }

    #[test]
    fn combinations_enumerate_in_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen.last().unwrap(), &vec![2, 3]);
    }
}
