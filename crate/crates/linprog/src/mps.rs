use std::fmt::Write;

use crate::model::{LinearProgram, Relation};

/// Renders the program in fixed-column MPS. Columns are named `X<j>`, rows
/// `R<i>`; integer columns are wrapped in `MARKER` blocks.
pub fn to_mps(lp: &LinearProgram, name: &str) -> String {
    let n = lp.num_vars();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            by_col[j].push((i, a));
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n N  COST\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let kind = match row.relation {
            Relation::Le => 'L',
            Relation::Ge => 'G',
            Relation::Eq => 'E',
        };
        let _ = writeln!(out, " {kind}  R{i}");
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for j in 0..n {
        if lp.integer[j] != in_int {
            let tag = if lp.integer[j] { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", format!("M{markers}"), "'MARKER'", tag);
            markers += 1;
            in_int = lp.integer[j];
        }
        let col = format!("X{j}");
        if lp.objective[j] != 0.0 {
            let _ = writeln!(out, "    {col:<8}  {:<8}  {:>12}", "COST", num(lp.objective[j]));
        }
        for &(i, a) in &by_col[j] {
            let _ = writeln!(out, "    {col:<8}  {:<8}  {:>12}", format!("R{i}"), num(a));
        }
    }
    if in_int {
        let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", format!("M{markers}"), "'MARKER'", "'INTEND'");
    }

    out.push_str("RHS\n");
    if lp.objective_offset != 0.0 {
        // MPS stores the negated objective constant on the objective row.
        let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", "COST", num(-lp.objective_offset));
    }
    for (i, row) in lp.rows.iter().enumerate() {
        if row.rhs != 0.0 {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", format!("R{i}"), num(row.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let col = format!("X{j}");
        let mut line = |kind: &str, v: Option<f64>| {
            let value = v.map(num).unwrap_or_default();
            let _ = writeln!(out, " {kind} {:<8}  {col:<8}  {value:>12}", "BND");
        };
        if lo == hi {
            line("FX", Some(lo));
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => line("FR", None),
            (false, true) => {
                line("MI", None);
                line("UP", Some(hi));
            }
            (true, _) => {
                if lo != 0.0 {
                    line("LO", Some(lo));
                }
                if hi.is_finite() {
                    line("UP", Some(hi));
                } else if lp.integer[j] {
                    // Some readers default integer columns to a unit upper bound.
                    line("PL", None);
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn num(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 12 {
        s
    } else {
        format!("{v:.6e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_bounds() {
        let mut lp = LinearProgram::new();
        let x = lp.add_binary(2.0);
        let y = lp.add_var(-1.0, f64::NEG_INFINITY, 4.0);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Ge, 1.5);
        let text = to_mps(&lp, "demo");
        for needle in ["NAME          demo", " G  R0", "'INTORG'", "'INTEND'", " UP BND       X0", " MI BND       X1", "ENDATA"] {
            assert!(text.contains(needle), "missing {needle:?} in\n{text}");
        }
    }
}
