//! Dense two-phase simplex for the small linear programs the discrete
//! oracle produces.
//!
//! All variables are implicitly non-negative; rows may be <=, >= or =.
//! Entering and leaving variables follow Bland's rule, so the method
//! terminates even on degenerate tableaus that cycle under steepest-descent
//! pivoting.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    /// Objective coefficients, to be maximized.
    pub maximize: Vec<f64>,
    /// (coefficients, relation, rhs); each coefficient vector must be as
    /// long as the objective.
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

const TOL: f64 = 1e-9;
/// Phase-1 optimum below this (in absolute value) still counts as feasible;
/// looser than TOL to absorb pivot rounding.
const FEAS_TOL: f64 = 1e-7;
const MAX_ITER: usize = 50_000;

pub fn simplex_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.maximize.len();
    for (coeffs, _, _) in &lp.rows {
        if coeffs.len() != n {
            return Err(Error::Lp(format!(
                "constraint row has {} coefficients, objective has {}",
                coeffs.len(),
                n
            )));
        }
    }

    // Normalize every rhs to be non-negative so the artificial basis is
    // feasible by construction.
    let mut rows = lp.rows.clone();
    for (coeffs, rel, rhs) in &mut rows {
        if *rhs < 0.0 {
            for c in coeffs.iter_mut() {
                *c = -*c;
            }
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let mut n_slack = 0usize;
    let mut n_art = 0usize;
    for (_, rel, _) in &rows {
        match rel {
            Relation::Le => n_slack += 1,
            Relation::Ge => {
                n_slack += 1;
                n_art += 1;
            }
            Relation::Eq => n_art += 1,
        }
    }
    let art_start = n + n_slack;
    let ncols = art_start + n_art;

    // Tableau rows carry the rhs in their final slot.
    let mut tableau: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut slack_col = n;
    let mut art_col = art_start;
    for (coeffs, rel, rhs) in &rows {
        let mut row = vec![0.0; ncols + 1];
        row[..n].copy_from_slice(coeffs);
        row[ncols] = *rhs;
        match rel {
            Relation::Le => {
                row[slack_col] = 1.0;
                basis.push(slack_col);
                slack_col += 1;
            }
            Relation::Ge => {
                row[slack_col] = -1.0;
                slack_col += 1;
                row[art_col] = 1.0;
                basis.push(art_col);
                art_col += 1;
            }
            Relation::Eq => {
                row[art_col] = 1.0;
                basis.push(art_col);
                art_col += 1;
            }
        }
        tableau.push(row);
    }

    let mut budget = MAX_ITER;

    if n_art > 0 {
        // Phase 1: maximize minus the sum of the artificials.
        let mut phase1_obj = vec![0.0; ncols];
        for c in art_start..ncols {
            phase1_obj[c] = -1.0;
        }
        if !run_simplex(&mut tableau, &mut basis, &phase1_obj, ncols, &mut budget)? {
            // Phase 1 cannot be unbounded (objective is bounded by 0).
            return Err(Error::Lp("phase 1 reported unbounded".into()));
        }
        let infeasibility: f64 = basis
            .iter()
            .zip(tableau.iter())
            .filter(|(b, _)| **b >= art_start)
            .map(|(_, row)| row[ncols])
            .sum();
        if infeasibility > FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive basic artificials (value ~0) out of the basis when a
        // structural or slack pivot exists; rows where none exists are
        // redundant and get dropped below.
        for i in 0..tableau.len() {
            if basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tableau[i][j].abs() > TOL) {
                    pivot(&mut tableau, &mut basis, i, j);
                }
            }
        }
        let mut kept_tableau = Vec::with_capacity(tableau.len());
        let mut kept_basis = Vec::with_capacity(basis.len());
        for (row, b) in tableau.into_iter().zip(basis.into_iter()) {
            if b < art_start {
                // Strip the artificial columns for phase 2.
                let rhs = row[ncols];
                let mut trimmed = row;
                trimmed.truncate(art_start);
                trimmed.push(rhs);
                kept_tableau.push(trimmed);
                kept_basis.push(b);
            }
        }
        tableau = kept_tableau;
        basis = kept_basis;
    }

    let mut phase2_obj = vec![0.0; art_start];
    phase2_obj[..n].copy_from_slice(&lp.maximize);
    if !run_simplex(&mut tableau, &mut basis, &phase2_obj, art_start, &mut budget)? {
        return Ok(LpOutcome::Unbounded);
    }

    let rhs_col = art_start;
    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = tableau[i][rhs_col];
        }
    }
    let value = lp
        .maximize
        .iter()
        .zip(x.iter())
        .map(|(c, v)| c * v)
        .sum();
    Ok(LpOutcome::Optimal { x, value })
}

/// Bland-rule iterations until optimal (true) or unbounded (false).
fn run_simplex(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    obj: &[f64],
    ncols: usize,
    budget: &mut usize,
) -> Result<bool> {
    loop {
        if *budget == 0 {
            return Err(Error::Lp("simplex iteration limit reached".into()));
        }
        *budget -= 1;

        // Entering column: lowest index with positive reduced cost.
        let mut entering = None;
        for j in 0..ncols {
            let mut reduced = obj[j];
            for (i, row) in tableau.iter().enumerate() {
                reduced -= obj[basis[i]] * row[j];
            }
            if reduced > TOL {
                entering = Some(j);
                break;
            }
        }
        let Some(col) = entering else {
            return Ok(true);
        };

        // Ratio test; ties broken toward the smallest basic index.
        let mut leaving: Option<(usize, f64)> = None;
        for (i, row) in tableau.iter().enumerate() {
            if row[col] > TOL {
                let ratio = row[ncols] / row[col];
                let better = match leaving {
                    None => true,
                    Some((best_i, best)) => {
                        ratio < best - TOL
                            || (ratio < best + TOL && basis[i] < basis[best_i])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((row_idx, _)) = leaving else {
            return Ok(false);
        };
        pivot(tableau, basis, row_idx, col);
    }
}

fn pivot(tableau: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let scale = tableau[r][c];
    for v in tableau[r].iter_mut() {
        *v /= scale;
    }
    for i in 0..tableau.len() {
        if i == r {
            continue;
        }
        let factor = tableau[i][c];
        if factor == 0.0 {
            continue;
        }
        for j in 0..tableau[r].len() {
            tableau[i][j] -= factor * tableau[r][j];
        }
        tableau[i][c] = 0.0;
    }
    basis[r] = c;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match simplex_solve(lp).unwrap() {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn single_bound() {
        let lp = LinearProgram {
            maximize: vec![1.0],
            rows: vec![(vec![1.0], Relation::Le, 1.0)],
        };
        let (x, value) = optimal(&lp);
        assert!((value - 1.0).abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_variable_polytope() {
        let lp = LinearProgram {
            maximize: vec![1.0, 1.0],
            rows: vec![
                (vec![1.0, 2.0], Relation::Le, 2.0),
                (vec![1.0, 0.0], Relation::Le, 1.0),
            ],
        };
        let (x, value) = optimal(&lp);
        assert!((value - 1.5).abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_normalizes() {
        // -x >= -1 is x <= 1 after normalization.
        let lp = LinearProgram {
            maximize: vec![1.0],
            rows: vec![(vec![-1.0], Relation::Ge, -1.0)],
        };
        let (_, value) = optimal(&lp);
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let lp = LinearProgram {
            maximize: vec![1.0],
            rows: vec![
                (vec![1.0], Relation::Ge, 2.0),
                (vec![1.0], Relation::Le, 1.0),
            ],
        };
        assert_eq!(simplex_solve(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let lp = LinearProgram {
            maximize: vec![1.0],
            rows: vec![(vec![1.0], Relation::Ge, 1.0)],
        };
        assert_eq!(simplex_solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_constraint() {
        let lp = LinearProgram {
            maximize: vec![2.0, 1.0],
            rows: vec![(vec![1.0, 1.0], Relation::Eq, 1.0)],
        };
        let (x, value) = optimal(&lp);
        assert!((value - 2.0).abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!(x[1].abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        // Same hyperplane twice; phase 1 must drop the duplicate row.
        let lp = LinearProgram {
            maximize: vec![1.0, 0.0],
            rows: vec![
                (vec![1.0, 1.0], Relation::Eq, 1.0),
                (vec![2.0, 2.0], Relation::Eq, 2.0),
            ],
        };
        let (_, value) = optimal(&lp);
        assert!((value - 1.0).abs() < 1e-10);
    }

    // Degenerate program on which steepest-descent pivoting cycles forever;
    // Bland's rule must terminate at the optimum.
    #[test]
    fn beale_degenerate_example() {
        let lp = LinearProgram {
            maximize: vec![0.75, -150.0, 0.02, -6.0],
            rows: vec![
                (vec![0.25, -60.0, -1.0 / 25.0, 9.0], Relation::Le, 0.0),
                (vec![0.5, -90.0, -1.0 / 50.0, 3.0], Relation::Le, 0.0),
                (vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0),
            ],
        };
        let (x, value) = optimal(&lp);
        assert!((value - 0.05).abs() < 1e-9, "value {value}");
        assert!((x[0] - 0.04).abs() < 1e-9);
        assert!(x[1].abs() < 1e-12);
        assert!((x[2] - 1.0).abs() < 1e-9);
        assert!(x[3].abs() < 1e-12);
    }

    #[test]
    fn rejects_ragged_rows() {
        let lp = LinearProgram {
            maximize: vec![1.0, 1.0],
            rows: vec![(vec![1.0], Relation::Le, 1.0)],
        };
        assert!(simplex_solve(&lp).is_err());
    }
}
