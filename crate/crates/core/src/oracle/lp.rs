//! Exact VDC values for discrete measures on the line, via a linear
//! program over the critic's values at the merged support.
//!
//! For atoms x_0 < ... < x_{n-1} with net weights d_i (minus-weight minus
//! plus-weight), the supremum of sum d_i u(x_i) over convex u with
//! |u'| <= C depends on u only through its values at the atoms, and a value
//! vector is attainable exactly when its chord slopes are non-decreasing
//! and lie in [-C, C]. Substituting v_i = u(x_i) - u(x_0) + C (x_i - x_0)
//! makes every variable non-negative and every constraint a <= row with
//! non-negative right-hand side, so the slack basis is feasible and the
//! solver skips phase 1.

use crate::measures::EmpiricalMeasure;
use crate::oracle::simplex::{simplex_solve, LinearProgram, LpOutcome, Relation};
use crate::{Error, Result};

/// Largest merged support the dense solver accepts.
pub const MAX_ATOMS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct LpVdcSolution {
    pub value: f64,
    /// Merged support, sorted.
    pub support: Vec<f64>,
    /// Optimal critic values at the support, shifted so the minimum is 0.
    pub values: Vec<f64>,
    /// A subgradient of the optimal critic at each support point (the right
    /// chord slope, clamped to [-C, C]).
    pub subgradients: Vec<f64>,
}

/// Exact VDC(plus || minus) with gradient bound C for one-dimensional
/// discrete measures.
pub fn lp_vdc_discrete(
    plus: &EmpiricalMeasure,
    minus: &EmpiricalMeasure,
    c: f64,
) -> Result<LpVdcSolution> {
    if plus.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: plus.dim(),
        });
    }
    if minus.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: minus.dim(),
        });
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "gradient bound must be positive and finite, got {c}"
        )));
    }

    // Merge the two supports; equal coordinates collapse into one atom.
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(plus.len() + minus.len());
    for i in 0..plus.len() {
        atoms.push((plus.point(i)[0], -plus.weights()[i]));
    }
    for i in 0..minus.len() {
        atoms.push((minus.point(i)[0], minus.weights()[i]));
    }
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut support = Vec::new();
    let mut d = Vec::new();
    for (x, w) in atoms {
        if support.last() == Some(&x) {
            *d.last_mut().unwrap() += w;
        } else {
            support.push(x);
            d.push(w);
        }
    }
    let n = support.len();
    if n > MAX_ATOMS {
        return Err(Error::InvalidConfig(format!(
            "merged support has {n} atoms; the dense solver accepts at most {MAX_ATOMS}"
        )));
    }
    if n == 1 {
        return Ok(LpVdcSolution {
            value: 0.0,
            support,
            values: vec![0.0],
            subgradients: vec![0.0],
        });
    }

    let gaps: Vec<f64> = (0..n - 1).map(|i| support[i + 1] - support[i]).collect();

    // LP variables are v_1..v_{n-1} (v_0 = 0 is substituted away), mapped
    // to columns 0..n-2.
    let nv = n - 1;
    let col = |atom: usize| atom - 1;
    let mut rows = Vec::with_capacity(n - 1);
    // Convexity: chord slope over gap i no larger than over gap i+1.
    for i in 0..n.saturating_sub(2) {
        let mut coeffs = vec![0.0; nv];
        coeffs[col(i + 1)] = gaps[i + 1] + gaps[i];
        if i > 0 {
            coeffs[col(i)] = -gaps[i + 1];
        }
        coeffs[col(i + 2)] = -gaps[i];
        rows.push((coeffs, Relation::Le, 0.0));
    }
    // Top slope cap; the bottom cap is the built-in v_1 >= 0.
    {
        let mut coeffs = vec![0.0; nv];
        coeffs[col(n - 1)] = 1.0;
        if n >= 3 {
            coeffs[col(n - 2)] = -1.0;
        }
        rows.push((coeffs, Relation::Le, 2.0 * c * gaps[n - 2]));
    }
    let maximize: Vec<f64> = (1..n).map(|i| d[i]).collect();
    let lp = LinearProgram { maximize, rows };

    let v = match simplex_solve(&lp)? {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible => {
            return Err(Error::Lp("value program reported infeasible".into()))
        }
        LpOutcome::Unbounded => {
            return Err(Error::Lp("value program reported unbounded".into()))
        }
    };

    // Undo the substitution and read the value off the critic directly.
    let mut values: Vec<f64> = Vec::with_capacity(n);
    values.push(0.0);
    for i in 1..n {
        values.push(v[col(i)] - c * (support[i] - support[0]));
    }
    let value = values.iter().zip(d.iter()).map(|(u, w)| u * w).sum::<f64>();

    let low = values.iter().cloned().fold(f64::INFINITY, f64::min);
    for u in &mut values {
        *u -= low;
    }
    let mut subgradients: Vec<f64> = (0..n - 1)
        .map(|i| ((values[i + 1] - values[i]) / gaps[i]).clamp(-c, c))
        .collect();
    subgradients.push(subgradients[n - 2]);

    Ok(LpVdcSolution {
        value,
        support,
        values,
        subgradients,
    })
}

/// Symmetric distance: the two directed VDC values added together.
pub fn lp_d_ct_discrete(
    plus: &EmpiricalMeasure,
    minus: &EmpiricalMeasure,
    c: f64,
) -> Result<f64> {
    Ok(lp_vdc_discrete(plus, minus, c)?.value + lp_vdc_discrete(minus, plus, c)?.value)
}
