//! Exact reference values the estimators are tested against: closed forms
//! (via high-resolution quadrature) for pairs of bump densities, and an
//! exact linear program for discrete measures on the line.

pub mod bump;
pub mod lp;
pub mod simplex;

pub use bump::{
    analytic_same_mean, analytic_same_variance, bump_f_g, BumpDensity, BumpMode, BumpSpec,
    FgTable, SameMeanValues, SameVarianceValues, DEFAULT_GRID,
};
pub use lp::{lp_d_ct_discrete, lp_vdc_discrete, LpVdcSolution, MAX_ATOMS};
pub use simplex::{simplex_solve, LinearProgram, LpOutcome, Relation};
