//! Learning with the Choquet (convex) stochastic order.
//!
//! The library is organised around a variational criterion: a measure `ν`
//! dominates `μ` in the convex order exactly when every convex test function
//! integrates at least as much under `ν` as under `μ`. Restricting the test
//! functions to convex functions with gradients in a bounded set `K` gives a
//! computable surrogate (the variational dominance criterion, VDC) and a
//! companion transport-flavoured distance (the CT distance). Both are
//! estimated here with input-convex maxout networks trained by projected
//! Adam, and cross-checked against exact oracles (closed forms for bump
//! densities, and a linear program for discrete 1-D measures).
//!
//! Modules:
//! - [`net`]: maxout networks, input-convex constraint profiles, gradients.
//! - [`opt`]: Adam and projected updates.
//! - [`measures`]: empirical measures, samplers, energy distance.
//! - [`estimators`]: VDC / CT estimation with trained critics.
//! - [`oracle`]: quadrature + closed forms, discrete LP, dense simplex.
//! - [`train`]: portfolio, dominance-GAN and CT-GAN harnesses, rate study.

pub mod error;
pub mod estimators;
pub mod measures;
pub mod net;
pub mod opt;
pub mod oracle;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
pub use estimators::{
    d_ct_discrepancy, d_ct_from_vdc, estimate_ct, estimate_vdc, gradient_pushforward, vdc_loss,
    write_trace_csv, CriticConfig, CtEstimate, TraceRow, VdcEstimate,
};
pub use measures::{benchmark_staircase, energy_distance, EmpiricalMeasure, Sampler};
pub use net::{
    ConstraintProfile, ForwardTrace, GeneratorShape, Lipschitz, MaxoutNet, Mode, NetShape,
    ResidualMaxoutNet,
};
pub use opt::{clamp_scalar, projected_update, AdamState};
pub use oracle::{
    analytic_same_mean, analytic_same_variance, bump_f_g, lp_d_ct_discrete, lp_vdc_discrete,
    simplex_solve, BumpDensity, BumpMode, BumpSpec, FgTable, LinearProgram, LpOutcome,
    LpVdcSolution, Relation, SameMeanValues, SameVarianceValues,
};
pub use train::{
    rate_experiment, train_ct_gan, train_dominance_gan, train_portfolio, train_wgan, GanConfig,
    GanResult, GpMode, PortfolioConfig, PortfolioResult, RateConfig, RatePoint, RateResult,
    TrainLog,
};
