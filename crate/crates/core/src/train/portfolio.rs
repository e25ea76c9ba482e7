//! Dominance-constrained portfolio selection on a two-asset toy market.
//!
//! Wealth share `z` of the risky asset returns `z * xi` with `xi ~ U[0, 1]`,
//! measured against the staircase benchmark `G1(xi)`. The inner player is a
//! decreasing convex critic `u` that ascends the violation witness
//! `E[u(z xi)] - E[u(G1(xi))]`; the outer player descends the penalized
//! negative mean return `-E[z xi] + lambda * witness` and is clamped to its
//! feasible interval after every step. Both players run plain SGD.
//!
//! Because `G1(xi) <= xi <= z * xi` pointwise on the coupled draws, the
//! witness is non-positive for every decreasing `u` and every feasible `z`,
//! so the mean-return term drives `z` to the top of the interval with the
//! penalty asleep — the known solution of this market.

use super::TrainLog;
use crate::error::{Error, Result};
use crate::measures::benchmark_staircase;
use crate::net::{ConstraintProfile, MaxoutNet, NetShape};
use crate::opt::clamp_scalar;
use crate::rng::{self, streams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortfolioConfig {
    /// Weight of the dominance penalty in the `z` objective.
    pub lambda: f64,
    /// Squared-output regularizer weight for the critic.
    pub lambda_u_reg: f64,
    pub z_init: f64,
    /// Feasible interval for `z`, inclusive.
    pub z_bounds: (f64, f64),
    pub lr_z: f64,
    pub lr_critic: f64,
    pub batch: usize,
    /// Outer (`z`) updates.
    pub steps: usize,
    /// Critic updates per `z` update.
    pub critic_steps: usize,
    pub critic_shape: NetShape,
    pub seed: u64,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        PortfolioConfig {
            lambda: 1.0,
            lambda_u_reg: 1.0,
            z_init: 1.0,
            z_bounds: (1.0, 2.0),
            lr_z: 1e-3,
            lr_critic: 1e-3,
            batch: 512,
            steps: 5000,
            critic_steps: 1,
            critic_shape: NetShape::new(vec![1, 8, 8], 4).unwrap(),
            seed: 0,
        }
    }
}

impl PortfolioConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.z_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "z bounds ({lo}, {hi}) are not an interval"
            )));
        }
        if !(self.z_init >= lo && self.z_init <= hi) {
            return Err(Error::InvalidConfig(format!(
                "z_init {} outside [{lo}, {hi}]",
                self.z_init
            )));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("lambda_u_reg", self.lambda_u_reg),
            ("lr_z", self.lr_z),
            ("lr_critic", self.lr_critic),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.batch == 0 {
            return Err(Error::InvalidConfig("batch must be >= 1".into()));
        }
        if self.critic_shape.input_dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.critic_shape.input_dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct PortfolioResult {
    pub z: f64,
    pub critic: MaxoutNet,
    /// Columns: step, z, portfolio_mean, benchmark_mean, penalty. The penalty
    /// column is the raw witness on the step's batch, evaluated after the `z`
    /// update.
    pub log: TrainLog,
}

pub fn train_portfolio(cfg: &PortfolioConfig) -> Result<PortfolioResult> {
    cfg.validate()?;
    let profile = ConstraintProfile::decreasing_soft(cfg.lambda_u_reg);
    let mut critic = MaxoutNet::init(
        cfg.critic_shape.clone(),
        profile,
        rng::derive(cfg.seed, streams::CRITIC_INIT),
    );
    let mut data = rng::stream(cfg.seed, streams::DATA);
    let (lo, hi) = cfg.z_bounds;
    let mut z = cfg.z_init;
    let mut log = TrainLog::new(&["step", "z", "portfolio_mean", "benchmark_mean", "penalty"]);
    let mut grad = vec![0.0; critic.param_count()];

    for step in 0..cfg.steps {
        for _ in 0..cfg.critic_steps {
            let xi = draw_market(&mut data, cfg.batch);
            critic_ascent(&critic, z, &xi, cfg.lambda_u_reg, &mut grad);
            for (p, g) in critic.params_mut().iter_mut().zip(&grad) {
                *p += cfg.lr_critic * g;
            }
            critic.project();
        }

        // z descends -E[z xi] + lambda * E[u(z xi)]; only the first term and
        // the chain rule through u touch z.
        let xi = draw_market(&mut data, cfg.batch);
        let b = xi.len() as f64;
        let mut mean_xi = 0.0;
        let mut penalty_slope = 0.0;
        for &x in &xi {
            mean_xi += x / b;
            penalty_slope += critic.input_gradient(&[z * x])[0] * x / b;
        }
        z = clamp_scalar(z - cfg.lr_z * (-mean_xi + cfg.lambda * penalty_slope), lo, hi);

        let mut portfolio_mean = 0.0;
        let mut benchmark_mean = 0.0;
        let mut penalty = 0.0;
        for &x in &xi {
            let g1 = benchmark_staircase(x);
            portfolio_mean += z * x / b;
            benchmark_mean += g1 / b;
            penalty += (critic.value(&[z * x]) - critic.value(&[g1])) / b;
        }
        log.push(vec![step as f64, z, portfolio_mean, benchmark_mean, penalty]);
    }

    Ok(PortfolioResult { z, critic, log })
}

fn draw_market(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(0.0..1.0)).collect()
}

/// Ascent gradient of `E[u(z xi)] - E[u(G1(xi))]` minus the squared-output
/// regularizer on both point sets, written into `grad`.
fn critic_ascent(critic: &MaxoutNet, z: f64, xi: &[f64], lambda_reg: f64, grad: &mut [f64]) {
    grad.fill(0.0);
    let coeff = 1.0 / xi.len() as f64;
    for &x in xi {
        accumulate(critic, &[z * x], coeff, 1.0, lambda_reg, grad);
        accumulate(critic, &[benchmark_staircase(x)], coeff, -1.0, lambda_reg, grad);
    }
}

fn accumulate(
    critic: &MaxoutNet,
    point: &[f64],
    coeff: f64,
    sign: f64,
    lambda_reg: f64,
    grad: &mut [f64],
) {
    let (value, trace) = critic.forward(point);
    let (pgrad, _) = critic.backward(&trace, coeff * (sign - 2.0 * lambda_reg * value));
    for (g, d) in grad.iter_mut().zip(&pgrad) {
        *g += d;
    }
}
