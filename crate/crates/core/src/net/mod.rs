//! Maxout networks and input-convex constraint profiles.
//!
//! A scalar maxout network with widths `M = (m_1, ..., m_L)` and kernel `k`
//! evaluates, starting from `x^(1) = x`,
//!
//! ```text
//!   x^(l)_i = (1/sqrt(m_l)) * max_j <w^(l-1)_{i,j}, (x^(l-1), 1)>      2 <= l <= L
//!   f(x)    = sum_i a_i x^(L)_i
//! ```
//!
//! where each hidden weight vector `w^(l)_{i,j}` has one trailing bias
//! coordinate. With the output weights `a` non-negative and the non-bias
//! hidden weights of every layer past the first non-negative, the network is
//! convex in its input (each unit is a max of affine maps of convex inputs
//! with non-negative mixing); additionally forcing the first-layer non-bias
//! weights non-positive makes it non-increasing in 1-D, the class used for
//! second-order stochastic dominance. Norm caps (`hard` profiles) bound every
//! hidden weight vector by 1 and the output vector by `C`, which bounds the
//! gradient of the network by `C` — the critic classes the estimators train
//! over.

mod maxout;
mod residual;

pub use maxout::{ForwardTrace, MaxoutNet};
pub use residual::{GeneratorShape, GeneratorTrace, ResidualMaxoutNet};

#[cfg(test)]
pub(crate) use maxout::test_nets;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Layer widths `(m_1, ..., m_L)` and maxout kernel size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetShape {
    widths: Vec<usize>,
    kernel: usize,
}

impl NetShape {
    pub fn new(widths: Vec<usize>, kernel: usize) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "need at least an input and an output layer, got {} widths",
                widths.len()
            )));
        }
        if let Some(w) = widths.iter().find(|&&w| w == 0) {
            let _ = w;
            return Err(Error::InvalidShape("zero layer width".into()));
        }
        if kernel == 0 {
            return Err(Error::InvalidShape("zero maxout kernel".into()));
        }
        Ok(NetShape { widths, kernel })
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// Number of layers `L` (input layer included).
    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    /// Units feeding the output dot product (`m_L`).
    pub fn output_units(&self) -> usize {
        *self.widths.last().unwrap()
    }

    /// Weight groups; group `g` maps layer `g` to layer `g+1`.
    pub(crate) fn groups(&self) -> usize {
        self.widths.len() - 1
    }

    pub(crate) fn group_in(&self, g: usize) -> usize {
        self.widths[g]
    }

    pub(crate) fn group_out(&self, g: usize) -> usize {
        self.widths[g + 1]
    }

    /// Per-group scale `1/sqrt` of the width the group feeds.
    pub(crate) fn group_scale(&self, g: usize) -> f64 {
        1.0 / (self.widths[g + 1] as f64).sqrt()
    }

    pub(crate) fn group_size(&self, g: usize) -> usize {
        self.group_out(g) * self.kernel * (self.group_in(g) + 1)
    }

    pub(crate) fn group_offset(&self, g: usize) -> usize {
        (0..g).map(|h| self.group_size(h)).sum()
    }

    pub(crate) fn output_offset(&self) -> usize {
        self.group_offset(self.groups())
    }

    pub fn param_count(&self) -> usize {
        self.output_offset() + self.output_units()
    }

    /// Flat index of coordinate `c` of piece `j` of unit `i` in group `g`.
    /// `c == group_in(g)` addresses the bias coordinate.
    pub(crate) fn w_index(&self, g: usize, i: usize, j: usize, c: usize) -> usize {
        let vec_len = self.group_in(g) + 1;
        self.group_offset(g) + (i * self.kernel + j) * vec_len + c
    }

    pub(crate) fn a_index(&self, i: usize) -> usize {
        self.output_offset() + i
    }
}

/// Sign structure of the parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Unconstrained,
    /// Convex in the input: `a >= 0`, non-bias hidden weights past the first
    /// layer `>= 0`.
    InputConvex,
    /// Convex and non-increasing (1-D): additionally first-layer non-bias
    /// weights `<= 0`.
    InputConvexDecreasing,
}

impl Mode {
    pub fn is_convex(self) -> bool {
        matches!(self, Mode::InputConvex | Mode::InputConvexDecreasing)
    }
}

/// How the gradient bound is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lipschitz {
    /// No norm projection; the carried weight is the coefficient of the
    /// squared-output regularizer used during critic training.
    Soft(f64),
    /// Project every hidden weight vector to norm <= 1 and the output vector
    /// to norm <= C; the network gradient is then bounded by C everywhere.
    Hard(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintProfile {
    pub mode: Mode,
    pub lipschitz: Lipschitz,
}

impl ConstraintProfile {
    pub fn unconstrained() -> Self {
        ConstraintProfile {
            mode: Mode::Unconstrained,
            lipschitz: Lipschitz::Soft(0.0),
        }
    }

    /// Unconstrained signs, hard norm caps: the weight-clipped profile used
    /// for WGAN discriminators.
    pub fn clipped(c: f64) -> Self {
        ConstraintProfile {
            mode: Mode::Unconstrained,
            lipschitz: Lipschitz::Hard(c),
        }
    }

    pub fn convex_hard(c: f64) -> Self {
        ConstraintProfile {
            mode: Mode::InputConvex,
            lipschitz: Lipschitz::Hard(c),
        }
    }

    pub fn convex_soft(lambda: f64) -> Self {
        ConstraintProfile {
            mode: Mode::InputConvex,
            lipschitz: Lipschitz::Soft(lambda),
        }
    }

    pub fn decreasing_hard(c: f64) -> Self {
        ConstraintProfile {
            mode: Mode::InputConvexDecreasing,
            lipschitz: Lipschitz::Hard(c),
        }
    }

    pub fn decreasing_soft(lambda: f64) -> Self {
        ConstraintProfile {
            mode: Mode::InputConvexDecreasing,
            lipschitz: Lipschitz::Soft(lambda),
        }
    }
}
