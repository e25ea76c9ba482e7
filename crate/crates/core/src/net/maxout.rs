use super::{ConstraintProfile, Lipschitz, Mode, NetShape};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Scalar maxout network with a flat parameter vector.
///
/// Layout: weight groups in order, each unit-major / piece-major / coordinate
/// (trailing bias), then the output weights `a`. The flat layout lets the
/// optimizer treat the whole network as one parameter slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxoutNet {
    shape: NetShape,
    profile: ConstraintProfile,
    params: Vec<f64>,
}

/// Activations and argmax selections of one forward pass.
///
/// `activations[l]` is `x^(l+1)` (so `activations[0]` is the input);
/// `selections[g][i]` is the winning piece of unit `i` of weight group `g`,
/// ties resolved to the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub activations: Vec<Vec<f64>>,
    pub selections: Vec<Vec<usize>>,
    pub value: f64,
}

impl MaxoutNet {
    /// Initialise with i.i.d. uniform weights on `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`
    /// and project onto the profile's feasible set.
    pub fn init(shape: NetShape, profile: ConstraintProfile, seed: u64) -> Self {
        let mut params = vec![0.0; shape.param_count()];
        let mut r = rng::stream(seed, rng::streams::NET_INIT);
        for g in 0..shape.groups() {
            let bound = 1.0 / (shape.group_in(g) as f64).sqrt();
            for i in 0..shape.group_out(g) {
                for j in 0..shape.kernel() {
                    for c in 0..=shape.group_in(g) {
                        params[shape.w_index(g, i, j, c)] = r.random_range(-bound..=bound);
                    }
                }
            }
        }
        let bound = 1.0 / (shape.output_units() as f64).sqrt();
        for i in 0..shape.output_units() {
            params[shape.a_index(i)] = r.random_range(-bound..=bound);
        }
        let mut net = MaxoutNet {
            shape,
            profile,
            params,
        };
        net.project();
        net
    }

    /// The all-zero network (feasible under every profile; evaluates to 0).
    pub fn zeros(shape: NetShape, profile: ConstraintProfile) -> Self {
        let params = vec![0.0; shape.param_count()];
        MaxoutNet {
            shape,
            profile,
            params,
        }
    }

    pub fn shape(&self) -> &NetShape {
        &self.shape
    }

    pub fn profile(&self) -> ConstraintProfile {
        self.profile
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn w(&self, g: usize, i: usize, j: usize, c: usize) -> f64 {
        self.params[self.shape.w_index(g, i, j, c)]
    }

    /// Forward pass recording activations and piece selections.
    pub fn forward(&self, x: &[f64]) -> (f64, ForwardTrace) {
        assert_eq!(
            x.len(),
            self.shape.input_dim(),
            "input dimension mismatch: expected {}, got {}",
            self.shape.input_dim(),
            x.len()
        );
        let mut activations = Vec::with_capacity(self.shape.depth());
        let mut selections = Vec::with_capacity(self.shape.groups());
        activations.push(x.to_vec());
        let mut act = x.to_vec();
        for g in 0..self.shape.groups() {
            let (n_in, n_out) = (self.shape.group_in(g), self.shape.group_out(g));
            let scale = self.shape.group_scale(g);
            let mut next = vec![0.0; n_out];
            let mut sel = vec![0usize; n_out];
            for i in 0..n_out {
                let mut best = f64::NEG_INFINITY;
                let mut best_j = 0;
                for j in 0..self.shape.kernel() {
                    let mut v = self.w(g, i, j, n_in);
                    for c in 0..n_in {
                        v += self.w(g, i, j, c) * act[c];
                    }
                    if v > best {
                        best = v;
                        best_j = j;
                    }
                }
                next[i] = scale * best;
                sel[i] = best_j;
            }
            activations.push(next.clone());
            selections.push(sel);
            act = next;
        }
        let mut value = 0.0;
        for i in 0..self.shape.output_units() {
            value += self.params[self.shape.a_index(i)] * act[i];
        }
        (
            value,
            ForwardTrace {
                activations,
                selections,
                value,
            },
        )
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.forward(x).0
    }

    /// Backward pass on the affine piece fixed by `trace`. Returns
    /// (parameter gradient, input gradient), both scaled by `upstream`.
    pub fn backward(&self, trace: &ForwardTrace, upstream: f64) -> (Vec<f64>, Vec<f64>) {
        let mut pgrad = vec![0.0; self.params.len()];
        let last = &trace.activations[self.shape.groups()];
        let mut delta = vec![0.0; self.shape.output_units()];
        for i in 0..self.shape.output_units() {
            pgrad[self.shape.a_index(i)] = upstream * last[i];
            delta[i] = upstream * self.params[self.shape.a_index(i)];
        }
        for g in (0..self.shape.groups()).rev() {
            let (n_in, n_out) = (self.shape.group_in(g), self.shape.group_out(g));
            let scale = self.shape.group_scale(g);
            let act = &trace.activations[g];
            let mut below = vec![0.0; n_in];
            for i in 0..n_out {
                let j = trace.selections[g][i];
                let coeff = delta[i] * scale;
                if coeff == 0.0 {
                    continue;
                }
                let base = self.shape.w_index(g, i, j, 0);
                for c in 0..n_in {
                    pgrad[base + c] += coeff * act[c];
                    below[c] += coeff * self.params[base + c];
                }
                pgrad[base + n_in] += coeff;
            }
            delta = below;
        }
        (pgrad, delta)
    }

    /// Gradient of `f` with respect to the input, at `x`.
    pub fn input_gradient(&self, x: &[f64]) -> Vec<f64> {
        let (_, trace) = self.forward(x);
        self.backward(&trace, 1.0).1
    }

    /// Gradient of `upstream * f(x)` with respect to the parameters.
    pub fn param_gradient(&self, x: &[f64], upstream: f64) -> Vec<f64> {
        let (_, trace) = self.forward(x);
        self.backward(&trace, upstream).0
    }

    /// Double backprop: gradient with respect to the parameters of
    /// `<direction, grad_x f(x)>`, with the piece selections frozen by
    /// `trace`. Used by the gradient-penalty discriminator update. Bias
    /// coordinates do not enter the input gradient, so their entries are 0.
    pub fn double_backward(&self, trace: &ForwardTrace, direction: &[f64]) -> Vec<f64> {
        assert_eq!(
            direction.len(),
            self.shape.input_dim(),
            "direction dimension mismatch: expected {}, got {}",
            self.shape.input_dim(),
            direction.len()
        );
        // Forward-propagate the direction through the selected linear maps
        // (no biases): phi^(g+1) = scale_g * Wsel_g * phi^(g).
        let mut phis = Vec::with_capacity(self.shape.depth());
        phis.push(direction.to_vec());
        for g in 0..self.shape.groups() {
            let (n_in, n_out) = (self.shape.group_in(g), self.shape.group_out(g));
            let scale = self.shape.group_scale(g);
            let prev = &phis[g];
            let mut next = vec![0.0; n_out];
            for i in 0..n_out {
                let j = trace.selections[g][i];
                let base = self.shape.w_index(g, i, j, 0);
                let mut v = 0.0;
                for c in 0..n_in {
                    v += self.params[base + c] * prev[c];
                }
                next[i] = scale * v;
            }
            phis.push(next);
        }
        // Backward deltas of f itself (upstream 1): delta^(L) = a, then
        // delta^(g) = scale_g * Wsel_g^T delta^(g+1).
        let mut deltas = vec![Vec::new(); self.shape.depth()];
        let mut delta = vec![0.0; self.shape.output_units()];
        for i in 0..self.shape.output_units() {
            delta[i] = self.params[self.shape.a_index(i)];
        }
        deltas[self.shape.groups()] = delta.clone();
        for g in (0..self.shape.groups()).rev() {
            let (n_in, n_out) = (self.shape.group_in(g), self.shape.group_out(g));
            let scale = self.shape.group_scale(g);
            let mut below = vec![0.0; n_in];
            for i in 0..n_out {
                let j = trace.selections[g][i];
                let base = self.shape.w_index(g, i, j, 0);
                let coeff = delta[i] * scale;
                for c in 0..n_in {
                    below[c] += coeff * self.params[base + c];
                }
            }
            deltas[g] = below.clone();
            delta = below;
        }
        // d<dir, grad f>/dW_g[i][c] = scale_g * delta^(g+1)_i * phi^(g)_c;
        // d/da_i = phi^(L)_i.
        let mut pgrad = vec![0.0; self.params.len()];
        for g in 0..self.shape.groups() {
            let (n_in, n_out) = (self.shape.group_in(g), self.shape.group_out(g));
            let scale = self.shape.group_scale(g);
            for i in 0..n_out {
                let j = trace.selections[g][i];
                let base = self.shape.w_index(g, i, j, 0);
                let coeff = scale * deltas[g + 1][i];
                for c in 0..n_in {
                    pgrad[base + c] = coeff * phis[g][c];
                }
            }
        }
        for i in 0..self.shape.output_units() {
            pgrad[self.shape.a_index(i)] = phis[self.shape.groups()][i];
        }
        pgrad
    }

    /// Project the parameters onto the profile's feasible set: sign clamps
    /// first (they only shrink norms), then norm rescaling under `hard`
    /// profiles. Biases are never sign-clamped.
    pub fn project(&mut self) {
        match self.profile.mode {
            Mode::Unconstrained => {}
            Mode::InputConvex | Mode::InputConvexDecreasing => {
                if self.profile.mode == Mode::InputConvexDecreasing {
                    let g = 0;
                    for i in 0..self.shape.group_out(g) {
                        for j in 0..self.shape.kernel() {
                            for c in 0..self.shape.group_in(g) {
                                let idx = self.shape.w_index(g, i, j, c);
                                if self.params[idx] > 0.0 {
                                    self.params[idx] = 0.0;
                                }
                            }
                        }
                    }
                }
                for g in 1..self.shape.groups() {
                    for i in 0..self.shape.group_out(g) {
                        for j in 0..self.shape.kernel() {
                            for c in 0..self.shape.group_in(g) {
                                let idx = self.shape.w_index(g, i, j, c);
                                if self.params[idx] < 0.0 {
                                    self.params[idx] = 0.0;
                                }
                            }
                        }
                    }
                }
                for i in 0..self.shape.output_units() {
                    let idx = self.shape.a_index(i);
                    if self.params[idx] < 0.0 {
                        self.params[idx] = 0.0;
                    }
                }
            }
        }
        if let Lipschitz::Hard(c) = self.profile.lipschitz {
            for g in 0..self.shape.groups() {
                let vec_len = self.shape.group_in(g) + 1;
                for i in 0..self.shape.group_out(g) {
                    for j in 0..self.shape.kernel() {
                        let base = self.shape.w_index(g, i, j, 0);
                        let norm: f64 = (0..vec_len)
                            .map(|c| self.params[base + c] * self.params[base + c])
                            .sum::<f64>()
                            .sqrt();
                        // The slack keeps re-projection a no-op: a rescaled
                        // vector's recomputed norm is 1 only up to rounding.
                        if norm > 1.0 + 1e-12 {
                            for k in 0..vec_len {
                                self.params[base + k] /= norm;
                            }
                        }
                    }
                }
            }
            let off = self.shape.output_offset();
            let norm: f64 = (0..self.shape.output_units())
                .map(|i| self.params[off + i] * self.params[off + i])
                .sum::<f64>()
                .sqrt();
            if norm > c * (1.0 + 1e-12) {
                let ratio = c / norm;
                for i in 0..self.shape.output_units() {
                    self.params[off + i] *= ratio;
                }
            }
        }
    }

    /// True when the parameters satisfy the profile's constraints (within
    /// `tol` on the norm caps).
    pub fn is_feasible(&self, tol: f64) -> bool {
        if self.profile.mode.is_convex() {
            for g in 1..self.shape.groups() {
                for i in 0..self.shape.group_out(g) {
                    for j in 0..self.shape.kernel() {
                        for c in 0..self.shape.group_in(g) {
                            if self.w(g, i, j, c) < 0.0 {
                                return false;
                            }
                        }
                    }
                }
            }
            for i in 0..self.shape.output_units() {
                if self.params[self.shape.a_index(i)] < 0.0 {
                    return false;
                }
            }
        }
        if self.profile.mode == Mode::InputConvexDecreasing {
            for i in 0..self.shape.group_out(0) {
                for j in 0..self.shape.kernel() {
                    for c in 0..self.shape.group_in(0) {
                        if self.w(0, i, j, c) > 0.0 {
                            return false;
                        }
                    }
                }
            }
        }
        if let Lipschitz::Hard(c) = self.profile.lipschitz {
            for g in 0..self.shape.groups() {
                let vec_len = self.shape.group_in(g) + 1;
                for i in 0..self.shape.group_out(g) {
                    for j in 0..self.shape.kernel() {
                        let base = self.shape.w_index(g, i, j, 0);
                        let norm: f64 = (0..vec_len)
                            .map(|k| self.params[base + k] * self.params[base + k])
                            .sum::<f64>()
                            .sqrt();
                        if norm > 1.0 + tol {
                            return false;
                        }
                    }
                }
            }
            let off = self.shape.output_offset();
            let norm: f64 = (0..self.shape.output_units())
                .map(|i| self.params[off + i] * self.params[off + i])
                .sum::<f64>()
                .sqrt();
            if norm > c + tol {
                return false;
            }
        }
        true
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("maxout net serializes")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        let net: MaxoutNet = serde_json::from_str(s)?;
        if net.params.len() != net.shape.param_count() {
            return Err(crate::Error::InvalidShape(format!(
                "parameter vector length {} does not match shape ({} expected)",
                net.params.len(),
                net.shape.param_count()
            )));
        }
        Ok(net)
    }
}

#[cfg(test)]
pub(crate) mod test_nets {
    use super::*;

    /// f(x) = |x|: widths (1,1), kernel 2, pieces x and -x, output weight 1.
    pub fn abs_net() -> MaxoutNet {
        let shape = NetShape::new(vec![1, 1], 2).unwrap();
        let mut net = MaxoutNet::zeros(shape.clone(), ConstraintProfile::convex_hard(1.0));
        net.params_mut()[shape.w_index(0, 0, 0, 0)] = 1.0;
        net.params_mut()[shape.w_index(0, 0, 1, 0)] = -1.0;
        net.params_mut()[shape.a_index(0)] = 1.0;
        net
    }

    /// f(x) = c * x + b via a single piece (slope c, bias b), kernel 1.
    pub fn linear_net(c: f64, b: f64) -> MaxoutNet {
        let shape = NetShape::new(vec![1, 1], 1).unwrap();
        let mut net = MaxoutNet::zeros(shape.clone(), ConstraintProfile::unconstrained());
        net.params_mut()[shape.w_index(0, 0, 0, 0)] = c;
        net.params_mut()[shape.w_index(0, 0, 0, 1)] = b;
        net.params_mut()[shape.a_index(0)] = 1.0;
        net
    }

    /// Three layers, widths (1,2,1), kernel 2, computing |x|/sqrt(2):
    /// hidden unit 0 is max(x,-x), unit 1 is 0; the pre-output unit passes
    /// hidden unit 0 through.
    pub fn three_layer_abs() -> MaxoutNet {
        let shape = NetShape::new(vec![1, 2, 1], 2).unwrap();
        let mut net = MaxoutNet::zeros(shape.clone(), ConstraintProfile::convex_hard(1.0));
        net.params_mut()[shape.w_index(0, 0, 0, 0)] = 1.0;
        net.params_mut()[shape.w_index(0, 0, 1, 0)] = -1.0;
        for j in 0..2 {
            net.params_mut()[shape.w_index(1, 0, j, 0)] = 1.0;
        }
        net.params_mut()[shape.a_index(0)] = 1.0;
        net
    }
}
