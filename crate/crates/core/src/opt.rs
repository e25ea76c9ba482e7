//! First-order updates: Adam with bias correction, and the projected variant
//! used for constrained critics.

use crate::net::MaxoutNet;

/// Adam state over one flat parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(n: usize, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One descent step along `grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count mismatch");
        assert_eq!(grads.len(), self.m.len(), "gradient count mismatch");
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Adam step on the network parameters followed by projection onto the
/// network's constraint profile, so iterates stay feasible.
pub fn projected_update(net: &mut MaxoutNet, state: &mut AdamState, grads: &[f64]) {
    state.step(net.params_mut(), grads);
    net.project();
}

/// Clamp a scalar into `[lo, hi]`.
pub fn clamp_scalar(z: f64, lo: f64, hi: f64) -> f64 {
    assert!(lo <= hi, "clamp_scalar: lo {lo} > hi {hi}");
    z.clamp(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{ConstraintProfile, NetShape};

    #[test]
    fn first_step_moves_by_lr() {
        // theta = 0, g = 1, lr = 0.1: bias-corrected first step is
        // lr / (1 + eps), i.e. -0.1 up to 1e-9.
        let mut adam = AdamState::new(1, 0.1);
        let mut p = vec![0.0];
        adam.step(&mut p, &[1.0]);
        assert!((p[0] - (-0.1)).abs() <= 1e-7);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut adam = AdamState::new(3, 0.05);
        let mut p = vec![1.0, -2.0, 0.5];
        let before = p.clone();
        adam.step(&mut p, &[0.0, 0.0, 0.0]);
        assert_eq!(p, before);
    }

    #[test]
    fn constant_gradient_steps_have_lr_magnitude() {
        let mut adam = AdamState::new(1, 0.02);
        let mut p = vec![0.0];
        let mut prev = 0.0;
        for _ in 0..2 {
            adam.step(&mut p, &[1.0]);
            let delta = p[0] - prev;
            assert!((delta.abs() - 0.02).abs() <= 1e-6, "step {delta}");
            prev = p[0];
        }
    }

    #[test]
    fn projected_update_stays_feasible_and_is_deterministic() {
        let shape = NetShape::new(vec![1, 4, 3], 2).unwrap();
        let run = || {
            let mut net =
                MaxoutNet::init(shape.clone(), ConstraintProfile::decreasing_hard(1.0), 5);
            let mut adam = AdamState::new(net.param_count(), 0.05);
            for t in 0..20 {
                let grads: Vec<f64> = (0..net.param_count())
                    .map(|i| ((i + t) % 5) as f64 - 2.0)
                    .collect();
                projected_update(&mut net, &mut adam, &grads);
                assert!(net.is_feasible(1e-12));
            }
            net
        };
        assert_eq!(run().params(), run().params());
    }

    #[test]
    fn projected_update_with_zero_gradient_keeps_feasible_net() {
        let shape = NetShape::new(vec![1, 3], 2).unwrap();
        let mut net = MaxoutNet::init(shape, ConstraintProfile::convex_hard(1.0), 11);
        let before = net.params().to_vec();
        let mut adam = AdamState::new(net.param_count(), 0.1);
        projected_update(&mut net, &mut adam, &vec![0.0; before.len()]);
        assert_eq!(net.params(), &before[..]);
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_scalar(2.5, 1.0, 2.0), 2.0);
        assert_eq!(clamp_scalar(1.4, 1.0, 2.0), 1.4);
        assert_eq!(clamp_scalar(0.2, 1.0, 2.0), 1.0);
    }

    #[test]
    #[should_panic(expected = "clamp_scalar")]
    fn clamp_rejects_inverted_bounds() {
        clamp_scalar(0.0, 2.0, 1.0);
    }

    proptest::proptest! {
        #[test]
        fn clamp_lands_inside(z in -10.0f64..10.0, lo in -5.0f64..0.0, width in 0.0f64..5.0) {
            let hi = lo + width;
            let c = clamp_scalar(z, lo, hi);
            proptest::prop_assert!(c >= lo && c <= hi);
            if z >= lo && z <= hi {
                proptest::prop_assert_eq!(c, z);
            }
        }
    }
}
