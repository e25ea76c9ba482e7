use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Shape of the residual maxout generator.
///
/// `layers` counts linear layers: `layers - 1` residual blocks followed by a
/// final linear map to `output` coordinates. Block `b` computes
/// `h_{b+1} = maxout_k(W_b h_b + bias_b) + R_b z` with `h_0 = z`, so every
/// block receives a skip connection from the latent input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorShape {
    pub latent: usize,
    pub hidden: usize,
    pub output: usize,
    pub layers: usize,
    pub kernel: usize,
}

impl GeneratorShape {
    pub fn blocks(&self) -> usize {
        self.layers - 1
    }

    fn block_in(&self, b: usize) -> usize {
        if b == 0 {
            self.latent
        } else {
            self.hidden
        }
    }

    /// W_b, bias_b, R_b sizes.
    fn block_size(&self, b: usize) -> usize {
        let rows = self.hidden * self.kernel;
        rows * self.block_in(b) + rows + self.hidden * self.latent
    }

    fn block_offset(&self, b: usize) -> usize {
        (0..b).map(|h| self.block_size(h)).sum()
    }

    fn out_offset(&self) -> usize {
        self.block_offset(self.blocks())
    }

    pub fn param_count(&self) -> usize {
        self.out_offset() + self.output * self.hidden + self.output
    }

    fn valid(&self) -> bool {
        self.latent >= 1
            && self.hidden >= 1
            && self.output >= 1
            && self.layers >= 2
            && self.kernel >= 1
    }
}

/// Unconstrained multi-output maxout network with input-to-hidden residual
/// connections; the generator architecture of the 2-D experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualMaxoutNet {
    shape: GeneratorShape,
    params: Vec<f64>,
}

/// Forward record for the backward pass: the block inputs `h_0..h_B` and the
/// winning piece of every unit of every block.
#[derive(Debug, Clone)]
pub struct GeneratorTrace {
    pub inputs: Vec<Vec<f64>>,
    pub selections: Vec<Vec<usize>>,
}

impl ResidualMaxoutNet {
    pub fn init(shape: GeneratorShape, seed: u64) -> Self {
        assert!(shape.valid(), "invalid generator shape {shape:?}");
        let mut params = vec![0.0; shape.param_count()];
        let mut r = rng::stream(seed, rng::streams::NET_INIT);
        for b in 0..shape.blocks() {
            let off = shape.block_offset(b);
            let rows = shape.hidden * shape.kernel;
            let n_in = shape.block_in(b);
            let wb = 1.0 / (n_in as f64).sqrt();
            for idx in 0..rows * n_in + rows {
                params[off + idx] = r.random_range(-wb..=wb);
            }
            let rb = 1.0 / (shape.latent as f64).sqrt();
            for idx in 0..shape.hidden * shape.latent {
                params[off + rows * n_in + rows + idx] = r.random_range(-rb..=rb);
            }
        }
        let ob = 1.0 / (shape.hidden as f64).sqrt();
        for idx in shape.out_offset()..shape.param_count() {
            params[idx] = r.random_range(-ob..=ob);
        }
        ResidualMaxoutNet { shape, params }
    }

    pub fn shape(&self) -> GeneratorShape {
        self.shape
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

    pub fn forward(&self, z: &[f64]) -> (Vec<f64>, GeneratorTrace) {
        let s = &self.shape;
        assert_eq!(
            z.len(),
            s.latent,
            "latent dimension mismatch: expected {}, got {}",
            s.latent,
            z.len()
        );
        let mut inputs = Vec::with_capacity(s.blocks() + 1);
        let mut selections = Vec::with_capacity(s.blocks());
        let mut h = z.to_vec();
        inputs.push(h.clone());
        for b in 0..s.blocks() {
            let off = s.block_offset(b);
            let n_in = s.block_in(b);
            let rows = s.hidden * s.kernel;
            let r_off = off + rows * n_in + rows;
            let mut next = vec![0.0; s.hidden];
            let mut sel = vec![0usize; s.hidden];
            for u in 0..s.hidden {
                let mut best = f64::NEG_INFINITY;
                let mut best_j = 0;
                for j in 0..s.kernel {
                    let m = u * s.kernel + j;
                    let mut v = self.params[off + rows * n_in + m];
                    let w_row = off + m * n_in;
                    for c in 0..n_in {
                        v += self.params[w_row + c] * h[c];
                    }
                    if v > best {
                        best = v;
                        best_j = j;
                    }
                }
                let mut res = 0.0;
                for l in 0..s.latent {
                    res += self.params[r_off + u * s.latent + l] * z[l];
                }
                next[u] = best + res;
                sel[u] = best_j;
            }
            inputs.push(next.clone());
            selections.push(sel);
            h = next;
        }
        let oo = s.out_offset();
        let mut y = vec![0.0; s.output];
        for o in 0..s.output {
            let mut v = self.params[oo + s.output * s.hidden + o];
            for u in 0..s.hidden {
                v += self.params[oo + o * s.hidden + u] * h[u];
            }
            y[o] = v;
        }
        (y, GeneratorTrace { inputs, selections })
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.forward(z).0
    }

    /// Vector-Jacobian product: the gradient of `<upstream, g(z)>` with
    /// respect to the parameters, on the affine piece fixed by `trace`.
    /// Accumulates into `pgrad` so a batch can share one buffer.
    pub fn vjp_into(&self, trace: &GeneratorTrace, upstream: &[f64], pgrad: &mut [f64]) {
        let s = &self.shape;
        assert_eq!(upstream.len(), s.output, "upstream dimension mismatch");
        assert_eq!(pgrad.len(), self.params.len());
        let z = &trace.inputs[0];
        let oo = s.out_offset();
        let h_last = &trace.inputs[s.blocks()];
        let mut delta = vec![0.0; s.hidden];
        for o in 0..s.output {
            let up = upstream[o];
            pgrad[oo + s.output * s.hidden + o] += up;
            for u in 0..s.hidden {
                pgrad[oo + o * s.hidden + u] += up * h_last[u];
                delta[u] += up * self.params[oo + o * s.hidden + u];
            }
        }
        for b in (0..s.blocks()).rev() {
            let off = s.block_offset(b);
            let n_in = s.block_in(b);
            let rows = s.hidden * s.kernel;
            let r_off = off + rows * n_in + rows;
            let h_in = &trace.inputs[b];
            let mut below = vec![0.0; n_in];
            for u in 0..s.hidden {
                let du = delta[u];
                if du == 0.0 {
                    continue;
                }
                for l in 0..s.latent {
                    pgrad[r_off + u * s.latent + l] += du * z[l];
                }
                let m = u * s.kernel + trace.selections[b][u];
                let w_row = off + m * n_in;
                for c in 0..n_in {
                    pgrad[w_row + c] += du * h_in[c];
                    below[c] += du * self.params[w_row + c];
                }
                pgrad[off + rows * n_in + m] += du;
            }
            delta = below;
        }
        // Note: the residual-path gradient with respect to z itself is not
        // returned; nothing differentiates through the latent draw.
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("generator serializes")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        let net: ResidualMaxoutNet = serde_json::from_str(s)?;
        if !net.shape.valid() || net.params.len() != net.shape.param_count() {
            return Err(crate::Error::InvalidShape(
                "generator document inconsistent with its shape".into(),
            ));
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ResidualMaxoutNet {
        // latent 1, hidden 1, out 1, one block + output layer, kernel 2.
        let shape = GeneratorShape {
            latent: 1,
            hidden: 1,
            output: 1,
            layers: 2,
            kernel: 2,
        };
        let mut net = ResidualMaxoutNet::init(shape, 0);
        // W = [1, -1], bias = [0, 0], R = [0.5], W_out = [2], b_out = [0.1]
        net.params_mut().copy_from_slice(&[1.0, -1.0, 0.0, 0.0, 0.5, 2.0, 0.1]);
        net
    }

    #[test]
    fn hand_forward() {
        let net = tiny();
        let (y, trace) = net.forward(&[3.0]);
        // max(3, -3) = 3, + residual 0.5*3 = 4.5, out 2*4.5 + 0.1 = 9.1
        assert!((y[0] - 9.1).abs() < 1e-12);
        assert_eq!(trace.selections[0][0], 0);
        let (y2, trace2) = net.forward(&[-3.0]);
        // max(-3, 3) = 3, + (-1.5) = 1.5, out 3.1
        assert!((y2[0] - 3.1).abs() < 1e-12);
        assert_eq!(trace2.selections[0][0], 1);
    }

    #[test]
    fn init_is_deterministic() {
        let shape = GeneratorShape {
            latent: 4,
            hidden: 6,
            output: 2,
            layers: 4,
            kernel: 2,
        };
        let a = ResidualMaxoutNet::init(shape, 9);
        let b = ResidualMaxoutNet::init(shape, 9);
        assert_eq!(a.params(), b.params());
        assert_eq!(a.param_count(), shape.param_count());
    }

    #[test]
    fn vjp_matches_finite_differences() {
        use rand::Rng;
        let mut r = crate::rng::stream(3, 0);
        let mut checked = 0;
        while checked < 25 {
            let shape = GeneratorShape {
                latent: r.random_range(1..=3),
                hidden: r.random_range(1..=3),
                output: r.random_range(1..=2),
                layers: r.random_range(2..=4),
                kernel: r.random_range(1..=2),
            };
            let net = ResidualMaxoutNet::init(shape, r.random());
            let z: Vec<f64> = (0..shape.latent).map(|_| r.random_range(-1.5..1.5)).collect();
            let up: Vec<f64> = (0..shape.output).map(|_| r.random_range(-1.0..1.0)).collect();
            let (_, trace) = net.forward(&z);
            let mut an = vec![0.0; net.param_count()];
            net.vjp_into(&trace, &up, &mut an);
            let h = 1e-6;
            let dot = |net: &ResidualMaxoutNet| -> Option<f64> {
                let (y, t) = net.forward(&z);
                if t.selections != trace.selections {
                    return None;
                }
                Some(y.iter().zip(&up).map(|(a, b)| a * b).sum())
            };
            let mut all_ok = true;
            for idx in 0..net.param_count() {
                let mut p = net.clone();
                p.params_mut()[idx] += h;
                let mut m = net.clone();
                m.params_mut()[idx] -= h;
                let (Some(fp), Some(fm)) = (dot(&p), dot(&m)) else {
                    all_ok = false;
                    break;
                };
                let fd = (fp - fm) / (2.0 * h);
                let scale = an[idx].abs().max(fd.abs()).max(1.0);
                assert!(
                    (an[idx] - fd).abs() <= 1e-5 * scale,
                    "vjp [{idx}] {} vs fd {fd}",
                    an[idx]
                );
            }
            if all_ok {
                checked += 1;
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let shape = GeneratorShape {
            latent: 3,
            hidden: 4,
            output: 2,
            layers: 3,
            kernel: 2,
        };
        let net = ResidualMaxoutNet::init(shape, 21);
        let back = ResidualMaxoutNet::from_json(&net.to_json()).unwrap();
        assert_eq!(net, back);
    }
}
