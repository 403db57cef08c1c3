//! Fully connected tanh network with a hand-written reverse pass.

use ldpd_core::Scalar;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::MarlError;

/// Layer widths: input, hidden layers, output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
}

impl Architecture {
    pub fn new(input: usize, hidden: &[usize], output: usize) -> Self {
        Self { input, hidden: hidden.to_vec(), output }
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden.len() + 2);
        w.push(self.input);
        w.extend(&self.hidden);
        w.push(self.output);
        w
    }

    pub fn num_params(&self) -> usize {
        self.widths().windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }
}

/// Parameters stored flat: per layer the `out × in` weight matrix
/// (row-major) followed by the bias vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<S> {
    pub arch: Architecture,
    pub params: Vec<S>,
}

/// Activations kept from a forward pass for the reverse pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<S> {
    /// `acts[0]` is the input, `acts[l]` the output of layer `l`.
    acts: Vec<Vec<S>>,
}

impl<S> ForwardCache<S> {
    pub fn output(&self) -> &[S] {
        self.acts.last().expect("at least the input")
    }
}

impl<S: Scalar> Mlp<S> {
    pub fn zeros(arch: Architecture) -> Self {
        let n = arch.num_params();
        Self { arch, params: vec![S::zero(); n] }
    }

    /// Uniform `±1/√fan_in` weights and zero biases; the output layer is
    /// further scaled by `output_scale`.
    pub fn random<R: Rng + ?Sized>(arch: Architecture, output_scale: f64, rng: &mut R) -> Self {
        let mut net = Self::zeros(arch);
        let widths = net.arch.widths();
        let layers = widths.len() - 1;
        let mut off = 0;
        for (l, pair) in widths.windows(2).enumerate() {
            let (fan_in, out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let scale = if l + 1 == layers { output_scale } else { 1.0 };
            for w in &mut net.params[off..off + fan_in * out] {
                *w = S::lit(rng.random_range(-bound..bound) * scale);
            }
            off += fan_in * out + out;
        }
        net
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, x: &[S]) -> Result<Vec<S>, MarlError> {
        Ok(self.forward_cached(x)?.acts.pop().expect("output layer"))
    }

    pub fn forward_cached(&self, x: &[S]) -> Result<ForwardCache<S>, MarlError> {
        if x.len() != self.arch.input {
            return Err(MarlError::Shape { expected: self.arch.input, got: x.len() });
        }
        let widths = self.arch.widths();
        let layers = widths.len() - 1;
        let mut acts: Vec<Vec<S>> = Vec::with_capacity(widths.len());
        acts.push(x.to_vec());
        let mut off = 0;
        for l in 0..layers {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let (w, rest) = self.params[off..].split_at(n_in * n_out);
            let b = &rest[..n_out];
            let a = &acts[l];
            let mut z: Vec<S> = (0..n_out)
                .map(|o| w[o * n_in..(o + 1) * n_in].iter().zip(a).fold(b[o], |s, (wi, ai)| s + *wi * *ai))
                .collect();
            if l + 1 < layers {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(z);
            off += n_in * n_out + n_out;
        }
        if acts[layers].iter().any(|v| !v.is_finite()) {
            return Err(MarlError::NonFinite("forward output"));
        }
        Ok(ForwardCache { acts })
    }

    /// Accumulates `∂L/∂θ` into `grad` given `∂L/∂output` for one input.
    pub fn backward_into(&self, cache: &ForwardCache<S>, grad_out: &[S], grad: &mut [S]) -> Result<(), MarlError> {
        let widths = self.arch.widths();
        let layers = widths.len() - 1;
        debug_assert_eq!(grad.len(), self.params.len());
        let mut offsets = Vec::with_capacity(layers);
        let mut off = 0;
        for l in 0..layers {
            offsets.push(off);
            off += widths[l] * widths[l + 1] + widths[l + 1];
        }
        let mut delta = grad_out.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let off = offsets[l];
            let a_in = &cache.acts[l];
            for o in 0..n_out {
                let d = delta[o];
                let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(a_in) {
                    *g = *g + d * *a;
                }
                grad[off + n_in * n_out + o] = grad[off + n_in * n_out + o] + d;
            }
            if l > 0 {
                let w = &self.params[off..off + n_in * n_out];
                let mut next = vec![S::zero(); n_in];
                for o in 0..n_out {
                    let d = delta[o];
                    for (n, wi) in next.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *n = *n + d * *wi;
                    }
                }
                // tanh' = 1 − a²
                for (n, a) in next.iter_mut().zip(a_in) {
                    *n = *n * (S::one() - *a * *a);
                }
                delta = next;
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(MarlError::NonFinite("gradient"));
        }
        Ok(())
    }

    pub fn backward(&self, cache: &ForwardCache<S>, grad_out: &[S]) -> Result<Vec<S>, MarlError> {
        let mut g = vec![S::zero(); self.params.len()];
        self.backward_into(cache, grad_out, &mut g)?;
        Ok(g)
    }

    pub fn cast<T: Scalar>(&self) -> Mlp<T> {
        Mlp { arch: self.arch.clone(), params: self.params.iter().map(|p| T::lit(p.as_f64())).collect() }
    }
}
