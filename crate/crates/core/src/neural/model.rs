//! Two-layer tanh MLP with a policy head and a value head, stored as one flat
//! parameter vector, plus the Adam optimizer and gradient clipping.

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

/// Layer sizes of the shared trunk and heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub input: usize,
    pub hidden: usize,
    /// Policy logits.
    pub output: usize,
}

impl Shape {
    pub fn num_params(&self) -> usize {
        let (i, h, o) = (self.input, self.hidden, self.output);
        h * i + h + h * h + h + o * h + o + h + 1
    }

    // offsets of each block in the flat vector
    fn w1(&self) -> usize {
        0
    }
    fn b1(&self) -> usize {
        self.hidden * self.input
    }
    fn w2(&self) -> usize {
        self.b1() + self.hidden
    }
    fn b2(&self) -> usize {
        self.w2() + self.hidden * self.hidden
    }
    fn wp(&self) -> usize {
        self.b2() + self.hidden
    }
    fn bp(&self) -> usize {
        self.wp() + self.output * self.hidden
    }
    fn wv(&self) -> usize {
        self.bp() + self.output
    }
    fn bv(&self) -> usize {
        self.wv() + self.hidden
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub shape: Shape,
    pub params: Vec<f64>,
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub logits: Vec<f64>,
    pub value: f64,
}

/// `out[r] += Σ_c w[r * cols + c] * x[c]`
fn matvec_add(w: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(shape: Shape, rng: &mut R) -> Self {
        let mut params = vec![0.0; shape.num_params()];
        let mut fill = |at: usize, fan_in: usize, fan_out: usize, gain: f64| {
            let lim = gain * (6.0 / (fan_in + fan_out) as f64).sqrt();
            let u = Uniform::new_inclusive(-lim, lim).expect("finite bounds");
            for p in &mut params[at..at + fan_in * fan_out] {
                *p = u.sample(rng);
            }
        };
        let (i, h, o) = (shape.input, shape.hidden, shape.output);
        fill(shape.w1(), i, h, 1.0);
        fill(shape.w2(), h, h, 1.0);
        fill(shape.wp(), h, o, 1.0);
        fill(shape.wv(), h, 1, 1.0);
        Self { shape, params }
    }

    pub fn forward(&self, x: &[f64]) -> Forward {
        let s = self.shape;
        assert_eq!(x.len(), s.input, "input width");
        let p = &self.params;
        let mut h1 = p[s.b1()..s.b1() + s.hidden].to_vec();
        matvec_add(&p[s.w1()..s.b1()], x, &mut h1);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        let mut h2 = p[s.b2()..s.b2() + s.hidden].to_vec();
        matvec_add(&p[s.w2()..s.b2()], &h1, &mut h2);
        h2.iter_mut().for_each(|v| *v = v.tanh());
        let mut logits = p[s.bp()..s.bp() + s.output].to_vec();
        matvec_add(&p[s.wp()..s.bp()], &h2, &mut logits);
        let mut value = [p[s.bv()]];
        matvec_add(&p[s.wv()..s.bv()], &h2, &mut value);
        Forward {
            h1,
            h2,
            logits,
            value: value[0],
        }
    }

    /// Accumulates into `grad` the parameter gradient of a loss whose
    /// derivatives w.r.t. the logits and the value are `d_logits`, `d_value`.
    pub fn backward(&self, x: &[f64], fwd: &Forward, d_logits: &[f64], d_value: f64, grad: &mut [f64]) {
        let s = self.shape;
        let p = &self.params;
        let h = s.hidden;

        let mut d_h2 = vec![0.0; h];
        for (o, &g) in d_logits.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let w = s.wp() + o * h;
            for k in 0..h {
                grad[w + k] += g * fwd.h2[k];
                d_h2[k] += g * p[w + k];
            }
            grad[s.bp() + o] += g;
        }
        for k in 0..h {
            grad[s.wv() + k] += d_value * fwd.h2[k];
            d_h2[k] += d_value * p[s.wv() + k];
        }
        grad[s.bv()] += d_value;

        let d_a2: Vec<f64> = d_h2.iter().zip(&fwd.h2).map(|(d, y)| d * (1.0 - y * y)).collect();
        let mut d_h1 = vec![0.0; h];
        for (r, &g) in d_a2.iter().enumerate() {
            let w = s.w2() + r * h;
            for k in 0..h {
                grad[w + k] += g * fwd.h1[k];
                d_h1[k] += g * p[w + k];
            }
            grad[s.b2() + r] += g;
        }

        let n = s.input;
        for (r, (&d, &y)) in d_h1.iter().zip(&fwd.h1).enumerate() {
            let g = d * (1.0 - y * y);
            let w = s.w1() + r * n;
            for (c, &xc) in x.iter().enumerate() {
                grad[w + c] += g * xc;
            }
            grad[s.b1() + r] += g;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

/// Scales `grad` so its L2 norm is at most `max_norm`. Returns the norm
/// before clipping.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let k = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= k);
    }
    norm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// One descent step on `params` along `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
