//! Scorers `f: R^d -> R` with exact gradients, the Adam optimizer, and the
//! model file document.
//!
//! Parameters are exposed as one flat vector. The layout is
//! `[w_0 .. w_{d-1}, b]` for the linear model and
//! `[w1 (h x d, row-major), b1 (h), w2 (h), b2]` for the MLP. Gradients use
//! the same layout.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
}

/// One hidden layer: `w2 . relu(w1 x + b1) + b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub dim: usize,
    pub hidden: usize,
    /// `hidden x dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Linear,
    Mlp { hidden: usize },
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Linear => f.write_str("linear"),
            ModelKind::Mlp { hidden } => write!(f, "mlp({hidden})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scorer {
    Linear(LinearModel),
    Mlp(MlpModel),
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::Shape { expected, found: x.len() })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl MlpModel {
    fn pre_activation<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.w1.chunks_exact(self.dim).zip(&self.b1).map(move |(row, b)| dot(row, x) + b)
    }
}

impl Scorer {
    pub fn kind(&self) -> ModelKind {
        match self {
            Scorer::Linear(_) => ModelKind::Linear,
            Scorer::Mlp(m) => ModelKind::Mlp { hidden: m.hidden },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Scorer::Linear(m) => m.weights.len(),
            Scorer::Mlp(m) => m.dim,
        }
    }

    pub fn num_params(&self) -> usize {
        num_params(self.kind(), self.dim())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Scorer::Linear(m) => dot(&m.weights, x) + m.bias,
            Scorer::Mlp(m) => {
                let act = m.pre_activation(x).map(|z| z.max(0.0));
                act.zip(&m.w2).map(|(a, w)| a * w).sum::<f64>() + m.b2
            }
        }
    }

    /// Gradient of `upstream * forward(x)` with respect to every parameter.
    pub fn backward(&self, x: &[f64], upstream: f64) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.num_params()];
        self.backward_accumulate(x, upstream, &mut grad)?;
        Ok(grad)
    }

    /// Adds the gradient of `upstream * forward(x)` into `grad`.
    pub fn backward_accumulate(&self, x: &[f64], upstream: f64, grad: &mut [f64]) -> Result<()> {
        check_dim(self.dim(), x)?;
        if grad.len() != self.num_params() {
            return Err(Error::Shape { expected: self.num_params(), found: grad.len() });
        }
        if !upstream.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite upstream gradient {upstream}")));
        }
        if upstream == 0.0 {
            return Ok(());
        }
        match self {
            Scorer::Linear(m) => {
                let d = m.weights.len();
                for (g, xi) in grad[..d].iter_mut().zip(x) {
                    *g += upstream * xi;
                }
                grad[d] += upstream;
            }
            Scorer::Mlp(m) => {
                let (h, d) = (m.hidden, m.dim);
                let (gw1, rest) = grad.split_at_mut(h * d);
                let (gb1, rest) = rest.split_at_mut(h);
                let (gw2, gb2) = rest.split_at_mut(h);
                for (j, z) in m.pre_activation(x).enumerate() {
                    if z > 0.0 {
                        gw2[j] += upstream * z;
                        let dz = upstream * m.w2[j];
                        gb1[j] += dz;
                        for (g, xk) in gw1[j * d..(j + 1) * d].iter_mut().zip(x) {
                            *g += dz * xk;
                        }
                    }
                }
                gb2[0] += upstream;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Scorer::Linear(m) => m.weights.iter().copied().chain([m.bias]).collect(),
            Scorer::Mlp(m) => {
                m.w1.iter().chain(&m.b1).chain(&m.w2).copied().chain([m.b2]).collect()
            }
        }
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Shape { expected: self.num_params(), found: params.len() });
        }
        match self {
            Scorer::Linear(m) => {
                let d = m.weights.len();
                m.weights.copy_from_slice(&params[..d]);
                m.bias = params[d];
            }
            Scorer::Mlp(m) => {
                let (h, d) = (m.hidden, m.dim);
                m.w1.copy_from_slice(&params[..h * d]);
                m.b1.copy_from_slice(&params[h * d..h * d + h]);
                m.w2.copy_from_slice(&params[h * d + h..h * d + 2 * h]);
                m.b2 = params[h * d + 2 * h];
            }
        }
        Ok(())
    }

    /// Builds a model of the given shape from a flat parameter vector.
    pub fn from_params(kind: ModelKind, dim: usize, params: &[f64]) -> Result<Scorer> {
        let mut model = zeros(kind, dim)?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidSpec("model parameters must be finite".into()));
        }
        model.set_params(params)?;
        Ok(model)
    }

    pub fn to_document(&self, config: Option<serde_json::Value>) -> ModelDocument {
        let (kind, hidden, activation) = match self {
            Scorer::Linear(_) => ("linear".to_string(), None, None),
            Scorer::Mlp(m) => ("mlp".to_string(), Some(m.hidden), Some(m.activation)),
        };
        ModelDocument { kind, dim: self.dim(), hidden, activation, params: self.params(), config }
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Scorer> {
        let kind = match (doc.kind.as_str(), doc.hidden) {
            ("linear", _) => ModelKind::Linear,
            ("mlp", Some(hidden)) => ModelKind::Mlp { hidden },
            ("mlp", None) => return Err(Error::InvalidSpec("mlp model document lacks `hidden`".into())),
            (other, _) => return Err(Error::InvalidSpec(format!("unknown model kind {other:?}"))),
        };
        Scorer::from_params(kind, doc.dim, &doc.params)
    }
}

/// On-disk model representation: shape, flat row-major parameters, and the
/// training configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub kind: String,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hidden: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub activation: Option<Activation>,
    pub params: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<serde_json::Value>,
}

pub fn num_params(kind: ModelKind, dim: usize) -> usize {
    match kind {
        ModelKind::Linear => dim + 1,
        ModelKind::Mlp { hidden } => hidden * dim + 2 * hidden + 1,
    }
}

fn validate_shape(kind: ModelKind, dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidSpec("input dimension must be at least 1".into()));
    }
    if let ModelKind::Mlp { hidden: 0 } = kind {
        return Err(Error::InvalidSpec("hidden width must be at least 1".into()));
    }
    Ok(())
}

fn zeros(kind: ModelKind, dim: usize) -> Result<Scorer> {
    validate_shape(kind, dim)?;
    Ok(match kind {
        ModelKind::Linear => Scorer::Linear(LinearModel { weights: vec![0.0; dim], bias: 0.0 }),
        ModelKind::Mlp { hidden } => Scorer::Mlp(MlpModel {
            dim,
            hidden,
            w1: vec![0.0; hidden * dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
            activation: Activation::Relu,
        }),
    })
}

/// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
pub fn init_model(kind: ModelKind, dim: usize, seed: Seed) -> Result<Scorer> {
    let mut model = zeros(kind, dim)?;
    let mut rng = seed.stream("init");
    let mut uniform = |fan_in: usize, out: &mut [f64]| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        out.iter_mut().for_each(|w| *w = rng.random_range(-bound..bound));
    };
    match &mut model {
        Scorer::Linear(m) => uniform(dim, &mut m.weights),
        Scorer::Mlp(m) => {
            uniform(dim, &mut m.w1);
            uniform(m.hidden, &mut m.w2);
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, weight_decay: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(num_params: usize, config: AdamConfig) -> Self {
        AdamState { config, step: 0, m: vec![0.0; num_params], v: vec![0.0; num_params] }
    }
}

/// One Adam update with bias correction. Weight decay is decoupled:
/// parameters are first shrunk by `1 - lr * weight_decay`.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    let n = state.m.len();
    if params.len() != n || grads.len() != n || state.v.len() != n {
        return Err(Error::Shape { expected: n, found: params.len().max(grads.len()) });
    }
    let AdamConfig { lr, beta1, beta2, epsilon, weight_decay } = state.config;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    let shrink = 1.0 - lr * weight_decay;
    for i in 0..n {
        let g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] = params[i] * shrink - lr * m_hat / (v_hat.sqrt() + epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(w: Vec<f64>, b: f64) -> Scorer {
        Scorer::Linear(LinearModel { weights: w, bias: b })
    }

    #[test]
    fn forward_examples() {
        assert_eq!(linear(vec![0.0, 0.0], 0.3).forward(&[5.0, -7.0]).unwrap(), 0.3);
        assert_eq!(linear(vec![1.0, -1.0], 0.0).forward(&[2.0, 0.5]).unwrap(), 1.5);
        let mut m = init_model(ModelKind::Mlp { hidden: 5 }, 3, Seed(1)).unwrap();
        if let Scorer::Mlp(mlp) = &mut m {
            mlp.w2.iter_mut().for_each(|w| *w = 0.0);
            mlp.b2 = -0.7;
        }
        for x in [[0.0, 1.0, 2.0], [-3.0, 4.0, 0.5]] {
            assert_eq!(m.forward(&x).unwrap(), -0.7);
        }
        assert!(matches!(m.forward(&[1.0]), Err(Error::Shape { expected: 3, found: 1 })));
    }

    #[test]
    fn linear_backward_is_upstream_times_input() {
        let m = linear(vec![0.5, -2.0], 1.0);
        let g = m.backward(&[3.0, -4.0], 0.5).unwrap();
        assert_eq!(g, vec![1.5, -2.0, 0.5]);
    }

    #[test]
    fn zero_upstream_zero_gradient() {
        let m = init_model(ModelKind::Mlp { hidden: 4 }, 2, Seed(2)).unwrap();
        assert!(m.backward(&[1.0, 2.0], 0.0).unwrap().iter().all(|&g| g == 0.0));
    }

    fn fd_check(model: &Scorer, x: &[f64], upstream: f64) -> f64 {
        let an = model.backward(x, upstream).unwrap();
        let p = model.params();
        let h = 1e-5;
        let mut num = vec![0.0; p.len()];
        for i in 0..p.len() {
            let mut m = model.clone();
            let mut q = p.clone();
            q[i] = p[i] + h;
            m.set_params(&q).unwrap();
            let fp = m.forward(x).unwrap();
            q[i] = p[i] - h;
            m.set_params(&q).unwrap();
            let fm = m.forward(x).unwrap();
            num[i] = upstream * (fp - fm) / (2.0 * h);
        }
        let diff = an.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = an.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
        diff / scale
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = Seed(3).rng();
        for trial in 0..20 {
            let kind = if trial % 2 == 0 { ModelKind::Linear } else { ModelKind::Mlp { hidden: 6 } };
            let model = init_model(kind, 3, Seed(100 + trial)).unwrap();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            if let Scorer::Mlp(m) = &model {
                if m.pre_activation(&x).any(|z| z.abs() < 1e-3) {
                    continue;
                }
            }
            let up = rng.random_range(-2.0..2.0);
            assert!(fd_check(&model, &x, up) < 1e-5);
        }
    }

    #[test]
    fn init_contract() {
        let a = init_model(ModelKind::Mlp { hidden: 8 }, 3, Seed(5)).unwrap();
        assert_eq!(a, init_model(ModelKind::Mlp { hidden: 8 }, 3, Seed(5)).unwrap());
        assert_ne!(a, init_model(ModelKind::Mlp { hidden: 8 }, 3, Seed(6)).unwrap());
        if let Scorer::Mlp(m) = &a {
            assert!(m.b1.iter().all(|&b| b == 0.0) && m.b2 == 0.0);
            let bound = 1.0 / 3f64.sqrt();
            assert!(m.w1.iter().all(|w| w.abs() <= bound));
        }
        let l = init_model(ModelKind::Linear, 4, Seed(5)).unwrap();
        assert_eq!(l.params().len(), 5);
        if let Scorer::Linear(m) = &l {
            assert_eq!(m.bias, 0.0);
            assert_eq!(m.weights.len(), 4);
        }
        assert!(init_model(ModelKind::Linear, 0, Seed(5)).is_err());
        assert!(init_model(ModelKind::Mlp { hidden: 0 }, 2, Seed(5)).is_err());
    }

    #[test]
    fn adam_zero_gradient_no_decay_is_identity() {
        let mut p = vec![0.3, -1.2, 5.0];
        let before = p.clone();
        let mut s = AdamState::new(3, AdamConfig::default());
        adam_step(&mut p, &[0.0; 3], &mut s).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn adam_first_step_moves_by_lr_against_gradient_sign() {
        let cfg = AdamConfig { lr: 0.01, ..AdamConfig::default() };
        let mut p = vec![1.0, 1.0, 1.0];
        let mut s = AdamState::new(3, cfg);
        adam_step(&mut p, &[0.5, -3.0, 1e-3], &mut s).unwrap();
        // m_hat = g, v_hat = g^2, so delta = -lr * g / (|g| + eps).
        for (pi, g) in p.iter().zip([0.5f64, -3.0, 1e-3]) {
            let expect = 1.0 - 0.01 * g / (g.abs() + 1e-8);
            assert!((pi - expect).abs() < 1e-15);
            assert!(((pi - 1.0) + 0.01 * g.signum()).abs() < 1e-6);
        }
    }

    #[test]
    fn adam_decoupled_decay_and_determinism() {
        let cfg = AdamConfig { lr: 0.1, weight_decay: 0.5, ..AdamConfig::default() };
        let mut p = vec![2.0];
        let mut s = AdamState::new(1, cfg);
        adam_step(&mut p, &[0.0], &mut s).unwrap();
        assert!((p[0] - 2.0 * 0.95).abs() < 1e-15);

        let run = || {
            let mut p = vec![0.1, 0.2];
            let mut s = AdamState::new(2, cfg);
            for _ in 0..5 {
                adam_step(&mut p, &[0.3, -0.1], &mut s).unwrap();
            }
            (p, s)
        };
        assert_eq!(run(), run());
        let mut s = AdamState::new(2, cfg);
        assert!(adam_step(&mut [0.0; 3], &[0.0; 3], &mut s).is_err());
    }

    #[test]
    fn document_round_trip_is_bit_identical() {
        let m = init_model(ModelKind::Mlp { hidden: 7 }, 3, Seed(9)).unwrap();
        let text = serde_json::to_string_pretty(&m.to_document(None)).unwrap();
        let back = Scorer::from_document(&serde_json::from_str(&text).unwrap()).unwrap();
        let x = [0.123456789, -1.0 / 3.0, 2.5];
        assert_eq!(m.forward(&x).unwrap().to_bits(), back.forward(&x).unwrap().to_bits());
        assert_eq!(m, back);
    }
}
