use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative written in terms of the activation output `a`.
    #[inline]
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::invalid(format!("unknown activation {other:?}"))),
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Dense layer `a = act(W x + b)` with `W` shaped `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.output_dim())
            .map(|i| self.activation.apply(dot(self.weights.row(i), x) + self.bias[i]))
            .collect()
    }
}

/// Multi-layer perceptron: tanh hidden layers and a single sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Per-layer outputs of a forward pass; `outputs[0]` is the input.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    pub outputs: Vec<Vec<f64>>,
}

impl MlpTrace {
    pub fn output(&self) -> f64 {
        self.outputs.last().unwrap()[0]
    }
}

/// Gradient of one layer's weights and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Mlp {
    /// Xavier-uniform weights and zero biases.
    pub fn init(input_dim: usize, hidden_dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden_dims);
        dims.push(1);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Layer {
                    weights: Matrix::from_fn(fan_out, fan_in, |_, _| rng.random_range(-limit..limit)),
                    bias: vec![0.0; fan_out],
                    activation: if k + 2 == dims.len() {
                        Activation::Sigmoid
                    } else {
                        Activation::Tanh
                    },
                }
            })
            .collect();
        Mlp { layers }
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        let mut expect = input_dim;
        for (k, l) in self.layers.iter().enumerate() {
            if l.input_dim() != expect || l.bias.len() != l.output_dim() {
                return Err(Error::Dimension(format!(
                    "mlp layer {k} is {}x{} with {} biases, expected input {expect}",
                    l.output_dim(),
                    l.input_dim(),
                    l.bias.len()
                )));
            }
            expect = l.output_dim();
        }
        match self.layers.last() {
            Some(l) if l.output_dim() == 1 && l.activation == Activation::Sigmoid => Ok(()),
            _ => Err(Error::Dimension(
                "mlp must end in a single sigmoid unit".into(),
            )),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn hidden_dims(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(Layer::output_dim)
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        for l in &self.layers {
            a = l.forward(&a);
        }
        a[0]
    }

    pub fn forward_trace(&self, x: &[f64]) -> MlpTrace {
        let mut outputs = Vec::with_capacity(self.layers.len() + 1);
        outputs.push(x.to_vec());
        for l in &self.layers {
            let next = l.forward(outputs.last().unwrap());
            outputs.push(next);
        }
        MlpTrace { outputs }
    }

    /// Backpropagate `d_output` (derivative w.r.t. the sigmoid output).
    /// Accumulates `scale ·` layer gradients into `grads` and returns the
    /// derivative w.r.t. the input.
    pub fn backward(&self, trace: &MlpTrace, d_output: f64, scale: f64, grads: &mut [LayerGrad]) -> Vec<f64> {
        let mut delta_out = vec![d_output];
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let out = &trace.outputs[k + 1];
            let input = &trace.outputs[k];
            let delta: Vec<f64> = delta_out
                .iter()
                .zip(out)
                .map(|(d, &a)| d * layer.activation.derivative_from_output(a))
                .collect();
            let g = &mut grads[k];
            g.weights.add_outer(scale, &delta, input);
            for (b, d) in g.bias.iter_mut().zip(&delta) {
                *b += scale * d;
            }
            delta_out = layer.weights.matvec_t(&delta);
        }
        delta_out
    }

    pub fn zero_grads(&self) -> Vec<LayerGrad> {
        self.layers
            .iter()
            .map(|l| LayerGrad {
                weights: Matrix::zeros(l.output_dim(), l.input_dim()),
                bias: vec![0.0; l.output_dim()],
            })
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.rows() * l.weights.cols() + l.bias.len())
            .sum()
    }
}
