//! Feedforward logistic-sigmoid network trained by backpropagation.
//!
//! Parameters are addressed through one flat vector, layer by layer: the
//! `fan_in × fan_out` weight block (row-major, input index outer) followed by
//! the layer's biases. [`Gradient`] and update vectors share that layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const INIT_RANGE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub input_size: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_size: usize,
}

impl Default for Topology {
    /// Nine inputs, seven hidden units, one SOC output.
    fn default() -> Self {
        Self {
            input_size: 9,
            hidden_sizes: vec![7],
            output_size: 1,
        }
    }
}

impl Topology {
    pub fn new(input_size: usize, hidden_sizes: Vec<usize>, output_size: usize) -> Result<Self> {
        let topology = Self {
            input_size,
            hidden_sizes,
            output_size,
        };
        if topology.sizes().any(|s| s == 0) {
            return Err(Error::Config("every layer needs at least one unit".into()));
        }
        Ok(topology)
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.input_size)
            .chain(self.hidden_sizes.iter().copied())
            .chain(std::iter::once(self.output_size))
    }

    fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let sizes: Vec<usize> = self.sizes().collect();
        sizes.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|(fan_in, fan_out)| (fan_in + 1) * fan_out)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    /// `weights[i * fan_out + j]` connects input `i` to unit `j`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            biases: vec![0.0; fan_out],
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn activate(&self, input: &[f64]) -> Vec<f64> {
        let mut z = self.biases.clone();
        for (i, &a) in input.iter().enumerate() {
            let row = &self.weights[i * self.fan_out..(i + 1) * self.fan_out];
            for (zj, w) in z.iter_mut().zip(row) {
                *zj += w * a;
            }
        }
        z.into_iter().map(sigmoid).collect()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Layer outputs from one forward pass; `layers[0]` is the input itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub layers: Vec<Vec<f64>>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        self.layers.last().expect("at least input and output")
    }
}

/// Flat parameter-shaped vector: a gradient or an applied update.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient(pub Vec<f64>);

impl Gradient {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    layers: Vec<Layer>,
    seed: u64,
}

impl Network {
    /// Uniform `[-0.5, 0.5]` weights and biases from a ChaCha8 stream.
    pub fn init(topology: Topology, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = topology
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let mut layer = Layer::zeros(fan_in, fan_out);
                for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                    *w = rng.gen_range(-INIT_RANGE..=INIT_RANGE);
                }
                layer
            })
            .collect();
        Self {
            topology,
            layers,
            seed,
        }
    }

    pub fn zeros(topology: Topology, seed: u64) -> Self {
        let layers = topology
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| Layer::zeros(fan_in, fan_out))
            .collect();
        Self {
            topology,
            layers,
            seed,
        }
    }

    /// Rebuild from a flat parameter vector in the canonical layout.
    pub fn from_params(topology: Topology, seed: u64, params: &[f64]) -> Result<Self> {
        let mut net = Self::zeros(topology, seed);
        net.set_params(params)?;
        Ok(net)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        let expected = self.param_count();
        if params.len() != expected {
            return Err(Error::Shape {
                expected,
                found: params.len(),
            });
        }
        let mut values = params.iter().copied();
        for layer in &mut self.layers {
            for p in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *p = values.next().unwrap();
            }
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Activations> {
        if input.len() != self.topology.input_size {
            return Err(Error::Shape {
                expected: self.topology.input_size,
                found: input.len(),
            });
        }
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        layers.push(input.to_vec());
        for layer in &self.layers {
            let next = layer.activate(layers.last().unwrap());
            layers.push(next);
        }
        Ok(Activations { layers })
    }

    /// Scalar output of a single-output network.
    pub fn predict(&self, input: &[f64]) -> Result<f64> {
        Ok(self.forward(input)?.output()[0])
    }

    /// Gradient of `E = ½ Σ (target − y)²` over the output units.
    ///
    /// `activations` must come from [`Network::forward`] on the same network
    /// and input; that is not checked.
    pub fn backward(&self, activations: &Activations, targets: &[f64]) -> Result<Gradient> {
        let output = activations.output();
        if targets.len() != output.len() {
            return Err(Error::Shape {
                expected: output.len(),
                found: targets.len(),
            });
        }
        // delta_j = dE/dz_j for the current layer
        let mut delta: Vec<f64> = output
            .iter()
            .zip(targets)
            .map(|(&y, &t)| -(t - y) * y * (1.0 - y))
            .collect();

        let mut grad = vec![0.0; self.param_count()];
        let mut end = grad.len();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let input = &activations.layers[k];
            let start = end - layer.param_count();
            let (w_grad, b_grad) = grad[start..end].split_at_mut(layer.weights.len());
            for (i, &a) in input.iter().enumerate() {
                for (j, &d) in delta.iter().enumerate() {
                    w_grad[i * layer.fan_out + j] = a * d;
                }
            }
            b_grad.copy_from_slice(&delta);
            if k > 0 {
                delta = input
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| {
                        let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                        let back: f64 = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                        back * a * (1.0 - a)
                    })
                    .collect();
            }
            end = start;
        }
        Ok(Gradient(grad))
    }

    /// Delta-rule step with momentum: `update = −lr·grad + momentum·prev`.
    ///
    /// The network is left untouched if the update is not finite.
    pub fn apply_delta(
        &mut self,
        gradient: &Gradient,
        learning_rate: f64,
        momentum: f64,
        prev_update: &Gradient,
    ) -> Result<Gradient> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::Config("momentum must lie in [0, 1)".into()));
        }
        let expected = self.param_count();
        for len in [gradient.0.len(), prev_update.0.len()] {
            if len != expected {
                return Err(Error::Shape {
                    expected,
                    found: len,
                });
            }
        }
        let update: Vec<f64> = gradient
            .0
            .iter()
            .zip(&prev_update.0)
            .map(|(g, u)| -learning_rate * g + momentum * u)
            .collect();
        let mut params = self.params();
        for (p, u) in params.iter_mut().zip(&update) {
            *p += u;
        }
        if !params.iter().all(|p| p.is_finite()) {
            return Err(Error::NumericOverflow { epoch: None });
        }
        self.set_params(&params)?;
        Ok(Gradient(update))
    }
}
