use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::activation::{activate, Activation};
use crate::rng::{rng_from_seed, Rng};
use crate::{Error, Result};

/// Glorot/Xavier uniform weights for an `outputs x inputs` matrix, row-major.
pub fn glorot_uniform(outputs: usize, inputs: usize, rng: &mut Rng) -> Vec<f64> {
    let limit = (6.0 / (inputs + outputs) as f64).sqrt();
    (0..outputs * inputs).map(|_| rng.random_range(-limit..=limit)).collect()
}

/// Glorot-initialized weights and zero biases for a layer of shape
/// `(outputs, inputs)`.
pub fn glorot_init(outputs: usize, inputs: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    (glorot_uniform(outputs, inputs, &mut rng), vec![0.0; outputs])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major, `outputs x inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
    /// Per-neuron snake frequencies; present iff the activation is snake.
    pub frequencies: Option<Vec<f64>>,
}

impl DenseLayer {
    pub fn new(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
        frequencies: Option<Vec<f64>>,
    ) -> Result<Self> {
        let layer = DenseLayer { inputs, outputs, weights, biases, activation, frequencies };
        layer.validate()?;
        Ok(layer)
    }

    /// Glorot weights, zero biases, snake frequencies set to the activation's
    /// default frequency.
    pub fn glorot(inputs: usize, outputs: usize, activation: Activation, rng: &mut Rng) -> Self {
        let frequencies = match activation {
            Activation::Snake { frequency, .. } => Some(vec![frequency; outputs]),
            _ => None,
        };
        DenseLayer {
            inputs,
            outputs,
            weights: glorot_uniform(outputs, inputs, rng),
            biases: vec![0.0; outputs],
            activation,
            frequencies,
        }
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        let frequencies = match activation {
            Activation::Snake { frequency, .. } => Some(vec![frequency; outputs]),
            _ => None,
        };
        DenseLayer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
            activation,
            frequencies,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.outputs == 0 {
            return Err(Error::config("layer dimensions must be positive"));
        }
        if self.weights.len() != self.inputs * self.outputs {
            return Err(Error::DimensionMismatch { expected: self.inputs * self.outputs, actual: self.weights.len() });
        }
        if self.biases.len() != self.outputs {
            return Err(Error::DimensionMismatch { expected: self.outputs, actual: self.biases.len() });
        }
        match (&self.activation, &self.frequencies) {
            (Activation::Snake { .. }, Some(f)) if f.len() != self.outputs => {
                Err(Error::DimensionMismatch { expected: self.outputs, actual: f.len() })
            }
            (Activation::Snake { .. }, Some(f)) if f.iter().any(|&a| !(a > 0.0)) => {
                Err(Error::config("snake frequencies must be positive"))
            }
            (Activation::Snake { .. }, None) => Err(Error::config("snake layer without frequencies")),
            (Activation::Snake { .. }, Some(_)) => Ok(()),
            (_, Some(_)) => Err(Error::config("frequencies given for a non-snake layer")),
            (_, None) => Ok(()),
        }
    }

    fn trains_frequencies(&self) -> bool {
        self.activation.has_trainable_frequency() && self.frequencies.is_some()
    }

    fn slot_count(&self) -> usize {
        2 + usize::from(self.trains_frequencies())
    }

    #[inline]
    fn frequency(&self, j: usize) -> f64 {
        self.frequencies.as_ref().map_or(1.0, |f| f[j])
    }
}

/// Per-layer intermediate values recorded by a forward pass.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
    delta: Vec<f64>,
    upstream: Vec<f64>,
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    /// Pre-activations of layer `l`.
    pub fn pre_activations(&self, l: usize) -> &[f64] {
        &self.pre[l]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    /// `None` unless the layer trains its snake frequencies.
    pub frequencies: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetGradients {
    pub layers: Vec<LayerGradients>,
    /// Gradient with respect to the network input.
    pub input: Vec<f64>,
}

impl NetGradients {
    /// Flattened in the order of [`FeedforwardNet::param_slices_mut`].
    pub fn into_slots(self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for l in self.layers {
            out.push(l.weights);
            out.push(l.biases);
            if let Some(f) = l.frequencies {
                out.push(f);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardNet {
    pub layers: Vec<DenseLayer>,
}

impl FeedforwardNet {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("a network needs at least one layer"));
        }
        for l in &layers {
            l.validate()?;
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::DimensionMismatch { expected: pair[0].outputs, actual: pair[1].inputs });
            }
        }
        Ok(FeedforwardNet { layers })
    }

    /// Glorot-initialized network; `sizes` lists the widths from input to
    /// output. Hidden layers use `hidden`, the last layer `output`.
    pub fn glorot(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut Rng) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::config("need at least input and output sizes"));
        }
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                DenseLayer::glorot(sizes[i], sizes[i + 1], act, rng)
            })
            .collect();
        FeedforwardNet::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Tape)> {
        let mut tape = Tape::default();
        self.forward_into(x, &mut tape)?;
        Ok((tape.output.clone(), tape))
    }

    /// Forward pass reusing the buffers of `tape`.
    pub fn forward_into(&self, x: &[f64], tape: &mut Tape) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), actual: x.len() });
        }
        let n = self.layers.len();
        tape.inputs.resize_with(n, Vec::new);
        tape.pre.resize_with(n, Vec::new);
        tape.inputs[0].clear();
        tape.inputs[0].extend_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = tape.inputs.split_at_mut(l + 1);
            let input = &before[l];
            let pre = &mut tape.pre[l];
            pre.clear();
            let out = if l + 1 < n { &mut after[0] } else { &mut tape.output };
            out.clear();
            for j in 0..layer.outputs {
                let row = &layer.weights[j * layer.inputs..(j + 1) * layer.inputs];
                let z = row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>() + layer.biases[j];
                pre.push(z);
                out.push(activate(&layer.activation, z, layer.frequency(j)).0);
            }
        }
        Ok(())
    }

    /// Exact reverse-mode gradients of a scalar loss given `dL/doutput`.
    pub fn backward(&self, tape: &Tape, loss_grad: &[f64]) -> NetGradients {
        let mut slots = self.zero_grads();
        let mut tape = tape.clone();
        let input = self.backward_accumulate(&mut tape, loss_grad, &mut slots);
        let mut it = slots.into_iter();
        let layers = self
            .layers
            .iter()
            .map(|l| LayerGradients {
                weights: it.next().unwrap_or_default(),
                biases: it.next().unwrap_or_default(),
                frequencies: if l.trains_frequencies() { it.next() } else { None },
            })
            .collect();
        NetGradients { layers, input }
    }

    /// Adds the parameter gradients to `grads` (one slot per parameter slice)
    /// and returns `dL/dinput`.
    pub fn backward_accumulate(&self, tape: &mut Tape, loss_grad: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        let Tape { inputs, pre, delta, upstream, .. } = tape;
        upstream.clear();
        upstream.extend_from_slice(loss_grad);
        let mut slot = self.slot_count();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            slot -= layer.slot_count();
            let input = &inputs[l];
            delta.clear();
            for j in 0..layer.outputs {
                let (_, dz, da) = activate(&layer.activation, pre[l][j], layer.frequency(j));
                delta.push(upstream[j] * dz);
                if layer.trains_frequencies() {
                    grads[slot + 2][j] += upstream[j] * da;
                }
            }
            {
                let (wg, rest) = grads[slot..].split_at_mut(1);
                let wg = &mut wg[0];
                let bg = &mut rest[0];
                for j in 0..layer.outputs {
                    let d = delta[j];
                    bg[j] += d;
                    let row = &mut wg[j * layer.inputs..(j + 1) * layer.inputs];
                    for (g, v) in row.iter_mut().zip(input) {
                        *g += d * v;
                    }
                }
            }
            upstream.clear();
            upstream.resize(layer.inputs, 0.0);
            for j in 0..layer.outputs {
                let d = delta[j];
                let row = &layer.weights[j * layer.inputs..(j + 1) * layer.inputs];
                for (u, w) in upstream.iter_mut().zip(row) {
                    *u += d * w;
                }
            }
        }
        upstream.clone()
    }

    /// Number of parameter slices exposed to optimizers.
    pub fn slot_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::slot_count).sum()
    }

    pub fn zero_grads(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.slot_count());
        for l in &self.layers {
            out.push(vec![0.0; l.weights.len()]);
            out.push(vec![0.0; l.biases.len()]);
            if l.trains_frequencies() {
                out.push(vec![0.0; l.outputs]);
            }
        }
        out
    }

    /// Weights, biases and (trainable) snake frequencies, layer by layer.
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.slot_count());
        for l in &mut self.layers {
            let trains = l.trains_frequencies();
            out.push(l.weights.as_mut_slice());
            out.push(l.biases.as_mut_slice());
            if trains {
                if let Some(f) = l.frequencies.as_mut() {
                    out.push(f.as_mut_slice());
                }
            }
        }
        out
    }

    /// Scalar-in, scalar-out convenience evaluation.
    pub fn predict_scalar(&self, x: f64) -> f64 {
        let mut tape = Tape::default();
        match self.forward_into(&[x], &mut tape) {
            Ok(()) => tape.output[0],
            Err(_) => f64::NAN,
        }
    }

    /// Mean frequency over every snake neuron, if any.
    pub fn mean_snake_frequency(&self) -> Option<f64> {
        let all: Vec<f64> = self.layers.iter().filter_map(|l| l.frequencies.as_ref()).flatten().copied().collect();
        (!all.is_empty()).then(|| all.iter().sum::<f64>() / all.len() as f64)
    }
}
