//! Dense feed-forward networks with exact reverse-mode gradients, an Adam
//! optimizer and Polyak target blending.
//!
//! # Parameter file layout
//!
//! ```text
//! offset 0   8 bytes   magic "RISNETv1"
//! offset 8   u64 LE    length H of the JSON header in bytes
//! offset 16  H bytes   UTF-8 JSON: {"sizes":[..],"activations":[..],"seed":..}
//! then, for each layer in order:
//!            out*in f64 LE   weights, row-major (row = output unit)
//!            out f64 LE      biases
//! ```

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"RISNETv1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    /// `scale * sigmoid(z)`, mapping onto `(0, scale)`.
    SigmoidScaled { scale: f64 },
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::SigmoidScaled { scale } => scale * sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative at pre-activation `z`; the rectifier uses 0 at `z = 0`.
    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::SigmoidScaled { scale } => {
                let s = sigmoid(z);
                scale * s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs], activation }
    }

    fn affine(&self, x: &[f64], z: &mut Vec<f64>) {
        z.clear();
        z.extend(self.bias.iter().zip(self.weights.chunks_exact(self.inputs)).map(|(b, row)| {
            b + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>()
        }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
    seed: u64,
}

/// Intermediate values kept by [`DenseNet::forward_trace`] for a backward
/// pass.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    /// Input to each layer; `inputs[0]` is the network input.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

/// One gradient tensor per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl GradientSet {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GradientSet) {
        for (a, b) in self.tensors_mut().zip(other.tensors()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().flatten().all(|x| x.is_finite())
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.weights.iter().zip(&self.biases).flat_map(|(w, b)| [w, b])
    }

    fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.weights.iter_mut().zip(self.biases.iter_mut()).flat_map(|(w, b)| [w, b])
    }

    fn same_shape(&self, net: &DenseNet) -> bool {
        self.weights.len() == net.layers.len()
            && self.biases.len() == net.layers.len()
            && net
                .layers
                .iter()
                .zip(self.weights.iter().zip(&self.biases))
                .all(|(l, (w, b))| w.len() == l.weights.len() && b.len() == l.bias.len())
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
    seed: u64,
}

impl DenseNet {
    /// Network with layer widths `sizes` (input first) and one activation
    /// per weight layer. Weights and biases are uniform on
    /// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, drawn from a ChaCha stream
    /// seeded with `seed`.
    pub fn new(sizes: &[usize], activations: &[Activation], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(sizes, activations)?;
        net.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.inputs as f64).sqrt();
            for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 {
            return Err(Error::Architecture(format!(
                "{} layer sizes need {} activations, got {}",
                sizes.len(),
                sizes.len().saturating_sub(1),
                activations.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::Architecture("layer widths must be positive".into()));
        }
        let layers = sizes.windows(2).zip(activations).map(|(w, &a)| Layer::zeros(w[0], w[1], a)).collect();
        Ok(Self { layers, seed: 0 })
    }

    /// Builds a network from explicit layers, checking that widths chain and
    /// every parameter is finite.
    pub fn from_layers(layers: Vec<Layer>, seed: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Architecture("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.inputs == 0 || l.outputs == 0 || l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::Architecture(format!("layer {i} has inconsistent shapes")));
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(Error::Architecture(format!("layer {i} input does not chain")));
            }
            if !l.weights.iter().chain(&l.bias).all(|x| x.is_finite()) {
                return Err(Error::Architecture(format!("layer {i} has non-finite parameters")));
            }
        }
        Ok(Self { layers, seed })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(|l| l.outputs)).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn same_architecture(&self, other: &DenseNet) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.inputs == b.inputs && a.outputs == b.outputs && a.activation == b.activation)
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::Dimension { context: "network input", expected: self.input_dim(), actual: input.len() });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        let mut z = Vec::new();
        for layer in &self.layers {
            layer.affine(&x, &mut z);
            x.clear();
            x.extend(z.iter().map(|&v| layer.activation.apply(v)));
        }
        Ok(x)
    }

    pub fn forward_trace(&self, input: &[f64]) -> Result<Trace> {
        self.check_input(input)?;
        let mut trace = Trace { inputs: Vec::with_capacity(self.layers.len()), pre: Vec::new(), output: Vec::new() };
        let mut x = input.to_vec();
        for layer in &self.layers {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.affine(&x, &mut z);
            let next = z.iter().map(|&v| layer.activation.apply(v)).collect();
            trace.inputs.push(std::mem::replace(&mut x, next));
            trace.pre.push(z);
        }
        trace.output = x;
        Ok(trace)
    }

    /// Gradients of `output . upstream` with respect to every parameter and
    /// to the input.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(GradientSet, Vec<f64>)> {
        let trace = self.forward_trace(input)?;
        let mut grads = GradientSet::zeros_like(self);
        let dx = self.backward_trace(&trace, upstream, &mut grads)?;
        Ok((grads, dx))
    }

    /// Like [`DenseNet::backward`] for a recorded pass, accumulating the
    /// parameter gradients into `grads`. Returns the input gradient.
    pub fn backward_trace(&self, trace: &Trace, upstream: &[f64], grads: &mut GradientSet) -> Result<Vec<f64>> {
        if upstream.len() != self.output_dim() {
            return Err(Error::Dimension { context: "upstream gradient", expected: self.output_dim(), actual: upstream.len() });
        }
        if !grads.same_shape(self) {
            return Err(Error::Architecture("gradient set does not match network".into()));
        }
        let mut delta: Vec<f64> = upstream.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            for (d, &z) in delta.iter_mut().zip(&trace.pre[i]) {
                *d *= layer.activation.derivative(z);
            }
            let x = &trace.inputs[i];
            let gw = &mut grads.weights[i];
            for (o, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    row.iter_mut().zip(x).for_each(|(g, xi)| *g += d * xi);
                }
                grads.biases[i][o] += d;
            }
            let mut prev = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    prev.iter_mut().zip(row).for_each(|(p, w)| *p += d * w);
                }
            }
            delta = prev;
        }
        Ok(delta)
    }

    /// Writes the parameter file described in the module docs.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            sizes: self.sizes(),
            activations: self.layers.iter().map(|l| l.activation).collect(),
            seed: self.seed,
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(MAGIC)?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        for l in &self.layers {
            for x in l.weights.iter().chain(&l.bias) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let bad = |reason: &str| Error::Architecture(format!("parameter file: {reason}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len);
        if len > 1 << 20 {
            return Err(bad("header too large"));
        }
        let mut json = vec![0u8; len as usize];
        r.read_exact(&mut json)?;
        let header: Header = serde_json::from_slice(&json)?;
        let mut net = Self::zeros(&header.sizes, &header.activations)?;
        net.seed = header.seed;
        let mut buf = [0u8; 8];
        for l in &mut net.layers {
            for x in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                r.read_exact(&mut buf)?;
                *x = f64::from_le_bytes(buf);
            }
        }
        Self::from_layers(net.layers, net.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl OptimizerState {
    /// Adam with decay constants 0.9 / 0.999 and epsilon 1e-8.
    pub fn adam(net: &DenseNet, learning_rate: f64) -> Self {
        let shapes: Vec<Vec<f64>> = GradientSet::zeros_like(net).tensors().cloned().collect();
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, step: 0, first: shapes.clone(), second: shapes }
    }
}

/// One Adam descent step. A gradient containing NaN or infinity is rejected
/// and leaves both network and state untouched.
pub fn optimizer_step(net: &mut DenseNet, grads: &GradientSet, opt: &mut OptimizerState) -> Result<()> {
    if !grads.same_shape(net) || opt.first.len() != 2 * net.layers.len() {
        return Err(Error::Architecture("optimizer state does not match network".into()));
    }
    if !grads.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    opt.step += 1;
    let t = opt.step as f64;
    let c1 = 1.0 - opt.beta1.powf(t);
    let c2 = 1.0 - opt.beta2.powf(t);
    let params = net.layers.iter_mut().flat_map(|l| [&mut l.weights, &mut l.bias]);
    for (((p, g), m), v) in params.zip(grads.tensors()).zip(opt.first.iter_mut()).zip(opt.second.iter_mut()) {
        for i in 0..p.len() {
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon);
        }
    }
    Ok(())
}

/// `target <- rho * online + (1 - rho) * target`.
pub fn polyak_blend(target: &mut DenseNet, online: &DenseNet, rho: f64) -> Result<()> {
    if !target.same_architecture(online) {
        return Err(Error::Architecture("target and online networks differ".into()));
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        for (a, b) in t.weights.iter_mut().chain(t.bias.iter_mut()).zip(o.weights.iter().chain(&o.bias)) {
            *a = rho * b + (1.0 - rho) * *a;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_net_outputs_zeros() {
        let net = DenseNet::zeros(&[3, 4, 2], &[Activation::Relu, Activation::Identity]).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut net = DenseNet::zeros(&[3, 3], &[Activation::Identity]).unwrap();
        for i in 0..3 {
            net.layers_mut()[0].weights[i * 3 + i] = 1.0;
        }
        assert_eq!(net.forward(&[0.5, -1.0, 2.0]).unwrap(), vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn linear_weight_gradient_is_the_input_row() {
        let net = DenseNet::new(&[3, 2], &[Activation::Identity], 1).unwrap();
        let x = [0.3, -0.7, 1.1];
        let (g, _) = net.backward(&x, &[0.0, 1.0]).unwrap();
        assert_eq!(&g.weights[0][..3], &[0.0; 3]);
        assert_eq!(&g.weights[0][3..], &x);
        assert_eq!(g.biases[0], vec![0.0, 1.0]);
    }

    #[test]
    fn dead_rectifier_blocks_gradient() {
        let mut net = DenseNet::zeros(&[1, 1, 1], &[Activation::Relu, Activation::Identity]).unwrap();
        net.layers_mut()[0].weights[0] = 1.0;
        net.layers_mut()[0].bias[0] = -5.0;
        net.layers_mut()[1].weights[0] = 2.0;
        let (g, dx) = net.backward(&[1.0], &[1.0]).unwrap();
        assert_eq!(g.weights[0][0], 0.0);
        assert_eq!(g.biases[0][0], 0.0);
        assert_eq!(dx, vec![0.0]);
    }

    #[test]
    fn sigmoid_head_stays_in_range() {
        let net = DenseNet::new(&[2, 4], &[Activation::SigmoidScaled { scale: std::f64::consts::TAU }], 3).unwrap();
        for x in [[-50.0, 50.0], [0.0, 0.0], [30.0, 30.0]] {
            for y in net.forward(&x).unwrap() {
                assert!((0.0..=std::f64::consts::TAU).contains(&y));
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let net = DenseNet::new(&[2, 3], &[Activation::Relu], 0).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Dimension { .. })));
        assert!(net.backward(&[1.0, 2.0], &[1.0]).is_err());
        assert!(DenseNet::zeros(&[2, 3], &[]).is_err());
        assert!(DenseNet::zeros(&[2, 0, 1], &[Activation::Relu, Activation::Relu]).is_err());
    }

    #[test]
    fn zero_gradient_keeps_parameters_and_counts_step() {
        let mut net = DenseNet::new(&[2, 3, 1], &[Activation::Relu, Activation::Identity], 9).unwrap();
        let before = net.clone();
        let mut opt = OptimizerState::adam(&net, 1e-3);
        optimizer_step(&mut net, &GradientSet::zeros_like(&before), &mut opt).unwrap();
        assert_eq!(net, before);
        assert_eq!(opt.step, 1);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut net = DenseNet::new(&[1, 1], &[Activation::Identity], 0).unwrap();
        let before = net.clone();
        let mut opt = OptimizerState::adam(&net, 1e-3);
        let mut g = GradientSet::zeros_like(&net);
        g.biases[0][0] = f64::NAN;
        assert!(matches!(optimizer_step(&mut net, &g, &mut opt), Err(Error::NonFiniteGradient)));
        assert_eq!(net, before);
        assert_eq!(opt.step, 0);
    }

    #[test]
    fn polyak_limits_and_example() {
        let mut one = DenseNet::zeros(&[1, 1], &[Activation::Identity]).unwrap();
        one.layers_mut()[0].weights[0] = 1.0;
        one.layers_mut()[0].bias[0] = 1.0;
        let zero = DenseNet::zeros(&[1, 1], &[Activation::Identity]).unwrap();

        let mut t = zero.clone();
        polyak_blend(&mut t, &one, 1.0).unwrap();
        assert_eq!(t.layers()[0].weights, one.layers()[0].weights);

        let mut t = zero.clone();
        polyak_blend(&mut t, &one, 0.0).unwrap();
        assert_eq!(t, zero);

        let mut t = zero.clone();
        polyak_blend(&mut t, &one, 5e-3).unwrap();
        assert_eq!(t.layers()[0].weights[0], 0.005);

        let other = DenseNet::zeros(&[2, 1], &[Activation::Identity]).unwrap();
        assert!(polyak_blend(&mut t, &other, 0.5).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let net = DenseNet::new(
            &[3, 5, 2],
            &[Activation::Relu, Activation::SigmoidScaled { scale: 2.0 }],
            42,
        )
        .unwrap();
        let mut buf = Vec::new();
        net.save(&mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let back = DenseNet::load(buf.as_slice()).unwrap();
        assert_eq!(back, net);
        buf[0] = b'X';
        assert!(DenseNet::load(buf.as_slice()).is_err());
    }
}
