#![allow(dead_code)]

use rand::Rng;
use ris_antijam::linkmodel::EffectiveLinkTable;

/// Random link table in normalized units: noise 0.1, jamming power and
/// jammer gains uniform on (0, 1), gains exponential with a log-uniform
/// scale spanning two decades.
pub fn random_table<R: Rng>(rng: &mut R, users: usize, subchannels: usize) -> EffectiveLinkTable {
    let gain = (0..users)
        .map(|_| {
            (0..subchannels)
                .map(|_| -(1.0 - rng.random::<f64>()).ln() * 10f64.powf(rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let jam_gain = (0..users).map(|_| (0..subchannels).map(|_| rng.random::<f64>()).collect()).collect();
    EffectiveLinkTable {
        gain,
        jam_gain,
        noise_power: 0.1,
        jam_power: (0..subchannels).map(|_| rng.random::<f64>()).collect(),
    }
}

/// Budgets from 1 W (usually binding) to about 3 kW (usually slack) for
/// tables from [`random_table`].
pub fn random_budget<R: Rng>(rng: &mut R) -> f64 {
    10f64.powf(rng.random_range(0.0..3.5))
}

use ris_antijam::nn::{Activation, DenseNet};

/// Random network of depth 1-3 with widths 1-8, mixing rectifier and
/// scaled-sigmoid hidden layers and a head that is either identity or
/// scaled sigmoid.
pub fn random_net<R: Rng>(rng: &mut R, seed: u64) -> DenseNet {
    let depth = rng.random_range(1..=3);
    let sizes: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..=8)).collect();
    let mut acts: Vec<Activation> = (0..depth - 1)
        .map(|_| {
            if rng.random::<bool>() {
                Activation::Relu
            } else {
                Activation::SigmoidScaled { scale: rng.random_range(0.5..3.0) }
            }
        })
        .collect();
    acts.push(if rng.random::<bool>() { Activation::Identity } else { Activation::SigmoidScaled { scale: std::f64::consts::TAU } });
    DenseNet::new(&sizes, &acts, seed).unwrap()
}

/// Pre-activations of every layer, evaluated neuron by neuron.
pub fn naive_forward(net: &DenseNet, input: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut x = input.to_vec();
    let mut pre = Vec::new();
    for l in net.layers() {
        let mut z = vec![0.0; l.outputs];
        let mut y = vec![0.0; l.outputs];
        for o in 0..l.outputs {
            let mut s = l.bias[o];
            for i in 0..l.inputs {
                s += l.weights[o * l.inputs + i] * x[i];
            }
            z[o] = s;
            y[o] = match l.activation {
                Activation::Relu => s.max(0.0),
                Activation::Identity => s,
                Activation::SigmoidScaled { scale } => scale / (1.0 + (-s).exp()),
            };
        }
        pre.push(z);
        x = y;
    }
    (x, pre)
}

/// Largest relative error between the analytic gradient of `output . u` and
/// central finite differences with step `h`, over all parameters and inputs.
/// Relative error uses `max(|a|, |b|, 1e-4)` as the scale so that
/// near-zero gradients are compared absolutely.
pub fn finite_difference_error(net: &DenseNet, input: &[f64], upstream: &[f64], h: f64) -> f64 {
    let (grads, dx) = net.backward(input, upstream).unwrap();
    let f = |n: &DenseNet, x: &[f64]| -> f64 { n.forward(x).unwrap().iter().zip(upstream).map(|(a, b)| a * b).sum() };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-4);
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for li in 0..net.layers().len() {
        for idx in 0..net.layers()[li].weights.len() + net.layers()[li].bias.len() {
            let nw = net.layers()[li].weights.len();
            let set = |n: &mut DenseNet, v: f64| {
                if idx < nw {
                    n.layers_mut()[li].weights[idx] = v;
                } else {
                    n.layers_mut()[li].bias[idx - nw] = v;
                }
            };
            let orig = if idx < nw { net.layers()[li].weights[idx] } else { net.layers()[li].bias[idx - nw] };
            set(&mut probe, orig + h);
            let up = f(&probe, input);
            set(&mut probe, orig - h);
            let down = f(&probe, input);
            set(&mut probe, orig);
            let numeric = (up - down) / (2.0 * h);
            let analytic = if idx < nw { grads.weights[li][idx] } else { grads.biases[li][idx - nw] };
            worst = worst.max(rel(analytic, numeric));
        }
    }
    let mut x = input.to_vec();
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let up = f(net, &x);
        x[i] = orig - h;
        let down = f(net, &x);
        x[i] = orig;
        worst = worst.max(rel(dx[i], (up - down) / (2.0 * h)));
    }
    worst
}

/// Input whose pre-activations all sit at least `margin` away from zero, so
/// that finite differences do not straddle a rectifier kink.
pub fn input_away_from_kinks<R: Rng>(rng: &mut R, net: &DenseNet, margin: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..net.input_dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (_, pre) = naive_forward(net, &x);
        if pre.iter().flatten().all(|z| z.abs() > margin) {
            return x;
        }
    }
}
