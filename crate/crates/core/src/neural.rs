//! Fully connected regression network trained by full-batch Adam on mean
//! squared error.
//!
//! The default architecture is `1 -> 100 -> 100 -> 1` with `tanh` hidden
//! units and a linear output. Weight matrices are stored input-major: row `j`
//! of a layer holds the weights from input `j` to every output, which keeps
//! both the forward pass and the weight-gradient accumulation as contiguous
//! `axpy` loops.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ephemeris::{NormalizedSample, Scaling, ScalingRecord};
use crate::error::{Error, Result};

pub const DEFAULT_WIDTHS: [usize; 4] = [1, 100, 100, 1];

const CHECKPOINT_MAGIC: &str = "kepler-mlp 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
}

impl Activation {
    fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `inputs x outputs`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Glorot-uniform weights. Biases are uniform in `±1/sqrt(fan_in)`: with
    /// zero biases every first-layer unit crosses zero at the same input,
    /// and a 1-d input then gives nearly collinear features.
    fn glorot<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let bias_limit = 1.0 / (inputs as f64).sqrt();
        let mut layer = Self::zeros(inputs, outputs);
        for w in &mut layer.weights {
            *w = rng.random_range(-limit..limit);
        }
        for b in &mut layer.bias {
            *b = rng.random_range(-bias_limit..bias_limit);
        }
        layer
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.outputs..(j + 1) * self.outputs]
    }

    fn forward_into(&self, input: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (j, &h) in input.iter().enumerate() {
            axpy(out, h, self.row(j));
        }
    }
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for k in 0..4 {
            acc[k] += ca[k] * cb[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// A trained (or freshly initialised) network together with the scalings
/// that map physical inputs and targets onto its normalised range.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    layers: Vec<Dense>,
    activation: Activation,
    pub scaling: ScalingRecord,
}

impl NetworkModel {
    /// Glorot-uniform initialisation. `widths` must start and end with 1.
    pub fn new(widths: &[usize], seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths[0] != 1 || *widths.last().unwrap() != 1 || widths.contains(&0)
        {
            return Err(Error::InvalidArgument(format!(
                "layer widths {widths:?} must be positive and map 1 input to 1 output"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = widths
            .windows(2)
            .map(|w| Dense::glorot(w[0], w[1], &mut rng))
            .collect();
        Ok(Self {
            layers,
            activation: Activation::Tanh,
            scaling: ScalingRecord::default(),
        })
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].inputs];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Forward pass on a normalised input.
    pub fn predict(&self, x: f64) -> f64 {
        let mut cur = vec![x];
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.outputs];
            layer.forward_into(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|v| *v = v.tanh());
            }
            cur = next;
        }
        cur[0]
    }

    /// Forward pass in physical units: scales the input, de-normalises the
    /// output.
    pub fn predict_physical(&self, input: f64) -> f64 {
        self.scaling
            .target
            .invert(self.predict(self.scaling.input.apply(input)))
    }

    /// Whether a normalised input lies outside the unit interval the model
    /// was trained on.
    pub fn is_extrapolation(x: f64) -> bool {
        !(0.0..=1.0).contains(&x)
    }

    pub fn mse(&self, samples: &[NormalizedSample]) -> f64 {
        if samples.is_empty() {
            return 0.0;
        }
        samples
            .iter()
            .map(|s| (self.predict(s.x) - s.y).powi(2))
            .sum::<f64>()
            / samples.len() as f64
    }

    /// Flattened parameters in checkpoint order: per layer, weights then bias.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.parameter_count());
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
    }

    /// Mean squared error and its gradient with respect to
    /// [`parameters`](Self::parameters).
    pub fn loss_and_gradient(&self, samples: &[NormalizedSample]) -> (f64, Vec<f64>) {
        let mut ws = Workspace::new(self, samples.len());
        let mut grads: Vec<Dense> = self
            .layers
            .iter()
            .map(|l| Dense::zeros(l.inputs, l.outputs))
            .collect();
        let loss = ws.backprop(self, samples, &mut grads);
        let mut flat = Vec::with_capacity(self.parameter_count());
        for g in &grads {
            flat.extend_from_slice(&g.weights);
            flat.extend_from_slice(&g.bias);
        }
        (loss, flat)
    }

    /// Text checkpoint: header, widths, scalings, then each layer's weight
    /// rows (one line per input) and bias. Floats use the shortest decimal
    /// form that parses back to the same bits.
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CHECKPOINT_MAGIC}");
        let _ = writeln!(out, "activation {}", self.activation.name());
        let widths: Vec<String> = self.widths().iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "widths {}", widths.join(" "));
        let s = &self.scaling;
        let _ = writeln!(out, "input_scaling {} {}", s.input.offset, s.input.span);
        let _ = writeln!(out, "target_scaling {} {}", s.target.offset, s.target.span);
        for (i, l) in self.layers.iter().enumerate() {
            let _ = writeln!(out, "layer {i}");
            for j in 0..l.inputs {
                let _ = writeln!(out, "{}", join_floats(l.row(j)));
            }
            let _ = writeln!(out, "bias {}", join_floats(&l.bias));
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut reader = CheckpointReader {
            lines: text.lines().filter(|l| !l.trim().is_empty()),
        };
        if reader.next_line()? != CHECKPOINT_MAGIC {
            return Err(bad_checkpoint("missing or unsupported header"));
        }
        let act = reader.keyed("activation")?;
        let activation = act
            .first()
            .and_then(|a| Activation::from_name(a))
            .ok_or_else(|| bad_checkpoint("unknown activation"))?;
        let widths = reader
            .keyed("widths")?
            .iter()
            .map(|w| w.parse::<usize>().map_err(|_| bad_checkpoint("bad width")))
            .collect::<Result<Vec<_>>>()?;
        let scaling_of = |v: Vec<&str>| -> Result<Scaling> {
            let f = parse_floats(&v)?;
            if f.len() != 2 {
                return Err(bad_checkpoint("scaling needs offset and span"));
            }
            Ok(Scaling {
                offset: f[0],
                span: f[1],
            })
        };
        let input = scaling_of(reader.keyed("input_scaling")?)?;
        let target = scaling_of(reader.keyed("target_scaling")?)?;
        let mut model = Self::new(&widths, 0)?;
        model.activation = activation;
        model.scaling = ScalingRecord { input, target };
        for (i, layer) in model.layers.iter_mut().enumerate() {
            let header = reader.keyed("layer")?;
            if header.first().copied() != Some(i.to_string().as_str()) {
                return Err(bad_checkpoint("layer index out of sequence"));
            }
            for j in 0..layer.inputs {
                let row: Vec<&str> = reader.next_line()?.split_whitespace().collect();
                let row = parse_floats(&row)?;
                if row.len() != layer.outputs {
                    return Err(bad_checkpoint("weight row has the wrong length"));
                }
                layer.weights[j * layer.outputs..(j + 1) * layer.outputs].copy_from_slice(&row);
            }
            let bias = parse_floats(&reader.keyed("bias")?)?;
            if bias.len() != layer.outputs {
                return Err(bad_checkpoint("bias has the wrong length"));
            }
            layer.bias = bias;
        }
        Ok(model)
    }
}

fn bad_checkpoint(msg: &str) -> Error {
    Error::Checkpoint(msg.to_string())
}

struct CheckpointReader<'a, I: Iterator<Item = &'a str>> {
    lines: I,
}

impl<'a, I: Iterator<Item = &'a str>> CheckpointReader<'a, I> {
    fn next_line(&mut self) -> Result<&'a str> {
        self.lines.next().ok_or_else(|| bad_checkpoint("truncated"))
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::Checkpoint(format!("expected `{key}`, found {line:?}")));
        }
        Ok(parts.collect())
    }
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_floats(v: &[&str]) -> Result<Vec<f64>> {
    v.iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Checkpoint(format!("bad number {s:?}")))
        })
        .collect()
}

/// Per-sample activations for one full batch.
struct Workspace {
    /// `acts[0]` holds the inputs; `acts[l + 1]` the outputs of layer `l`.
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
    n: usize,
}

impl Workspace {
    fn new(model: &NetworkModel, n: usize) -> Self {
        let widths = model.widths();
        Self {
            acts: widths.iter().map(|w| vec![0.0; w * n]).collect(),
            deltas: widths.iter().map(|w| vec![0.0; w * n]).collect(),
            n,
        }
    }

    fn forward(&mut self, model: &NetworkModel, samples: &[NormalizedSample]) {
        for (a, s) in self.acts[0].iter_mut().zip(samples) {
            *a = s.x;
        }
        let last = model.layers.len() - 1;
        for (l, layer) in model.layers.iter().enumerate() {
            let (before, after) = self.acts.split_at_mut(l + 1);
            let input = &before[l];
            let output = &mut after[0];
            for s in 0..self.n {
                let inp = &input[s * layer.inputs..(s + 1) * layer.inputs];
                let out = &mut output[s * layer.outputs..(s + 1) * layer.outputs];
                layer.forward_into(inp, out);
                if l != last {
                    out.iter_mut().for_each(|v| *v = v.tanh());
                }
            }
        }
    }

    /// Runs forward and backward passes, overwriting `grads`; returns the MSE.
    fn backprop(&mut self, model: &NetworkModel, samples: &[NormalizedSample], grads: &mut [Dense]) -> f64 {
        self.forward(model, samples);
        let n = self.n as f64;
        let nl = model.layers.len();
        let mut loss = 0.0;
        {
            let out = &self.acts[nl];
            let delta = &mut self.deltas[nl];
            for (s, sample) in samples.iter().enumerate() {
                let err = out[s] - sample.y;
                loss += err * err;
                delta[s] = 2.0 * err / n;
            }
        }
        for g in grads.iter_mut() {
            g.weights.iter_mut().for_each(|v| *v = 0.0);
            g.bias.iter_mut().for_each(|v| *v = 0.0);
        }
        for l in (0..nl).rev() {
            let layer = &model.layers[l];
            let grad = &mut grads[l];
            let (d_lo, d_hi) = self.deltas.split_at_mut(l + 1);
            let d_out = &d_hi[0];
            let d_in = &mut d_lo[l];
            let input = &self.acts[l];
            for s in 0..self.n {
                let dz = &d_out[s * layer.outputs..(s + 1) * layer.outputs];
                let inp = &input[s * layer.inputs..(s + 1) * layer.inputs];
                axpy(&mut grad.bias, 1.0, dz);
                for (j, &h) in inp.iter().enumerate() {
                    axpy(&mut grad.weights[j * layer.outputs..(j + 1) * layer.outputs], h, dz);
                }
                if l > 0 {
                    let di = &mut d_in[s * layer.inputs..(s + 1) * layer.inputs];
                    for (j, (d, &h)) in di.iter_mut().zip(inp).enumerate() {
                        // tanh'(z) = 1 - tanh(z)^2
                        *d = dot(layer.row(j), dz) * (1.0 - h * h);
                    }
                }
            }
        }
        loss / n
    }
}

/// Optimiser and schedule settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    pub widths: Vec<usize>,
    pub learning_rate: f64,
    /// The step size is held at `learning_rate` for this fraction of the
    /// epochs, then decays geometrically to `learning_rate * final_lr_fraction`
    /// at the last epoch.
    pub decay_start: f64,
    pub final_lr_fraction: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub validation_size: usize,
    /// Record a loss-trace row every this many epochs (and at the last one).
    pub trace_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200_000,
            seed: 0,
            widths: DEFAULT_WIDTHS.to_vec(),
            learning_rate: 1e-3,
            decay_start: 0.75,
            final_lr_fraction: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            validation_size: 3,
            trace_every: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub train_mse: f64,
    pub val_mse: f64,
    pub trace: Vec<LossRecord>,
}

impl TrainReport {
    /// `epoch,train_mse,val_mse` rows with header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,train_mse,val_mse\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{},{}", r.epoch, r.train_mse, r.val_mse);
        }
        out
    }
}

/// Seeded random partition into `(train, validation)`; both keep the input
/// order.
pub fn split(
    samples: &[NormalizedSample],
    n_val: usize,
    seed: u64,
) -> Result<(Vec<NormalizedSample>, Vec<NormalizedSample>)> {
    if n_val >= samples.len() {
        return Err(Error::InvalidArgument(format!(
            "validation size {n_val} must be smaller than the {} samples",
            samples.len()
        )));
    }
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut val_idx = idx[..n_val].to_vec();
    val_idx.sort_unstable();
    let mut is_val = vec![false; samples.len()];
    val_idx.iter().for_each(|&i| is_val[i] = true);
    let train = samples
        .iter()
        .zip(&is_val)
        .filter(|(_, v)| !**v)
        .map(|(s, _)| *s)
        .collect();
    let val = val_idx.iter().map(|&i| samples[i]).collect();
    Ok((train, val))
}

/// Full-batch Adam on the training MSE. The returned model is the state after
/// the last epoch; its scaling record is left at identity for the caller to
/// fill in.
pub fn train(
    train_set: &[NormalizedSample],
    validation: &[NormalizedSample],
    config: &TrainConfig,
) -> Result<(NetworkModel, TrainReport)> {
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if config.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }
    let mut model = NetworkModel::new(&config.widths, config.seed)?;
    let mut ws = Workspace::new(&model, train_set.len());
    let mut grads: Vec<Dense> = model
        .layers
        .iter()
        .map(|l| Dense::zeros(l.inputs, l.outputs))
        .collect();
    let mut m1 = grads.clone();
    let mut m2 = grads.clone();
    let mut trace = Vec::new();
    let last = config.epochs.max(2) as f64 - 1.0;
    let hold = config.decay_start.clamp(0.0, 1.0);
    let (mut b1t, mut b2t) = (1.0, 1.0);

    for epoch in 0..config.epochs {
        let loss = ws.backprop(&model, train_set, &mut grads);
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        if epoch % config.trace_every.max(1) == 0 {
            trace.push(LossRecord {
                epoch,
                train_mse: loss,
                val_mse: model.mse(validation),
            });
        }

        b1t *= config.beta1;
        b2t *= config.beta2;
        let progress = epoch as f64 / last;
        let lr = if progress <= hold || hold >= 1.0 {
            config.learning_rate
        } else {
            config.learning_rate * config.final_lr_fraction.powf((progress - hold) / (1.0 - hold))
        };
        let step = lr * (1.0 - b2t).sqrt() / (1.0 - b1t);
        for ((layer, g), (a, b)) in model
            .layers
            .iter_mut()
            .zip(&grads)
            .zip(m1.iter_mut().zip(m2.iter_mut()))
        {
            adam_update(&mut layer.weights, &g.weights, &mut a.weights, &mut b.weights, config, step);
            adam_update(&mut layer.bias, &g.bias, &mut a.bias, &mut b.bias, config, step);
        }
    }
    // Loss of the final parameters, not of the pre-update state.
    let final_train = model.mse(train_set);
    if !final_train.is_finite() {
        return Err(Error::Divergence {
            epoch: config.epochs,
        });
    }
    let val_mse = model.mse(validation);
    trace.push(LossRecord {
        epoch: config.epochs,
        train_mse: final_train,
        val_mse,
    });
    Ok((
        model,
        TrainReport {
            train_mse: final_train,
            val_mse,
            trace,
        },
    ))
}

fn adam_update(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], c: &TrainConfig, step: f64) {
    let (b1, b2, eps) = (c.beta1, c.beta2, c.adam_epsilon);
    for i in 0..p.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        p[i] -= step * m[i] / (v[i].sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ephemeris::Provenance;

    fn samples(f: impl Fn(f64) -> f64, n: usize) -> Vec<NormalizedSample> {
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                NormalizedSample {
                    x,
                    y: f(x),
                    provenance: Provenance::Observation(i),
                }
            })
            .collect()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let s = samples(|x| x, 28);
        let (tr, va) = split(&s, 3, 11).unwrap();
        assert_eq!((tr.len(), va.len()), (25, 3));
        let (tr2, va2) = split(&s, 3, 11).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(va, va2);
        let mut all: Vec<f64> = tr.iter().chain(&va).map(|p| p.x).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, s.iter().map(|p| p.x).collect::<Vec<_>>());

        let (tr, va) = split(&s, 0, 1).unwrap();
        assert_eq!((tr.len(), va.len()), (28, 0));
        assert!(split(&s, 28, 1).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..5 {
            let model = NetworkModel::new(&[1, 6, 5, 1], trial).unwrap();
            let data: Vec<NormalizedSample> = (0..7)
                .map(|i| NormalizedSample {
                    x: rng.random::<f64>(),
                    y: rng.random::<f64>(),
                    provenance: Provenance::Observation(i),
                })
                .collect();
            let (_, grad) = model.loss_and_gradient(&data);
            let params = model.parameters();
            let h = 1e-6;
            for (k, &g) in grad.iter().enumerate() {
                let mut probe = model.clone();
                let mut p = params.clone();
                p[k] += h;
                probe.set_parameters(&p);
                let up = probe.mse(&data);
                p[k] -= 2.0 * h;
                probe.set_parameters(&p);
                let down = probe.mse(&data);
                let fd = (up - down) / (2.0 * h);
                let rel = (fd - g).abs() / fd.abs().max(g.abs()).max(1e-7);
                assert!(rel < 1e-4, "param {k}: analytic {g} vs fd {fd}");
            }
        }
    }

    #[test]
    fn constant_target_is_learned() {
        let data = samples(|_| 0.5, 10);
        let cfg = TrainConfig {
            epochs: 20_000,
            widths: vec![1, 8, 8, 1],
            validation_size: 0,
            final_lr_fraction: 1.0,
            ..TrainConfig::default()
        };
        let (model, report) = train(&data, &[], &cfg).unwrap();
        assert!(report.train_mse < 1e-7, "{}", report.train_mse);
        assert_eq!(model.predict(0.3), model.predict(0.3));
    }

    #[test]
    fn divergence_is_reported() {
        let data = samples(|_| 0.5, 4);
        let cfg = TrainConfig {
            epochs: 50,
            widths: vec![1, 4, 1],
            learning_rate: f64::INFINITY,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&data, &[], &cfg), Err(Error::Divergence { .. })));
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut model = NetworkModel::new(&[1, 7, 3, 1], 9).unwrap();
        model.scaling = ScalingRecord {
            input: Scaling::TURN,
            target: Scaling {
                offset: 1.38376,
                span: 0.28024000000000004,
            },
        };
        let text = model.to_checkpoint();
        let back = NetworkModel::from_checkpoint(&text).unwrap();
        assert_eq!(back, model);
        for x in [0.0, 0.123, 0.5, 1.0] {
            assert_eq!(back.predict(x).to_bits(), model.predict(x).to_bits());
        }
        assert!(NetworkModel::from_checkpoint("garbage").is_err());
        assert!(NetworkModel::from_checkpoint(&text.replace("tanh", "relu")).is_err());
    }

    #[test]
    fn rejects_bad_widths() {
        assert!(NetworkModel::new(&[2, 3, 1], 0).is_err());
        assert!(NetworkModel::new(&[1], 0).is_err());
        assert!(NetworkModel::new(&[1, 0, 1], 0).is_err());
    }
}
