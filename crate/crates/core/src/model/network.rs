use super::arch::{Arch, LayerSpec, ModelSpec, Shape};
use crate::error::{EcgError, Result};
use crate::kernel::{
    conv1d, conv1d_backward, dense, dense_backward, maxpool1d, maxpool1d_backward, relu,
    relu_backward, softmax_cross_entropy, ParamTensor, Signal,
};
use crate::rng;
use rand::Rng as _;

const POOL: usize = 2;

/// Indices of a weight/bias pair in `Model::params` (bias is `weight + 1`).
type Slot = usize;

#[derive(Debug, Clone)]
enum Layer {
    Conv(Slot),
    Relu,
    Pool { window: usize, stride: usize },
    Residual { conv1: Slot, conv2: Slot, shortcut: Option<Slot> },
    Flatten,
    Dense(Slot),
}

#[derive(Debug)]
enum Cache {
    Conv { input: Signal },
    Relu { input: Signal },
    Pool { channels: usize, length: usize, argmax: Vec<usize> },
    Residual { input: Signal, z1: Signal, h1: Signal, sum: Signal, argmax: Vec<usize> },
    Flatten { channels: usize, length: usize },
    Dense { input: Signal },
}

/// A built network: its spec, named parameter tensors and compiled layers.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    names: Vec<String>,
    params: Vec<ParamTensor>,
    layers: Vec<Layer>,
}

/// Per-sample outcome of a training pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStep {
    pub loss: f32,
    pub logits: Vec<f32>,
}

pub fn default_label_names(n_classes: usize) -> Vec<String> {
    crate::data::LabelMap::for_classes(n_classes).names().to_vec()
}

/// Original 11-conv network with He-uniform weights drawn from `seed`.
pub fn build_original(input_length: usize, n_classes: usize, seed: u64) -> Result<Model> {
    Model::new(ModelSpec::original(input_length, default_label_names(n_classes))?, seed)
}

/// Modified 6-conv network with He-uniform weights drawn from `seed`.
pub fn build_modified(input_length: usize, n_classes: usize, seed: u64) -> Result<Model> {
    Model::new(ModelSpec::modified(input_length, default_label_names(n_classes))?, seed)
}

pub fn build(arch: Arch, input_length: usize, n_classes: usize, seed: u64) -> Result<Model> {
    match arch {
        Arch::Original => build_original(input_length, n_classes, seed),
        Arch::Modified => build_modified(input_length, n_classes, seed),
    }
}

fn he_uniform(shape: Vec<usize>, fan_in: usize, rng: &mut rng::Rng) -> ParamTensor {
    let bound = (6.0 / fan_in as f64).sqrt();
    let n = shape.iter().product();
    let values = (0..n).map(|_| rng.gen_range(-bound..bound) as f32).collect();
    ParamTensor::new(shape, values).expect("length matches shape")
}

struct Builder<'a> {
    names: Vec<String>,
    params: Vec<ParamTensor>,
    rng: &'a mut rng::Rng,
}

impl Builder<'_> {
    fn conv(&mut self, name: String, out_ch: usize, in_ch: usize, k: usize) -> Slot {
        let weight = he_uniform(vec![out_ch, in_ch, k], in_ch * k, self.rng);
        self.push(name, weight, out_ch)
    }

    fn dense(&mut self, name: String, units: usize, n_in: usize) -> Slot {
        let weight = he_uniform(vec![units, n_in], n_in, self.rng);
        self.push(name, weight, units)
    }

    fn push(&mut self, name: String, weight: ParamTensor, bias_len: usize) -> Slot {
        let slot = self.params.len();
        self.names.push(format!("{name}.weight"));
        self.params.push(weight);
        self.names.push(format!("{name}.bias"));
        self.params.push(ParamTensor::zeros(vec![bias_len]));
        slot
    }
}

fn channels_of(shape: Shape) -> usize {
    match shape {
        Shape::Signal { channels, .. } => channels,
        Shape::Vector(n) => n,
    }
}

impl Model {
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let shapes = spec.shapes()?;
        let mut rng = rng::seeded(seed);
        let mut b = Builder {
            names: Vec::new(),
            params: Vec::new(),
            rng: &mut rng,
        };
        let mut layers = Vec::with_capacity(spec.layers.len());
        let mut in_shape = Shape::Signal {
            channels: 1,
            length: spec.input_length,
        };
        let (mut n_conv, mut n_block, mut n_dense) = (0, 0, 0);
        for (layer, &out_shape) in spec.layers.iter().zip(&shapes) {
            let in_ch = channels_of(in_shape);
            layers.push(match *layer {
                LayerSpec::Conv { filters, kernel } => {
                    n_conv += 1;
                    Layer::Conv(b.conv(format!("conv{}", n_conv - 1), filters, in_ch, kernel))
                }
                LayerSpec::Relu => Layer::Relu,
                LayerSpec::Maxpool { window, stride } => Layer::Pool { window, stride },
                LayerSpec::ResidualBlock { filters, kernel } => {
                    let name = format!("block{n_block}");
                    n_block += 1;
                    let conv1 = b.conv(format!("{name}.conv1"), filters, in_ch, kernel);
                    let conv2 = b.conv(format!("{name}.conv2"), filters, filters, kernel);
                    let shortcut = (in_ch != filters)
                        .then(|| b.conv(format!("{name}.shortcut"), filters, in_ch, 1));
                    Layer::Residual {
                        conv1,
                        conv2,
                        shortcut,
                    }
                }
                LayerSpec::Flatten => Layer::Flatten,
                LayerSpec::Dense { units } => {
                    n_dense += 1;
                    Layer::Dense(b.dense(format!("dense{}", n_dense - 1), units, in_shape.size()))
                }
            });
            in_shape = out_shape;
        }
        let Builder { names, params, .. } = b;
        Ok(Self {
            spec,
            names,
            params,
            layers,
        })
    }

    /// Rebuilds a model around existing tensors (used by checkpoint loading).
    pub(crate) fn with_params(spec: ModelSpec, tensors: Vec<(String, Vec<usize>, Vec<f32>)>) -> Result<Self> {
        let mut model = Self::new(spec, 0)?;
        if tensors.len() != model.params.len() {
            return Err(EcgError::Checkpoint(format!(
                "expected {} tensors, found {}",
                model.params.len(),
                tensors.len()
            )));
        }
        for ((name, shape, values), (expected, param)) in
            tensors.into_iter().zip(model.names.iter().zip(model.params.iter_mut()))
        {
            if &name != expected || shape != param.shape {
                return Err(EcgError::Checkpoint(format!(
                    "tensor {name} {shape:?} does not match expected {expected} {:?}",
                    param.shape
                )));
            }
            *param = ParamTensor::new(shape, values)?;
        }
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn arch(&self) -> Arch {
        self.spec.name
    }

    pub fn n_classes(&self) -> usize {
        self.spec.n_classes
    }

    pub fn input_length(&self) -> usize {
        self.spec.input_length
    }

    pub fn label_names(&self) -> &[String] {
        &self.spec.label_names
    }

    pub fn params(&self) -> &[ParamTensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [ParamTensor] {
        &mut self.params
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> impl Iterator<Item = (&str, &ParamTensor)> {
        self.names.iter().map(String::as_str).zip(&self.params)
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(ParamTensor::len).sum()
    }

    pub fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(ParamTensor::zero_grad);
    }

    /// Index of the first layer after `Flatten`: the start of the classifier head.
    pub fn head_start(&self) -> usize {
        self.layers
            .iter()
            .position(|l| matches!(l, Layer::Flatten))
            .map_or(0, |i| i + 1)
    }

    /// Parameter indices owned by layers in `from..`.
    pub fn param_indices_from(&self, from: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for layer in &self.layers[from..] {
            match *layer {
                Layer::Conv(s) | Layer::Dense(s) => out.extend([s, s + 1]),
                Layer::Residual {
                    conv1,
                    conv2,
                    shortcut,
                } => {
                    out.extend([conv1, conv1 + 1, conv2, conv2 + 1]);
                    if let Some(s) = shortcut {
                        out.extend([s, s + 1]);
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Parameter indices of the classifier head (everything after `Flatten`).
    pub fn head_param_indices(&self) -> Vec<usize> {
        self.param_indices_from(self.head_start())
    }

    /// Swaps the final dense layer for a freshly initialized one with
    /// `label_names.len()` outputs. Every other tensor is left untouched.
    pub fn replace_head(&mut self, label_names: Vec<String>, seed: u64) -> Result<()> {
        let n_classes = label_names.len();
        if n_classes == 0 {
            return Err(EcgError::InvalidArgument("head needs at least one class".into()));
        }
        let Some(Layer::Dense(slot)) = self.layers.last().cloned() else {
            return Err(EcgError::Shape("model does not end in a dense layer".into()));
        };
        let n_in = self.params[slot].shape[1];
        let mut rng = rng::seeded(seed);
        self.params[slot] = he_uniform(vec![n_classes, n_in], n_in, &mut rng);
        self.params[slot + 1] = ParamTensor::zeros(vec![n_classes]);
        if let Some(LayerSpec::Dense { units }) = self.spec.layers.last_mut() {
            *units = n_classes;
        }
        self.spec.n_classes = n_classes;
        self.spec.label_names = label_names;
        self.spec.validate()
    }

    fn check_input(&self, x: &Signal) -> Result<()> {
        if x.channels() != 1 || x.length() != self.spec.input_length {
            return Err(EcgError::Shape(format!(
                "model expects 1x{} input, got {}x{}",
                self.spec.input_length,
                x.channels(),
                x.length()
            )));
        }
        Ok(())
    }

    fn conv(&self, slot: Slot, x: &Signal) -> Result<Signal> {
        conv1d(x, &self.params[slot], &self.params[slot + 1])
    }

    fn apply(&self, layer: &Layer, x: Signal) -> Result<Signal> {
        Ok(match *layer {
            Layer::Conv(s) => self.conv(s, &x)?,
            Layer::Relu => relu(&x),
            Layer::Pool { window, stride } => maxpool1d(&x, window, stride)?.output,
            Layer::Residual {
                conv1,
                conv2,
                shortcut,
            } => {
                let h1 = relu(&self.conv(conv1, &x)?);
                let mut sum = self.conv(conv2, &h1)?;
                let skip = match shortcut {
                    Some(s) => self.conv(s, &x)?,
                    None => x,
                };
                add_assign(&mut sum, &skip);
                maxpool1d(&relu(&sum), POOL, POOL)?.output
            }
            Layer::Flatten => x.flatten(),
            Layer::Dense(s) => {
                let y = dense(x.values(), &self.params[s], &self.params[s + 1])?;
                Signal::new(y.len(), 1, y)?
            }
        })
    }

    /// Runs layers `from..to` on an activation produced by layer `from - 1`.
    pub fn forward_range(&self, x: Signal, from: usize, to: usize) -> Result<Signal> {
        self.layers[from..to].iter().try_fold(x, |act, l| self.apply(l, act))
    }

    /// Flattened feature vector fed to the classifier head.
    pub fn features(&self, x: &Signal) -> Result<Signal> {
        self.check_input(x)?;
        self.forward_range(x.clone(), 0, self.head_start())
    }

    pub fn forward_sample(&self, x: &Signal) -> Result<Vec<f32>> {
        self.check_input(x)?;
        Ok(self.forward_range(x.clone(), 0, self.layers.len())?.into_values())
    }

    /// Logits for every signal in `batch`, one row per sample.
    pub fn forward(&self, batch: &[Signal]) -> Result<Vec<Vec<f32>>> {
        batch.iter().map(|x| self.forward_sample(x)).collect()
    }

    fn apply_cached(&self, layer: &Layer, x: Signal) -> Result<(Signal, Cache)> {
        Ok(match *layer {
            Layer::Conv(s) => {
                let y = self.conv(s, &x)?;
                (y, Cache::Conv { input: x })
            }
            Layer::Relu => (relu(&x), Cache::Relu { input: x }),
            Layer::Pool { window, stride } => {
                let p = maxpool1d(&x, window, stride)?;
                let cache = Cache::Pool {
                    channels: x.channels(),
                    length: x.length(),
                    argmax: p.argmax,
                };
                (p.output, cache)
            }
            Layer::Residual {
                conv1,
                conv2,
                shortcut,
            } => {
                let z1 = self.conv(conv1, &x)?;
                let h1 = relu(&z1);
                let mut sum = self.conv(conv2, &h1)?;
                match shortcut {
                    Some(s) => add_assign(&mut sum, &self.conv(s, &x)?),
                    None => add_assign(&mut sum, &x),
                }
                let p = maxpool1d(&relu(&sum), POOL, POOL)?;
                let cache = Cache::Residual {
                    input: x,
                    z1,
                    h1,
                    sum,
                    argmax: p.argmax,
                };
                (p.output, cache)
            }
            Layer::Flatten => {
                let cache = Cache::Flatten {
                    channels: x.channels(),
                    length: x.length(),
                };
                (x.flatten(), cache)
            }
            Layer::Dense(s) => {
                let y = dense(x.values(), &self.params[s], &self.params[s + 1])?;
                (Signal::new(y.len(), 1, y)?, Cache::Dense { input: x })
            }
        })
    }

    fn conv_backward(&mut self, slot: Slot, input: &Signal, grad: &Signal) -> Result<Signal> {
        let (w, b) = self.params[slot..slot + 2].split_at_mut(1);
        conv1d_backward(input, &mut w[0], &mut b[0], grad)
    }

    fn back(&mut self, layer: &Layer, cache: Cache, grad: Signal) -> Result<Signal> {
        match (layer, cache) {
            (&Layer::Conv(s), Cache::Conv { input }) => self.conv_backward(s, &input, &grad),
            (Layer::Relu, Cache::Relu { input }) => relu_backward(&input, &grad),
            (Layer::Pool { .. }, Cache::Pool { channels, length, argmax }) => {
                maxpool1d_backward(channels, length, &argmax, &grad)
            }
            (
                &Layer::Residual {
                    conv1,
                    conv2,
                    shortcut,
                },
                Cache::Residual {
                    input,
                    z1,
                    h1,
                    sum,
                    argmax,
                },
            ) => {
                let g_post = maxpool1d_backward(sum.channels(), sum.length(), &argmax, &grad)?;
                let g_sum = relu_backward(&sum, &g_post)?;
                let g_h1 = self.conv_backward(conv2, &h1, &g_sum)?;
                let g_z1 = relu_backward(&z1, &g_h1)?;
                let mut g_in = self.conv_backward(conv1, &input, &g_z1)?;
                match shortcut {
                    Some(s) => add_assign(&mut g_in, &self.conv_backward(s, &input, &g_sum)?),
                    None => add_assign(&mut g_in, &g_sum),
                }
                Ok(g_in)
            }
            (Layer::Flatten, Cache::Flatten { channels, length }) => grad.reshape(channels, length),
            (&Layer::Dense(s), Cache::Dense { input }) => {
                let (w, b) = self.params[s..s + 2].split_at_mut(1);
                let g = dense_backward(input.values(), &mut w[0], &mut b[0], grad.values())?;
                Signal::new(input.channels(), input.length(), g)
            }
            _ => unreachable!("cache recorded by a different layer kind"),
        }
    }

    /// Forward from layer `from`, cross-entropy against `label`, and backward
    /// down to layer `from`, accumulating `scale`-weighted gradients into the
    /// parameters. Grads are not cleared.
    pub fn accumulate_gradients(
        &mut self,
        x: &Signal,
        label: usize,
        from: usize,
        scale: f32,
    ) -> Result<SampleStep> {
        if from == 0 {
            self.check_input(x)?;
        }
        let layers = std::mem::take(&mut self.layers);
        let result = self.accumulate_inner(&layers, x, label, from, scale);
        self.layers = layers;
        result
    }

    fn accumulate_inner(
        &mut self,
        layers: &[Layer],
        x: &Signal,
        label: usize,
        from: usize,
        scale: f32,
    ) -> Result<SampleStep> {
        let mut caches = Vec::with_capacity(layers.len() - from);
        let mut act = x.clone();
        for layer in &layers[from..] {
            let (next, cache) = self.apply_cached(layer, act)?;
            caches.push(cache);
            act = next;
        }
        let logits = act.into_values();
        let ce = softmax_cross_entropy(&logits, label)?;
        let grad: Vec<f32> = ce.grad.iter().map(|g| g * scale).collect();
        let mut grad = Signal::new(grad.len(), 1, grad)?;
        for (layer, cache) in layers[from..].iter().zip(caches).rev() {
            grad = self.back(layer, cache, grad)?;
        }
        Ok(SampleStep {
            loss: ce.loss,
            logits,
        })
    }

    /// Mean cross-entropy over the batch; leaves the mean gradient in every
    /// parameter's `grad`.
    pub fn backward(&mut self, batch: &[Signal], labels: &[usize]) -> Result<f32> {
        if batch.len() != labels.len() || batch.is_empty() {
            return Err(EcgError::Data(format!(
                "batch of {} signals with {} labels",
                batch.len(),
                labels.len()
            )));
        }
        self.zero_grad();
        let scale = 1.0 / batch.len() as f32;
        let mut total = 0.0f64;
        for (x, &label) in batch.iter().zip(labels) {
            total += f64::from(self.accumulate_gradients(x, label, 0, scale)?.loss);
        }
        Ok((total / batch.len() as f64) as f32)
    }
}

fn add_assign(acc: &mut Signal, other: &Signal) {
    for (a, b) in acc.values_mut().iter_mut().zip(other.values()) {
        *a += b;
    }
}
