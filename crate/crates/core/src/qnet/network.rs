use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Architecture, StateTensor};
use crate::error::{Error, Result};

/// Weights and biases of one layer, stored row-major per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(outputs: usize, fan_in: usize) -> Self {
        Self {
            weight: vec![0.0; outputs * fan_in],
            bias: vec![0.0; outputs],
        }
    }

    fn fan_in(&self) -> usize {
        self.weight.len() / self.bias.len().max(1)
    }

    fn row(&self, unit: usize) -> &[f64] {
        let k = self.fan_in();
        &self.weight[unit * k..][..k]
    }
}

/// One regression example: input state, chosen action and TD target.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub state: &'a StateTensor,
    pub action: usize,
    pub target: f64,
}

/// Deliberate single-layer bugs in the backward pass. Used to confirm that
/// the finite-difference check actually detects a broken gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackwardFault {
    /// The ReLU mask after conv1 is ignored.
    Conv1,
    /// The conv2 bias gradient keeps only the last spatial position.
    Conv2,
    /// The ReLU mask after fc1 is ignored.
    Fc1,
    /// The fc2 weight gradient lands in the wrong action row.
    Fc2,
}

impl BackwardFault {
    pub const ALL: [BackwardFault; 4] = [
        BackwardFault::Conv1,
        BackwardFault::Conv2,
        BackwardFault::Fc1,
        BackwardFault::Fc2,
    ];
}

/// All parameters of the Q-network. The same type holds gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetworkParams {
    arch: Architecture,
    pub conv1: Layer,
    pub conv2: Layer,
    pub fc1: Layer,
    pub fc2: Layer,
}

/// Intermediate values of one forward pass, kept for backpropagation.
struct Trace {
    patches1: Vec<f64>,
    act1: Vec<f64>,
    patches2: Vec<f64>,
    act2: Vec<f64>,
    hidden: Vec<f64>,
    q: Vec<f64>,
}

impl Trace {
    fn new(arch: &Architecture) -> Self {
        let (h1, w1) = arch.conv1_out();
        let (h2, w2) = arch.conv2_out();
        let k1 = arch.conv1.kernel * arch.conv1.kernel;
        let k2 = arch.conv1.filters * arch.conv2.kernel * arch.conv2.kernel;
        Self {
            patches1: vec![0.0; h1 * w1 * k1],
            act1: vec![0.0; arch.conv1.filters * h1 * w1],
            patches2: vec![0.0; h2 * w2 * k2],
            act2: vec![0.0; arch.flat_len()],
            hidden: vec![0.0; arch.hidden],
            q: vec![0.0; arch.actions],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Gathers `kernel x kernel` windows of a `channels x h x w` map into rows
/// of `out`, one row per output position, channel-major within a row.
fn im2col(
    input: &[f64],
    channels: usize,
    (h, w): (usize, usize),
    kernel: usize,
    stride: usize,
    (oh, ow): (usize, usize),
    out: &mut [f64],
) {
    let row_len = channels * kernel * kernel;
    for oy in 0..oh {
        for ox in 0..ow {
            let dst = &mut out[(oy * ow + ox) * row_len..][..row_len];
            for c in 0..channels {
                for ky in 0..kernel {
                    let src = &input[c * h * w + (oy * stride + ky) * w + ox * stride..][..kernel];
                    dst[(c * kernel + ky) * kernel..][..kernel].copy_from_slice(src);
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatter-adds patch gradients back onto the map.
fn col2im(
    patches: &[f64],
    channels: usize,
    (h, w): (usize, usize),
    kernel: usize,
    stride: usize,
    (oh, ow): (usize, usize),
    out: &mut [f64],
) {
    let row_len = channels * kernel * kernel;
    for oy in 0..oh {
        for ox in 0..ow {
            let src = &patches[(oy * ow + ox) * row_len..][..row_len];
            for c in 0..channels {
                for ky in 0..kernel {
                    let dst =
                        &mut out[c * h * w + (oy * stride + ky) * w + ox * stride..][..kernel];
                    for (d, s) in dst
                        .iter_mut()
                        .zip(&src[(c * kernel + ky) * kernel..][..kernel])
                    {
                        *d += s;
                    }
                }
            }
        }
    }
}

/// `out[f][p] = relu(bias[f] + <weight[f], patches[p]>)`.
fn conv_relu(layer: &Layer, patches: &[f64], positions: usize, out: &mut [f64]) {
    let k = layer.fan_in();
    for (f, out_f) in out.chunks_exact_mut(positions).enumerate() {
        let wf = layer.row(f);
        let b = layer.bias[f];
        for (p, o) in out_f.iter_mut().enumerate() {
            *o = (b + dot(wf, &patches[p * k..][..k])).max(0.0);
        }
    }
}

impl QNetworkParams {
    pub fn zeros(arch: Architecture) -> Self {
        let [c1, c2, f1, f2] = arch.weight_shapes();
        let fan = |s: &[usize]| s[1..].iter().product::<usize>();
        Self {
            arch,
            conv1: Layer::zeros(c1[0], fan(&c1)),
            conv2: Layer::zeros(c2[0], fan(&c2)),
            fc1: Layer::zeros(f1[0], fan(&f1)),
            fc2: Layer::zeros(f2[0], fan(&f2)),
        }
    }

    /// Weights uniform in `[-sqrt(2/fan_in), sqrt(2/fan_in)]`, zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut params = Self::zeros(arch);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in params.layers_mut() {
            let bound = (2.0 / layer.fan_in() as f64).sqrt();
            for w in &mut layer.weight {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(params)
    }

    pub(crate) fn from_layers(arch: Architecture, layers: [Layer; 4]) -> Result<Self> {
        let [conv1, conv2, fc1, fc2] = layers;
        let params = Self {
            arch,
            conv1,
            conv2,
            fc1,
            fc2,
        };
        let reference = Self::zeros(arch);
        if !params.same_shape(&reference) {
            return Err(Error::Shape("layer sizes do not match architecture".into()));
        }
        Ok(params)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> [&Layer; 4] {
        [&self.conv1, &self.conv2, &self.fc1, &self.fc2]
    }

    pub fn layers_mut(&mut self) -> [&mut Layer; 4] {
        [
            &mut self.conv1,
            &mut self.conv2,
            &mut self.fc1,
            &mut self.fc2,
        ]
    }

    pub fn num_params(&self) -> usize {
        self.layers()
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// Every parameter in storage order (per layer: weights, then biases).
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers()
            .into_iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()).copied())
    }

    pub(crate) fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers_mut()
            .into_iter()
            .flat_map(|l| l.weight.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.arch == other.arch
            && self
                .layers()
                .iter()
                .zip(other.layers())
                .all(|(a, b)| a.weight.len() == b.weight.len() && a.bias.len() == b.bias.len())
    }

    fn check_input(&self, x: &StateTensor) -> Result<()> {
        if x.rows() != self.arch.input_rows || x.cols() != self.arch.input_cols {
            return Err(Error::Shape(format!(
                "network expects {}x{} input, got {}x{}",
                self.arch.input_rows,
                self.arch.input_cols,
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    fn run(&self, x: &StateTensor, t: &mut Trace) {
        let a = &self.arch;
        let (h1, w1) = a.conv1_out();
        let (h2, w2) = a.conv2_out();
        im2col(
            x.data(),
            1,
            (a.input_rows, a.input_cols),
            a.conv1.kernel,
            a.conv1.stride,
            (h1, w1),
            &mut t.patches1,
        );
        conv_relu(&self.conv1, &t.patches1, h1 * w1, &mut t.act1);
        im2col(
            &t.act1,
            a.conv1.filters,
            (h1, w1),
            a.conv2.kernel,
            a.conv2.stride,
            (h2, w2),
            &mut t.patches2,
        );
        conv_relu(&self.conv2, &t.patches2, h2 * w2, &mut t.act2);
        for (i, h) in t.hidden.iter_mut().enumerate() {
            *h = (self.fc1.bias[i] + dot(self.fc1.row(i), &t.act2)).max(0.0);
        }
        for (k, q) in t.q.iter_mut().enumerate() {
            *q = self.fc2.bias[k] + dot(self.fc2.row(k), &t.hidden);
        }
    }

    /// Smallest `|z|` over every ReLU pre-activation for input `x`.
    pub(crate) fn relu_margin(&self, x: &StateTensor) -> f64 {
        let mut t = Trace::new(&self.arch);
        self.run(x, &mut t);
        let a = &self.arch;
        let (h1, w1) = a.conv1_out();
        let (h2, w2) = a.conv2_out();
        let mut margin = f64::INFINITY;
        let mut scan = |layer: &Layer, patches: &[f64], positions: usize| {
            let k = layer.fan_in();
            for f in 0..layer.bias.len() {
                for p in 0..positions {
                    let z = layer.bias[f] + dot(layer.row(f), &patches[p * k..][..k]);
                    margin = margin.min(z.abs());
                }
            }
        };
        scan(&self.conv1, &t.patches1, h1 * w1);
        scan(&self.conv2, &t.patches2, h2 * w2);
        scan(&self.fc1, &t.act2, 1);
        margin
    }

    /// Q-value estimate for every action.
    pub fn forward(&self, x: &StateTensor) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut t = Trace::new(&self.arch);
        self.run(x, &mut t);
        Ok(t.q)
    }

    fn check_batch(&self, batch: &[Sample<'_>]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::Usage("loss over an empty batch".into()));
        }
        for s in batch {
            self.check_input(s.state)?;
            if s.action >= self.arch.actions {
                return Err(Error::Usage(format!(
                    "action {} outside [0, {})",
                    s.action, self.arch.actions
                )));
            }
        }
        Ok(())
    }

    /// Mean squared TD error `mean((y - Q(S, a))^2)` over the batch.
    pub fn loss(&self, batch: &[Sample<'_>]) -> Result<f64> {
        self.check_batch(batch)?;
        let mut t = Trace::new(&self.arch);
        let mut total = 0.0;
        for s in batch {
            self.run(s.state, &mut t);
            let r = s.target - t.q[s.action];
            total += r * r;
        }
        Ok(total / batch.len() as f64)
    }

    /// Loss and its exact gradient with respect to every parameter.
    pub fn backward(&self, batch: &[Sample<'_>]) -> Result<(f64, QNetworkParams)> {
        self.backward_with(batch, None)
    }

    pub(crate) fn backward_with(
        &self,
        batch: &[Sample<'_>],
        fault: Option<BackwardFault>,
    ) -> Result<(f64, QNetworkParams)> {
        self.check_batch(batch)?;
        let a = self.arch;
        let (h1, w1) = a.conv1_out();
        let (h2, w2) = a.conv2_out();
        let (p1, p2) = (h1 * w1, h2 * w2);
        let k1 = self.conv1.fan_in();
        let k2 = self.conv2.fan_in();
        let n = batch.len() as f64;

        let mut grad = Self::zeros(a);
        let mut t = Trace::new(&a);
        let mut d_hidden = vec![0.0; a.hidden];
        let mut d_act2 = vec![0.0; a.flat_len()];
        let mut d_patches2 = vec![0.0; p2 * k2];
        let mut d_act1 = vec![0.0; a.conv1.filters * p1];
        let mut loss = 0.0;

        for s in batch {
            self.run(s.state, &mut t);
            let residual = s.target - t.q[s.action];
            loss += residual * residual;
            let dq = -2.0 * residual / n;

            // fc2: only the chosen action's output carries gradient.
            let row = if fault == Some(BackwardFault::Fc2) {
                (s.action + 1) % a.actions
            } else {
                s.action
            };
            axpy(
                dq,
                &t.hidden,
                &mut grad.fc2.weight[row * a.hidden..][..a.hidden],
            );
            grad.fc2.bias[s.action] += dq;
            let mask_fc1 = fault != Some(BackwardFault::Fc1);
            for (i, d) in d_hidden.iter_mut().enumerate() {
                let active = t.hidden[i] > 0.0 || !mask_fc1;
                *d = if active {
                    dq * self.fc2.row(s.action)[i]
                } else {
                    0.0
                };
            }

            // fc1
            d_act2.iter_mut().for_each(|v| *v = 0.0);
            let flat = a.flat_len();
            for (i, &d) in d_hidden.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                axpy(d, &t.act2, &mut grad.fc1.weight[i * flat..][..flat]);
                grad.fc1.bias[i] += d;
                axpy(d, self.fc1.row(i), &mut d_act2);
            }
            for (d, &v) in d_act2.iter_mut().zip(&t.act2) {
                if v <= 0.0 {
                    *d = 0.0;
                }
            }

            // conv2
            d_patches2.iter_mut().for_each(|v| *v = 0.0);
            for f in 0..a.conv2.filters {
                let dz = &d_act2[f * p2..][..p2];
                let gw = &mut grad.conv2.weight[f * k2..][..k2];
                let wf = self.conv2.row(f);
                for (p, &d) in dz.iter().enumerate() {
                    if fault == Some(BackwardFault::Conv2) {
                        if p + 1 == p2 {
                            grad.conv2.bias[f] += d;
                        }
                    } else {
                        grad.conv2.bias[f] += d;
                    }
                    if d == 0.0 {
                        continue;
                    }
                    axpy(d, &t.patches2[p * k2..][..k2], gw);
                    axpy(d, wf, &mut d_patches2[p * k2..][..k2]);
                }
            }
            d_act1.iter_mut().for_each(|v| *v = 0.0);
            col2im(
                &d_patches2,
                a.conv1.filters,
                (h1, w1),
                a.conv2.kernel,
                a.conv2.stride,
                (h2, w2),
                &mut d_act1,
            );
            if fault != Some(BackwardFault::Conv1) {
                for (d, &v) in d_act1.iter_mut().zip(&t.act1) {
                    if v <= 0.0 {
                        *d = 0.0;
                    }
                }
            }

            // conv1
            for f in 0..a.conv1.filters {
                let dz = &d_act1[f * p1..][..p1];
                let gw = &mut grad.conv1.weight[f * k1..][..k1];
                for (p, &d) in dz.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    grad.conv1.bias[f] += d;
                    axpy(d, &t.patches1[p * k1..][..k1], gw);
                }
            }
        }
        Ok((loss / n, grad))
    }

    /// Plain gradient descent: `theta -= lr * grad`.
    pub fn sgd_step(&mut self, grad: &QNetworkParams, learning_rate: f64) -> Result<()> {
        if !self.same_shape(grad) {
            return Err(Error::Shape(
                "gradient shape differs from parameters".into(),
            ));
        }
        for (p, g) in self.values_mut().zip(grad.values()) {
            *p -= learning_rate * g;
        }
        Ok(())
    }
}
