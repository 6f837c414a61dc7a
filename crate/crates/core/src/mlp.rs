//! One-hidden-layer ReLU regressor, squared loss and a seeded mini-batch trainer.
//!
//! The network computes `w2 · relu(W1 x + b1) + b2` with a linear output unit.
//! Training uses Adam on mini-batches of the mean squared error. Inputs are
//! mapped to `[-1, 1]` per axis and targets standardised while training; the
//! affine maps are folded back into the weights afterwards, so the returned
//! [`Network`] works in the caller's units and is an ordinary ReLU network.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::PiecewiseLinear;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// RNG stream used for weight initialisation.
const INIT_STREAM: u64 = 0;
/// RNG stream used for the per-epoch shuffle.
const SHUFFLE_STREAM: u64 = 1;

/// `max(0, x)`.
#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// One-hidden-layer ReLU network with a scalar linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    hidden_width: usize,
    /// Row-major `hidden_width x input_dim`; row `k` is unit `k`'s weights.
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl Network {
    /// Assembles a network from raw parameters. `w1` is row-major with one
    /// row of `input_dim` weights per hidden unit.
    pub fn new(input_dim: usize, w1: Vec<f64>, b1: Vec<f64>, w2: Vec<f64>, b2: f64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Config("input_dim must be at least 1".into()));
        }
        let hidden_width = b1.len();
        if hidden_width == 0 {
            return Err(Error::Config("hidden_width must be at least 1".into()));
        }
        check_len(hidden_width * input_dim, w1.len())?;
        check_len(hidden_width, w2.len())?;
        let finite = w1.iter().chain(&b1).chain(&w2).all(|v| v.is_finite()) && b2.is_finite();
        if !finite {
            return Err(Error::Data("network parameters must be finite".into()));
        }
        Ok(Network { input_dim, hidden_width, w1, b1, w2, b2 })
    }

    /// Network from nested rows, handy for small hand-written examples.
    pub fn from_rows(w1: &[Vec<f64>], b1: Vec<f64>, w2: Vec<f64>, b2: f64) -> Result<Self> {
        let input_dim = w1.first().map_or(0, Vec::len);
        if w1.iter().any(|row| row.len() != input_dim) {
            return Err(Error::Data("ragged weight rows".into()));
        }
        Network::new(input_dim, w1.concat(), b1, w2, b2)
    }

    /// All weights zero, output bias `value`.
    pub fn constant(input_dim: usize, hidden_width: usize, value: f64) -> Result<Self> {
        Network::new(
            input_dim,
            vec![0.0; input_dim * hidden_width],
            vec![0.0; hidden_width],
            vec![0.0; hidden_width],
            value,
        )
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_width
    }

    /// Row-major hidden weights.
    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    /// Incoming weights of hidden unit `k`.
    pub fn w1_row(&self, k: usize) -> &[f64] {
        &self.w1[k * self.input_dim..(k + 1) * self.input_dim]
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    /// Pre-activation of hidden unit `k` at `x`. No shape check.
    #[inline]
    pub(crate) fn pre_activation(&self, k: usize, x: &[f64]) -> f64 {
        self.w1_row(k).iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.b1[k]
    }

    /// `w2 · relu(W1 x + b1) + b2`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        check_len(self.input_dim, x.len())?;
        Ok(self.forward_unchecked(x))
    }

    #[inline]
    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> f64 {
        let mut out = self.b2;
        for k in 0..self.hidden_width {
            out += self.w2[k] * relu(self.pre_activation(k, x));
        }
        out
    }
}

impl PiecewiseLinear for Network {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output(&self, x: &[f64]) -> Result<f64> {
        self.forward(x)
    }

    fn slope(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::spline::gradient(self, x)
    }
}

/// Free-function form of [`Network::forward`].
pub fn forward(net: &Network, x: &[f64]) -> Result<f64> {
    net.forward(x)
}

/// Mean of `(target - prediction)^2`.
pub fn mean_squared_loss(targets: &[f64], predictions: &[f64]) -> Result<f64> {
    check_len(targets.len(), predictions.len())?;
    if targets.is_empty() {
        return Err(Error::Shape { expected: 1, actual: 0 });
    }
    let sum: f64 = targets.iter().zip(predictions).map(|(t, p)| (t - p) * (t - p)).sum();
    Ok(sum / targets.len() as f64)
}

/// Fresh network with Glorot-uniform weights and zero biases.
///
/// Hidden weights are uniform in `±sqrt(6 / (n + h))`, output weights in
/// `±sqrt(6 / (h + 1))`. The same `(input_dim, hidden_width, seed)` always
/// yields the same bits.
pub fn init_network(input_dim: usize, hidden_width: usize, seed: u64) -> Result<Network> {
    if input_dim == 0 || hidden_width == 0 {
        return Err(Error::Config("network dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    let l1 = libm::sqrt(6.0 / (input_dim + hidden_width) as f64);
    let l2 = libm::sqrt(6.0 / (hidden_width + 1) as f64);
    let d1 = Uniform::new_inclusive(-l1, l1);
    let d2 = Uniform::new_inclusive(-l2, l2);
    let w1 = (0..input_dim * hidden_width).map(|_| d1.sample(&mut rng)).collect();
    let w2 = (0..hidden_width).map(|_| d2.sample(&mut rng)).collect();
    Network::new(input_dim, w1, vec![0.0; hidden_width], w2, 0.0)
}

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(Error::Domain("bounds need at least one axis".into()));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite()) || l > h {
                return Err(Error::Domain(format!("axis {i}: [{l}, {h}] is not an interval")));
            }
        }
        Ok(Bounds { lo, hi })
    }

    /// 1D interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Bounds::new(vec![a], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// `true` if `other` lies inside `self`.
    pub fn encloses(&self, other: &Bounds) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Pulls each side of every axis in by `fraction` of that axis' width.
    pub fn shrink(&self, fraction: f64) -> Result<Bounds> {
        if !(0.0..0.5).contains(&fraction) {
            return Err(Error::Config(format!("shrink fraction {fraction} not in [0, 0.5)")));
        }
        self.require_extent()?;
        let (lo, hi) = (0..self.dim())
            .map(|i| {
                let d = fraction * self.width(i);
                (self.lo[i] + d, self.hi[i] - d)
            })
            .unzip();
        Bounds::new(lo, hi)
    }

    /// Errors if any axis has zero width.
    pub fn require_extent(&self) -> Result<()> {
        match (0..self.dim()).find(|&i| self.width(i) <= 0.0) {
            Some(i) => Err(Error::Domain(format!("axis {i} has zero length"))),
            None => Ok(()),
        }
    }

    /// Evenly spaced lattice with `per_axis` points on every axis (endpoints
    /// included), in row-major order with the last axis varying fastest.
    pub fn lattice(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let total = per_axis.pow(n as u32);
        let coord = |axis: usize, j: usize| {
            if per_axis == 1 {
                0.5 * (self.lo[axis] + self.hi[axis])
            } else {
                self.lo[axis] + self.width(axis) * j as f64 / (per_axis - 1) as f64
            }
        };
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; n];
                for axis in (0..n).rev() {
                    p[axis] = coord(axis, idx % per_axis);
                    idx /= per_axis;
                }
                p
            })
            .collect()
    }
}

/// Samples with scalar targets and their enclosing box.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    bounds: Bounds,
}

impl Dataset {
    /// Builds a dataset from row-major `inputs` (`targets.len()` rows of
    /// `dim` values). Bounds are the componentwise min/max.
    pub fn new(dim: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Data("inputs need at least one column".into()));
        }
        if targets.is_empty() {
            return Err(Error::Data("dataset is empty".into()));
        }
        check_len(targets.len() * dim, inputs.len())?;
        if let Some(i) = inputs.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite input in row {}", i / dim)));
        }
        if let Some(i) = targets.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite target in row {i}")));
        }
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for row in inputs.chunks_exact(dim) {
            for (i, v) in row.iter().enumerate() {
                lo[i] = lo[i].min(*v);
                hi[i] = hi[i].max(*v);
            }
        }
        let bounds = Bounds::new(lo, hi)?;
        Ok(Dataset { dim, inputs, targets, bounds })
    }

    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Data("ragged input rows".into()));
        }
        Dataset::new(dim, rows.concat(), targets)
    }

    /// Samples `f` at each point.
    pub fn sample<F: Fn(&[f64]) -> f64>(points: &[Vec<f64>], f: F) -> Result<Self> {
        let targets = points.iter().map(|p| f(p)).collect();
        Dataset::from_rows(points, targets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn inputs(&self) -> impl Iterator<Item = &[f64]> {
        self.inputs.chunks_exact(self.dim)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }
}

/// Trainer hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub hidden_width: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 32, batch_size: 256, learning_rate: 0.01, seed: 0, hidden_width: 1024 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.hidden_width == 0 {
            return Err(Error::Config("hidden_width must be positive".into()));
        }
        Ok(())
    }

    /// Same hyperparameters, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        TrainConfig { seed, ..self.clone() }
    }
}

/// Affine normalisation applied while training.
struct Normalizer {
    center: Vec<f64>,
    scale: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
}

impl Normalizer {
    fn fit(data: &Dataset) -> Self {
        let b = data.bounds();
        let center = b.midpoint();
        let scale = (0..b.dim())
            .map(|i| {
                let half = 0.5 * b.width(i);
                if half > 0.0 {
                    half
                } else {
                    1.0
                }
            })
            .collect();
        let n = data.len() as f64;
        let y_mean = data.targets().iter().sum::<f64>() / n;
        let var = data.targets().iter().map(|y| (y - y_mean) * (y - y_mean)).sum::<f64>() / n;
        let sd = libm::sqrt(var);
        let y_scale = if sd > 1e-12 * (1.0 + libm::fabs(y_mean)) { sd } else { 1.0 };
        Normalizer { center, scale, y_mean, y_scale }
    }

    /// Rewrites a network trained on normalised data into raw units.
    fn fold(&self, net: &Network) -> Result<Network> {
        let n = net.input_dim;
        let mut w1 = net.w1.clone();
        let mut b1 = net.b1.clone();
        for k in 0..net.hidden_width {
            let row = &mut w1[k * n..(k + 1) * n];
            let mut shift = 0.0;
            for i in 0..n {
                row[i] /= self.scale[i];
                shift += row[i] * self.center[i];
            }
            b1[k] -= shift;
        }
        let w2 = net.w2.iter().map(|w| w * self.y_scale).collect();
        let b2 = net.b2 * self.y_scale + self.y_mean;
        Network::new(n, w1, b1, w2, b2)
    }
}

/// Adam moment buffers for one parameter tensor.
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments { m: vec![0.0; len], v: vec![0.0; len] }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr_t: f64) {
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            *p -= lr_t * *m / (libm::sqrt(*v) + ADAM_EPS);
        }
    }
}

/// Trains a fresh network on `data` and returns it with its training RMSE.
///
/// Deterministic for a given `(data, cfg)`: initialisation and the per-epoch
/// shuffle come from independent streams of one seeded ChaCha generator. The
/// last partial batch of each epoch is kept.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<(Network, f64)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Data("dataset is empty".into()));
    }
    if data.targets().iter().any(|v| !v.is_finite()) || data.inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("dataset contains non-finite values".into()));
    }

    let n = data.dim();
    let h = cfg.hidden_width;
    let norm = Normalizer::fit(data);
    let xs: Vec<f64> = data
        .inputs()
        .flat_map(|row| row.iter().enumerate().map(|(i, v)| (v - norm.center[i]) / norm.scale[i]).collect::<Vec<_>>())
        .collect();
    let ys: Vec<f64> = data.targets().iter().map(|y| (y - norm.y_mean) / norm.y_scale).collect();

    let mut net = init_network(n, h, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SHUFFLE_STREAM);

    let mut g_w1 = vec![0.0; h * n];
    let mut g_b1 = vec![0.0; h];
    let mut g_w2 = vec![0.0; h];
    let mut g_b2 = [0.0];
    let mut pre = vec![0.0; h];
    let (mut m_w1, mut m_b1, mut m_w2, mut m_b2) = (Moments::new(h * n), Moments::new(h), Moments::new(h), Moments::new(1));
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut step = 0i32;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            g_w1.fill(0.0);
            g_b1.fill(0.0);
            g_w2.fill(0.0);
            g_b2[0] = 0.0;
            let scale = 2.0 / batch.len() as f64;
            for &s in batch {
                let x = &xs[s * n..(s + 1) * n];
                let mut pred = net.b2;
                for k in 0..h {
                    let z = net.pre_activation(k, x);
                    pre[k] = z;
                    pred += net.w2[k] * relu(z);
                }
                let err = pred - ys[s];
                epoch_loss += err * err;
                let gl = scale * err;
                g_b2[0] += gl;
                for k in 0..h {
                    let z = pre[k];
                    if z > 0.0 {
                        g_w2[k] += gl * z;
                        let d = gl * net.w2[k];
                        g_b1[k] += d;
                        for (g, xi) in g_w1[k * n..(k + 1) * n].iter_mut().zip(x) {
                            *g += d * xi;
                        }
                    }
                }
            }
            step += 1;
            let lr_t = cfg.learning_rate * libm::sqrt(1.0 - libm::pow(ADAM_BETA2, step as f64))
                / (1.0 - libm::pow(ADAM_BETA1, step as f64));
            m_w1.step(&mut net.w1, &g_w1, lr_t);
            m_b1.step(&mut net.b1, &g_b1, lr_t);
            m_w2.step(&mut net.w2, &g_w2, lr_t);
            let mut b2 = [net.b2];
            m_b2.step(&mut b2, &g_b2, lr_t);
            net.b2 = b2[0];
        }
        if !epoch_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
    }

    let net = norm.fold(&net).map_err(|_| Error::Diverged { epoch: cfg.epochs - 1 })?;
    let rmse = training_rmse(&net, data)?;
    if !rmse.is_finite() {
        return Err(Error::Diverged { epoch: cfg.epochs - 1 });
    }
    Ok((net, rmse))
}

/// `sqrt(mean_squared_loss(targets, forward(inputs)))`.
pub fn training_rmse<M: PiecewiseLinear>(net: &M, data: &Dataset) -> Result<f64> {
    let preds = data.inputs().map(|x| net.output(x)).collect::<Result<Vec<_>>>()?;
    Ok(libm::sqrt(mean_squared_loss(data.targets(), &preds)?))
}
