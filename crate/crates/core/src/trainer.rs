//! Local training on synthetic classification tasks.
//!
//! Two model families share one flat parameter layout:
//!
//! * linear-softmax: `W` (classes × features, row-major) then bias (classes);
//! * one-hidden-layer MLP with tanh: `W1` (hidden × features), `b1`, `W2`
//!   (classes × hidden), `b2`.
//!
//! A [`ParameterVector`] may be longer than the task needs (power-of-two
//! padding). Padding entries never influence the output and get zero gradient.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{ModelState, ParameterVector};
use crate::rng::{seed_rng, Stream};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    LinearSoftmax,
    Mlp { hidden: usize },
}

/// A labelled dataset together with the model family trained on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SyntheticTask<T: Scalar> {
    pub kind: TaskKind,
    pub feature_dim: usize,
    pub class_count: usize,
    /// Row-major `len × feature_dim`.
    features: Vec<T>,
    labels: Vec<usize>,
}

impl<T: Scalar> SyntheticTask<T> {
    pub fn new(
        kind: TaskKind,
        feature_dim: usize,
        class_count: usize,
        features: Vec<T>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if feature_dim == 0 || class_count < 2 {
            return Err(invalid("task", "needs at least one feature and two classes"));
        }
        if let TaskKind::Mlp { hidden: 0 } = kind {
            return Err(invalid("hidden", "must be positive"));
        }
        if features.len() != labels.len() * feature_dim {
            return Err(Error::LengthMismatch { expected: labels.len() * feature_dim, actual: features.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::IndexOutOfRange { index: bad, len: class_count });
        }
        Ok(Self { kind, feature_dim, class_count, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, i: usize) -> (&[T], usize) {
        let d = self.feature_dim;
        (&self.features[i * d..(i + 1) * d], self.labels[i])
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Number of trainable parameters before padding.
    pub fn param_count(&self) -> usize {
        param_count(self.kind, self.feature_dim, self.class_count)
    }

    /// Concatenates datasets of the same shape.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a Self>) -> Result<Self>
    where
        T: 'a,
    {
        let mut iter = parts.into_iter();
        let first = iter.next().ok_or(Error::EmptyBatch)?.clone();
        iter.try_fold(first, |mut acc, t| {
            if (t.kind, t.feature_dim, t.class_count) != (acc.kind, acc.feature_dim, acc.class_count) {
                return Err(invalid("task", "pooled tasks must share a shape"));
            }
            acc.features.extend_from_slice(&t.features);
            acc.labels.extend_from_slice(&t.labels);
            Ok(acc)
        })
    }
}

pub fn param_count(kind: TaskKind, d: usize, c: usize) -> usize {
    match kind {
        TaskKind::LinearSoftmax => c * d + c,
        TaskKind::Mlp { hidden: h } => h * d + h + c * h + c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrainConfig<T: Scalar> {
    pub learning_rate: T,
    pub local_iterations: usize,
    pub batch_size: usize,
    /// Optional L2 bound on the descent direction.
    pub clip: Option<T>,
}

impl<T: Scalar> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= T::zero()) {
            return Err(invalid("learning_rate", "must be non-negative"));
        }
        if self.local_iterations == 0 {
            return Err(invalid("local_iterations", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

fn softmax_in_place<T: Scalar>(z: &mut [T]) {
    let m = z.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let mut s = T::zero();
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in z.iter_mut() {
        *v /= s;
    }
}

/// Logits for one sample; `hidden` receives the tanh activations for the MLP.
fn forward<T: Scalar>(task: &SyntheticTask<T>, w: &[T], x: &[T], hidden: &mut Vec<T>) -> Vec<T> {
    let (d, c) = (task.feature_dim, task.class_count);
    let affine = |weights: &[T], bias: &[T], input: &[T], rows: usize| -> Vec<T> {
        let cols = input.len();
        (0..rows)
            .map(|r| weights[r * cols..(r + 1) * cols].iter().zip(input).fold(bias[r], |acc, (&a, &b)| acc + a * b))
            .collect()
    };
    match task.kind {
        TaskKind::LinearSoftmax => affine(&w[..c * d], &w[c * d..c * d + c], x, c),
        TaskKind::Mlp { hidden: h } => {
            let (w1, rest) = w.split_at(h * d);
            let (b1, rest) = rest.split_at(h);
            let (w2, rest) = rest.split_at(c * h);
            let b2 = &rest[..c];
            *hidden = affine(w1, b1, x, h).into_iter().map(|v| v.tanh()).collect();
            affine(w2, b2, hidden, c)
        }
    }
}

/// Accumulates the cross-entropy gradient of one sample into `grad`.
fn backward<T: Scalar>(task: &SyntheticTask<T>, w: &[T], x: &[T], label: usize, grad: &mut [T]) -> T {
    let (d, c) = (task.feature_dim, task.class_count);
    let mut hidden = Vec::new();
    let mut p = forward(task, w, x, &mut hidden);
    softmax_in_place(&mut p);
    let loss = -p[label].max(T::lit(1e-300)).ln();
    p[label] -= T::one();
    let delta = p;
    match task.kind {
        TaskKind::LinearSoftmax => {
            for k in 0..c {
                for j in 0..d {
                    grad[k * d + j] += delta[k] * x[j];
                }
                grad[c * d + k] += delta[k];
            }
        }
        TaskKind::Mlp { hidden: h } => {
            let (o_b1, o_w2, o_b2) = (h * d, h * d + h, h * d + h + c * h);
            let mut back = vec![T::zero(); h];
            for k in 0..c {
                for r in 0..h {
                    grad[o_w2 + k * h + r] += delta[k] * hidden[r];
                    back[r] += delta[k] * w[o_w2 + k * h + r];
                }
                grad[o_b2 + k] += delta[k];
            }
            for r in 0..h {
                let g = back[r] * (T::one() - hidden[r] * hidden[r]);
                for j in 0..d {
                    grad[r * d + j] += g * x[j];
                }
                grad[o_b1 + r] += g;
            }
        }
    }
    loss
}

fn check_shape<T: Scalar>(task: &SyntheticTask<T>, len: usize) -> Result<()> {
    if len < task.param_count() {
        return Err(Error::LengthMismatch { expected: task.param_count(), actual: len });
    }
    Ok(())
}

/// Mean cross-entropy gradient over the given samples, padded to `w.len()`.
pub fn loss_gradient<T: Scalar>(task: &SyntheticTask<T>, w: &[T], samples: &[usize]) -> Result<(T, Vec<T>)> {
    check_shape(task, w.len())?;
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut grad = vec![T::zero(); w.len()];
    let mut loss = T::zero();
    for &i in samples {
        let (x, y) = task.sample(i);
        loss += backward(task, w, x, y, &mut grad);
    }
    let n = T::from_usize(samples.len()).unwrap();
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

/// One mini-batch step restricted to `active` indices.
///
/// Returns the descent direction `g = −∇L` (full length, including inactive
/// entries); only the active entries of `m.current` move, by `α·g`.
pub fn local_step<T: Scalar, R: Rng + ?Sized>(
    m: &mut ModelState<T>,
    task: &SyntheticTask<T>,
    cfg: &TrainConfig<T>,
    active: &[usize],
    rng: &mut R,
) -> Result<Vec<T>> {
    if task.is_empty() || cfg.batch_size == 0 {
        return Err(Error::EmptyBatch);
    }
    let len = m.len();
    if let Some(&index) = active.iter().find(|&&i| i >= len) {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let batch: Vec<usize> = (0..cfg.batch_size).map(|_| rng.random_range(0..task.len())).collect();
    let (_, grad) = loss_gradient(task, m.current().as_slice(), &batch)?;
    let mut g: Vec<T> = grad.into_iter().map(|v| -v).collect();
    if let Some(bound) = cfg.clip {
        let norm = g.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm > bound {
            let f = bound / norm;
            g.iter_mut().for_each(|v| *v *= f);
        }
    }
    let alpha = cfg.learning_rate;
    let mut next = m.current().clone();
    next.try_map_in_place(|w| {
        for &i in active {
            w[i] += alpha * g[i];
        }
    })?;
    m.set_current(next)?;
    Ok(g)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic mean loss and top-1 accuracy over the whole dataset.
///
/// Ties between maximal logits are broken by a hash of the sample index, so an
/// uninformative model scores at chance level rather than always picking class 0.
pub fn evaluate<T: Scalar>(v: &ParameterVector<T>, task: &SyntheticTask<T>) -> Result<(T, T)> {
    let w = v.as_slice();
    check_shape(task, w.len())?;
    if task.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut loss = T::zero();
    let mut correct = 0usize;
    let mut hidden = Vec::new();
    for i in 0..task.len() {
        let (x, y) = task.sample(i);
        let mut z = forward(task, w, x, &mut hidden);
        let best = z.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        let ties: Vec<usize> = (0..z.len()).filter(|&k| z[k] == best).collect();
        let pick = ties[(splitmix64(i as u64) % ties.len() as u64) as usize];
        if pick == y {
            correct += 1;
        }
        softmax_in_place(&mut z);
        loss -= z[y].max(T::lit(1e-300)).ln();
    }
    let n = T::from_usize(task.len()).unwrap();
    Ok((loss / n, T::from_usize(correct).unwrap() / n))
}

/// Data-size weighted average `Σ (|D_i| / Σ|D|) · θ_i`.
pub fn fedavg_reference<T: Scalar>(models: &[ParameterVector<T>], weights: &[T]) -> Result<ParameterVector<T>> {
    if models.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if weights.len() != models.len() {
        return Err(Error::LengthMismatch { expected: models.len(), actual: weights.len() });
    }
    if weights.iter().any(|&w| !(w > T::zero())) {
        return Err(invalid("weights", "must be positive"));
    }
    let len = models[0].len();
    let total: T = weights.iter().copied().sum();
    let mut out = vec![T::zero(); len];
    for (m, &w) in models.iter().zip(weights) {
        if m.len() != len {
            return Err(Error::LengthMismatch { expected: len, actual: m.len() });
        }
        let f = w / total;
        for (o, &x) in out.iter_mut().zip(m.as_slice()) {
            *o += f * x;
        }
    }
    ParameterVector::new(out)
}

/// Recipe for Gaussian class clusters split across clients by a Dirichlet prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub kind: TaskKind,
    pub feature_dim: usize,
    pub class_count: usize,
    pub samples_per_client: usize,
    pub test_samples: usize,
    /// Distance of each class mean from the origin along its own axis.
    pub separation: f64,
    pub noise: f64,
    /// Concentration of the per-client label distribution; small means skewed.
    pub dirichlet_alpha: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            kind: TaskKind::LinearSoftmax,
            feature_dim: 15,
            class_count: 4,
            samples_per_client: 200,
            test_samples: 2000,
            separation: 3.0,
            noise: 1.0,
            dirichlet_alpha: 0.5,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.class_count < 2 || self.class_count > self.feature_dim {
            return Err(invalid("class_count", "needs 2 ≤ classes ≤ feature_dim"));
        }
        if self.samples_per_client == 0 || self.test_samples == 0 {
            return Err(invalid("samples_per_client", "datasets must be non-empty"));
        }
        if !(self.noise > 0.0) || !(self.dirichlet_alpha > 0.0) || !(self.separation >= 0.0) {
            return Err(invalid("synthetic", "noise and alpha must be positive"));
        }
        Ok(())
    }

    fn draw<T: Scalar>(&self, label: usize, rng: &mut Stream, out: &mut Vec<T>) {
        let normal = Normal::new(0.0, self.noise).expect("validated noise");
        for j in 0..self.feature_dim {
            let mean = if j == label { self.separation } else { 0.0 };
            out.push(T::lit(mean + normal.sample(rng)));
        }
    }

    /// Client datasets (label mix from Dirichlet(α)) and a balanced held-out test set.
    pub fn generate<T: Scalar>(&self, clients: usize, seed: u64) -> Result<(Vec<SyntheticTask<T>>, SyntheticTask<T>)> {
        self.validate()?;
        let gamma = Gamma::new(self.dirichlet_alpha, 1.0).expect("validated alpha");
        let classes: Vec<usize> = (0..self.class_count).collect();
        let mut tasks = Vec::with_capacity(clients);
        for c in 0..clients {
            let mut rng = seed_rng(seed, &format!("data/client-{c}"));
            let mut mix: Vec<f64> = (0..self.class_count).map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = mix.iter().sum();
            if total > 0.0 {
                mix.iter_mut().for_each(|p| *p /= total);
            } else {
                mix.fill(1.0 / self.class_count as f64);
            }
            let mut features = Vec::with_capacity(self.samples_per_client * self.feature_dim);
            let mut labels = Vec::with_capacity(self.samples_per_client);
            for _ in 0..self.samples_per_client {
                let label = *classes.choose_weighted(&mut rng, |&k| mix[k]).unwrap_or(&classes[0]);
                self.draw(label, &mut rng, &mut features);
                labels.push(label);
            }
            tasks.push(SyntheticTask::new(self.kind, self.feature_dim, self.class_count, features, labels)?);
        }
        let mut rng = seed_rng(seed, "data/test");
        let mut features = Vec::new();
        let labels: Vec<usize> = (0..self.test_samples).map(|i| i % self.class_count).collect();
        for &label in &labels {
            self.draw(label, &mut rng, &mut features);
        }
        let test = SyntheticTask::new(self.kind, self.feature_dim, self.class_count, features, labels)?;
        Ok((tasks, test))
    }
}
