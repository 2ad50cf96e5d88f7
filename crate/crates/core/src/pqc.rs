//! Rotation-layer programs as supervised learning models: feature encoding, stilted
//! datasets, gradient training and the cross-model experiment.

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{compile_layers, RotationLayerProgram};
use crate::cqca::Cqca;
use crate::dense::DenseState;
use crate::error::{CaqcError, Result};
use crate::pauli::{Letter, PauliProduct};
use crate::rng;

pub const DEFAULT_ENCODER_REPS: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum EncodingGate {
    H(usize),
    /// `exp(i angle G)`.
    Rotation(PauliProduct, f64),
}

fn ring_pairs(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

/// Per repetition: `H` on every qubit, `exp(i x_i Z_i)`, then `exp(i x_i x_j Z_i Z_j)`
/// over ring neighbours.
pub fn encode_features(x: &[f64], reps: usize) -> Result<Vec<EncodingGate>> {
    let n = x.len();
    if let Some(v) = x.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
        return Err(CaqcError::Precondition(format!("feature {v} outside [-1, 1]")));
    }
    let mut gates = Vec::new();
    for _ in 0..reps {
        gates.extend((0..n).map(EncodingGate::H));
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                gates.push(EncodingGate::Rotation(PauliProduct::z(n, i), xi));
            }
        }
        for (i, j) in ring_pairs(n) {
            let a = x[i] * x[j];
            if a != 0.0 {
                gates.push(EncodingGate::Rotation(PauliProduct::from_letters(n, &[(i, Letter::Z), (j, Letter::Z)]), a));
            }
        }
    }
    Ok(gates)
}

/// Encoder applied to `|0...0>`.
pub fn encoded_state(x: &[f64], reps: usize) -> Result<DenseState> {
    let mut s = DenseState::zero(x.len())?;
    for g in encode_features(x, reps)? {
        match g {
            EncodingGate::H(q) => s.apply_h(q)?,
            EncodingGate::Rotation(p, a) => s.apply_pauli_rotation(&p, a)?,
        }
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradMethod {
    ParameterShift,
    FiniteDiff,
    Adjoint,
}

#[derive(Clone, Debug)]
pub struct PqcModel {
    pub rule: String,
    pub extended: bool,
    pub ansatz: RotationLayerProgram,
    pub encoder_reps: usize,
    pub n: usize,
    pub depth: usize,
    pub params: Vec<f64>,
    pub label_norm: f64,
}

impl PqcModel {
    /// `depth` rotation layers compiled from `t` (two per depth when `extended`), all parameters 0.
    pub fn new(t: &Cqca, n: usize, depth: usize, extended: bool, encoder_reps: usize) -> Result<Self> {
        let ansatz = compile_layers(t, n, depth, extended)?;
        let mut seen = vec![false; ansatz.n_params];
        for r in &ansatz.rotations {
            if std::mem::replace(&mut seen[r.param], true) {
                return Err(CaqcError::Precondition(format!("parameter {} is shared between rotations", r.param)));
            }
        }
        let name = if extended { format!("{}-extended", t.name()) } else { t.name().to_string() };
        Ok(PqcModel { rule: name, extended, params: vec![0.0; ansatz.n_params], ansatz, encoder_reps, n, depth, label_norm: 1.0 })
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params
    }

    /// Parameters uniform in `[-π, π)`.
    pub fn randomize<R: Rng>(&mut self, rng: &mut R) {
        use std::f64::consts::PI;
        for p in &mut self.params {
            *p = rng.gen_range(-PI..PI);
        }
    }

    fn observable(&self) -> PauliProduct {
        PauliProduct::z(self.n, 0)
    }

    /// `<Z_1>` after the ansatz, without the label normalization.
    pub fn raw_output_encoded(&self, params: &[f64], encoded: &DenseState) -> Result<f64> {
        let mut s = encoded.clone();
        self.ansatz.evaluate(params, &mut s)?;
        s.expectation(&self.observable())
    }

    pub fn output(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(CaqcError::Dimension { expected: self.n, actual: x.len() });
        }
        Ok(self.raw_output_encoded(&self.params, &encoded_state(x, self.encoder_reps)?)? / self.label_norm)
    }

    /// `(f, df/dθ)` for the raw output on one encoded input.
    pub fn raw_gradient(&self, encoded: &DenseState, method: GradMethod) -> Result<(f64, Vec<f64>)> {
        let f = |p: &[f64]| self.raw_output_encoded(p, encoded);
        match method {
            GradMethod::Adjoint => self.adjoint(encoded),
            GradMethod::ParameterShift | GradMethod::FiniteDiff => {
                let (shift, scale) = match method {
                    GradMethod::ParameterShift => (std::f64::consts::FRAC_PI_4, 1.0),
                    _ => (FD_STEP, 0.5 / FD_STEP),
                };
                let mut p = self.params.clone();
                let mut grad = Vec::with_capacity(p.len());
                for k in 0..p.len() {
                    let v = p[k];
                    p[k] = v + shift;
                    let up = f(&p)?;
                    p[k] = v - shift;
                    let down = f(&p)?;
                    p[k] = v;
                    grad.push(scale * (up - down));
                }
                Ok((f(&p)?, grad))
            }
        }
    }

    fn adjoint(&self, encoded: &DenseState) -> Result<(f64, Vec<f64>)> {
        let mut psi = encoded.clone();
        self.ansatz.evaluate(&self.params, &mut psi)?;
        let obs = self.observable();
        let mut lambda = psi.clone();
        lambda.apply_pauli(&obs)?;
        let value = psi.inner(&lambda)?.re;
        let mut grad = vec![0.0; self.n_params()];
        for r in self.ansatz.rotations.iter().rev() {
            // d/dθ exp(i s θ G) = i s G exp(i s θ G)
            grad[r.param] -= 2.0 * r.sign * lambda.matrix_element(&r.generator, &psi)?.im;
            let a = -r.angle(&self.params);
            psi.apply_pauli_rotation(&r.generator, a)?;
            lambda.apply_pauli_rotation(&r.generator, a)?;
        }
        Ok((value, grad))
    }
}

pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic { seed: u64 },
    MnistPca { images: String, labels: String, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: DataSource,
    pub labeler: String,
    pub labeler_seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub label_norm: f64,
    pub provenance: Provenance,
}

/// `samples` inputs uniform in `[-1, 1]^n`.
pub fn synthetic_inputs(n: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, "data");
    (0..samples).map(|_| (0..n).map(|_| r.gen_range(-1.0..=1.0)).collect()).collect()
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Labels `inputs` with `labeler` at parameters drawn from `seed`. Returns the dataset
/// and the labeler with those parameters and its label normalization.
pub fn make_stilted_dataset(labeler: &PqcModel, inputs: Vec<Vec<f64>>, source: DataSource, seed: u64) -> Result<(Dataset, PqcModel)> {
    if inputs.is_empty() {
        return Err(CaqcError::Precondition("empty input set".into()));
    }
    let mut model = labeler.clone();
    model.randomize(&mut rng::stream(seed, "labeler"));
    model.label_norm = 1.0;
    let raw = inputs.par_iter().map(|x| model.output(x)).collect::<Result<Vec<_>>>()?;
    let sd = std_dev(&raw);
    if sd < 1e-9 {
        return Err(CaqcError::DegenerateDataset(sd));
    }
    model.label_norm = sd;
    let labels = raw.iter().map(|v| v / sd).collect();
    let provenance = Provenance { source, labeler: model.rule.clone(), labeler_seed: seed };
    Ok((Dataset { inputs, labels, label_norm: sd, provenance }, model))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Mini-batch size; 0 means the full dataset.
    pub batch: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Learning rate at the last epoch as a fraction of `lr`, reached by cosine decay.
    #[serde(default = "one")]
    pub lr_final_ratio: f64,
    /// Restart from fresh parameters when the loss improved by less than a fraction
    /// `restart_tol` over the last `restart_window` epochs; 0 disables restarts.
    /// The best parameters seen are kept.
    #[serde(default)]
    pub restart_window: usize,
    #[serde(default = "default_restart_tol")]
    pub restart_tol: f64,
    /// With restarts enabled: fraction of the epochs spent restarting at constant `lr`.
    /// The rest continues from the best parameters found, with the cosine decay.
    #[serde(default = "default_explore")]
    pub explore_fraction: f64,
    pub grad: GradMethod,
}

fn one() -> f64 {
    1.0
}

fn default_restart_tol() -> f64 {
    0.01
}

fn default_explore() -> f64 {
    0.5
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 200, batch: 0, lr: 0.05, beta1: 0.9, beta2: 0.999, eps: 1e-8, lr_final_ratio: 1.0, restart_window: 0, restart_tol: 0.01, explore_fraction: 0.5, grad: GradMethod::Adjoint }
    }
}

impl TrainConfig {
    /// Settings of the cross-model experiment: restarts on plateau during the first 70%
    /// of 1500 epochs, then cosine decay from the best point.
    pub fn experiment() -> Self {
        TrainConfig {
            epochs: 1500,
            lr: 0.1,
            lr_final_ratio: 0.01,
            restart_window: 30,
            restart_tol: 0.01,
            explore_fraction: 0.7,
            ..TrainConfig::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainingLog {
    /// Full-dataset loss before each epoch's updates.
    pub losses: Vec<f64>,
    pub final_loss: f64,
    pub restarts: usize,
}

/// Mean squared error and its gradient over the chosen samples.
fn loss_and_grad(m: &PqcModel, encoded: &[DenseState], labels: &[f64], idx: &[usize], method: GradMethod) -> Result<(f64, Vec<f64>)> {
    let parts = idx
        .par_iter()
        .map(|&k| {
            let (f, g) = m.raw_gradient(&encoded[k], method)?;
            let r = f / m.label_norm - labels[k];
            Ok((r * r, g.into_iter().map(|v| 2.0 * r * v / m.label_norm).collect::<Vec<_>>()))
        })
        .collect::<Result<Vec<_>>>()?;
    let inv = 1.0 / idx.len() as f64;
    let mut grad = vec![0.0; m.n_params()];
    let mut loss = 0.0;
    for (l, g) in parts {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    grad.iter_mut().for_each(|v| *v *= inv);
    Ok((loss * inv, grad))
}

pub fn mse(m: &PqcModel, encoded: &[DenseState], labels: &[f64]) -> Result<f64> {
    let r = encoded
        .par_iter()
        .zip(labels)
        .map(|(e, y)| Ok((m.raw_output_encoded(&m.params, e)? / m.label_norm - y).powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(r.iter().sum::<f64>() / r.len() as f64)
}

pub fn encode_dataset(d: &Dataset, reps: usize) -> Result<Vec<DenseState>> {
    d.inputs.par_iter().map(|x| encoded_state(x, reps)).collect()
}

/// Adam on the mean squared error. The model adopts the dataset's label normalization.
pub fn train(m: &mut PqcModel, d: &Dataset, cfg: &TrainConfig, seed: u64) -> Result<TrainingLog> {
    if d.inputs.is_empty() || d.inputs.len() != d.labels.len() {
        return Err(CaqcError::Precondition("dataset is empty or inconsistent".into()));
    }
    if !(cfg.lr > 0.0) || !(cfg.lr_final_ratio > 0.0 && cfg.lr_final_ratio <= 1.0) || !(0.0..1.0).contains(&cfg.beta1) || !(0.0..1.0).contains(&cfg.beta2) {
        return Err(CaqcError::Precondition("optimizer settings out of range".into()));
    }
    if d.inputs[0].len() != m.n {
        return Err(CaqcError::Dimension { expected: m.n, actual: d.inputs[0].len() });
    }
    m.label_norm = d.label_norm;
    let encoded = encode_dataset(d, m.encoder_reps)?;
    let samples = encoded.len();
    let batch = if cfg.batch == 0 || cfg.batch > samples { samples } else { cfg.batch };
    let mut order: Vec<usize> = (0..samples).collect();
    let mut shuffle = rng::stream(seed, "batches");
    let (mut mom, mut vel) = (vec![0.0; m.n_params()], vec![0.0; m.n_params()]);
    let mut step = 0i32;
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, m.params.clone());
    let mut restart_rng = rng::stream(seed, "restarts");
    let (mut run_start, mut restarts) = (0usize, 0usize);
    let explore = if cfg.restart_window > 0 { (cfg.explore_fraction.clamp(0.0, 1.0) * cfg.epochs as f64) as usize } else { 0 };
    for epoch in 0..cfg.epochs {
        if batch < samples {
            order.shuffle(&mut shuffle);
        }
        if epoch == explore && explore > 0 {
            // Exploitation: resume from the best point with fresh optimizer state.
            m.params = best.1.clone();
            mom.iter_mut().chain(vel.iter_mut()).for_each(|v| *v = 0.0);
            step = 0;
        }
        let lr = if epoch < explore {
            cfg.lr
        } else {
            let span = cfg.epochs - explore;
            let progress = if span > 1 { (epoch - explore) as f64 / (span - 1) as f64 } else { 0.0 };
            let r = cfg.lr_final_ratio;
            cfg.lr * (r + (1.0 - r) * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()))
        };
        let start = m.params.clone();
        let mut epoch_loss = 0.0;
        for (b, chunk) in order.chunks(batch).enumerate() {
            let (loss, grad) = loss_and_grad(m, &encoded, &d.labels, chunk, cfg.grad)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(CaqcError::NonFinite(format!("loss {loss} at epoch {epoch}, batch {b}")));
            }
            epoch_loss += loss * chunk.len() as f64;
            step += 1;
            let (c1, c2) = (1.0 - cfg.beta1.powi(step), 1.0 - cfg.beta2.powi(step));
            for k in 0..grad.len() {
                mom[k] = cfg.beta1 * mom[k] + (1.0 - cfg.beta1) * grad[k];
                vel[k] = cfg.beta2 * vel[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                m.params[k] -= lr * (mom[k] / c1) / ((vel[k] / c2).sqrt() + cfg.eps);
            }
        }
        let loss = epoch_loss / samples as f64;
        losses.push(loss);
        if loss < best.0 {
            best = (loss, start);
        }
        let w = cfg.restart_window;
        if w > 0 && epoch + 1 - run_start > w && epoch + 1 < explore && loss > (1.0 - cfg.restart_tol) * losses[epoch - w] {
            m.randomize(&mut restart_rng);
            mom.iter_mut().chain(vel.iter_mut()).for_each(|v| *v = 0.0);
            step = 0;
            run_start = epoch + 1;
            restarts += 1;
        }
    }
    let mut final_loss = mse(m, &encoded, &d.labels)?;
    if best.0 < final_loss {
        m.params = best.1;
        final_loss = mse(m, &encoded, &d.labels)?;
    }
    if !final_loss.is_finite() {
        return Err(CaqcError::NonFinite(format!("final loss {final_loss}")));
    }
    Ok(TrainingLog { losses, final_loss, restarts })
}

/// Largest `|parameter-shift - central difference|` over all parameters and `inputs`.
pub fn gradient_check(m: &PqcModel, inputs: &[Vec<f64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in inputs {
        let e = encoded_state(x, m.encoder_reps)?;
        let (_, ps) = m.raw_gradient(&e, GradMethod::ParameterShift)?;
        let (_, fd) = m.raw_gradient(&e, GradMethod::FiniteDiff)?;
        for (a, b) in ps.iter().zip(&fd) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

// ---- IDX and PCA ----

#[derive(Clone, Debug, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<Vec<u8>>,
}

fn be_u32(b: &[u8], at: usize) -> Result<u32> {
    b.get(at..at + 4)
        .map(|s| u32::from_be_bytes([s[0], s[1], s[2], s[3]]))
        .ok_or_else(|| CaqcError::Format("truncated IDX header".into()))
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != 0x0000_0803 {
        return Err(CaqcError::Format(format!("bad IDX image magic {magic:#010x}")));
    }
    let (count, rows, cols) = (be_u32(bytes, 4)? as usize, be_u32(bytes, 8)? as usize, be_u32(bytes, 12)? as usize);
    let size = rows * cols;
    let body = &bytes[16..];
    if size == 0 || body.len() != count * size {
        return Err(CaqcError::Format(format!("IDX image body has {} bytes, expected {count} x {rows} x {cols}", body.len())));
    }
    Ok(IdxImages { rows, cols, pixels: body.chunks(size).map(<[u8]>::to_vec).collect() })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != 0x0000_0801 {
        return Err(CaqcError::Format(format!("bad IDX label magic {magic:#010x}")));
    }
    let count = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(CaqcError::Format(format!("IDX label body has {} bytes, expected {count}", body.len())));
    }
    Ok(body.to_vec())
}

#[derive(Clone, Debug)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit principal axes, strongest first.
    pub components: Vec<Vec<f64>>,
    /// Variance along each axis.
    pub variances: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Top `k` principal axes by power iteration on the covariance with deflation.
pub fn pca(data: &[Vec<f64>], k: usize) -> Result<Pca> {
    let m = data.len();
    let d = data.first().map(Vec::len).ok_or_else(|| CaqcError::Precondition("no samples".into()))?;
    if k > d {
        return Err(CaqcError::Precondition(format!("{k} components from {d} dimensions")));
    }
    let mut mean = vec![0.0; d];
    for row in data {
        for (a, v) in mean.iter_mut().zip(row) {
            *a += v / m as f64;
        }
    }
    let centered: Vec<Vec<f64>> = data.iter().map(|r| r.iter().zip(&mean).map(|(v, mu)| v - mu).collect()).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in &centered {
        for i in 0..d {
            if r[i] == 0.0 {
                continue;
            }
            for j in i..d {
                cov[i][j] += r[i] * r[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= m as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for c in 0..k {
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + ((i * 7 + c * 13) % 17) as f64 / 17.0).collect();
        let mut lambda = 0.0;
        for _ in 0..100_000 {
            for u in &components {
                let p = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
            }
            let norm = dot(&v, &v).sqrt();
            if norm < 1e-300 {
                lambda = 0.0;
                break;
            }
            v.iter_mut().for_each(|a| *a /= norm);
            let w: Vec<f64> = cov.iter().map(|row| dot(row, &v)).collect();
            let next = dot(&w, &v);
            let wn = dot(&w, &w).sqrt();
            if wn < 1e-300 {
                lambda = 0.0;
                break;
            }
            let w: Vec<f64> = w.iter().map(|a| a / wn).collect();
            let diff: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            v = w;
            let settled = diff < 1e-13 || (next - lambda).abs() < 1e-15 * next.abs().max(1.0) && diff < 1e-10;
            lambda = next;
            if settled {
                break;
            }
        }
        // Sign convention: largest-magnitude entry positive.
        if let Some(big) = v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
            if big < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
            }
        }
        components.push(v);
        variances.push(lambda.max(0.0));
    }
    Ok(Pca { mean, components, variances })
}

impl Pca {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let c: Vec<f64> = x.iter().zip(&self.mean).map(|(v, mu)| v - mu).collect();
        self.components.iter().map(|u| dot(&c, u)).collect()
    }
}

/// Scales every column to `[-1, 1]` by its largest magnitude; all-zero columns stay 0.
pub fn rescale_columns(rows: &mut [Vec<f64>]) {
    let Some(d) = rows.first().map(Vec::len) else { return };
    for j in 0..d {
        let big = rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max);
        if big > 0.0 {
            rows.iter_mut().for_each(|r| r[j] /= big);
        }
    }
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| CaqcError::Io(format!("{}: {e}", path.display())))?;
    Ok(buf)
}

/// IDX images and labels, optionally restricted to `classes` and the first `limit`
/// matches, reduced to `n_components` features in `[-1, 1]`.
pub fn load_mnist_pca(images: &Path, labels: &Path, n_components: usize, classes: Option<&[u8]>, limit: Option<usize>) -> Result<Vec<Vec<f64>>> {
    let imgs = parse_idx_images(&read_all(images)?)?;
    let labs = parse_idx_labels(&read_all(labels)?)?;
    if labs.len() != imgs.pixels.len() {
        return Err(CaqcError::Format(format!("{} images but {} labels", imgs.pixels.len(), labs.len())));
    }
    let rows: Vec<Vec<f64>> = imgs
        .pixels
        .iter()
        .zip(&labs)
        .filter(|(_, l)| classes.map_or(true, |c| c.contains(l)))
        .take(limit.unwrap_or(usize::MAX))
        .map(|(p, _)| p.iter().map(|&v| v as f64 / 255.0).collect())
        .collect();
    pca_features(&rows, n_components)
}

/// PCA projections rescaled to `[-1, 1]`.
pub fn pca_features(rows: &[Vec<f64>], n_components: usize) -> Result<Vec<Vec<f64>>> {
    let p = pca(rows, n_components)?;
    let mut out: Vec<Vec<f64>> = rows.iter().map(|r| p.project(r)).collect();
    rescale_columns(&mut out);
    Ok(out)
}

// ---- experiment ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub rule: String,
    #[serde(default)]
    pub extended: bool,
}

impl ModelSpec {
    pub fn label(&self) -> String {
        if self.extended {
            format!("{}-extended", self.rule)
        } else {
            self.rule.clone()
        }
    }

    pub fn build(&self, n: usize, depth: usize, reps: usize) -> Result<PqcModel> {
        let t = Cqca::builtin(&self.rule).ok_or_else(|| CaqcError::Validation(format!("unknown rule {}", self.rule)))?;
        PqcModel::new(&t, n, depth, self.extended, reps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub models: Vec<ModelSpec>,
    pub n: usize,
    pub depth: usize,
    pub samples: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_reps")]
    pub encoder_reps: usize,
    #[serde(default)]
    pub optimizer: TrainConfig,
}

fn default_reps() -> usize {
    DEFAULT_ENCODER_REPS
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            models: vec![
                ModelSpec { rule: "cluster".into(), extended: false },
                ModelSpec { rule: "fractal-cluster".into(), extended: false },
                ModelSpec { rule: "periodic-cluster".into(), extended: true },
            ],
            n: 6,
            depth: 4,
            samples: 200,
            seeds: (0..10).collect(),
            encoder_reps: DEFAULT_ENCODER_REPS,
            optimizer: TrainConfig::experiment(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EpochRecord {
    pub labeler: String,
    pub learner: String,
    pub seed: u64,
    pub epoch: usize,
    pub loss: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub labels: Vec<String>,
    /// `grid[labeler][learner]`: mean final loss over the seeds.
    pub grid: Vec<Vec<f64>>,
    /// `finals[labeler][learner][seed]`.
    pub finals: Vec<Vec<Vec<f64>>>,
    pub records: Vec<EpochRecord>,
    pub config: ExperimentConfig,
}

/// For every seed, each model labels a dataset and every model is trained on it.
/// The labeler draws its parameters from the seed; the learner's initial parameters
/// come from a separate stream of the same seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let k = cfg.models.len();
    let models = cfg.models.iter().map(|s| s.build(cfg.n, cfg.depth, cfg.encoder_reps)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize, u64)> =
        (0..k).flat_map(|a| (0..k).flat_map(move |b| cfg.seeds.iter().map(move |&s| (a, b, s)))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(a, b, seed)| {
            let inputs = synthetic_inputs(cfg.n, cfg.samples, seed);
            let (data, _) = make_stilted_dataset(&models[a], inputs, DataSource::Synthetic { seed }, seed)?;
            let mut learner = models[b].clone();
            learner.randomize(&mut rng::stream(seed, "params"));
            train(&mut learner, &data, &cfg.optimizer, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = cfg.models.iter().map(ModelSpec::label).collect();
    let mut finals = vec![vec![Vec::with_capacity(cfg.seeds.len()); k]; k];
    let mut records = Vec::new();
    for (&(a, b, seed), log) in jobs.iter().zip(&runs) {
        finals[a][b].push(log.final_loss);
        for (epoch, &loss) in log.losses.iter().enumerate() {
            records.push(EpochRecord { labeler: labels[a].clone(), learner: labels[b].clone(), seed, epoch, loss });
        }
        records.push(EpochRecord { labeler: labels[a].clone(), learner: labels[b].clone(), seed, epoch: log.losses.len(), loss: log.final_loss });
    }
    let grid = finals.iter().map(|row| row.iter().map(|v| v.iter().sum::<f64>() / v.len().max(1) as f64).collect()).collect();
    Ok(ExperimentResult { labels, grid, finals, records, config: cfg.clone() })
}

impl ExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("labeler,learner,seed,epoch,loss\n");
        for r in &self.records {
            s.push_str(&format!("{},{},{},{},{:e}\n", r.labeler, r.learner, r.seed, r.epoch, r.loss));
        }
        s
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "models": self.labels,
            "mean_final_loss": self.grid,
            "final_loss_per_seed": self.finals,
            "config": self.config,
        })
    }

    pub fn diagonal_max(&self) -> f64 {
        (0..self.grid.len()).map(|i| self.grid[i][i]).fold(0.0, f64::max)
    }

    pub fn off_diagonal_min(&self) -> f64 {
        let mut m = f64::INFINITY;
        for (i, row) in self.grid.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    m = m.min(*v);
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_is_hadamard_layer() {
        let g = encode_features(&[0.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(g, vec![EncodingGate::H(0), EncodingGate::H(1), EncodingGate::H(2)]);
        assert!(encode_features(&[1.5], 1).is_err());
        let m = PqcModel::new(&Cqca::cluster(), 3, 1, false, 1).unwrap();
        assert!(m.output(&[0.0; 3]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn kernel_on_two_qubits() {
        // |<phi(x)|phi(y)>|^2 with one repetition, written out by hand.
        use num_complex::Complex64;
        let amp = |x: &[f64]| -> Vec<Complex64> {
            (0..4)
                .map(|b| {
                    let z0 = if b & 1 == 0 { 1.0 } else { -1.0 };
                    let z1 = if b & 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::from_polar(0.5, x[0] * z0 + x[1] * z1 + x[0] * x[1] * z0 * z1)
                })
                .collect()
        };
        let (x, y) = ([0.3, -0.7], [0.9, 0.1]);
        let (a, b) = (amp(&x), amp(&y));
        let want: f64 = a.iter().zip(&b).map(|(p, q)| p.conj() * q).sum::<Complex64>().norm_sqr();
        let got = encoded_state(&x, 1).unwrap().fidelity(&encoded_state(&y, 1).unwrap()).unwrap();
        assert!((want - got).abs() < 1e-12);
    }

    #[test]
    fn gradients_agree() {
        let mut r = rng::stream(3, "t");
        for (t, ext) in [(Cqca::cluster(), false), (Cqca::fractal_cluster(), false), (Cqca::periodic_cluster(), true)] {
            let mut m = PqcModel::new(&t, 4, 3, ext, 2).unwrap();
            m.randomize(&mut r);
            let x: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
            let e = encoded_state(&x, 2).unwrap();
            let (f0, ps) = m.raw_gradient(&e, GradMethod::ParameterShift).unwrap();
            let (f1, adj) = m.raw_gradient(&e, GradMethod::Adjoint).unwrap();
            assert!((f0 - f1).abs() < 1e-12);
            for (a, b) in ps.iter().zip(&adj) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
            assert!(gradient_check(&m, &[x]).unwrap() < 1e-4);
        }
    }

    #[test]
    fn stilted_dataset_is_normalized() {
        let m = PqcModel::new(&Cqca::cluster(), 3, 2, false, 2).unwrap();
        let (d, lab) = make_stilted_dataset(&m, synthetic_inputs(3, 50, 1), DataSource::Synthetic { seed: 1 }, 1).unwrap();
        assert!((std_dev(&d.labels) - 1.0).abs() < 1e-9);
        let enc = encode_dataset(&d, 2).unwrap();
        assert!(mse(&lab, &enc, &d.labels).unwrap() < 1e-24);
    }

    #[test]
    fn idx_round_trip_and_constant_images() {
        let mut img = vec![0, 0, 8, 3, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 2];
        img.extend(std::iter::repeat(7u8).take(16));
        let parsed = parse_idx_images(&img).unwrap();
        assert_eq!(parsed.pixels.len(), 4);
        let rows: Vec<Vec<f64>> = parsed.pixels.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
        let f = pca_features(&rows, 2).unwrap();
        assert!(f.iter().flatten().all(|v| *v == 0.0));
        img[3] = 1;
        assert!(matches!(parse_idx_images(&img), Err(CaqcError::Format(_))));
        assert!(parse_idx_labels(&[0, 0, 8, 1, 0, 0, 0, 2, 3, 4]).is_ok());
    }
}
