use serde::{Deserialize, Serialize};

use super::search::SearchSpace;
use crate::embed::RowsView;
use crate::error::{Error, Result};
use crate::metrics::classification_report;
use crate::rng;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Logits `W x + b` with `W` stored row-major as `classes × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    pub classes: usize,
    pub dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl LinearHead {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        LinearHead {
            classes,
            dim,
            w: vec![0.0; classes * dim],
            b: vec![0.0; classes],
        }
    }

    pub fn logits(&self, x: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let row = &self.w[c * self.dim..(c + 1) * self.dim];
            *o = self.b[c] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// On-disk form of a trained head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadFile {
    pub classes: Vec<String>,
    pub dim: usize,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl HeadFile {
    pub fn new(head: &LinearHead, classes: Vec<String>) -> Self {
        HeadFile {
            classes,
            dim: head.dim,
            w: head.w.chunks_exact(head.dim).map(<[f64]>::to_vec).collect(),
            b: head.b.clone(),
        }
    }

    pub fn to_head(&self) -> Result<LinearHead> {
        let c = self.classes.len();
        if self.w.len() != c || self.b.len() != c || self.w.iter().any(|r| r.len() != self.dim) {
            return Err(Error::Format(format!(
                "head shape does not match {c} classes × {} dims",
                self.dim
            )));
        }
        let w: Vec<f64> = self.w.concat();
        if w.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::Format("head contains non-finite parameters".into()));
        }
        Ok(LinearHead {
            classes: c,
            dim: self.dim,
            w,
            b: self.b.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
    pub patience: usize,
}

impl TrainConfig {
    pub fn new(learning_rate: f64, batch_size: usize, epochs: usize, seed: u64) -> Self {
        TrainConfig {
            learning_rate,
            batch_size,
            epochs,
            weight_decay: 0.01,
            seed,
            patience: 2,
        }
    }
}

/// One training run, serialized as a trials-log row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
    pub patience: usize,
    pub stopped_epoch: usize,
    pub val_loss: Vec<f64>,
    pub val_macro_f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialResult {
    fn pending(trial: usize, config: &TrainConfig) -> Self {
        TrialResult {
            trial,
            lr: config.learning_rate,
            batch: config.batch_size,
            epochs: config.epochs,
            weight_decay: config.weight_decay,
            seed: config.seed,
            patience: config.patience,
            stopped_epoch: 0,
            val_loss: Vec::new(),
            val_macro_f1: f64::NAN,
            error: None,
        }
    }

    pub(super) fn failed(trial: usize, config: &TrainConfig, error: &Error) -> Self {
        TrialResult {
            error: Some(error.to_string()),
            ..Self::pending(trial, config)
        }
    }

    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            batch_size: self.batch,
            epochs: self.epochs,
            weight_decay: self.weight_decay,
            seed: self.seed,
            patience: self.patience,
        }
    }
}

/// Softmax in place with max subtraction.
pub fn softmax(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        sum += *l;
    }
    for l in logits.iter_mut() {
        *l /= sum;
    }
}

/// Row-major `n × classes` softmax probabilities.
pub fn predict_scores(head: &LinearHead, x: RowsView<'_>) -> Result<Vec<f64>> {
    if x.dim() != head.dim {
        return Err(Error::InvalidArgument(format!(
            "head expects {}-dim rows, got {}",
            head.dim,
            x.dim()
        )));
    }
    let mut out = vec![0.0; x.len() * head.classes];
    for (row, o) in x.rows().zip(out.chunks_exact_mut(head.classes)) {
        head.logits(row, o);
        softmax(o);
    }
    Ok(out)
}

fn log_softmax_at(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits[target] - lse
}

/// Mean cross-entropy over the rows listed in `idx`.
pub fn cross_entropy(head: &LinearHead, x: RowsView<'_>, y: &[usize], idx: &[usize]) -> f64 {
    let mut logits = vec![0.0; head.classes];
    let total: f64 = idx
        .iter()
        .map(|&i| {
            head.logits(x.row(i), &mut logits);
            -log_softmax_at(&logits, y[i])
        })
        .sum();
    total / idx.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Mean cross-entropy over `idx` and its gradient: for each row,
/// `∂/∂logits = softmax − onehot`.
pub fn gradients(head: &LinearHead, x: RowsView<'_>, y: &[usize], idx: &[usize]) -> Gradients {
    let (c, d) = (head.classes, head.dim);
    let mut g = Gradients {
        loss: 0.0,
        w: vec![0.0; c * d],
        b: vec![0.0; c],
    };
    let scale = 1.0 / idx.len() as f64;
    let mut p = vec![0.0; c];
    for &i in idx {
        let row = x.row(i);
        head.logits(row, &mut p);
        g.loss -= log_softmax_at(&p, y[i]) * scale;
        softmax(&mut p);
        p[y[i]] -= 1.0;
        for (k, &dk) in p.iter().enumerate() {
            g.b[k] += dk * scale;
            for (gw, v) in g.w[k * d..(k + 1) * d].iter_mut().zip(row) {
                *gw += dk * v * scale;
            }
        }
    }
    g
}

struct AdamW {
    step: i32,
    m_w: Vec<f64>,
    v_w: Vec<f64>,
    m_b: Vec<f64>,
    v_b: Vec<f64>,
}

impl AdamW {
    fn new(head: &LinearHead) -> Self {
        AdamW {
            step: 0,
            m_w: vec![0.0; head.w.len()],
            v_w: vec![0.0; head.w.len()],
            m_b: vec![0.0; head.b.len()],
            v_b: vec![0.0; head.b.len()],
        }
    }

    fn update(params: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], lr: f64, decay: f64, step: i32) {
        let c1 = 1.0 - BETA1.powi(step);
        let c2 = 1.0 - BETA2.powi(step);
        for i in 0..params.len() {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * grad[i];
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * grad[i] * grad[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            params[i] -= lr * (m_hat / (v_hat.sqrt() + EPSILON) + decay * params[i]);
        }
    }

    /// Weight decay applies to `W` only.
    fn apply(&mut self, head: &mut LinearHead, g: &Gradients, lr: f64, weight_decay: f64) {
        self.step += 1;
        Self::update(&mut head.w, &g.w, &mut self.m_w, &mut self.v_w, lr, weight_decay, self.step);
        Self::update(&mut head.b, &g.b, &mut self.m_b, &mut self.v_b, lr, 0.0, self.step);
    }
}

fn check_shapes(x: RowsView<'_>, y: &[usize], classes: usize, what: &str) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{what}: {} rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} set is empty")));
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidArgument(format!("{what}: label {bad} outside {classes} classes")));
    }
    Ok(())
}

/// Trains a zero-initialized head with AdamW on shuffled mini-batches and
/// returns the parameters of the epoch with the lowest validation loss.
/// Training stops `patience` epochs after the best epoch.
pub fn train_head(
    train: (RowsView<'_>, &[usize]),
    val: (RowsView<'_>, &[usize]),
    classes: usize,
    config: &TrainConfig,
    space: &SearchSpace,
) -> Result<(LinearHead, TrialResult)> {
    space.validate(config)?;
    let (xt, yt) = train;
    let (xv, yv) = val;
    check_shapes(xt, yt, classes, "training")?;
    check_shapes(xv, yv, classes, "validation")?;
    if xt.dim() != xv.dim() {
        return Err(Error::InvalidArgument("training and validation dims differ".into()));
    }
    let mut present = vec![false; classes];
    for &l in yt {
        present[l] = true;
    }
    if let Some(c) = present.iter().position(|&p| !p) {
        return Err(Error::InvalidArgument(format!("class {c} has no training examples")));
    }

    let mut head = LinearHead::zeros(classes, xt.dim());
    let mut opt = AdamW::new(&head);
    let mut g = rng::seeded(config.seed);
    let mut order: Vec<usize> = (0..xt.len()).collect();
    let val_idx: Vec<usize> = (0..xv.len()).collect();
    let mut result = TrialResult::pending(0, config);
    let mut best = (f64::INFINITY, 0usize, head.clone());
    let diverged = |what: &str| {
        Error::Diverged(format!(
            "non-finite {what} with lr {}, batch {}, epochs {}",
            config.learning_rate, config.batch_size, config.epochs
        ))
    };
    for epoch in 1..=config.epochs {
        rng::shuffle(&mut g, &mut order);
        for batch in order.chunks(config.batch_size) {
            let grads = gradients(&head, xt, yt, batch);
            if !grads.loss.is_finite() {
                return Err(diverged("training loss"));
            }
            opt.apply(&mut head, &grads, config.learning_rate, config.weight_decay);
        }
        let loss = cross_entropy(&head, xv, yv, &val_idx);
        if !loss.is_finite() {
            return Err(diverged("validation loss"));
        }
        result.val_loss.push(loss);
        if loss < best.0 {
            best = (loss, epoch, head.clone());
        } else if epoch - best.1 >= config.patience {
            break;
        }
    }
    let (_, best_epoch, head) = best;
    result.stopped_epoch = (best_epoch + config.patience).min(config.epochs);
    let scores = predict_scores(&head, xv)?;
    let pred = argmax_rows(&scores, classes);
    result.val_macro_f1 = classification_report(yv, &pred, &scores, classes)?.f1_macro;
    Ok((head, result))
}

/// Index of the largest entry per row, ties to the lower index.
pub fn argmax_rows(scores: &[f64], classes: usize) -> Vec<usize> {
    scores
        .chunks_exact(classes)
        .map(|r| (0..classes).fold(0, |a, c| if r[c] > r[a] { c } else { a }))
        .collect()
}
