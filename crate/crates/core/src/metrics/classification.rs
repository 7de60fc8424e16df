use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(truth: &[usize], pred: &[usize], n_classes: usize) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::InvalidArgument(format!(
                "{} true labels but {} predictions",
                truth.len(),
                pred.len()
            )));
        }
        let mut counts = vec![0u64; n_classes * n_classes];
        for (&t, &p) in truth.iter().zip(pred) {
            if t >= n_classes || p >= n_classes {
                return Err(Error::InvalidArgument(format!(
                    "class index {} outside class set of size {n_classes}",
                    t.max(p)
                )));
            }
            counts[t * n_classes + p] += 1;
        }
        Ok(ConfusionMatrix { n_classes, counts })
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.n_classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn support(&self) -> Vec<u64> {
        (0..self.n_classes)
            .map(|t| (0..self.n_classes).map(|p| self.get(t, p)).sum())
            .collect()
    }

    pub fn predicted(&self) -> Vec<u64> {
        (0..self.n_classes)
            .map(|p| (0..self.n_classes).map(|t| self.get(t, p)).sum())
            .collect()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }
}

/// Every column of the classification table, in table order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub f1_macro: f64,
    pub f1_weighted: f64,
    pub precision_macro: f64,
    pub precision_weighted: f64,
    pub recall_macro: f64,
    pub recall_weighted: f64,
    pub kappa: f64,
    pub mcc: f64,
    pub top3_accuracy: f64,
    pub roc_auc_macro: f64,
    /// Classes predicted zero times (precision counted as 0 for them).
    #[serde(default)]
    pub zero_prediction_classes: Vec<usize>,
}

impl MetricReport {
    pub const COLUMNS: [&'static str; 11] = [
        "acc", "f1_m", "f1_w", "p_m", "p_w", "r_m", "r_w", "kappa", "mcc", "top3_acc", "roc",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.accuracy,
            self.f1_macro,
            self.f1_weighted,
            self.precision_macro,
            self.precision_weighted,
            self.recall_macro,
            self.recall_weighted,
            self.kappa,
            self.mcc,
            self.top3_accuracy,
            self.roc_auc_macro,
        ]
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_scores(scores: &[f64], n: usize, n_classes: usize) -> Result<()> {
    if scores.len() != n * n_classes {
        return Err(Error::InvalidArgument(format!(
            "score matrix has {} entries, expected {n} × {n_classes}",
            scores.len()
        )));
    }
    Ok(())
}

/// Fraction of rows whose true class is among the `k` highest scores.
/// Tied scores rank the lower class index first.
pub fn top_k_accuracy(truth: &[usize], scores: &[f64], n_classes: usize, k: usize) -> Result<f64> {
    check_scores(scores, truth.len(), n_classes)?;
    if k == 0 || k > n_classes {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n_classes}")));
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let mut hits = 0usize;
    for (i, &t) in truth.iter().enumerate() {
        if t >= n_classes {
            return Err(Error::InvalidArgument(format!("class index {t} outside class set")));
        }
        let row = &scores[i * n_classes..(i + 1) * n_classes];
        let st = row[t];
        let ahead = row
            .iter()
            .enumerate()
            .filter(|&(j, &s)| s > st || (s == st && j < t))
            .count();
        if ahead < k {
            hits += 1;
        }
    }
    Ok(hits as f64 / truth.len() as f64)
}

/// Area under the ROC curve of `scores` for binary `positive` flags (midrank ties).
/// `None` when one of the two groups is empty.
fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let mid = (i + j + 2) as f64 / 2.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&o| positive[o]).count() as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// Macro-averaged one-vs-rest ROC-AUC over classes that have both positives
/// and negatives in `truth`. NaN when no class qualifies.
pub fn roc_auc_ovr(truth: &[usize], scores: &[f64], n_classes: usize) -> Result<f64> {
    check_scores(scores, truth.len(), n_classes)?;
    let mut aucs = Vec::new();
    for c in 0..n_classes {
        let column: Vec<f64> = (0..truth.len()).map(|i| scores[i * n_classes + c]).collect();
        let positive: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        if let Some(a) = binary_auc(&column, &positive) {
            aucs.push(a);
        }
    }
    if aucs.is_empty() {
        return Ok(f64::NAN);
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Full classification suite. `scores` is row-major `n × n_classes`.
pub fn classification_report(truth: &[usize], pred: &[usize], scores: &[f64], n_classes: usize) -> Result<MetricReport> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    check_scores(scores, truth.len(), n_classes)?;
    let cm = ConfusionMatrix::new(truth, pred, n_classes)?;
    let n = cm.total();
    let support = cm.support();
    let predicted = cm.predicted();

    // macro averages run over classes seen in truth or predictions
    let present: Vec<usize> = (0..n_classes)
        .filter(|&c| support[c] > 0 || predicted[c] > 0)
        .collect();
    let mut zero_prediction_classes = Vec::new();
    let (mut p_m, mut r_m, mut f_m) = (0.0, 0.0, 0.0);
    let (mut p_w, mut r_w, mut f_w) = (0.0, 0.0, 0.0);
    for &c in &present {
        let tp = cm.get(c, c);
        if predicted[c] == 0 {
            zero_prediction_classes.push(c);
        }
        let p = ratio(tp, predicted[c]);
        let r = ratio(tp, support[c]);
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        p_m += p;
        r_m += r;
        f_m += f;
        let w = support[c] as f64 / n as f64;
        p_w += w * p;
        r_w += w * r;
        f_w += w * f;
    }
    let m = present.len() as f64;

    let nf = n as f64;
    let accuracy = cm.trace() as f64 / nf;
    let chance: f64 = (0..n_classes)
        .map(|c| support[c] as f64 * predicted[c] as f64)
        .sum::<f64>()
        / (nf * nf);
    let kappa = if chance == 1.0 {
        if accuracy == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (accuracy - chance) / (1.0 - chance)
    };

    let c = cm.trace() as f64;
    let sum_pt: f64 = (0..n_classes).map(|k| predicted[k] as f64 * support[k] as f64).sum();
    let sum_p2: f64 = predicted.iter().map(|&p| (p as f64).powi(2)).sum();
    let sum_t2: f64 = support.iter().map(|&t| (t as f64).powi(2)).sum();
    let den = ((nf * nf - sum_p2) * (nf * nf - sum_t2)).sqrt();
    let mcc = if den == 0.0 { 0.0 } else { (c * nf - sum_pt) / den };

    Ok(MetricReport {
        accuracy,
        f1_macro: f_m / m,
        f1_weighted: f_w,
        precision_macro: p_m / m,
        precision_weighted: p_w,
        recall_macro: r_m / m,
        recall_weighted: r_w,
        kappa,
        mcc,
        top3_accuracy: top_k_accuracy(truth, scores, n_classes, n_classes.min(3))?,
        roc_auc_macro: roc_auc_ovr(truth, scores, n_classes)?,
        zero_prediction_classes,
    })
}
