use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::head::{train_head, LinearHead, TrainConfig, TrialResult};
use super::split::{stratified_split, Split};
use crate::embed::RowsView;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

pub const DEFAULT_TRIALS: usize = 20;

// Stream ids mixed into the base seed so the split, the sampler and the
// per-trial shuffles never share a generator.
const SAMPLER_STREAM: u64 = 0x5a4d_504c_4552;
const TRIAL_STREAM: u64 = 0x7472_6961_6c00;

/// Admissible hyperparameters; also used to validate explicit configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lr_min: f64,
    pub lr_max: f64,
    pub batch_sizes: Vec<usize>,
    pub epochs_min: usize,
    pub epochs_max: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            lr_min: 1e-6,
            lr_max: 1e-4,
            batch_sizes: vec![8, 16, 32],
            epochs_min: 2,
            epochs_max: 7,
        }
    }
}

impl SearchSpace {
    /// Accepts any positive learning rate, batch size and epoch count.
    pub fn unrestricted() -> Self {
        SearchSpace {
            lr_min: f64::MIN_POSITIVE,
            lr_max: f64::MAX,
            batch_sizes: Vec::new(),
            epochs_min: 1,
            epochs_max: usize::MAX,
        }
    }

    pub fn validate(&self, c: &TrainConfig) -> Result<()> {
        if !(self.lr_min..=self.lr_max).contains(&c.learning_rate) {
            return Err(Error::Config(format!(
                "learning rate {} outside [{}, {}]",
                c.learning_rate, self.lr_min, self.lr_max
            )));
        }
        let batch_ok = if self.batch_sizes.is_empty() {
            c.batch_size > 0
        } else {
            self.batch_sizes.contains(&c.batch_size)
        };
        if !batch_ok {
            return Err(Error::Config(format!(
                "batch size {} not in {:?}",
                c.batch_size, self.batch_sizes
            )));
        }
        if !(self.epochs_min..=self.epochs_max).contains(&c.epochs) {
            return Err(Error::Config(format!(
                "epochs {} outside [{}, {}]",
                c.epochs, self.epochs_min, self.epochs_max
            )));
        }
        if !(c.weight_decay >= 0.0 && c.weight_decay.is_finite()) {
            return Err(Error::Config(format!("weight decay {} must be non-negative", c.weight_decay)));
        }
        Ok(())
    }

    /// Log-uniform learning rate, uniform batch size and epoch count.
    pub fn sample(&self, rng: &mut Rng, seed: u64) -> TrainConfig {
        let (lo, hi) = (self.lr_min.ln(), self.lr_max.ln());
        let lr = (lo + rng::unit(rng) * (hi - lo)).exp().clamp(self.lr_min, self.lr_max);
        let batch = self.batch_sizes[rng::below(rng, self.batch_sizes.len())];
        let epochs = self.epochs_min + rng::below(rng, self.epochs_max - self.epochs_min + 1);
        TrainConfig::new(lr, batch, epochs, seed)
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub split: Split,
    pub trials: Vec<TrialResult>,
    /// Index into `trials` of the winner.
    pub best: usize,
    pub head: LinearHead,
}

impl SearchOutcome {
    pub fn best_trial(&self) -> &TrialResult {
        &self.trials[self.best]
    }
}

/// Random search with one stratified 80/20 split (seeded by `seed`) shared
/// by every trial. Trial `i` draws its config from a dedicated sampler
/// stream and shuffles with its own derived seed. The winner has the
/// highest validation macro-F1; ties go to the earlier trial.
pub fn random_search(
    x: RowsView<'_>,
    labels: &[usize],
    classes: usize,
    n_trials: usize,
    seed: u64,
    space: &SearchSpace,
) -> Result<SearchOutcome> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    if space.batch_sizes.is_empty() || space.epochs_max == usize::MAX {
        return Err(Error::Config("search space must be bounded".into()));
    }
    if x.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            x.len(),
            labels.len()
        )));
    }
    let split = stratified_split(labels, 0.8, seed)?;
    let gather = |idx: &[usize]| -> (Vec<f64>, Vec<usize>) {
        let rows = idx.iter().flat_map(|&i| x.row(i).iter().copied()).collect();
        (rows, idx.iter().map(|&i| labels[i]).collect())
    };
    let (xt, yt) = gather(&split.train);
    let (xv, yv) = gather(&split.val);
    let (xt, xv) = (RowsView::new(&xt, x.dim()), RowsView::new(&xv, x.dim()));

    let mut sampler = rng::seeded(seed ^ SAMPLER_STREAM);
    let configs: Vec<TrainConfig> = (0..n_trials)
        .map(|i| space.sample(&mut sampler, rng::derive_seed(seed ^ TRIAL_STREAM, i as u64)))
        .collect();
    let runs: Vec<(TrialResult, Option<LinearHead>)> = configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| match train_head((xt, &yt), (xv, &yv), classes, cfg, space) {
            Ok((head, mut trial)) => {
                trial.trial = i;
                (trial, Some(head))
            }
            Err(e) => {
                log::warn!("trial {i} failed: {e}");
                (TrialResult::failed(i, cfg, &e), None)
            }
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, (t, head)) in runs.iter().enumerate() {
        if head.is_some() && best.is_none_or(|b| t.val_macro_f1 > runs[b].0.val_macro_f1) {
            best = Some(i);
        }
    }
    let Some(best) = best else {
        let first = runs[0].0.error.clone().unwrap_or_default();
        return Err(Error::AllFailed(format!("all {n_trials} trials failed; first error: {first}")));
    };
    let mut trials = Vec::with_capacity(runs.len());
    let mut winner = None;
    for (i, (t, head)) in runs.into_iter().enumerate() {
        if i == best {
            winner = head;
        }
        trials.push(t);
    }
    Ok(SearchOutcome {
        split,
        trials,
        best,
        head: winner.expect("winner trained"),
    })
}
