//! Training and evaluation driver.

mod config;
mod data;
mod eval;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::langs::{LabeledString, Task};
use crate::models::{count_params, sequence_loss_grad, stop_position, Model, TokenId, Vocab};
use crate::numerics::{adam_step, AdamState, Mode};

pub use config::{ExperimentConfig, KEYS};
pub use data::{annotate, annotate_dataset, build_datasets, stream_rng, task_vocab, Stream};
pub use eval::{evaluate_cross_serial, evaluate_dyck, BinCount, Evaluation, ModelPredictor, Predictor};

/// Loss totals gathered over one epoch.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrainStats {
    pub loss_sum: f64,
    pub sequences: usize,
    pub targets: usize,
}

impl TrainStats {
    /// Mean cross-entropy per predicted token.
    pub fn per_token(&self) -> f64 {
        if self.targets == 0 {
            0.0
        } else {
            self.loss_sum / self.targets as f64
        }
    }

    pub fn per_sequence(&self) -> f64 {
        if self.sequences == 0 {
            0.0
        } else {
            self.loss_sum / self.sequences as f64
        }
    }
}

/// One pass over `train` in a seeded random order. Each mini-batch sums the
/// gradients of its sequences' losses and takes a single Adam step. Dropout
/// masks come from a stream keyed by `(epoch, sequence index)`.
pub fn train_epoch(
    model: &mut Model,
    adam: &mut AdamState,
    train: &[LabeledString],
    stop: TokenId,
    cfg: &ExperimentConfig,
    epoch: usize,
) -> Result<TrainStats> {
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut stream_rng(cfg.seed, Stream::Shuffle, epoch as u64, 0));
    let mut grad = vec![0.0; model.params().len()];
    let mut stats = TrainStats::default();
    for (batch, chunk) in order.chunks(cfg.batch.max(1)).enumerate() {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut batch_loss = 0.0;
        for &idx in chunk {
            let tokens = &train[idx].tokens;
            let last = stop_position(tokens, stop)?;
            let mut rng = stream_rng(cfg.seed, Stream::Dropout, epoch as u64, idx as u64);
            // STOP is never consumed: the last row needed predicts it.
            let (logits, trace) = model.forward(&tokens[..last], cfg.dropout, &mut rng, Mode::Train)?;
            let (loss, dlogits, targets) = sequence_loss_grad(&logits, tokens, stop)?;
            model.backward(&trace, &dlogits, &mut grad)?;
            batch_loss += loss;
            stats.targets += targets;
            stats.sequences += 1;
        }
        if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::TrainingFailure {
                epoch,
                batch,
                reason: format!("non-finite loss or gradient (batch loss {batch_loss})"),
            });
        }
        stats.loss_sum += batch_loss;
        adam_step(model.params_mut(), &grad, adam)?;
        if model.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::TrainingFailure {
                epoch,
                batch,
                reason: "non-finite parameter after update".into(),
            });
        }
    }
    Ok(stats)
}

/// Evaluates `model` on a labelled test set of the configured task.
pub fn evaluate(model: &Model, test: &[LabeledString], cfg: &ExperimentConfig) -> Result<Evaluation> {
    let mut predictor = ModelPredictor::new(model)?;
    match cfg.task {
        Task::CrossSerial => evaluate_cross_serial(&mut predictor, test, cfg.k_test, task_vocab(cfg)?.stop()),
        Task::Dyck => evaluate_dyck(&mut predictor, test, &cfg.dyck_spec()?),
    }
}

/// Metrics after one training epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-token training loss, with dropout, as parameters moved.
    pub trainloss: f64,
    /// Mean per-token test loss in evaluation mode.
    pub testloss: f64,
    /// Full-string accuracy (cross-serial) or closing-bracket accuracy (Dyck).
    pub accuracy: f64,
    /// Worst error rate over the populated length or attractor bins.
    pub max_err_rate: f64,
    pub eval: Evaluation,
}

/// A run in progress: datasets, model and optimiser state.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub vocab: Vocab,
    pub model: Model,
    pub adam: AdamState,
    pub train: Vec<LabeledString>,
    pub test: Vec<LabeledString>,
    pub records: Vec<EpochRecord>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let vocab = task_vocab(&config)?;
        let (train, test) = build_datasets(&config)?;
        let model = Model::init(
            config.arch,
            config.units,
            config.embed,
            config.vocab_size,
            &mut stream_rng(config.seed, Stream::Init, 0, 0),
        )?;
        let adam = AdamState::new(model.params().len(), config.lr);
        Ok(Experiment {
            config,
            vocab,
            model,
            adam,
            train,
            test,
            records: Vec::new(),
        })
    }

    pub fn param_count(&self) -> usize {
        count_params(&self.model)
    }

    /// Trains one more epoch and evaluates on the test set.
    pub fn run_epoch(&mut self) -> Result<&EpochRecord> {
        let epoch = self.records.len() + 1;
        let stats = train_epoch(
            &mut self.model,
            &mut self.adam,
            &self.train,
            self.vocab.stop(),
            &self.config,
            epoch,
        )?;
        let eval = evaluate(&self.model, &self.test, &self.config)?;
        self.records.push(EpochRecord {
            epoch,
            trainloss: stats.per_token(),
            testloss: eval.loss,
            accuracy: eval.accuracy(),
            max_err_rate: eval.max_err_rate(),
            eval,
        });
        Ok(self.records.last().expect("just pushed"))
    }

    /// Epoch with the lowest `max_err_rate` (earliest on ties).
    pub fn best_record(&self) -> Option<&EpochRecord> {
        self.records
            .iter()
            .fold(None, |best: Option<&EpochRecord>, r| match best {
                Some(b) if b.max_err_rate <= r.max_err_rate => Some(b),
                _ => Some(r),
            })
    }

    pub fn result(&self) -> ExperimentResult {
        ExperimentResult {
            config: self.config.clone(),
            param_count: self.param_count(),
            records: self.records.clone(),
            best_epoch: self.best_record().map(|r| r.epoch),
        }
    }
}

/// Everything a finished (or interrupted) run reports.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub param_count: usize,
    pub records: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
}

impl ExperimentResult {
    /// Attractor breakdown reported for a Dyck run: the best epoch's bins.
    /// Length breakdown for cross-serial: the final epoch's bins.
    pub fn breakdown(&self) -> Option<&Evaluation> {
        let epoch = match self.config.task {
            Task::Dyck => self.best_epoch?,
            Task::CrossSerial => self.records.last()?.epoch,
        };
        self.records.get(epoch - 1).map(|r| &r.eval)
    }
}

/// Trains for the configured number of epochs. On a training failure the
/// records gathered so far are returned alongside the error.
pub fn run_experiment(config: ExperimentConfig) -> std::result::Result<ExperimentResult, (Error, Option<ExperimentResult>)> {
    let mut exp = Experiment::new(config).map_err(|e| (e, None))?;
    for _ in 0..exp.config.epochs {
        if let Err(e) = exp.run_epoch() {
            return Err((e, Some(exp.result())));
        }
    }
    Ok(exp.result())
}
