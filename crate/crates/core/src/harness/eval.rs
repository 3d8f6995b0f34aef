//! Test-set scoring: loss, full-string correctness and closing-bracket accuracy.

use crate::error::{Error, Result};
use crate::langs::{cs_string_correct, dyck_closer_oracle, DyckSpec, LabeledString, Labels};
use crate::models::{sequence_loss, stop_position, EvalCache, Model, TokenId};
use crate::numerics::Matrix;

/// Anything that maps a token sequence to one logit row per token.
pub trait Predictor {
    fn logits(&mut self, tokens: &[TokenId]) -> Result<Matrix>;
}

/// Evaluation-mode wrapper around a trained model.
pub struct ModelPredictor<'a> {
    model: &'a Model,
    cache: EvalCache,
}

impl<'a> ModelPredictor<'a> {
    pub fn new(model: &'a Model) -> Result<Self> {
        Ok(ModelPredictor {
            model,
            cache: model.eval_cache()?,
        })
    }
}

impl Predictor for ModelPredictor<'_> {
    fn logits(&mut self, tokens: &[TokenId]) -> Result<Matrix> {
        self.model.eval_logits(tokens, &self.cache)
    }
}

/// Errors observed among the items falling in one bin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BinCount {
    pub total: usize,
    pub errors: usize,
}

impl BinCount {
    pub fn error_rate(&self) -> Option<f64> {
        (self.total > 0).then(|| self.errors as f64 / self.total as f64)
    }

    pub fn accuracy(&self) -> Option<f64> {
        self.error_rate().map(|e| 1.0 - e)
    }
}

/// Summary of one pass over a test set.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// Mean cross-entropy per predicted token (nats).
    pub loss: f64,
    /// Full strings for cross-serial, closing positions for Dyck.
    pub overall: BinCount,
    /// Indexed by `m + n` (cross-serial) or attractor count (Dyck).
    pub bins: Vec<BinCount>,
}

impl Evaluation {
    pub fn accuracy(&self) -> f64 {
        self.overall.accuracy().unwrap_or(0.0)
    }

    /// Largest error rate over the populated bins.
    pub fn max_err_rate(&self) -> f64 {
        self.bins
            .iter()
            .filter_map(BinCount::error_rate)
            .fold(0.0, f64::max)
    }

    /// `(bin, accuracy)` for every populated bin.
    pub fn populated(&self) -> Vec<(usize, f64)> {
        self.bins
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.accuracy().map(|a| (i, a)))
            .collect()
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Scores cross-serial strings against `L_k`: a string is correct when every
/// arg-max prediction through STOP is a valid continuation of its gold prefix.
pub fn evaluate_cross_serial<P: Predictor + ?Sized>(
    predictor: &mut P,
    test: &[LabeledString],
    k: usize,
    stop: TokenId,
) -> Result<Evaluation> {
    let mut bins = vec![BinCount::default(); k];
    let mut overall = BinCount::default();
    let (mut loss, mut targets) = (0.0, 0usize);
    for s in test {
        let Labels::CrossSerial { m, n } = s.labels else {
            return Err(Error::invalid("cross-serial evaluation given a non-cross-serial string"));
        };
        let last = stop_position(&s.tokens, stop)?;
        let logits = predictor.logits(&s.tokens[..last])?;
        loss += sequence_loss(&logits, &s.tokens, stop)?;
        targets += last;
        let predictions: Vec<TokenId> = (0..last).map(|t| argmax(logits.row(t))).collect();
        let correct = cs_string_correct(&predictions, &s.tokens[..=last], k)?;
        let bin = bins
            .get_mut(m + n)
            .ok_or_else(|| Error::invalid(format!("m + n = {} is outside L_{k}", m + n)))?;
        for b in [bin, &mut overall] {
            b.total += 1;
            b.errors += usize::from(!correct);
        }
    }
    Ok(Evaluation {
        loss: mean(loss, targets),
        overall,
        bins,
    })
}

/// Scores every closing position of Dyck strings: the prediction is the
/// arg-max over closer logits only, and is right when it matches the innermost
/// open bracket. Errors are binned by attractor count.
pub fn evaluate_dyck<P: Predictor + ?Sized>(
    predictor: &mut P,
    test: &[LabeledString],
    spec: &DyckSpec,
) -> Result<Evaluation> {
    let closers = spec.pair_count..2 * spec.pair_count;
    let mut bins = vec![BinCount::default(); spec.pairs];
    let mut overall = BinCount::default();
    let (mut loss, mut targets) = (0.0, 0usize);
    for s in test {
        let Labels::Dyck(labels) = &s.labels else {
            return Err(Error::invalid("Dyck evaluation given a non-Dyck string"));
        };
        let last = stop_position(&s.tokens, spec.stop())?;
        let logits = predictor.logits(&s.tokens[..last])?;
        loss += sequence_loss(&logits, &s.tokens, spec.stop())?;
        targets += last;
        for c in &labels.closers {
            let row = logits.row(c.position - 1);
            let guess = closers.start + argmax(&row[closers.clone()]);
            let right = dyck_closer_oracle(spec, &s.tokens[..c.position])?;
            if bins.len() <= c.attractors {
                bins.resize(c.attractors + 1, BinCount::default());
            }
            for b in [&mut bins[c.attractors], &mut overall] {
                b.total += 1;
                b.errors += usize::from(guess != right);
            }
        }
    }
    Ok(Evaluation {
        loss: mean(loss, targets),
        overall,
        bins,
    })
}

fn mean(sum: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
