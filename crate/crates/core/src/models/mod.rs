//! URN and LSTM generative sequence models with backpropagation through time.

mod checkpoint;
mod lstm;
mod urn;
mod vocab;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{softmax_cross_entropy, Matrix, Mode};

pub use checkpoint::Checkpoint;
pub use lstm::{Gate, LstmParams, LstmStepCache, LstmTrace};
pub use urn::{UrnParams, UrnStepCache, UrnTrace};
pub use vocab::{TokenId, TokenSequence, Vocab};

/// Recurrent architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arch {
    Urn,
    Lstm,
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arch::Urn => "urn",
            Arch::Lstm => "lstm",
        })
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "urn" => Ok(Arch::Urn),
            "lstm" => Ok(Arch::Lstm),
            other => Err(Error::invalid(format!("unknown architecture {other:?}"))),
        }
    }
}

/// A trainable sequence model.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Urn(UrnParams),
    Lstm(LstmParams),
}

/// Per-sequence activations recorded by [`Model::forward`].
#[derive(Clone, Debug)]
pub enum Trace {
    Urn(UrnTrace),
    Lstm(LstmTrace),
}

impl Trace {
    pub fn len(&self) -> usize {
        match self {
            Trace::Urn(t) => t.steps.len(),
            Trace::Lstm(t) => t.steps.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Hidden state after each consumed token.
    pub fn states(&self) -> &[Vec<f64>] {
        match self {
            Trace::Urn(t) => &t.states,
            Trace::Lstm(t) => &t.states,
        }
    }
}

/// Precomputed evaluation-mode quantities (the URN's per-token unitaries).
#[derive(Clone, Debug)]
pub enum EvalCache {
    Urn(Vec<Matrix>),
    Lstm,
}

impl Model {
    /// Randomly initialised model. `embed` is ignored for the URN.
    pub fn init<R: Rng + ?Sized>(
        arch: Arch,
        units: usize,
        embed: usize,
        vocab: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(match arch {
            Arch::Urn => Model::Urn(UrnParams::init(units, vocab, rng)?),
            Arch::Lstm => Model::Lstm(LstmParams::init(units, embed, vocab, rng)?),
        })
    }

    pub fn arch(&self) -> Arch {
        match self {
            Model::Urn(_) => Arch::Urn,
            Model::Lstm(_) => Arch::Lstm,
        }
    }

    pub fn units(&self) -> usize {
        match self {
            Model::Urn(p) => p.units(),
            Model::Lstm(p) => p.units(),
        }
    }

    /// LSTM input embedding width; 0 for the URN.
    pub fn embed_size(&self) -> usize {
        match self {
            Model::Urn(_) => 0,
            Model::Lstm(p) => p.embed_size(),
        }
    }

    pub fn vocab_size(&self) -> usize {
        match self {
            Model::Urn(p) => p.vocab_size(),
            Model::Lstm(p) => p.vocab_size(),
        }
    }

    /// Flat trainable parameters.
    pub fn params(&self) -> &[f64] {
        match self {
            Model::Urn(p) => p.theta(),
            Model::Lstm(p) => p.theta(),
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            Model::Urn(p) => p.theta_mut(),
            Model::Lstm(p) => p.theta_mut(),
        }
    }

    /// Consumes every token and emits one logit row per token; row `t`
    /// predicts `tokens[t+1]`. The URN starts from its fixed `h0`, the LSTM
    /// from zero state.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        tokens: &[TokenId],
        rate: f64,
        rng: &mut R,
        mode: Mode,
    ) -> Result<(Matrix, Trace)> {
        if tokens.is_empty() {
            return Err(Error::invalid("cannot run a model on an empty sequence"));
        }
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::invalid(format!("dropout rate {rate} outside [0, 1)")));
        }
        match self {
            Model::Urn(p) => p.forward(tokens, rate, rng, mode).map(|(l, t)| (l, Trace::Urn(t))),
            Model::Lstm(p) => p.forward(tokens, rate, rng, mode).map(|(l, t)| (l, Trace::Lstm(t))),
        }
    }

    /// Accumulates exact gradients of `Σ dlogits ⊙ logits` into `grad`.
    pub fn backward(&self, trace: &Trace, dlogits: &Matrix, grad: &mut [f64]) -> Result<()> {
        match (self, trace) {
            (Model::Urn(p), Trace::Urn(t)) => p.backward(t, dlogits, grad),
            (Model::Lstm(p), Trace::Lstm(t)) => p.backward(t, dlogits, grad),
            _ => Err(Error::invalid("trace was produced by a different architecture")),
        }
    }

    pub fn eval_cache(&self) -> Result<EvalCache> {
        match self {
            Model::Urn(p) => Ok(EvalCache::Urn(
                (0..p.vocab_size())
                    .map(|t| p.unitary(t))
                    .collect::<Result<_>>()?,
            )),
            Model::Lstm(_) => Ok(EvalCache::Lstm),
        }
    }

    /// Evaluation-mode logits, reusing the cache from [`Model::eval_cache`].
    pub fn eval_logits(&self, tokens: &[TokenId], cache: &EvalCache) -> Result<Matrix> {
        if tokens.is_empty() {
            return Err(Error::invalid("cannot run a model on an empty sequence"));
        }
        match (self, cache) {
            (Model::Urn(p), EvalCache::Urn(qs)) => p.logits_with(tokens, qs),
            (Model::Lstm(p), EvalCache::Lstm) => {
                // No randomness is drawn in evaluation mode.
                let mut rng = rand::rngs::mock::StepRng::new(0, 0);
                Ok(p.forward(tokens, 0.0, &mut rng, Mode::Eval)?.0)
            }
            _ => Err(Error::invalid("evaluation cache built for a different model")),
        }
    }
}

/// Number of trainable scalars.
pub fn count_params(model: &Model) -> usize {
    match model {
        Model::Urn(p) => UrnParams::count(p.units(), p.vocab_size()),
        Model::Lstm(p) => LstmParams::count(p.units(), p.embed_size(), p.vocab_size()),
    }
}

/// Index of the first STOP at or after position 1, i.e. the last target position.
pub fn stop_position(tokens: &[TokenId], stop: TokenId) -> Result<usize> {
    tokens
        .iter()
        .skip(1)
        .position(|&t| t == stop)
        .map(|p| p + 1)
        .ok_or_else(|| Error::invalid("sequence has no STOP symbol"))
}

/// Summed cross-entropy of `logits[t]` against `tokens[t+1]`, for every target
/// up to and including STOP. Rows past the STOP target are ignored.
pub fn sequence_loss(logits: &Matrix, tokens: &[TokenId], stop: TokenId) -> Result<f64> {
    Ok(sequence_loss_grad(logits, tokens, stop)?.0)
}

/// [`sequence_loss`] together with `dloss/dlogits` and the number of targets.
pub fn sequence_loss_grad(
    logits: &Matrix,
    tokens: &[TokenId],
    stop: TokenId,
) -> Result<(f64, Matrix, usize)> {
    let last = stop_position(tokens, stop)?;
    if logits.rows() < last {
        return Err(Error::invalid(format!(
            "{} logit rows cannot predict {last} targets",
            logits.rows()
        )));
    }
    let mut dlogits = Matrix::zeros(logits.rows(), logits.cols());
    let mut total = 0.0;
    for t in 0..last {
        let (loss, g) = softmax_cross_entropy(logits.row(t), tokens[t + 1])?;
        total += loss;
        dlogits.row_mut(t).copy_from_slice(&g);
    }
    Ok((total, dlogits, last))
}
