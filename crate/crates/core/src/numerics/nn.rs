use rand::Rng;

use crate::error::{Error, Result};

/// Whether stochastic regularisation is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

/// Returns `(−log softmax(logits)[target], softmax(logits) − onehot(target))`.
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= logits.len() {
        return Err(Error::invalid(format!(
            "target {target} out of range for {} classes",
            logits.len()
        )));
    }
    // log Z = max + log1p(Σ_{j≠argmax} e^{z_j − max}) stays accurate when one
    // logit dominates.
    let (arg, max) = logits
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, z)| if z > acc.1 { (j, z) } else { acc });
    let rest: f64 = logits
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != arg)
        .map(|(_, &z)| (z - max).exp())
        .sum();
    let log_z = max + rest.ln_1p();
    let loss = (max - logits[target]) + rest.ln_1p();
    let mut grad: Vec<f64> = logits.iter().map(|&z| (z - log_z).exp()).collect();
    grad[target] -= 1.0;
    Ok((loss, grad))
}

/// Inverted-dropout multipliers: each entry is `0` with probability `rate`,
/// otherwise `1/(1−rate)`. With `rate == 0` no randomness is consumed.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Vec<f64> {
    debug_assert!((0.0..1.0).contains(&rate));
    if rate == 0.0 {
        return vec![1.0; len];
    }
    let keep = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect()
}

/// Applies inverted dropout in training mode; identity in evaluation mode.
pub fn dropout<R: Rng + ?Sized>(values: &[f64], rate: f64, rng: &mut R, mode: Mode) -> Vec<f64> {
    match mode {
        Mode::Eval => values.to_vec(),
        Mode::Train => {
            let mask = dropout_mask(values.len(), rate, rng);
            values.iter().zip(&mask).map(|(v, m)| v * m).collect()
        }
    }
}
