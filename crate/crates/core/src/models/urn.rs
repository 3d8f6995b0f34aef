//! Unitary-evolution recurrent network.
//!
//! Each token owns a vector of `n(n−1)/2` reals that is packed into a
//! skew-symmetric matrix `S` and exponentiated into an orthogonal `Q = exp(S)`.
//! The hidden state evolves as `h_t = Q_t h_{t−1}` from a fixed unit vector, with
//! no nonlinearity on the recurrent path. Logits are an affine projection of
//! the state after each token.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{
    axpy, dropout_mask, expm, expm_backward, skew_from_slice, skew_grad_accumulate, skew_len,
    Matrix, Mode,
};

use super::TokenId;

/// Trainable parameters of a URN plus its fixed initial state.
///
/// Flat layout: embedding (`V × n(n−1)/2`, row per token), projection weights
/// (`V × n`), projection bias (`V`).
#[derive(Clone, Debug, PartialEq)]
pub struct UrnParams {
    n: usize,
    vocab: usize,
    theta: Vec<f64>,
    h0: Vec<f64>,
}

/// Activations of one URN step kept for backpropagation.
#[derive(Clone, Debug)]
pub struct UrnStepCache {
    pub token: TokenId,
    /// Inverted-dropout multipliers over the skew entries; empty when none applied.
    pub mask: Vec<f64>,
    pub s: Matrix,
    pub q: Matrix,
    pub h_prev: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct UrnTrace {
    pub steps: Vec<UrnStepCache>,
    /// `states[t]` is the hidden state after consuming token `t`.
    pub states: Vec<Vec<f64>>,
}

impl UrnParams {
    /// Zero-initialised parameters.
    pub fn zeros(n: usize, vocab: usize) -> Result<Self> {
        if n == 0 || vocab == 0 {
            return Err(Error::invalid("URN needs positive units and vocabulary"));
        }
        let len = Self::count(n, vocab);
        let mut h0 = vec![0.0; n];
        h0[0] = 1.0;
        Ok(UrnParams {
            n,
            vocab,
            theta: vec![0.0; len],
            h0,
        })
    }

    /// Random initialisation. Skew entries are uniform in `±1/(n−1)`, which
    /// bounds `‖S‖₁ ≤ 1`; projection weights are uniform in `±1/√n`.
    pub fn init<R: Rng + ?Sized>(n: usize, vocab: usize, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(n, vocab)?;
        let r_skew = if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
        let r_proj = 1.0 / (n as f64).sqrt();
        let emb = p.embedding_len();
        let proj = vocab * n;
        for (k, v) in p.theta.iter_mut().enumerate() {
            *v = if k < emb && r_skew > 0.0 {
                rng.gen_range(-r_skew..r_skew)
            } else if k >= emb && k < emb + proj {
                rng.gen_range(-r_proj..r_proj)
            } else {
                0.0
            };
        }
        Ok(p)
    }

    /// `V·n(n−1)/2 + V·n + V`.
    pub const fn count(n: usize, vocab: usize) -> usize {
        vocab * skew_len(n) + vocab * n + vocab
    }

    pub fn units(&self) -> usize {
        self.n
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn h0(&self) -> &[f64] {
        &self.h0
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn embedding_len(&self) -> usize {
        self.vocab * skew_len(self.n)
    }

    /// Skew parameters of one token.
    pub fn embedding_row(&self, token: TokenId) -> &[f64] {
        let p = skew_len(self.n);
        &self.theta[token * p..(token + 1) * p]
    }

    pub fn embedding_row_mut(&mut self, token: TokenId) -> &mut [f64] {
        let p = skew_len(self.n);
        &mut self.theta[token * p..(token + 1) * p]
    }

    fn proj_range(&self) -> std::ops::Range<usize> {
        let start = self.embedding_len();
        start..start + self.vocab * self.n
    }

    pub fn proj_w(&self) -> &[f64] {
        &self.theta[self.proj_range()]
    }

    pub fn proj_w_mut(&mut self) -> &mut [f64] {
        let r = self.proj_range();
        &mut self.theta[r]
    }

    pub fn proj_b(&self) -> &[f64] {
        &self.theta[self.proj_range().end..]
    }

    pub fn proj_b_mut(&mut self) -> &mut [f64] {
        let start = self.proj_range().end;
        &mut self.theta[start..]
    }

    fn check_token(&self, token: TokenId) -> Result<()> {
        if token >= self.vocab {
            return Err(Error::invalid(format!(
                "token {token} outside vocabulary of {}",
                self.vocab
            )));
        }
        Ok(())
    }

    /// The unitary embedding `exp(skew(x))` of a token, without dropout.
    pub fn unitary(&self, token: TokenId) -> Result<Matrix> {
        self.check_token(token)?;
        expm(&skew_from_slice(self.n, self.embedding_row(token)))
    }

    /// Logits `W h + b`.
    pub fn project(&self, h: &[f64]) -> Vec<f64> {
        let w = self.proj_w();
        let b = self.proj_b();
        (0..self.vocab)
            .map(|v| {
                let row = &w[v * self.n..(v + 1) * self.n];
                b[v] + row.iter().zip(h).map(|(a, x)| a * x).sum::<f64>()
            })
            .collect()
    }

    /// One recurrence step `h' = exp(skew(dropout(x_token))) h`.
    pub fn step<R: Rng + ?Sized>(
        &self,
        h: &[f64],
        token: TokenId,
        rate: f64,
        rng: &mut R,
        mode: Mode,
    ) -> Result<(Vec<f64>, UrnStepCache)> {
        self.check_token(token)?;
        if h.len() != self.n {
            return Err(Error::invalid("URN state has wrong length"));
        }
        let x = self.embedding_row(token);
        let (s, mask) = match mode {
            Mode::Train if rate > 0.0 => {
                let mask = dropout_mask(x.len(), rate, rng);
                let dropped: Vec<f64> = x.iter().zip(&mask).map(|(a, m)| a * m).collect();
                (skew_from_slice(self.n, &dropped), mask)
            }
            _ => (skew_from_slice(self.n, x), Vec::new()),
        };
        let q = expm(&s)?;
        let h_next = q.matvec(h);
        Ok((
            h_next,
            UrnStepCache {
                token,
                mask,
                s,
                q,
                h_prev: h.to_vec(),
            },
        ))
    }

    pub fn forward<R: Rng + ?Sized>(
        &self,
        tokens: &[TokenId],
        rate: f64,
        rng: &mut R,
        mode: Mode,
    ) -> Result<(Matrix, UrnTrace)> {
        let mut logits = Matrix::zeros(tokens.len(), self.vocab);
        let mut h = self.h0.clone();
        let mut steps = Vec::with_capacity(tokens.len());
        let mut states = Vec::with_capacity(tokens.len());
        for (t, &tok) in tokens.iter().enumerate() {
            let (h_next, cache) = self.step(&h, tok, rate, rng, mode)?;
            logits.row_mut(t).copy_from_slice(&self.project(&h_next));
            steps.push(cache);
            states.push(h_next.clone());
            h = h_next;
        }
        Ok((logits, UrnTrace { steps, states }))
    }

    /// Evaluation-mode logits using precomputed unitaries (one per token).
    pub fn logits_with(&self, tokens: &[TokenId], unitaries: &[Matrix]) -> Result<Matrix> {
        let mut logits = Matrix::zeros(tokens.len(), self.vocab);
        let mut h = self.h0.clone();
        for (t, &tok) in tokens.iter().enumerate() {
            self.check_token(tok)?;
            h = unitaries[tok].matvec(&h);
            logits.row_mut(t).copy_from_slice(&self.project(&h));
        }
        Ok(logits)
    }

    /// Accumulates `dL/dθ` into `grad` (same layout as [`UrnParams::theta`]).
    pub fn backward(&self, trace: &UrnTrace, dlogits: &Matrix, grad: &mut [f64]) -> Result<()> {
        let t_len = trace.steps.len();
        if grad.len() != self.theta.len()
            || dlogits.cols() != self.vocab
            || dlogits.rows() < t_len
            || trace.states.len() != t_len
            || trace.steps.iter().any(|s| s.q.rows() != self.n)
        {
            return Err(Error::invalid("URN trace does not match model or gradient"));
        }
        let n = self.n;
        let p = skew_len(n);
        let emb_len = self.embedding_len();
        let w = self.proj_w();
        let (emb_grad, rest) = grad.split_at_mut(emb_len);
        let (w_grad, b_grad) = rest.split_at_mut(self.vocab * n);

        let ones = vec![1.0; p];
        let mut dh = vec![0.0; n];
        for t in (0..t_len).rev() {
            let dl = dlogits.row(t);
            let h_t = &trace.states[t];
            for (v, &g) in dl.iter().enumerate() {
                if g != 0.0 {
                    axpy(g, h_t, &mut w_grad[v * n..(v + 1) * n]);
                    axpy(g, &w[v * n..(v + 1) * n], &mut dh);
                    b_grad[v] += g;
                }
            }
            let step = &trace.steps[t];
            if dh.iter().all(|&v| v == 0.0) {
                continue;
            }
            // h_t = Q h_{t−1}: dQ = dh ⊗ h_{t−1}, dh_{t−1} = Qᵀ dh.
            let mut dq = Matrix::zeros(n, n);
            for i in 0..n {
                axpy(dh[i], &step.h_prev, dq.row_mut(i));
            }
            dh = step.q.matvec_t(&dh);
            if p > 0 {
                let ds = expm_backward(&step.s, &dq)?;
                let scale = if step.mask.is_empty() { &ones } else { &step.mask };
                let row = &mut emb_grad[step.token * p..(step.token + 1) * p];
                skew_grad_accumulate(&ds, scale, row);
            }
        }
        Ok(())
    }
}
