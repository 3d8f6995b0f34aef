//! LSTM baseline.
//!
//! ```text
//! v  = dropout(h) ◇ dropout(x)
//! f  = σ(W_f v + b_f)     i = σ(W_i v + b_i)     o = σ(W_o v + b_o)
//! c̃  = tanh(W_c v + b_c)
//! c' = f ⊙ c + i ⊙ c̃     h' = o ⊙ tanh(c')
//! ```

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{axpy, dot, dropout_mask, Matrix, Mode};

use super::TokenId;

/// Gate order inside the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Forget = 0,
    Input = 1,
    Output = 2,
    Candidate = 3,
}

const GATES: [Gate; 4] = [Gate::Forget, Gate::Input, Gate::Output, Gate::Candidate];

/// Trainable LSTM parameters.
///
/// Flat layout: embedding (`V × e`), then for each gate `f, i, o, c` its weight
/// matrix (`n × (n+e)`) followed by its bias (`n`), then projection weights
/// (`V × n`) and bias (`V`).
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    n: usize,
    e: usize,
    vocab: usize,
    theta: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LstmStepCache {
    pub token: TokenId,
    pub mask_h: Vec<f64>,
    pub mask_x: Vec<f64>,
    /// Concatenated (dropped-out) input `v`.
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LstmTrace {
    pub steps: Vec<LstmStepCache>,
    pub states: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmParams {
    pub fn zeros(n: usize, e: usize, vocab: usize) -> Result<Self> {
        if n == 0 || e == 0 || vocab == 0 {
            return Err(Error::invalid("LSTM needs positive units, embedding and vocabulary"));
        }
        Ok(LstmParams {
            n,
            e,
            vocab,
            theta: vec![0.0; Self::count(n, e, vocab)],
        })
    }

    /// Uniform initialisation with range `1/√fan_in` (embedding rows use their
    /// own width), zero biases except the forget gate, which starts at 1.
    pub fn init<R: Rng + ?Sized>(n: usize, e: usize, vocab: usize, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(n, e, vocab)?;
        let r_emb = 1.0 / (e as f64).sqrt();
        p.embedding_mut()
            .iter_mut()
            .for_each(|v| *v = rng.gen_range(-r_emb..r_emb));
        let r_gate = 1.0 / ((n + e) as f64).sqrt();
        for gate in GATES {
            p.weight_mut(gate)
                .iter_mut()
                .for_each(|v| *v = rng.gen_range(-r_gate..r_gate));
        }
        p.bias_mut(Gate::Forget).iter_mut().for_each(|v| *v = 1.0);
        let r_proj = 1.0 / (n as f64).sqrt();
        p.proj_w_mut()
            .iter_mut()
            .for_each(|v| *v = rng.gen_range(-r_proj..r_proj));
        Ok(p)
    }

    /// `V·e + 4·(n·(n+e) + n) + V·n + V`.
    pub const fn count(n: usize, e: usize, vocab: usize) -> usize {
        vocab * e + 4 * (n * (n + e) + n) + vocab * n + vocab
    }

    pub fn units(&self) -> usize {
        self.n
    }

    pub fn embed_size(&self) -> usize {
        self.e
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn gate_block(&self) -> usize {
        self.n * (self.n + self.e) + self.n
    }

    fn weight_offset(&self, gate: Gate) -> usize {
        self.vocab * self.e + gate as usize * self.gate_block()
    }

    fn proj_offset(&self) -> usize {
        self.vocab * self.e + 4 * self.gate_block()
    }

    pub fn embedding(&self) -> &[f64] {
        &self.theta[..self.vocab * self.e]
    }

    pub fn embedding_mut(&mut self) -> &mut [f64] {
        let len = self.vocab * self.e;
        &mut self.theta[..len]
    }

    pub fn weight(&self, gate: Gate) -> &[f64] {
        let o = self.weight_offset(gate);
        &self.theta[o..o + self.n * (self.n + self.e)]
    }

    pub fn weight_mut(&mut self, gate: Gate) -> &mut [f64] {
        let o = self.weight_offset(gate);
        let len = self.n * (self.n + self.e);
        &mut self.theta[o..o + len]
    }

    pub fn bias(&self, gate: Gate) -> &[f64] {
        let o = self.weight_offset(gate) + self.n * (self.n + self.e);
        &self.theta[o..o + self.n]
    }

    pub fn bias_mut(&mut self, gate: Gate) -> &mut [f64] {
        let o = self.weight_offset(gate) + self.n * (self.n + self.e);
        let n = self.n;
        &mut self.theta[o..o + n]
    }

    pub fn proj_w(&self) -> &[f64] {
        let o = self.proj_offset();
        &self.theta[o..o + self.vocab * self.n]
    }

    pub fn proj_w_mut(&mut self) -> &mut [f64] {
        let o = self.proj_offset();
        let len = self.vocab * self.n;
        &mut self.theta[o..o + len]
    }

    pub fn proj_b(&self) -> &[f64] {
        &self.theta[self.proj_offset() + self.vocab * self.n..]
    }

    pub fn project(&self, h: &[f64]) -> Vec<f64> {
        let w = self.proj_w();
        self.proj_b()
            .iter()
            .enumerate()
            .map(|(v, b)| b + dot(&w[v * self.n..(v + 1) * self.n], h))
            .collect()
    }

    fn pre_activation(&self, gate: Gate, v: &[f64]) -> Vec<f64> {
        let w = self.weight(gate);
        let width = self.n + self.e;
        self.bias(gate)
            .iter()
            .enumerate()
            .map(|(r, b)| b + dot(&w[r * width..(r + 1) * width], v))
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn step<R: Rng + ?Sized>(
        &self,
        h: &[f64],
        c: &[f64],
        token: TokenId,
        rate: f64,
        rng: &mut R,
        mode: Mode,
    ) -> Result<(Vec<f64>, Vec<f64>, LstmStepCache)> {
        if token >= self.vocab {
            return Err(Error::invalid(format!(
                "token {token} outside vocabulary of {}",
                self.vocab
            )));
        }
        if h.len() != self.n || c.len() != self.n {
            return Err(Error::invalid("LSTM state has wrong length"));
        }
        let x = &self.embedding()[token * self.e..(token + 1) * self.e];
        let (mask_h, mask_x) = match mode {
            Mode::Train if rate > 0.0 => (
                dropout_mask(self.n, rate, rng),
                dropout_mask(self.e, rate, rng),
            ),
            _ => (Vec::new(), Vec::new()),
        };
        let mut v = Vec::with_capacity(self.n + self.e);
        if mask_h.is_empty() {
            v.extend_from_slice(h);
            v.extend_from_slice(x);
        } else {
            v.extend(h.iter().zip(&mask_h).map(|(a, m)| a * m));
            v.extend(x.iter().zip(&mask_x).map(|(a, m)| a * m));
        }
        let f: Vec<f64> = self.pre_activation(Gate::Forget, &v).into_iter().map(sigmoid).collect();
        let i: Vec<f64> = self.pre_activation(Gate::Input, &v).into_iter().map(sigmoid).collect();
        let o: Vec<f64> = self.pre_activation(Gate::Output, &v).into_iter().map(sigmoid).collect();
        let g: Vec<f64> = self
            .pre_activation(Gate::Candidate, &v)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let c_next: Vec<f64> = (0..self.n).map(|k| f[k] * c[k] + i[k] * g[k]).collect();
        let h_next: Vec<f64> = (0..self.n).map(|k| o[k] * c_next[k].tanh()).collect();
        let cache = LstmStepCache {
            token,
            mask_h,
            mask_x,
            v,
            f,
            i,
            o,
            g,
            c_prev: c.to_vec(),
            c: c_next.clone(),
        };
        Ok((h_next, c_next, cache))
    }

    pub fn forward<R: Rng + ?Sized>(
        &self,
        tokens: &[TokenId],
        rate: f64,
        rng: &mut R,
        mode: Mode,
    ) -> Result<(Matrix, LstmTrace)> {
        let mut logits = Matrix::zeros(tokens.len(), self.vocab);
        let mut h = vec![0.0; self.n];
        let mut c = vec![0.0; self.n];
        let mut steps = Vec::with_capacity(tokens.len());
        let mut states = Vec::with_capacity(tokens.len());
        for (t, &tok) in tokens.iter().enumerate() {
            let (h2, c2, cache) = self.step(&h, &c, tok, rate, rng, mode)?;
            logits.row_mut(t).copy_from_slice(&self.project(&h2));
            steps.push(cache);
            states.push(h2.clone());
            h = h2;
            c = c2;
        }
        Ok((logits, LstmTrace { steps, states }))
    }

    /// Backpropagates one step given `dL/dh'` and `dL/dc'`, accumulating
    /// parameter gradients and returning `(dL/dh, dL/dc)`.
    pub fn step_backward(
        &self,
        cache: &LstmStepCache,
        dh: &[f64],
        dc: &[f64],
        grad: &mut [f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let width = n + self.e;
        let mut da = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut dc_prev = vec![0.0; n];
        for k in 0..n {
            let tc = cache.c[k].tanh();
            let d_o = dh[k] * tc;
            let dct = dc[k] + dh[k] * cache.o[k] * (1.0 - tc * tc);
            let d_f = dct * cache.c_prev[k];
            let d_i = dct * cache.g[k];
            let d_g = dct * cache.i[k];
            dc_prev[k] = dct * cache.f[k];
            da[Gate::Forget as usize][k] = d_f * cache.f[k] * (1.0 - cache.f[k]);
            da[Gate::Input as usize][k] = d_i * cache.i[k] * (1.0 - cache.i[k]);
            da[Gate::Output as usize][k] = d_o * cache.o[k] * (1.0 - cache.o[k]);
            da[Gate::Candidate as usize][k] = d_g * (1.0 - cache.g[k] * cache.g[k]);
        }
        let mut dv = vec![0.0; width];
        for gate in GATES {
            let w = self.weight(gate);
            let w_off = self.weight_offset(gate);
            let b_off = w_off + n * width;
            let d = &da[gate as usize];
            for r in 0..n {
                if d[r] == 0.0 {
                    continue;
                }
                axpy(d[r], &cache.v, &mut grad[w_off + r * width..w_off + (r + 1) * width]);
                axpy(d[r], &w[r * width..(r + 1) * width], &mut dv);
                grad[b_off + r] += d[r];
            }
        }
        let mut dh_prev = dv[..n].to_vec();
        if !cache.mask_h.is_empty() {
            dh_prev.iter_mut().zip(&cache.mask_h).for_each(|(d, m)| *d *= m);
        }
        let emb = &mut grad[cache.token * self.e..(cache.token + 1) * self.e];
        if cache.mask_x.is_empty() {
            axpy(1.0, &dv[n..], emb);
        } else {
            for ((g, d), m) in emb.iter_mut().zip(&dv[n..]).zip(&cache.mask_x) {
                *g += d * m;
            }
        }
        (dh_prev, dc_prev)
    }

    pub fn backward(&self, trace: &LstmTrace, dlogits: &Matrix, grad: &mut [f64]) -> Result<()> {
        let t_len = trace.steps.len();
        if grad.len() != self.theta.len()
            || dlogits.cols() != self.vocab
            || dlogits.rows() < t_len
            || trace.states.len() != t_len
            || trace.steps.iter().any(|s| s.v.len() != self.n + self.e)
        {
            return Err(Error::invalid("LSTM trace does not match model or gradient"));
        }
        let n = self.n;
        let p_off = self.proj_offset();
        let b_off = p_off + self.vocab * n;
        let mut dh = vec![0.0; n];
        let mut dc = vec![0.0; n];
        for t in (0..t_len).rev() {
            let h_t = &trace.states[t];
            for (v, &g) in dlogits.row(t).iter().enumerate() {
                if g != 0.0 {
                    axpy(g, h_t, &mut grad[p_off + v * n..p_off + (v + 1) * n]);
                    let w_row = &self.theta[p_off + v * n..p_off + (v + 1) * n];
                    axpy(g, w_row, &mut dh);
                    grad[b_off + v] += g;
                }
            }
            let (dh_prev, dc_prev) = self.step_backward(&trace.steps[t], &dh, &dc, grad);
            dh = dh_prev;
            dc = dc_prev;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn zero_weights_give_zero_state() {
        let p = LstmParams::zeros(3, 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (h, c, _) = p.step(&[0.3, -0.2, 0.1], &[0.5; 3], 1, 0.0, &mut rng, Mode::Eval).unwrap();
        assert!(h.iter().all(|&v| v.abs() < 0.5));
        // tanh(0) = 0 candidate and zero c keeps h at exactly 0.
        let (h0, _, _) = p.step(&[0.0; 3], &[0.0; 3], 1, 0.0, &mut rng, Mode::Eval).unwrap();
        assert_eq!(h0, vec![0.0; 3]);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn saturated_forget_gate_keeps_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = LstmParams::init(3, 2, 4, &mut rng).unwrap();
        p.bias_mut(Gate::Forget).iter_mut().for_each(|b| *b = 50.0);
        let h = [0.1, -0.4, 0.2];
        let c = [1.5, -0.7, 0.3];
        let (_, c2, cache) = p.step(&h, &c, 2, 0.0, &mut rng, Mode::Eval).unwrap();
        for k in 0..3 {
            let want = c[k] + cache.i[k] * cache.g[k];
            assert!((c2[k] - want).abs() < 1e-12, "{} vs {}", c2[k], want);
        }
    }

    #[test]
    fn invalid_token_rejected() {
        let p = LstmParams::zeros(2, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(p.step(&[0.0; 2], &[0.0; 2], 3, 0.0, &mut rng, Mode::Eval).is_err());
    }

    #[test]
    fn layout_count() {
        let p = LstmParams::zeros(32, 12, 12).unwrap();
        assert_eq!(p.theta().len(), 6300);
        assert_eq!(p.proj_b().len(), 12);
    }
}
