//! Finite-difference gradient checks shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use urnlab::models::{sequence_loss, sequence_loss_grad, LstmParams, Model, TokenId};
use urnlab::numerics::{expm, expm_backward, expm_frechet, Matrix, Mode};

pub const FD_STEP: f64 = 1e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..n * n).map(|_| rng.gen_range(-scale..scale)).collect();
    Matrix::from_vec(n, n, data).unwrap()
}

/// Relative error of a gradient vector, `‖a − b‖ / max(‖a‖, ‖b‖)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Central differences of `f` at `x`.
pub fn fd_gradient(x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + FD_STEP;
            let up = f(&probe);
            probe[i] = x[i] - FD_STEP;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Fréchet derivative `L(M, E)` against the directional difference of `expm`.
pub fn frechet_error(n: usize, scale: f64, seed: u64) -> f64 {
    let mut r = rng(seed);
    let m = random_matrix(n, scale, &mut r);
    let e = random_matrix(n, 1.0, &mut r);
    let (_, l) = expm_frechet(&m, &e).unwrap();
    let shifted = |t: f64| {
        let mut x = m.clone();
        x.add_scaled(t, &e);
        expm(&x).unwrap()
    };
    let fd = shifted(FD_STEP).sub(&shifted(-FD_STEP)).scaled(0.5 / FD_STEP);
    rel_err(l.data(), fd.data())
}

/// `expm_backward(M, G)` against the gradient of `Σ G ⊙ expm(M)`.
pub fn expm_backward_error(n: usize, scale: f64, seed: u64) -> f64 {
    let mut r = rng(seed);
    let m = random_matrix(n, scale, &mut r);
    let g = random_matrix(n, 1.0, &mut r);
    let analytic = expm_backward(&m, &g).unwrap();
    let fd = fd_gradient(m.data(), |x| {
        let q = expm(&Matrix::from_vec(n, n, x.to_vec()).unwrap()).unwrap();
        q.data().iter().zip(g.data()).map(|(a, b)| a * b).sum()
    });
    rel_err(analytic.data(), &fd)
}

/// One LSTM step: gradients of `a·h' + b·c'` with respect to the parameters
/// and the incoming state, with dropout masks replayed from a fixed seed.
pub fn lstm_step_error(n: usize, e: usize, rate: f64, seed: u64) -> f64 {
    let mut r = rng(seed);
    let vocab = 3;
    let params = LstmParams::init(n, e, vocab, &mut r).unwrap();
    let h: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let a: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let token = 1;
    let mask_seed = seed ^ 0xa5a5;
    let objective = |p: &LstmParams, h: &[f64], c: &[f64]| {
        let (h2, c2, _) = p.step(h, c, token, rate, &mut rng(mask_seed), Mode::Train).unwrap();
        h2.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>()
            + c2.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>()
    };
    let (_, _, cache) = params.step(&h, &c, token, rate, &mut rng(mask_seed), Mode::Train).unwrap();
    let mut grad = vec![0.0; params.theta().len()];
    let (dh, dc) = params.step_backward(&cache, &a, &b, &mut grad);

    let fd_theta = fd_gradient(params.theta(), |x| {
        let mut p = params.clone();
        p.theta_mut().copy_from_slice(x);
        objective(&p, &h, &c)
    });
    let fd_h = fd_gradient(&h, |x| objective(&params, x, &c));
    let fd_c = fd_gradient(&c, |x| objective(&params, &h, x));
    rel_err(&grad, &fd_theta)
        .max(rel_err(&dh, &fd_h))
        .max(rel_err(&dc, &fd_c))
}

/// Full-sequence BPTT of the summed cross-entropy against finite differences.
pub fn bptt_error(model: &Model, tokens: &[TokenId], stop: TokenId, rate: f64, seed: u64) -> f64 {
    let last = tokens.iter().skip(1).position(|&t| t == stop).unwrap() + 1;
    let input = &tokens[..last];
    let (logits, trace) = model.forward(input, rate, &mut rng(seed), Mode::Train).unwrap();
    let (_, dlogits, _) = sequence_loss_grad(&logits, tokens, stop).unwrap();
    let mut grad = vec![0.0; model.params().len()];
    model.backward(&trace, &dlogits, &mut grad).unwrap();
    let fd = fd_gradient(model.params(), |x| {
        let mut m = model.clone();
        m.params_mut().copy_from_slice(x);
        let (logits, _) = m.forward(input, rate, &mut rng(seed), Mode::Train).unwrap();
        sequence_loss(&logits, tokens, stop).unwrap()
    });
    rel_err(&grad, &fd)
}

/// A random sequence `START w STOP` over the first `vocab − 2` symbols, where
/// START and STOP are the last two ids.
pub fn random_sequence(vocab: usize, body: usize, seed: u64) -> Vec<TokenId> {
    let mut r = rng(seed);
    let mut t = vec![vocab - 2];
    t.extend((0..body).map(|_| r.gen_range(0..vocab - 2)));
    t.push(vocab - 1);
    t
}
