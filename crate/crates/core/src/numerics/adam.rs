use crate::error::{Error, Result};

/// Optimiser state for Adam with bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state with the usual defaults `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e−8`.
    pub fn new(len: usize, lr: f64) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() || state.m.len() != state.v.len()
    {
        return Err(Error::invalid(format!(
            "adam length mismatch: params {}, grads {}, state {}/{}",
            params.len(),
            grads.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let bias1 = 1.0 - b1.powi(t);
    let bias2 = 1.0 - b2.powi(t);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= state.lr * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![0.5, -1.0, 2.0];
        let mut s = AdamState::new(3, 0.001);
        adam_step(&mut p, &[0.0; 3], &mut s).unwrap();
        assert_eq!(p, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m̂ = 1, v̂ = 1 after bias correction, so Δ = lr/(1+ε).
        let mut p = vec![1.0];
        let mut s = AdamState::new(1, 0.001);
        adam_step(&mut p, &[1.0], &mut s).unwrap();
        assert!((1.0 - p[0] - 0.001 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn deterministic_replay() {
        let run = || {
            let mut p = vec![0.1, 0.2];
            let mut s = AdamState::new(2, 0.01);
            for k in 0..50 {
                let g = [(k as f64).sin(), (k as f64 * 0.3).cos()];
                adam_step(&mut p, &g, &mut s).unwrap();
            }
            p
        };
        let (a, b) = (run(), run());
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }

    #[test]
    fn length_mismatch() {
        let mut s = AdamState::new(2, 0.01);
        assert!(adam_step(&mut [0.0; 3], &[0.0; 3], &mut s).is_err());
        assert!(adam_step(&mut [0.0; 2], &[0.0; 3], &mut s).is_err());
    }
}
