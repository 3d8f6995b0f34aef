use crate::error::{Error, Result};

use super::Matrix;

/// Free parameters of an `n×n` skew-symmetric matrix: its strict upper
/// triangle, read row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewVector {
    n: usize,
    entries: Vec<f64>,
}

/// Number of free parameters of an `n×n` skew-symmetric matrix.
#[inline]
pub const fn skew_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl SkewVector {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("skew side length must be positive"));
        }
        if entries.len() != skew_len(n) {
            return Err(Error::invalid(format!(
                "skew vector for n={n} needs {} entries, got {}",
                skew_len(n),
                entries.len()
            )));
        }
        Ok(SkewVector { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Packs `x` into the skew-symmetric matrix with `x` on the strict upper triangle.
pub fn skew(x: &SkewVector) -> Matrix {
    skew_from_slice(x.n, &x.entries)
}

pub(crate) fn skew_from_slice(n: usize, entries: &[f64]) -> Matrix {
    debug_assert_eq!(entries.len(), skew_len(n));
    let mut m = Matrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            m[(i, j)] = entries[k];
            m[(j, i)] = -entries[k];
            k += 1;
        }
    }
    m
}

/// Chain rule through [`skew`]: given `dL/dM` for `M = skew(x)`, returns
/// `dL/dx_k = dL/dM[i,j] − dL/dM[j,i]` for the `(i,j)` slot of `x_k`.
pub fn skew_grad(dm: &Matrix) -> Result<SkewVector> {
    if !dm.is_square() {
        return Err(Error::invalid("skew gradient needs a square matrix"));
    }
    let n = dm.rows();
    let mut out = vec![0.0; skew_len(n)];
    skew_grad_into(dm, &mut out);
    SkewVector::new(n, out)
}

/// Accumulates the projected gradient into `out` (`out += dL/dx`).
pub(crate) fn skew_grad_accumulate(dm: &Matrix, scale: &[f64], out: &mut [f64]) {
    let n = dm.rows();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            out[k] += scale[k] * (dm[(i, j)] - dm[(j, i)]);
            k += 1;
        }
    }
}

fn skew_grad_into(dm: &Matrix, out: &mut [f64]) {
    let n = dm.rows();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            out[k] = dm[(i, j)] - dm[(j, i)];
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_by_three_layout() {
        let m = skew(&SkewVector::new(3, vec![1.0, 2.0, 3.0]).unwrap());
        let want = Matrix::from_rows(&[
            vec![0.0, 1.0, 2.0],
            vec![-1.0, 0.0, 3.0],
            vec![-2.0, -3.0, 0.0],
        ])
        .unwrap();
        assert_eq!(m, want);
    }

    #[test]
    fn zero_input_gives_zero_matrix() {
        let m = skew(&SkewVector::new(2, vec![0.0]).unwrap());
        assert_eq!(m, Matrix::zeros(2, 2));
    }

    #[test]
    fn antisymmetric_for_n4() {
        let x: Vec<f64> = (1..=6).map(f64::from).collect();
        let m = skew(&SkewVector::new(4, x).unwrap());
        let sum = {
            let mut s = m.clone();
            s.add_scaled(1.0, &m.transpose());
            s
        };
        assert_eq!(sum.max_abs(), 0.0);
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(SkewVector::new(3, vec![1.0, 2.0]).is_err());
        assert!(SkewVector::new(0, vec![]).is_err());
        assert!(SkewVector::new(1, vec![]).is_ok());
    }

    #[test]
    fn grad_projection_is_antisymmetric_part() {
        let dm = Matrix::from_rows(&[
            vec![9.0, 1.0, 2.0],
            vec![5.0, 9.0, 3.0],
            vec![7.0, 11.0, 9.0],
        ])
        .unwrap();
        let g = skew_grad(&dm).unwrap();
        assert_eq!(g.entries(), &[1.0 - 5.0, 2.0 - 7.0, 3.0 - 11.0]);
    }
}
