//! Matrix exponential by scaling and squaring around a degree-13 Taylor kernel,
//! plus its Fréchet derivative and the adjoint used for backpropagation.
//!
//! The number of squarings is `s = max(0, ⌈log₂‖M‖₁⌉ + 2)`, so the kernel always
//! sees a matrix of 1-norm at most 1/4 where the truncation error of the degree-13
//! series is far below double precision. The polynomial is evaluated with the
//! Paterson–Stockmeyer scheme in powers of `A⁴` (six matrix products).
//!
//! The Fréchet derivative `L(M, E)` is the upper-right block of
//! `exp([[M, E], [0, M]])`. [`expm_frechet`] runs exactly that block computation,
//! but keeps the block-upper-triangular structure explicit: every product of two
//! block matrices `[[X, Lx], [0, X]]·[[Y, Ly], [0, Y]]` is formed from its three
//! distinct blocks instead of a dense `2n×2n` product.

use crate::error::{Error, Result};

use super::matrix::gemm;
use super::Matrix;

/// `1/k!` for `k = 0..=13`.
const TAYLOR: [f64; 14] = {
    let mut c = [1.0; 14];
    let mut k = 1;
    while k < 14 {
        c[k] = c[k - 1] / k as f64;
        k += 1;
    }
    c
};

/// Squaring count for a matrix of the given 1-norm.
pub fn squaring_count(norm_1: f64) -> u32 {
    if norm_1 > 0.0 && norm_1.is_finite() {
        (norm_1.log2().ceil() as i64 + 2).max(0) as u32
    } else {
        0
    }
}

fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut c = Matrix::zeros(a.rows(), b.cols());
    gemm(1.0, a, b, 0.0, &mut c);
    c
}

fn check_square(m: &Matrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "{what} must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::invalid(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// `c0·I + c1·A + c2·A² + c3·A³`, with the coefficient slice possibly shorter.
fn poly_block(coeffs: &[f64], powers: [&Matrix; 3]) -> Matrix {
    let n = powers[0].rows();
    let mut out = Matrix::identity(n).scaled(coeffs[0]);
    for (c, p) in coeffs[1..].iter().zip(powers) {
        out.add_scaled(*c, p);
    }
    out
}

/// Tangent part of [`poly_block`]: `c1·E + c2·L(A²) + c3·L(A³)`.
fn poly_block_tangent(coeffs: &[f64], tangents: [&Matrix; 3]) -> Matrix {
    let n = tangents[0].rows();
    let mut out = Matrix::zeros(n, n);
    for (c, t) in coeffs[1..].iter().zip(tangents) {
        out.add_scaled(*c, t);
    }
    out
}

fn taylor13(a: &Matrix) -> Matrix {
    let a2 = mul(a, a);
    let a3 = mul(&a2, a);
    let a4 = mul(&a2, &a2);
    let powers = [a, &a2, &a3];

    let mut r = poly_block(&TAYLOR[12..14], powers);
    for lo in [8, 4, 0] {
        let mut next = poly_block(&TAYLOR[lo..lo + 4], powers);
        gemm(1.0, &a4, &r, 1.0, &mut next);
        r = next;
    }
    r
}

/// Taylor kernel evaluated on the block matrix `[[A, E], [0, A]]`; returns the
/// diagonal and upper-right blocks.
fn taylor13_frechet(a: &Matrix, e: &Matrix) -> (Matrix, Matrix) {
    let a2 = mul(a, a);
    let mut l2 = mul(a, e);
    gemm(1.0, e, a, 1.0, &mut l2);

    let a3 = mul(&a2, a);
    let mut l3 = mul(&a2, e);
    gemm(1.0, &l2, a, 1.0, &mut l3);

    let a4 = mul(&a2, &a2);
    let mut l4 = mul(&a2, &l2);
    gemm(1.0, &l2, &a2, 1.0, &mut l4);

    let powers = [a, &a2, &a3];
    let tangents = [e, &l2, &l3];

    let mut r = poly_block(&TAYLOR[12..14], powers);
    let mut lr = poly_block_tangent(&TAYLOR[12..14], tangents);
    for lo in [8, 4, 0] {
        let coeffs = &TAYLOR[lo..lo + 4];
        let mut next_l = poly_block_tangent(coeffs, tangents);
        gemm(1.0, &a4, &lr, 1.0, &mut next_l);
        gemm(1.0, &l4, &r, 1.0, &mut next_l);
        let mut next = poly_block(coeffs, powers);
        gemm(1.0, &a4, &r, 1.0, &mut next);
        r = next;
        lr = next_l;
    }
    (r, lr)
}

/// Matrix exponential of a square matrix.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    check_square(m, "expm input")?;
    let s = squaring_count(m.norm_1());
    let a = m.scaled((-(s as f64)).exp2());
    let mut r = taylor13(&a);
    for _ in 0..s {
        r = mul(&r, &r);
    }
    Ok(r)
}

/// Returns `(exp(M), L(M, E))`, with `L` the Fréchet derivative of the matrix
/// exponential at `M` in direction `E`.
///
/// `E` is normalised to unit 1-norm before the block evaluation and the result
/// rescaled afterwards; `L` is linear in `E`, and this keeps the squaring count
/// governed by `M` rather than by the magnitude of the direction.
pub fn expm_frechet(m: &Matrix, e: &Matrix) -> Result<(Matrix, Matrix)> {
    check_square(m, "expm_frechet base")?;
    check_square(e, "expm_frechet direction")?;
    if m.rows() != e.rows() {
        return Err(Error::invalid(format!(
            "expm_frechet shapes differ: {}x{} vs {}x{}",
            m.rows(),
            m.cols(),
            e.rows(),
            e.cols()
        )));
    }
    let n = m.rows();
    let e_norm = e.norm_1();
    if e_norm == 0.0 {
        return Ok((expm(m)?, Matrix::zeros(n, n)));
    }
    let e_unit = e.scaled(1.0 / e_norm);

    // 1-norm of [[M, Ê], [0, M]]: the right-hand columns carry both blocks.
    let block_norm = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| m[(i, j)].abs() + e_unit[(i, j)].abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let s = squaring_count(block_norm);
    let scale = (-(s as f64)).exp2();

    let (mut r, mut l) = taylor13_frechet(&m.scaled(scale), &e_unit.scaled(scale));
    for _ in 0..s {
        let mut next_l = mul(&r, &l);
        gemm(1.0, &l, &r, 1.0, &mut next_l);
        r = mul(&r, &r);
        l = next_l;
    }
    Ok((r, l.scaled(e_norm)))
}

/// Reverse-mode rule for `Q = exp(M)`: maps `dL/dQ` to `dL/dM = L(Mᵀ, dL/dQ)`.
pub fn expm_backward(m: &Matrix, dl_dq: &Matrix) -> Result<Matrix> {
    check_square(m, "expm_backward base")?;
    check_square(dl_dq, "expm_backward cotangent")?;
    if m.rows() != dl_dq.rows() {
        return Err(Error::invalid("expm_backward shapes differ"));
    }
    Ok(expm_frechet(&m.transpose(), dl_dq)?.1)
}
