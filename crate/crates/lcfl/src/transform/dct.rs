//! Separable orthonormal type-II DCT for 4x4, 8x8 and 16x16 blocks.

use std::f64::consts::PI;

use crate::block::{check_block_size, CoefficientBlock};
use crate::error::{Error, Result};

/// Orthonormal 1-D DCT-II basis matrix: `basis[k][i]` is the weight of input
/// sample `i` in output coefficient `k`. Rows are orthonormal, so the same
/// matrix transposed is the inverse.
fn basis(n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    let scale = (2.0 / n as f64).sqrt();
    for (k, row) in m.iter_mut().enumerate() {
        let ck = if k == 0 { 1.0 / 2.0f64.sqrt() } else { 1.0 };
        for (i, w) in row.iter_mut().enumerate() {
            *w = ck * scale * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    m
}

/// Forward 2-D DCT of an n-by-n spatial tile given in row-major order.
///
/// With the orthonormal scaling used here a constant tile of value `c`
/// produces DC = n*c and zero AC, and Parseval's identity holds exactly.
pub fn dct2d_forward(tile: &[f64], n: usize, origin: (usize, usize)) -> Result<CoefficientBlock> {
    check_block_size(n)?;
    if tile.len() != n * n {
        return Err(Error::size(format!(
            "tile has {} samples, expected {}",
            tile.len(),
            n * n
        )));
    }
    let m = basis(n);
    // Rows first, then columns.
    let mut tmp = vec![0.0; n * n];
    for r in 0..n {
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += m[k][i] * tile[r * n + i];
            }
            tmp[r * n + k] = acc;
        }
    }
    let mut out = vec![0.0; n * n];
    for c in 0..n {
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += m[k][i] * tmp[i * n + c];
            }
            out[k * n + c] = acc;
        }
    }
    CoefficientBlock::from_coeffs(n, out, origin)
}

/// Inverse 2-D DCT; exact inverse of [`dct2d_forward`] up to rounding.
pub fn dct2d_inverse(block: &CoefficientBlock) -> Result<Vec<f64>> {
    let n = block.n();
    check_block_size(n)?;
    let m = basis(n);
    let coeffs = block.coeffs();
    let mut tmp = vec![0.0; n * n];
    for c in 0..n {
        for i in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += m[k][i] * coeffs[k * n + c];
            }
            tmp[i * n + c] = acc;
        }
    }
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for i in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += m[k][i] * tmp[r * n + k];
            }
            out[r * n + i] = acc;
        }
    }
    Ok(out)
}
