//! Time-frequency resolution switching.
//!
//! Four coincident frequency-domain blocks from a 2x2 spatial arrangement
//! are merged into one block of twice the size: each coefficient position is
//! run through a 2x2 Hadamard butterfly (normalized by 1/2, so the merge is
//! orthonormal and its own inverse) and the four outputs are scattered into
//! the four quadrants of the result. Only the low-frequency quadrant is
//! needed when the merged block serves as a chroma predictor, so a fast path
//! computes just that quadrant.

use crate::block::CoefficientBlock;
use crate::counters;
use crate::error::{Error, Result};

/// Result of a full 2x2 merge: a 2n-by-2n coefficient array. When `lf_only`
/// is set only the top-left n-by-n quadrant was computed and the rest must
/// not be read; [`TfMergedBlock::lf_quadrant`] and [`tf_split_2x2`] enforce
/// this.
#[derive(Debug, Clone, PartialEq)]
pub struct TfMergedBlock {
    quadrant_n: usize,
    coeffs: Vec<f64>,
    lf_only: bool,
}

impl TfMergedBlock {
    pub fn size(&self) -> usize {
        2 * self.quadrant_n
    }

    pub fn quadrant_size(&self) -> usize {
        self.quadrant_n
    }

    pub fn lf_only(&self) -> bool {
        self.lf_only
    }

    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f64 {
        let n = self.quadrant_n;
        if self.lf_only {
            assert!(u < n && v < n, "read outside LF quadrant of lf-only merge");
        }
        self.coeffs[u * 2 * n + v]
    }

    /// Copies the low-frequency quadrant out as a block of the input size.
    pub fn lf_quadrant(&self) -> CoefficientBlock {
        let n = self.quadrant_n;
        let mut out = CoefficientBlock::new(n, (0, 0));
        for u in 0..n {
            for v in 0..n {
                out.set(u, v, self.coeffs[u * 2 * n + v]);
            }
        }
        out
    }
}

fn check_quad(
    tl: &CoefficientBlock,
    tr: &CoefficientBlock,
    bl: &CoefficientBlock,
    br: &CoefficientBlock,
) -> Result<usize> {
    let n = tl.n();
    if tr.n() != n || bl.n() != n || br.n() != n {
        return Err(Error::size(format!(
            "merge inputs must share one size, got {}/{}/{}/{}",
            tl.n(),
            tr.n(),
            bl.n(),
            br.n()
        )));
    }
    Ok(n)
}

/// Merges four n-by-n blocks from a 2x2 spatial arrangement into a
/// 2n-by-2n block: per coefficient position the butterfly outputs
/// (a+b+c+d)/2, (a-b+c-d)/2, (a+b-c-d)/2, (a-b-c+d)/2 land in the
/// top-left, top-right, bottom-left and bottom-right quadrants.
pub fn tf_merge_2x2(
    tl: &CoefficientBlock,
    tr: &CoefficientBlock,
    bl: &CoefficientBlock,
    br: &CoefficientBlock,
) -> Result<TfMergedBlock> {
    let n = check_quad(tl, tr, bl, br)?;
    let mut coeffs = vec![0.0; 4 * n * n];
    let stride = 2 * n;
    for u in 0..n {
        for v in 0..n {
            let a = tl.at(u, v);
            let b = tr.at(u, v);
            let c = bl.at(u, v);
            let d = br.at(u, v);
            let s0 = a + b;
            let s1 = c + d;
            let d0 = a - b;
            let d1 = c - d;
            counters::count_adds(8);
            counters::count_shifts(4);
            coeffs[u * stride + v] = 0.5 * (s0 + s1);
            coeffs[u * stride + v + n] = 0.5 * (d0 + d1);
            coeffs[(u + n) * stride + v] = 0.5 * (s0 - s1);
            coeffs[(u + n) * stride + v + n] = 0.5 * (d0 - d1);
        }
    }
    Ok(TfMergedBlock {
        quadrant_n: n,
        coeffs,
        lf_only: false,
    })
}

/// Computes only the low-frequency quadrant of [`tf_merge_2x2`]:
/// 3 adds and 1 halving per output coefficient.
pub fn tf_merge_lf(
    tl: &CoefficientBlock,
    tr: &CoefficientBlock,
    bl: &CoefficientBlock,
    br: &CoefficientBlock,
) -> Result<CoefficientBlock> {
    let n = check_quad(tl, tr, bl, br)?;
    let mut out = CoefficientBlock::new(n, tl.origin());
    for u in 0..n {
        for v in 0..n {
            counters::count_adds(3);
            counters::count_shifts(1);
            // Association matches the full merge so the LF quadrants agree
            // bit for bit.
            let s0 = tl.at(u, v) + tr.at(u, v);
            let s1 = bl.at(u, v) + br.at(u, v);
            out.set(u, v, 0.5 * (s0 + s1));
        }
    }
    Ok(out)
}

/// Low-frequency portion of the merge with the butterfly outputs woven
/// into adjacent bins instead of quadrants: output bin (p, q) is built from
/// source bin (p/2, q/2), taking the in-phase combination when output and
/// source bin parities agree in a dimension and the difference when they
/// disagree. A transform of twice the size orders its spectrum exactly this
/// way, so this variant is the frequency-aligned half-resolution predictor
/// for subsampled chroma; only the low quarter of each input is read.
///
/// The parity rule matters: a plain "difference at odd bins" weave leaves
/// the halves of each doubled bin phase-crossed and the prediction quality
/// collapses (see the alignment test below).
pub fn tf_merge_lf_woven(
    tl: &CoefficientBlock,
    tr: &CoefficientBlock,
    bl: &CoefficientBlock,
    br: &CoefficientBlock,
) -> Result<CoefficientBlock> {
    let n = check_quad(tl, tr, bl, br)?;
    let mut out = CoefficientBlock::new(n, tl.origin());
    for u in 0..n / 2 {
        for v in 0..n / 2 {
            let a = tl.at(u, v);
            let b = tr.at(u, v);
            let c = bl.at(u, v);
            let d = br.at(u, v);
            let s0 = a + b;
            let s1 = c + d;
            let d0 = a - b;
            let d1 = c - d;
            let ll = 0.5 * (s0 + s1);
            let lh = 0.5 * (d0 + d1);
            let hl = 0.5 * (s0 - s1);
            let hh = 0.5 * (d0 - d1);
            counters::count_adds(8);
            counters::count_shifts(4);
            for dp in 0..2usize {
                for dq in 0..2usize {
                    let vertical_diff = (dp == 1) != (u % 2 == 1);
                    let horizontal_diff = (dq == 1) != (v % 2 == 1);
                    let value = match (vertical_diff, horizontal_diff) {
                        (false, false) => ll,
                        (false, true) => lh,
                        (true, false) => hl,
                        (true, true) => hh,
                    };
                    out.set(2 * u + dp, 2 * v + dq, value);
                }
            }
        }
    }
    Ok(out)
}

/// Exact inverse of [`tf_merge_2x2`]; the /2-normalized butterfly is its own
/// inverse, so this gathers the four quadrants and applies it again.
pub fn tf_split_2x2(
    m: &TfMergedBlock,
) -> Result<(
    CoefficientBlock,
    CoefficientBlock,
    CoefficientBlock,
    CoefficientBlock,
)> {
    if m.lf_only() {
        return Err(Error::argument(
            "cannot split an lf-only merged block: high quadrants were never computed",
        ));
    }
    let n = m.quadrant_n;
    let stride = 2 * n;
    let mut tl = CoefficientBlock::new(n, (0, 0));
    let mut tr = CoefficientBlock::new(n, (0, 0));
    let mut bl = CoefficientBlock::new(n, (0, 0));
    let mut br = CoefficientBlock::new(n, (0, 0));
    for u in 0..n {
        for v in 0..n {
            let ll = m.coeffs[u * stride + v];
            let lh = m.coeffs[u * stride + v + n];
            let hl = m.coeffs[(u + n) * stride + v];
            let hh = m.coeffs[(u + n) * stride + v + n];
            tl.set(u, v, 0.5 * (ll + lh + hl + hh));
            tr.set(u, v, 0.5 * (ll - lh + hl - hh));
            bl.set(u, v, 0.5 * (ll + lh - hl - hh));
            br.set(u, v, 0.5 * (ll - lh - hl + hh));
        }
    }
    Ok((tl, tr, bl, br))
}
