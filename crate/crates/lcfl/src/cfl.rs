//! Frequency-domain chroma-from-luma prediction (FD-CfL).
//!
//! A linear model `C = alpha * L + beta` is fitted by least squares from
//! pairs of spatially coincident, previously *reconstructed* luma and chroma
//! coefficients, so encoder and decoder derive identical parameters from the
//! bitstream alone. The DC coefficient uses slope and offset fitted from the
//! DC of the up, left and up-left neighbors; the AC coefficients share a
//! single slope (no offset, AC is zero-mean) fitted from the three lowest AC
//! positions of the same neighbors.
//!
//! The model fit is instrumented through [`crate::counters`] so its
//! multiply/add cost can be compared against the spatial-domain equivalent;
//! the fit touches a fixed number of coefficients, which makes its cost
//! independent of block size.

use crate::block::{check_block_size, CoefficientBlock};
use crate::counters;
use crate::error::{Error, Result};

/// AC positions sampled from each neighbor: the strongest horizontal,
/// vertical and diagonal components.
pub const LOW_AC_POSITIONS: [(usize, usize); 3] = [(0, 1), (1, 0), (1, 1)];

/// Below this the regression denominator counts as degenerate and the fit
/// falls back to a constant predictor.
const DEGENERATE_DENOM: f64 = 1e-12;

/// Coincident (luma, chroma) value pairs feeding one regression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegressionPairs {
    pairs: Vec<(f64, f64)>,
}

impl RegressionPairs {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        RegressionPairs { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn push(&mut self, luma: f64, chroma: f64) {
        self.pairs.push((luma, chroma));
    }
}

/// Fitted linear model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflModel {
    pub alpha: f64,
    pub beta: f64,
}

/// One reconstructed neighbor: the luma block and the chroma block covering
/// the same spatial extent.
#[derive(Debug, Clone, Copy)]
pub struct NeighborPair<'a> {
    pub luma: &'a CoefficientBlock,
    pub chroma: &'a CoefficientBlock,
}

/// The up/left/up-left reconstructed neighbors available to the current
/// block, if any.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeighborContext<'a> {
    pub up: Option<NeighborPair<'a>>,
    pub left: Option<NeighborPair<'a>>,
    pub upleft: Option<NeighborPair<'a>>,
}

impl<'a> NeighborContext<'a> {
    pub fn available(&self) -> usize {
        usize::from(self.up.is_some())
            + usize::from(self.left.is_some())
            + usize::from(self.upleft.is_some())
    }

    fn each(&self) -> impl Iterator<Item = NeighborPair<'a>> + '_ {
        [self.up, self.left, self.upleft].into_iter().flatten()
    }
}

/// Least-squares fit of `C = alpha * L + beta`.
///
/// alpha = (N*sum(LC) - sum(L)*sum(C)) / (N*sum(L^2) - sum(L)^2) and
/// beta = (sum(C) - alpha*sum(L)) / N. A degenerate denominator (all luma
/// values equal) falls back to alpha = 0, beta = mean(C), so prediction
/// degrades to a constant instead of dividing by ~0.
///
/// Every multiply, add and divide on this path is tallied in
/// [`crate::counters`]: 2 multiplies and 4 adds per pair, then 5 multiplies,
/// 3 adds and 2 divides to close out the non-degenerate fit.
pub fn fit_linear_model(pairs: &RegressionPairs) -> Result<CflModel> {
    if pairs.is_empty() {
        return Err(Error::argument("regression needs at least one pair"));
    }
    let n = pairs.len() as f64;
    let mut sum_l = 0.0;
    let mut sum_c = 0.0;
    let mut sum_lc = 0.0;
    let mut sum_ll = 0.0;
    for &(l, c) in pairs.pairs() {
        sum_l += l;
        sum_c += c;
        sum_lc += l * c;
        sum_ll += l * l;
        counters::count_mults(2);
        counters::count_adds(4);
    }
    let num = n * sum_lc - sum_l * sum_c;
    let den = n * sum_ll - sum_l * sum_l;
    counters::count_mults(4);
    counters::count_adds(2);
    if den < DEGENERATE_DENOM {
        counters::count_divs(1);
        return Ok(CflModel {
            alpha: 0.0,
            beta: sum_c / n,
        });
    }
    let alpha = num / den;
    let beta = (sum_c - alpha * sum_l) / n;
    counters::count_mults(1);
    counters::count_adds(1);
    counters::count_divs(2);
    Ok(CflModel { alpha, beta })
}

/// One (luma DC, chroma DC) pair per available neighbor.
pub fn collect_dc_pairs(ctx: &NeighborContext) -> Result<RegressionPairs> {
    if ctx.available() == 0 {
        return Err(Error::NeighborsUnavailable);
    }
    let mut out = RegressionPairs::default();
    for nb in ctx.each() {
        out.push(nb.luma.dc(), nb.chroma.dc());
    }
    Ok(out)
}

/// The pairs at the three lowest AC positions of each available neighbor,
/// pooled into one set (up to 9 pairs).
pub fn collect_ac_pairs(ctx: &NeighborContext) -> Result<RegressionPairs> {
    if ctx.available() == 0 {
        return Err(Error::NeighborsUnavailable);
    }
    let mut out = RegressionPairs::default();
    for nb in ctx.each() {
        for &(u, v) in &LOW_AC_POSITIONS {
            out.push(nb.luma.at(u, v), nb.chroma.at(u, v));
        }
    }
    Ok(out)
}

/// The AC slope for the current block, pooled across the three lowest AC
/// positions of all available neighbors. Returns 0 when no neighbor exists
/// or the fit is degenerate, which turns the prediction off gracefully.
pub fn fit_ac_alpha(ctx: &NeighborContext) -> f64 {
    match collect_ac_pairs(ctx) {
        Ok(pairs) => fit_linear_model(&pairs).map(|m| m.alpha).unwrap_or(0.0),
        Err(_) => 0.0,
    }
}

/// Average of the available reconstructed neighbor chroma DCs; 0 when the
/// block has no neighbors. This is also the control predictor used when
/// chroma-from-luma is disabled.
pub fn neighbor_dc_average(ctx: &NeighborContext) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for nb in ctx.each() {
        sum += nb.chroma.dc();
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Predicts a full chroma block from the coincident reconstructed luma
/// block: DC via the slope+offset model on neighbor DCs, every AC position
/// via the shared AC slope. With no usable context the DC falls back to the
/// neighbor average (0 if there are no neighbors) and AC to zero.
pub fn predict_fd_cfl(luma: &CoefficientBlock, ctx: &NeighborContext) -> Result<CoefficientBlock> {
    let n = luma.n();
    check_block_size(n)?;
    for nb in ctx.each() {
        if nb.luma.n() != n || nb.chroma.n() != n {
            return Err(Error::size(format!(
                "neighbor block size {}/{} does not match target {n}",
                nb.luma.n(),
                nb.chroma.n()
            )));
        }
    }
    let mut out = CoefficientBlock::new(n, luma.origin());
    let dc = match collect_dc_pairs(ctx) {
        Ok(pairs) => {
            let model = fit_linear_model(&pairs)?;
            model.alpha * luma.dc() + model.beta
        }
        Err(_) => neighbor_dc_average(ctx),
    };
    out.set_dc(dc);
    let alpha_ac = fit_ac_alpha(ctx);
    for u in 0..n {
        for v in 0..n {
            if (u, v) != (0, 0) {
                out.set(u, v, alpha_ac * luma.at(u, v));
            }
        }
    }
    Ok(out)
}

/// Instrumented and analytic model-fit costs for one block size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitCost {
    /// Multiplies actually performed by the frequency-domain fit.
    pub fd_mults: u64,
    /// Adds performed by the frequency-domain fit; the fit's two divides are
    /// tallied in this column.
    pub fd_adds: u64,
    /// Analytic spatial-domain cost 4*N+2 for an N-by-N block.
    pub spatial_mults: u64,
    /// Analytic spatial-domain cost 8*N+3.
    pub spatial_adds: u64,
}

/// Runs the instrumented frequency-domain fit on its standing 12-pair input
/// (the four low-frequency coefficients of three neighbors) and reports the
/// measured cost next to the spatial-domain formulas. The pair count never
/// depends on the block size, so the frequency-domain column is constant
/// across 4/8/16.
pub fn fit_cost_counters(block_size: usize) -> Result<FitCost> {
    check_block_size(block_size)?;
    let n = block_size;
    let make = |seed: f64| {
        let mut b = CoefficientBlock::new(n, (0, 0));
        b.set(0, 0, 40.0 * seed + 3.0);
        b.set(0, 1, -7.0 * seed + 1.0);
        b.set(1, 0, 5.0 * seed - 2.0);
        b.set(1, 1, 2.5 * seed + 0.5);
        b
    };
    let luma: Vec<CoefficientBlock> = (0..3).map(|i| make(1.0 + i as f64)).collect();
    let chroma: Vec<CoefficientBlock> = (0..3).map(|i| make(0.4 - 0.3 * i as f64)).collect();
    let mut pairs = RegressionPairs::default();
    for i in 0..3 {
        for &(u, v) in &[(0, 0), (0, 1), (1, 0), (1, 1)] {
            pairs.push(luma[i].at(u, v), chroma[i].at(u, v));
        }
    }
    debug_assert_eq!(pairs.len(), 12);
    counters::reset();
    fit_linear_model(&pairs)?;
    let c = counters::snapshot();
    Ok(FitCost {
        fd_mults: c.mults,
        fd_adds: c.adds + c.divs,
        spatial_mults: 4 * n as u64 + 2,
        spatial_adds: 8 * n as u64 + 3,
    })
}
