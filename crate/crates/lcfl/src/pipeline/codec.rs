//! Per-plane coefficient coding: the symbol layout both codec sides share.
//!
//! A plane is pre-filtered, block-transformed, and coded in raster order.
//! Per block the stream carries, in order: the flip bit (pvq-cfl chroma
//! only), the DC residual against the neighbor-average prediction, then one
//! gain/shape group per band. Gain indices and DC residuals use raw signed
//! Golomb codes; noref flags, theta indices and pulse prefixes use adaptive
//! models bucketed by band size. Everything the decoder needs to size a
//! read (pulse budgets, theta ranges, predictor presence) is derived from
//! previously decoded state, never coded.

use crate::block::CoefficientBlock;
use crate::cfl::{self, NeighborContext, NeighborPair};
use crate::coder::{
    decode_golomb_adaptive, decode_golomb_signed_adaptive, decode_golomb_unsigned,
    encode_golomb_adaptive, encode_golomb_signed_adaptive, encode_golomb_unsigned, RangeDecoder,
    RangeEncoder, SymbolModel,
};
use crate::error::{Error, Result};
use crate::plane::PixelPlane;
use crate::pvq::{self, GainShapeCode, PulseVector, QuantParams, PREDICTOR_EPSILON};
use crate::pvq_cfl::{self, BandLayout, FlipFlag};
use crate::tf::tf_merge_lf_woven;
use crate::transform::{
    dct2d_forward, dct2d_inverse, postfilter_plane, prefilter_plane, LappedFilterParams,
};

/// DC uses a wider step than the AC gains; the orthonormal DCT concentrates
/// much more magnitude there.
pub(crate) const DC_STEP_FACTOR: f64 = 4.0;

/// Theta indices at or above this escape to a Golomb tail.
const THETA_ESCAPE: usize = 16;

/// Reconstructed blocks of one coded plane, in raster order.
pub(crate) struct BlockGrid {
    n: usize,
    cols: usize,
    rows: usize,
    blocks: Vec<CoefficientBlock>,
}

impl BlockGrid {
    fn new(n: usize, cols: usize, rows: usize) -> Self {
        BlockGrid {
            n,
            cols,
            rows,
            blocks: Vec::with_capacity(cols * rows),
        }
    }

    pub(crate) fn get(&self, row: usize, col: usize) -> &CoefficientBlock {
        &self.blocks[row * self.cols + col]
    }

    fn push(&mut self, block: CoefficientBlock) {
        debug_assert_eq!(block.n(), self.n);
        self.blocks.push(block);
    }
}

/// Access to the reconstructed luma blocks coincident with a chroma block.
/// With 4:2:0 chroma, four luma blocks merge (low-frequency quadrant only)
/// into the coincident predictor.
pub(crate) struct LumaRef<'a> {
    grid: &'a BlockGrid,
    merged: bool,
}

impl<'a> LumaRef<'a> {
    pub(crate) fn new(grid: &'a BlockGrid, merged: bool) -> Self {
        LumaRef { grid, merged }
    }

    fn coincident(&self, row: usize, col: usize) -> Result<CoefficientBlock> {
        if self.merged {
            // The woven low-frequency merge keeps each predictor bin on the
            // same physical frequency as the chroma bin it predicts.
            tf_merge_lf_woven(
                self.grid.get(2 * row, 2 * col),
                self.grid.get(2 * row, 2 * col + 1),
                self.grid.get(2 * row + 1, 2 * col),
                self.grid.get(2 * row + 1, 2 * col + 1),
            )
        } else {
            Ok(self.grid.get(row, col).clone())
        }
    }
}

/// How the AC coefficients of a plane are predicted.
pub(crate) enum PlanePrediction<'a> {
    /// No predictor at all: luma, or chroma with prediction disabled.
    None,
    /// Regression-based predictor passed to the predicted gain-shape path,
    /// gain included.
    FdCfl(LumaRef<'a>),
    /// Reconstructed luma as shape predictor, flip bit, unpredicted gain.
    PvqCfl(LumaRef<'a>),
}

const BAND_CLASSES: usize = 4;

fn band_class(len: usize) -> usize {
    match len {
        15 => 0,
        16 => 1,
        64 => 2,
        _ => 3,
    }
}

/// Adaptive models of one plane coder, bucketed by band size.
struct PlaneModels {
    flip: SymbolModel,
    dc_prefix: SymbolModel,
    gain_prefix: Vec<SymbolModel>,
    noref: Vec<SymbolModel>,
    theta: Vec<SymbolModel>,
    pulse_prefix: Vec<SymbolModel>,
}

impl PlaneModels {
    fn new() -> Self {
        PlaneModels {
            flip: SymbolModel::binary(),
            dc_prefix: SymbolModel::binary(),
            gain_prefix: (0..BAND_CLASSES).map(|_| SymbolModel::binary()).collect(),
            noref: (0..BAND_CLASSES).map(|_| SymbolModel::binary()).collect(),
            theta: (0..BAND_CLASSES)
                .map(|_| SymbolModel::new(THETA_ESCAPE + 1))
                .collect(),
            pulse_prefix: (0..BAND_CLASSES).map(|_| SymbolModel::binary()).collect(),
        }
    }
}

fn write_theta(enc: &mut RangeEncoder, model: &mut SymbolModel, theta_index: u32) -> Result<()> {
    if (theta_index as usize) < THETA_ESCAPE {
        model.encode(enc, theta_index as usize)
    } else {
        model.encode(enc, THETA_ESCAPE)?;
        encode_golomb_unsigned(enc, u64::from(theta_index) - THETA_ESCAPE as u64);
        Ok(())
    }
}

fn read_theta(dec: &mut RangeDecoder, model: &mut SymbolModel) -> Result<u32> {
    let s = model.decode(dec)?;
    if s < THETA_ESCAPE {
        Ok(s as u32)
    } else {
        let tail = decode_golomb_unsigned(dec)?;
        u32::try_from(tail + THETA_ESCAPE as u64)
            .map_err(|_| Error::decode(dec.position(), "theta index overflow"))
    }
}

fn write_pulses(
    enc: &mut RangeEncoder,
    prefix_model: &mut SymbolModel,
    pulses: &PulseVector,
    k: u32,
) -> Result<()> {
    debug_assert_eq!(pulses.k(), k);
    let dims = pulses.dims();
    let mut remaining = k;
    for (i, &p) in pulses.pulses().iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let mag = p.unsigned_abs();
        // The last reachable component's magnitude is implied by the budget.
        if i + 1 < dims {
            encode_golomb_adaptive(enc, prefix_model, u64::from(mag))?;
        }
        if mag > 0 {
            enc.encode_bit_raw(p < 0);
        }
        remaining -= mag;
    }
    Ok(())
}

fn read_pulses(
    dec: &mut RangeDecoder,
    prefix_model: &mut SymbolModel,
    dims: usize,
    k: u32,
) -> Result<PulseVector> {
    let mut pulses = vec![0i32; dims];
    let mut remaining = k;
    for (i, slot) in pulses.iter_mut().enumerate() {
        if remaining == 0 {
            break;
        }
        let mag = if i + 1 < dims {
            let m = decode_golomb_adaptive(dec, prefix_model)?;
            if m > u64::from(remaining) {
                return Err(Error::decode(dec.position(), "pulse magnitude exceeds budget"));
            }
            m as u32
        } else {
            remaining
        };
        if mag > 0 {
            let negative = dec.decode_bit_raw()?;
            *slot = if negative { -(mag as i32) } else { mag as i32 };
        }
        remaining -= mag;
    }
    if remaining != 0 {
        return Err(Error::decode(dec.position(), "pulse budget not exhausted"));
    }
    PulseVector::new(pulses)
}

fn vec_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Serializes one band group. `gain_predicted` carries the predictor norm
/// when the gain index is relative to it (the fd-cfl path); the noref flag
/// is then coded before the gain can be reconstructed. `predictor_present`
/// states whether a usable shape predictor exists — the decoder derives the
/// same fact from its own reconstruction, so it is never coded.
#[allow(clippy::too_many_arguments)]
fn write_band(
    enc: &mut RangeEncoder,
    models: &mut PlaneModels,
    class: usize,
    code: &GainShapeCode,
    dims: usize,
    gain_predicted: Option<f64>,
    predictor_present: bool,
    qp: &QuantParams,
) -> Result<()> {
    encode_golomb_signed_adaptive(enc, &mut models.gain_prefix[class], code.gain_index)?;
    let recon_gain = match gain_predicted {
        Some(r_norm) => {
            models.noref[class].encode_bit(enc, code.noref)?;
            if code.noref {
                code.gain_index as f64 * qp.q_gain
            } else {
                (code.gain_index as f64 * qp.q_gain + r_norm).max(0.0)
            }
        }
        None => code.gain_index as f64 * qp.q_gain,
    };
    if recon_gain <= 0.0 {
        return Ok(());
    }
    if gain_predicted.is_none() && predictor_present {
        models.noref[class].encode_bit(enc, code.noref)?;
    }
    if code.noref {
        let pulses = code
            .pulses
            .as_ref()
            .ok_or_else(|| Error::argument("nonzero gain without pulses"))?;
        let k = qp.pulse_budget(recon_gain, dims);
        write_pulses(enc, &mut models.pulse_prefix[class], pulses, k)
    } else {
        let theta_index = code
            .theta_index
            .ok_or_else(|| Error::argument("predicted band without theta"))?;
        write_theta(enc, &mut models.theta[class], theta_index)?;
        let steps = qp.theta_steps(recon_gain);
        let theta_hat = pvq::theta_value(theta_index, steps);
        let k = qp.pulse_budget(recon_gain * theta_hat.sin(), dims - 1);
        let pulses = code
            .pulses
            .as_ref()
            .ok_or_else(|| Error::argument("predicted band without pulses"))?;
        write_pulses(enc, &mut models.pulse_prefix[class], pulses, k)
    }
}

/// Mirror of [`write_band`].
#[allow(clippy::too_many_arguments)]
fn read_band(
    dec: &mut RangeDecoder,
    models: &mut PlaneModels,
    class: usize,
    dims: usize,
    gain_predicted: Option<f64>,
    predictor_present: bool,
    qp: &QuantParams,
) -> Result<GainShapeCode> {
    let gain_index = decode_golomb_signed_adaptive(dec, &mut models.gain_prefix[class])?;
    let (mut noref, recon_gain) = match gain_predicted {
        Some(r_norm) => {
            let noref = models.noref[class].decode_bit(dec)?;
            let g = if noref {
                if gain_index < 0 {
                    return Err(Error::decode(dec.position(), "negative unpredicted gain"));
                }
                gain_index as f64 * qp.q_gain
            } else {
                (gain_index as f64 * qp.q_gain + r_norm).max(0.0)
            };
            (noref, g)
        }
        None => {
            if gain_index < 0 {
                return Err(Error::decode(dec.position(), "negative unpredicted gain"));
            }
            (true, gain_index as f64 * qp.q_gain)
        }
    };
    if recon_gain <= 0.0 {
        return Ok(GainShapeCode {
            gain_index,
            theta_index: None,
            pulses: None,
            noref,
            axis_m: 0,
            sign_s: 1,
        });
    }
    if gain_predicted.is_none() && predictor_present {
        noref = models.noref[class].decode_bit(dec)?;
    }
    if noref {
        let k = qp.pulse_budget(recon_gain, dims);
        let pulses = read_pulses(dec, &mut models.pulse_prefix[class], dims, k)?;
        Ok(GainShapeCode {
            gain_index,
            theta_index: None,
            pulses: Some(pulses),
            noref: true,
            axis_m: 0,
            sign_s: 1,
        })
    } else {
        let theta_index = read_theta(dec, &mut models.theta[class])?;
        let steps = qp.theta_steps(recon_gain);
        if theta_index > steps {
            return Err(Error::decode(dec.position(), "theta index out of range"));
        }
        let theta_hat = pvq::theta_value(theta_index, steps);
        let k = qp.pulse_budget(recon_gain * theta_hat.sin(), dims - 1);
        let pulses = read_pulses(dec, &mut models.pulse_prefix[class], dims - 1, k)?;
        Ok(GainShapeCode {
            gain_index,
            theta_index: Some(theta_index),
            pulses: Some(pulses),
            noref: false,
            axis_m: 0,
            sign_s: 1,
        })
    }
}

/// Band reconstruction shared by both codec sides: dispatches to the
/// predicted-gain path (fd-cfl) or the direct-gain path (everything else).
fn reconstruct_band(
    code: &GainShapeCode,
    r: Option<&[f64]>,
    dims: usize,
    gain_predicted: Option<f64>,
    qp: &QuantParams,
) -> Result<Vec<f64>> {
    match gain_predicted {
        Some(_) => {
            let r = r.ok_or_else(|| Error::argument("predicted band without predictor"))?;
            pvq::predicted_dequantize(code, r, qp)
        }
        None => match r {
            Some(r) => pvq_cfl::reconstruct_band(code, r, qp),
            None => pvq::dequantize_noref(code, dims, qp),
        },
    }
}

/// Neighbor-average DC prediction from up/left/up-left reconstructed
/// blocks; zero when no neighbor exists (planes are level-shifted, so zero
/// is mid-gray).
fn predict_dc(grid: &BlockGrid, row: usize, col: usize) -> f64 {
    let mut sum = 0.0;
    let mut count = 0;
    if row > 0 {
        sum += grid.get(row - 1, col).dc();
        count += 1;
    }
    if col > 0 {
        sum += grid.get(row, col - 1).dc();
        count += 1;
    }
    if row > 0 && col > 0 {
        sum += grid.get(row - 1, col - 1).dc();
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / f64::from(count)
    }
}

/// Per-band FD-CfL predictors for the block at (row, col): the shared AC
/// slope fitted from reconstructed neighbors, applied to the coincident
/// reconstructed luma. Returns one predictor vector per band.
fn fd_cfl_predictors(
    luma: &LumaRef,
    chroma_grid: &BlockGrid,
    row: usize,
    col: usize,
    layout: &BandLayout,
) -> Result<Vec<Vec<f64>>> {
    let up_luma = if row > 0 {
        Some(luma.coincident(row - 1, col)?)
    } else {
        None
    };
    let left_luma = if col > 0 {
        Some(luma.coincident(row, col - 1)?)
    } else {
        None
    };
    let upleft_luma = if row > 0 && col > 0 {
        Some(luma.coincident(row - 1, col - 1)?)
    } else {
        None
    };
    let ctx = NeighborContext {
        up: up_luma.as_ref().map(|l| NeighborPair {
            luma: l,
            chroma: chroma_grid.get(row - 1, col),
        }),
        left: left_luma.as_ref().map(|l| NeighborPair {
            luma: l,
            chroma: chroma_grid.get(row, col - 1),
        }),
        upleft: upleft_luma.as_ref().map(|l| NeighborPair {
            luma: l,
            chroma: chroma_grid.get(row - 1, col - 1),
        }),
    };
    let alpha = cfl::fit_ac_alpha(&ctx);
    let current = luma.coincident(row, col)?;
    Ok(layout
        .bands()
        .iter()
        .map(|band| current.gather(band).iter().map(|&l| alpha * l).collect())
        .collect())
}

pub(crate) struct PlaneCodeResult {
    pub recon: BlockGrid,
    pub payload: Vec<u8>,
}

/// Encodes one padded, level-shifted plane and returns its payload plus the
/// reconstructed blocks the chroma planes may predict from.
pub(crate) fn encode_plane(
    plane: &PixelPlane,
    qp: &QuantParams,
    layout: &BandLayout,
    params: &LappedFilterParams,
    prediction: &PlanePrediction,
) -> Result<PlaneCodeResult> {
    let n = layout.n();
    let filtered = prefilter_plane(plane, params)?;
    let cols = plane.width() / n;
    let rows = plane.height() / n;
    let mut source = Vec::with_capacity(cols * rows);
    for br in 0..rows {
        for bc in 0..cols {
            let mut tile = vec![0.0; n * n];
            for r in 0..n {
                for c in 0..n {
                    tile[r * n + c] = filtered.get(br * n + r, bc * n + c);
                }
            }
            source.push(dct2d_forward(&tile, n, (br, bc))?);
        }
    }

    let mut enc = RangeEncoder::new();
    let mut models = PlaneModels::new();
    let mut recon = BlockGrid::new(n, cols, rows);
    let dc_step = DC_STEP_FACTOR * qp.q_gain;

    for br in 0..rows {
        for bc in 0..cols {
            let block = &source[br * cols + bc];
            let mut recon_block = CoefficientBlock::new(n, (br, bc));

            // Per-band shape predictors, derived from reconstructed state
            // only (plus the flip bit, which is explicitly coded).
            let band_predictors: Option<Vec<Vec<f64>>> = match prediction {
                PlanePrediction::None => None,
                PlanePrediction::FdCfl(luma) => {
                    Some(fd_cfl_predictors(luma, &recon, br, bc, layout)?)
                }
                PlanePrediction::PvqCfl(luma) => {
                    let coincident = luma.coincident(br, bc)?;
                    let band0 = layout.band(0);
                    let flip =
                        pvq_cfl::compute_flip(&coincident.gather(band0), &block.gather(band0))?;
                    models.flip.encode_bit(&mut enc, flip.is_flip())?;
                    Some(
                        layout
                            .bands()
                            .iter()
                            .map(|band| {
                                coincident
                                    .gather(band)
                                    .iter()
                                    .map(|&l| flip.value() * l)
                                    .collect()
                            })
                            .collect(),
                    )
                }
            };

            let dc_pred = predict_dc(&recon, br, bc);
            let (dc_index, dc_recon) = pvq::scalar_quantize(block.dc() - dc_pred, dc_step)?;
            encode_golomb_signed_adaptive(&mut enc, &mut models.dc_prefix, dc_index)?;
            recon_block.set_dc(dc_pred + dc_recon);

            for (bi, band) in layout.bands().iter().enumerate() {
                let class = band_class(band.len());
                let x = block.gather(band);
                let r: Option<&[f64]> = band_predictors.as_ref().map(|rs| rs[bi].as_slice());
                let predictor_present = r.map(|rv| vec_norm(rv) > PREDICTOR_EPSILON).unwrap_or(false);
                let code = match prediction {
                    PlanePrediction::None => pvq::quantize_noref(&x, qp)?,
                    PlanePrediction::FdCfl(_) => {
                        if predictor_present {
                            pvq::predicted_quantize(&x, r.unwrap(), qp)?
                        } else {
                            pvq::quantize_noref(&x, qp)?
                        }
                    }
                    PlanePrediction::PvqCfl(_) => pvq_cfl::code_band(&x, r.unwrap(), qp)?,
                };
                let gain_predicted = match prediction {
                    PlanePrediction::FdCfl(_) if predictor_present => {
                        Some(vec_norm(r.unwrap()))
                    }
                    _ => None,
                };
                write_band(
                    &mut enc,
                    &mut models,
                    class,
                    &code,
                    band.len(),
                    gain_predicted,
                    predictor_present,
                    qp,
                )?;
                let recon_band = reconstruct_band(&code, r, band.len(), gain_predicted, qp)?;
                recon_block.scatter(band, &recon_band);
            }
            recon.push(recon_block);
        }
    }
    Ok(PlaneCodeResult {
        recon,
        payload: enc.finish(),
    })
}

/// Decodes one plane payload into reconstructed blocks; the exact mirror of
/// [`encode_plane`].
pub(crate) fn decode_plane(
    payload: &[u8],
    width: usize,
    height: usize,
    qp: &QuantParams,
    layout: &BandLayout,
    prediction: &PlanePrediction,
) -> Result<BlockGrid> {
    let n = layout.n();
    let cols = width / n;
    let rows = height / n;
    let mut dec = RangeDecoder::new(payload)?;
    let mut models = PlaneModels::new();
    let mut recon = BlockGrid::new(n, cols, rows);
    let dc_step = DC_STEP_FACTOR * qp.q_gain;

    for br in 0..rows {
        for bc in 0..cols {
            let mut recon_block = CoefficientBlock::new(n, (br, bc));

            let band_predictors: Option<Vec<Vec<f64>>> = match prediction {
                PlanePrediction::None => None,
                PlanePrediction::FdCfl(luma) => {
                    Some(fd_cfl_predictors(luma, &recon, br, bc, layout)?)
                }
                PlanePrediction::PvqCfl(luma) => {
                    let coincident = luma.coincident(br, bc)?;
                    let flip = if models.flip.decode_bit(&mut dec)? {
                        FlipFlag::FLIP
                    } else {
                        FlipFlag::KEEP
                    };
                    Some(
                        layout
                            .bands()
                            .iter()
                            .map(|band| {
                                coincident
                                    .gather(band)
                                    .iter()
                                    .map(|&l| flip.value() * l)
                                    .collect()
                            })
                            .collect(),
                    )
                }
            };

            let dc_pred = predict_dc(&recon, br, bc);
            let dc_index = decode_golomb_signed_adaptive(&mut dec, &mut models.dc_prefix)?;
            recon_block.set_dc(dc_pred + dc_index as f64 * dc_step);

            for (bi, band) in layout.bands().iter().enumerate() {
                let class = band_class(band.len());
                let r: Option<&[f64]> = band_predictors.as_ref().map(|rs| rs[bi].as_slice());
                let predictor_present = r.map(|rv| vec_norm(rv) > PREDICTOR_EPSILON).unwrap_or(false);
                let gain_predicted = match prediction {
                    PlanePrediction::FdCfl(_) if predictor_present => {
                        Some(vec_norm(r.unwrap()))
                    }
                    _ => None,
                };
                let code = read_band(
                    &mut dec,
                    &mut models,
                    class,
                    band.len(),
                    gain_predicted,
                    predictor_present,
                    qp,
                )?;
                let recon_band = reconstruct_band(&code, r, band.len(), gain_predicted, qp)?;
                recon_block.scatter(band, &recon_band);
            }
            recon.push(recon_block);
        }
    }
    Ok(recon)
}

/// Inverse-transforms a grid of reconstructed blocks back to a plane.
pub(crate) fn blocks_to_plane(grid: &BlockGrid, params: &LappedFilterParams) -> Result<PixelPlane> {
    let n = grid.n;
    let mut plane = PixelPlane::new(grid.cols * n, grid.rows * n);
    for br in 0..grid.rows {
        for bc in 0..grid.cols {
            let tile = dct2d_inverse(grid.get(br, bc))?;
            for r in 0..n {
                for c in 0..n {
                    plane.set(br * n + r, bc * n + c, tile[r * n + c]);
                }
            }
        }
    }
    postfilter_plane(&plane, params)
}

