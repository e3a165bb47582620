//! Full encoder/decoder: image ingestion, color conversion, subsampling,
//! plane coding with a selectable chroma predictor, and reconstruction.
//!
//! The luma plane is always coded first with plain gain-shape quantization
//! (DC by neighbor average); the chroma planes then code against the
//! reconstructed luma according to the configured mode. Each plane becomes
//! its own range-coder payload in the container, so per-plane rates are
//! exact byte counts and the luma stream is bit-identical across chroma
//! modes.

pub mod color;
mod codec;
pub mod image_io;

use crate::block::check_block_size;
use crate::coder::{
    read_container, write_container, Bitstream, ChromaMode, ContainerHeader, Subsampling,
};
use crate::error::{Error, Result};
use crate::plane::PixelPlane;
use crate::pvq::QuantParams;
use crate::pvq_cfl::band_layout;
use crate::transform::LappedFilterParams;

use codec::{blocks_to_plane, decode_plane, encode_plane, LumaRef, PlanePrediction};

pub use color::RgbImage;

/// One still image as luma and two chroma planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub y: PixelPlane,
    pub cb: PixelPlane,
    pub cr: PixelPlane,
    pub subsampling: Subsampling,
}

impl Frame {
    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.y.width(), self.y.height());
        let (cw, ch) = match self.subsampling {
            Subsampling::S444 => (w, h),
            Subsampling::S420 => {
                if w % 2 != 0 || h % 2 != 0 {
                    return Err(Error::argument(format!(
                        "4:2:0 requires even dimensions, got {w}x{h}"
                    )));
                }
                (w / 2, h / 2)
            }
        };
        for (name, p) in [("cb", &self.cb), ("cr", &self.cr)] {
            if p.width() != cw || p.height() != ch {
                return Err(Error::size(format!(
                    "{name} plane is {}x{}, expected {cw}x{ch}",
                    p.width(),
                    p.height()
                )));
            }
        }
        Ok(())
    }
}

/// Encoder configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeConfig {
    pub chroma_mode: ChromaMode,
    pub block_size: usize,
    pub q_gain: f64,
    pub subsampling: Subsampling,
}

impl EncodeConfig {
    pub fn validate(&self) -> Result<()> {
        check_block_size(self.block_size)?;
        if !self.q_gain.is_finite() || self.q_gain <= 0.0 {
            return Err(Error::argument(format!(
                "q_gain must be positive, got {}",
                self.q_gain
            )));
        }
        Ok(())
    }
}

/// Everything the encoder produces: the container plus the internal
/// reconstruction (which the decoder reproduces bit for bit) and exact
/// per-plane payload sizes in bits.
#[derive(Debug, Clone)]
pub struct EncodeOutput {
    pub container: Vec<u8>,
    pub plane_bits: [u64; 3],
    pub recon: Frame,
}

/// Padded plane dimensions for one coded frame. With 4:2:0 the luma pad is
/// locked to twice the chroma pad so every chroma block has its four
/// coincident luma blocks.
fn padded_dims(
    width: usize,
    height: usize,
    n: usize,
    subsampling: Subsampling,
) -> ((usize, usize), (usize, usize)) {
    let round_up = |v: usize| v.div_ceil(n) * n;
    match subsampling {
        Subsampling::S444 => {
            let dims = (round_up(width), round_up(height));
            (dims, dims)
        }
        Subsampling::S420 => {
            let chroma = (round_up(width / 2), round_up(height / 2));
            ((2 * chroma.0, 2 * chroma.1), chroma)
        }
    }
}

fn prepare_plane(p: &PixelPlane, w: usize, h: usize) -> PixelPlane {
    let mut padded = p.pad_to(w, h);
    padded.shift(-128.0);
    padded
}

fn finish_plane(
    grid: &codec::BlockGrid,
    params: &LappedFilterParams,
    width: usize,
    height: usize,
) -> Result<PixelPlane> {
    let mut plane = blocks_to_plane(grid, params)?;
    plane.shift(128.0);
    let cropped = plane.crop_to(width, height);
    // Clamp and round exactly once so encoder and decoder agree.
    PixelPlane::from_u8(width, height, &cropped.to_u8())
}

pub fn encode_frame(frame: &Frame, cfg: &EncodeConfig) -> Result<EncodeOutput> {
    cfg.validate()?;
    frame.validate()?;
    if frame.subsampling != cfg.subsampling {
        return Err(Error::argument(
            "frame subsampling does not match the encoder configuration",
        ));
    }
    let n = cfg.block_size;
    let qp = QuantParams::new(cfg.q_gain)?;
    let layout = band_layout(n)?;
    let params = LappedFilterParams::for_block_size(n)?;
    let (w, h) = (frame.y.width(), frame.y.height());
    let ((lw, lh), (cw, ch)) = padded_dims(w, h, n, cfg.subsampling);
    let merged = cfg.subsampling == Subsampling::S420;

    let luma = encode_plane(
        &prepare_plane(&frame.y, lw, lh),
        &qp,
        &layout,
        &params,
        &PlanePrediction::None,
    )?;
    let chroma_prediction = || -> PlanePrediction<'_> {
        match cfg.chroma_mode {
            ChromaMode::None => PlanePrediction::None,
            ChromaMode::FdCfl => PlanePrediction::FdCfl(LumaRef::new(&luma.recon, merged)),
            ChromaMode::PvqCfl => PlanePrediction::PvqCfl(LumaRef::new(&luma.recon, merged)),
        }
    };
    let cb = encode_plane(
        &prepare_plane(&frame.cb, cw, ch),
        &qp,
        &layout,
        &params,
        &chroma_prediction(),
    )?;
    let cr = encode_plane(
        &prepare_plane(&frame.cr, cw, ch),
        &qp,
        &layout,
        &params,
        &chroma_prediction(),
    )?;

    let header = ContainerHeader {
        width: w as u32,
        height: h as u32,
        subsampling: cfg.subsampling,
        block_size: n as u8,
        chroma_mode: cfg.chroma_mode,
        q_gain: cfg.q_gain,
    };
    let payloads = [
        Bitstream::from_bytes(luma.payload.clone()),
        Bitstream::from_bytes(cb.payload.clone()),
        Bitstream::from_bytes(cr.payload.clone()),
    ];
    let plane_bits = [
        payloads[0].bit_length,
        payloads[1].bit_length,
        payloads[2].bit_length,
    ];
    let container = write_container(&header, &payloads);

    let (ccw, cch) = match cfg.subsampling {
        Subsampling::S444 => (w, h),
        Subsampling::S420 => (w / 2, h / 2),
    };
    let recon = Frame {
        y: finish_plane(&luma.recon, &params, w, h)?,
        cb: finish_plane(&cb.recon, &params, ccw, cch)?,
        cr: finish_plane(&cr.recon, &params, ccw, cch)?,
        subsampling: cfg.subsampling,
    };
    Ok(EncodeOutput {
        container,
        plane_bits,
        recon,
    })
}

pub fn decode_frame(data: &[u8]) -> Result<Frame> {
    let (header, payloads) = read_container(data)?;
    let n = usize::from(header.block_size);
    check_block_size(n)
        .map_err(|_| Error::decode(14, format!("unsupported block size {n} in header")))?;
    let qp = QuantParams::new(header.q_gain)?;
    let layout = band_layout(n)?;
    let params = LappedFilterParams::for_block_size(n)?;
    let (w, h) = (header.width as usize, header.height as usize);
    if w == 0 || h == 0 {
        return Err(Error::decode(5, "zero image dimensions"));
    }
    if header.subsampling == Subsampling::S420 && (w % 2 != 0 || h % 2 != 0) {
        return Err(Error::decode(5, "4:2:0 stream with odd dimensions"));
    }
    let ((lw, lh), (cw, ch)) = padded_dims(w, h, n, header.subsampling);
    let merged = header.subsampling == Subsampling::S420;

    let luma = decode_plane(&payloads[0].bytes, lw, lh, &qp, &layout, &PlanePrediction::None)?;
    let chroma_prediction = || -> PlanePrediction<'_> {
        match header.chroma_mode {
            ChromaMode::None => PlanePrediction::None,
            ChromaMode::FdCfl => PlanePrediction::FdCfl(LumaRef::new(&luma, merged)),
            ChromaMode::PvqCfl => PlanePrediction::PvqCfl(LumaRef::new(&luma, merged)),
        }
    };
    let cb = decode_plane(&payloads[1].bytes, cw, ch, &qp, &layout, &chroma_prediction())?;
    let cr = decode_plane(&payloads[2].bytes, cw, ch, &qp, &layout, &chroma_prediction())?;

    let (ccw, cch) = match header.subsampling {
        Subsampling::S444 => (w, h),
        Subsampling::S420 => (w / 2, h / 2),
    };
    Ok(Frame {
        y: finish_plane(&luma, &params, w, h)?,
        cb: finish_plane(&cb, &params, ccw, cch)?,
        cr: finish_plane(&cr, &params, ccw, cch)?,
        subsampling: header.subsampling,
    })
}
