//! BT.601 full-range color conversion and 4:2:0 resampling.

use crate::coder::Subsampling;
use crate::error::{Error, Result};
use crate::plane::PixelPlane;

use super::Frame;

/// 8-bit interleaved RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    /// RGB triples, row-major.
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::size(format!(
                "rgb image {}x{} needs {} bytes, got {}",
                width,
                height,
                width * height * 3,
                data.len()
            )));
        }
        Ok(RgbImage { width, height, data })
    }
}

fn clamp_u8(v: f64) -> f64 {
    v.round().clamp(0.0, 255.0)
}

/// Full-range BT.601: gray maps to (Y=gray, Cb=Cr=128) and the round trip
/// stays within one 8-bit step.
pub fn rgb_to_ycbcr(img: &RgbImage) -> Frame {
    let (w, h) = (img.width, img.height);
    let mut y = PixelPlane::new(w, h);
    let mut cb = PixelPlane::new(w, h);
    let mut cr = PixelPlane::new(w, h);
    for row in 0..h {
        for col in 0..w {
            let i = (row * w + col) * 3;
            let r = f64::from(img.data[i]);
            let g = f64::from(img.data[i + 1]);
            let b = f64::from(img.data[i + 2]);
            y.set(row, col, clamp_u8(0.299 * r + 0.587 * g + 0.114 * b));
            cb.set(
                row,
                col,
                clamp_u8(128.0 - 0.168_735_892 * r - 0.331_264_108 * g + 0.5 * b),
            );
            cr.set(
                row,
                col,
                clamp_u8(128.0 + 0.5 * r - 0.418_687_589 * g - 0.081_312_411 * b),
            );
        }
    }
    Frame {
        y,
        cb,
        cr,
        subsampling: Subsampling::S444,
    }
}

/// Inverse conversion; a 4:2:0 frame is upsampled by nearest duplication
/// first.
pub fn ycbcr_to_rgb(frame: &Frame) -> RgbImage {
    let full = match frame.subsampling {
        Subsampling::S444 => frame.clone(),
        Subsampling::S420 => upsample_420(frame),
    };
    let (w, h) = (full.y.width(), full.y.height());
    let mut data = Vec::with_capacity(w * h * 3);
    for row in 0..h {
        for col in 0..w {
            let y = full.y.get(row, col);
            let cb = full.cb.get(row, col) - 128.0;
            let cr = full.cr.get(row, col) - 128.0;
            data.push(clamp_u8(y + 1.402 * cr) as u8);
            data.push(clamp_u8(y - 0.344_136_286 * cb - 0.714_136_286 * cr) as u8);
            data.push(clamp_u8(y + 1.772 * cb) as u8);
        }
    }
    RgbImage { width: w, height: h, data }
}

/// 2x2 box average of both chroma planes. Requires even dimensions.
pub fn downsample_420(frame: &Frame) -> Result<Frame> {
    if frame.subsampling == Subsampling::S420 {
        return Ok(frame.clone());
    }
    let (w, h) = (frame.y.width(), frame.y.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::argument(format!(
            "4:2:0 requires even dimensions, got {w}x{h}"
        )));
    }
    let box_avg = |p: &PixelPlane| {
        let mut out = PixelPlane::new(w / 2, h / 2);
        for r in 0..h / 2 {
            for c in 0..w / 2 {
                let sum = p.get(2 * r, 2 * c)
                    + p.get(2 * r, 2 * c + 1)
                    + p.get(2 * r + 1, 2 * c)
                    + p.get(2 * r + 1, 2 * c + 1);
                out.set(r, c, (sum / 4.0).round());
            }
        }
        out
    };
    Ok(Frame {
        y: frame.y.clone(),
        cb: box_avg(&frame.cb),
        cr: box_avg(&frame.cr),
        subsampling: Subsampling::S420,
    })
}

/// Nearest-neighbor chroma upsampling back to 4:4:4.
pub fn upsample_420(frame: &Frame) -> Frame {
    if frame.subsampling == Subsampling::S444 {
        return frame.clone();
    }
    let (w, h) = (frame.y.width(), frame.y.height());
    let dup = |p: &PixelPlane| {
        let mut out = PixelPlane::new(w, h);
        for r in 0..h {
            for c in 0..w {
                out.set(r, c, p.get((r / 2).min(p.height() - 1), (c / 2).min(p.width() - 1)));
            }
        }
        out
    };
    Frame {
        y: frame.y.clone(),
        cb: dup(&frame.cb),
        cr: dup(&frame.cr),
        subsampling: Subsampling::S444,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_maps_to_neutral_chroma() {
        for c in [0u8, 77, 128, 255] {
            let img = RgbImage::new(1, 1, vec![c, c, c]).unwrap();
            let f = rgb_to_ycbcr(&img);
            assert_eq!(f.y.get(0, 0), f64::from(c));
            assert_eq!(f.cb.get(0, 0), 128.0);
            assert_eq!(f.cr.get(0, 0), 128.0);
        }
    }

    #[test]
    fn black_is_zero_luma_neutral_chroma() {
        let img = RgbImage::new(1, 1, vec![0, 0, 0]).unwrap();
        let f = rgb_to_ycbcr(&img);
        assert_eq!(
            (f.y.get(0, 0), f.cb.get(0, 0), f.cr.get(0, 0)),
            (0.0, 128.0, 128.0)
        );
    }

    #[test]
    fn strided_sweep_round_trips_within_one_step() {
        // All 2^24 colors sampled at stride 97.
        let mut color = 0u32;
        let mut worst = 0i32;
        while color < 1 << 24 {
            let (r, g, b) = ((color >> 16) as u8, (color >> 8) as u8, color as u8);
            let img = RgbImage::new(1, 1, vec![r, g, b]).unwrap();
            let back = ycbcr_to_rgb(&rgb_to_ycbcr(&img));
            for (a, o) in back.data.iter().zip([r, g, b]) {
                worst = worst.max((i32::from(*a) - i32::from(o)).abs());
            }
            color += 97;
        }
        assert!(worst <= 1, "max round-trip error {worst}");
    }

    #[test]
    fn downsample_upsample_shapes() {
        let img = RgbImage::new(4, 2, vec![200; 24]).unwrap();
        let f = rgb_to_ycbcr(&img);
        let down = downsample_420(&f).unwrap();
        assert_eq!((down.cb.width(), down.cb.height()), (2, 1));
        let up = upsample_420(&down);
        assert_eq!((up.cb.width(), up.cb.height()), (4, 2));
        // Flat image survives the round trip exactly.
        assert_eq!(up.cb.samples(), f.cb.samples());

        let odd = RgbImage::new(3, 2, vec![10; 18]).unwrap();
        assert!(downsample_420(&rgb_to_ycbcr(&odd)).is_err());
    }
}
