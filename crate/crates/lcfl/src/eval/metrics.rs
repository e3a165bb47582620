//! PSNR and SSIM on 8-bit-valued planes.

use crate::error::{Error, Result};
use crate::plane::PixelPlane;

/// PSNR in dB against a 255 peak, capped at 99 dB for identical planes so
/// lossless points stay finite.
pub const PSNR_CAP: f64 = 99.0;

pub fn psnr(reference: &PixelPlane, test: &PixelPlane) -> Result<f64> {
    if reference.width() != test.width() || reference.height() != test.height() {
        return Err(Error::size("psnr: plane dimensions differ".to_string()));
    }
    let n = (reference.width() * reference.height()) as f64;
    let mse: f64 = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse <= 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (255.0f64 * 255.0 / mse).log10()).min(PSNR_CAP))
}

const SSIM_WINDOW: usize = 8;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Mean local SSIM over 8x8 windows at stride 1, uniform weighting,
/// population statistics, standard constants.
pub fn ssim(reference: &PixelPlane, test: &PixelPlane) -> Result<f64> {
    if reference.width() != test.width() || reference.height() != test.height() {
        return Err(Error::size("ssim: plane dimensions differ".to_string()));
    }
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::size(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let win = SSIM_WINDOW;
    let area = (win * win) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for row in 0..=h - win {
        for col in 0..=w - win {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for r in row..row + win {
                for c in col..col + win {
                    let x = reference.get(r, c);
                    let y = test.get(r, c);
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    syy += y * y;
                    sxy += x * y;
                }
            }
            let mx = sx / area;
            let my = sy / area;
            let vx = sxx / area - mx * mx;
            let vy = syy / area - my * my;
            let cov = sxy / area - mx * my;
            let value = ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
            total += value;
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// dB form of SSIM used when Bjontegaard deltas need a dB-like axis.
pub fn ssim_db(value: f64) -> f64 {
    -10.0 * (1.0 - value).max(1e-10).log10()
}
