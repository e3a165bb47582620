use crate::error::{Error, Result};

/// One image plane of real-valued samples.
///
/// Samples are stored row-major. The transform pipeline keeps planes in
/// double precision end to end; integer pixels only appear at the I/O
/// boundary via [`PixelPlane::from_u8`] and [`PixelPlane::to_u8`].
#[derive(Debug, Clone, PartialEq)]
pub struct PixelPlane {
    width: usize,
    height: usize,
    samples: Vec<f64>,
    bit_depth: u8,
}

impl PixelPlane {
    pub fn new(width: usize, height: usize) -> Self {
        PixelPlane {
            width,
            height,
            samples: vec![0.0; width * height],
            bit_depth: 8,
        }
    }

    pub fn from_samples(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::size(format!(
                "plane {}x{} needs {} samples, got {}",
                width,
                height,
                width * height,
                samples.len()
            )));
        }
        Ok(PixelPlane {
            width,
            height,
            samples,
            bit_depth: 8,
        })
    }

    pub fn from_u8(width: usize, height: usize, samples: &[u8]) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::size(format!(
                "plane {}x{} needs {} samples, got {}",
                width,
                height,
                width * height,
                samples.len()
            )));
        }
        Ok(PixelPlane {
            width,
            height,
            samples: samples.iter().map(|&s| f64::from(s)).collect(),
            bit_depth: 8,
        })
    }

    /// Rounds to nearest (ties away from zero) and clamps to [0, 255].
    pub fn to_u8(&self) -> Vec<u8> {
        self.samples
            .iter()
            .map(|&s| s.round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.samples[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.samples[row * self.width..(row + 1) * self.width]
    }

    /// Extends the plane to the given dimensions by replicating the last row
    /// and column. Used to make planes block-aligned before transforming.
    pub fn pad_to(&self, width: usize, height: usize) -> PixelPlane {
        assert!(width >= self.width && height >= self.height);
        let mut out = PixelPlane::new(width, height);
        for r in 0..height {
            let sr = r.min(self.height - 1);
            for c in 0..width {
                let sc = c.min(self.width - 1);
                out.set(r, c, self.get(sr, sc));
            }
        }
        out
    }

    /// Top-left crop, the inverse of [`PixelPlane::pad_to`].
    pub fn crop_to(&self, width: usize, height: usize) -> PixelPlane {
        assert!(width <= self.width && height <= self.height);
        let mut out = PixelPlane::new(width, height);
        for r in 0..height {
            for c in 0..width {
                out.set(r, c, self.get(r, c));
            }
        }
        out
    }

    /// Adds `delta` to every sample in place.
    pub fn shift(&mut self, delta: f64) {
        for s in &mut self.samples {
            *s += delta;
        }
    }

    /// Maximum absolute sample difference between two planes of equal size.
    pub fn max_abs_diff(&self, other: &PixelPlane) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::size("plane dimensions differ".to_string()));
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
