use crate::error::{Error, Result};

/// Block sizes the transform and band machinery support.
pub const SUPPORTED_BLOCK_SIZES: [usize; 3] = [4, 8, 16];

pub fn check_block_size(n: usize) -> Result<()> {
    if SUPPORTED_BLOCK_SIZES.contains(&n) {
        Ok(())
    } else {
        Err(Error::size(format!("unsupported block size {n}")))
    }
}

/// Frequency-domain coefficients of one n-by-n block.
///
/// `coeffs[0]` (row 0, column 0) is the DC coefficient; everything else is
/// AC. Row index is vertical frequency, column index horizontal frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlock {
    n: usize,
    coeffs: Vec<f64>,
    origin: (usize, usize),
}

impl CoefficientBlock {
    pub fn new(n: usize, origin: (usize, usize)) -> Self {
        CoefficientBlock {
            n,
            coeffs: vec![0.0; n * n],
            origin,
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>, origin: (usize, usize)) -> Result<Self> {
        if coeffs.len() != n * n {
            return Err(Error::size(format!(
                "block size {n} needs {} coefficients, got {}",
                n * n,
                coeffs.len()
            )));
        }
        Ok(CoefficientBlock { n, coeffs, origin })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn dc(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn set_dc(&mut self, value: f64) {
        self.coeffs[0] = value;
    }

    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.coeffs[u * self.n + v]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: f64) {
        self.coeffs[u * self.n + v] = value;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Gathers the coefficients at `positions` into a vector, in order.
    pub fn gather(&self, positions: &[(usize, usize)]) -> Vec<f64> {
        positions.iter().map(|&(u, v)| self.at(u, v)).collect()
    }

    /// Scatters `values` back to `positions`, in order.
    pub fn scatter(&mut self, positions: &[(usize, usize)], values: &[f64]) {
        debug_assert_eq!(positions.len(), values.len());
        for (&(u, v), &x) in positions.iter().zip(values) {
            self.set(u, v, x);
        }
    }

    /// Sum of squared coefficients.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}
