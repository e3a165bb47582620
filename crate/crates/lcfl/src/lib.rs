//! Lapped-transform still-image codec with frequency-domain chroma-from-luma
//! prediction, plus the rate-distortion evaluation harness used to compare
//! the two chroma predictors it implements.
//!
//! The codec transforms each plane with a lapped DCT (pre-filter across block
//! edges, then a block DCT), codes luma with gain-shape quantization on a
//! pyramid vector codebook, and offers three ways to code the chroma AC
//! coefficients:
//!
//! * `none`    — plain gain-shape coding, no prediction (the control),
//! * `fd-cfl`  — a linear model fitted from previously decoded neighbor
//!   blocks produces a frequency-domain predictor that is fed to the
//!   predicted gain-shape path,
//! * `pvq-cfl` — the reconstructed luma coefficients themselves act as the
//!   shape predictor, with one sign-flip bit per block and the band gain
//!   coded without prediction.
//!
//! All symbols go through an adaptive range coder into the `LCFL` container.
//! The [`eval`] module measures PSNR/SSIM rate-distortion curves and
//! Bjontegaard deltas between coding modes.

pub mod block;
pub mod cfl;
pub mod coder;
pub mod counters;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod plane;
pub mod pvq;
pub mod pvq_cfl;
pub mod tf;
pub mod transform;

pub use block::CoefficientBlock;
pub use error::{Error, Result};
pub use plane::PixelPlane;
