//! Block transform stage: an orthonormal 2-D DCT plus the lapped
//! pre-/post-filter pair applied across interior block edges.
//!
//! The pre-filter runs before the forward DCT and the post-filter after the
//! inverse DCT; together they form a perfect-reconstruction lapped transform.
//! Everything here is linear and operates in double precision.

mod dct;
mod lapped;

pub use dct::{dct2d_forward, dct2d_inverse};
pub use lapped::{postfilter_plane, prefilter_plane, LappedFilterParams};
