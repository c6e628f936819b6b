//! Per-channel linear illumination model.
//!
//! A lit intensity is modeled as a gain/offset transform of its shadowed
//! value, independently per RGB channel. [`relight`] applies the transform to
//! a shadow image; [`darken`] inverts it, pushing a shadow-free image into
//! shadow. Neither clamps: overshoot is meaningful to the matte algebra and
//! clamping is an I/O concern.

use crate::error::{Error, Result};
use crate::image::ImageBuf;

/// Smallest admissible gain; [`darken`] divides by each gain.
pub const W_MIN: f64 = 1e-3;

/// Per-channel gains `w` and offsets `b`, in normalized intensity units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShadowParams {
    pub w: [f64; 3],
    pub b: [f64; 3],
}

impl ShadowParams {
    /// Identity transform: unit gains, zero offsets.
    pub fn identity() -> Self {
        Self {
            w: [1.0; 3],
            b: [0.0; 3],
        }
    }

    pub fn new(w: [f64; 3], b: [f64; 3]) -> Result<Self> {
        let p = Self { w, b };
        p.validate()?;
        Ok(p)
    }

    /// Checks that all six values are finite and every gain is at least
    /// [`W_MIN`].
    pub fn validate(&self) -> Result<()> {
        if !self.w.iter().chain(self.b.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("non-finite value"));
        }
        if self.w.iter().any(|&w| w < W_MIN) {
            return Err(Error::InvalidParams("gain below minimum"));
        }
        Ok(())
    }

    /// Scales every gain by `k`, leaving offsets unchanged.
    pub fn scale_gain(&self, k: f64) -> Result<Self> {
        Self::new([self.w[0] * k, self.w[1] * k, self.w[2] * k], self.b)
    }
}

/// Applies the illumination model forward: `out_k = w_k * in_k + b_k`.
pub fn relight(shadow: &ImageBuf, params: &ShadowParams) -> Result<ImageBuf> {
    params.validate()?;
    Ok(shadow.map_channels(|k, v| params.w[k] * v + params.b[k]))
}

/// Applies the inverse model: `out_k = (in_k - b_k) / w_k`.
pub fn darken(free: &ImageBuf, params: &ShadowParams) -> Result<ImageBuf> {
    params.validate()?;
    Ok(free.map_channels(|k, v| (v - params.b[k]) / params.w[k]))
}
