//! Matte extraction and the blend operations built on it.
//!
//! A matte holds one blend coefficient per pixel: 1 where the scene is
//! unshadowed, 0 in the umbra, in between across the penumbra. The matte
//! relates a shadow image and its relit counterpart to the shadow-free
//! image, and the same blend synthesizes new shadow images from a
//! shadow-free image and a darkened one.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{check_dims, ImageBuf, MaskBuf, CHANNELS};

/// Below this summed squared channel difference between the shadow and relit
/// images a pixel is considered unshadowed and its matte value is 1.
pub const DENOM_EPS: f64 = 1e-6;

/// Per-pixel blend coefficients in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matte {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Matte {
    /// Builds a matte from per-pixel coefficients; values must lie in
    /// `[0, 1]`.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let expected = width * height;
        if data.len() != expected {
            return Err(Error::BadBufferLength {
                expected,
                got: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        if data.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::MaskValueOutOfRange);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Reinterprets a mask as a blend layer.
    pub fn from_mask(mask: &MaskBuf) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            data: mask.data().to_vec(),
        }
    }

    /// Decodes an 8-bit gray matte; each sample maps to `v / 255`.
    pub fn from_gray8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let expected = width * height;
        if bytes.len() != expected {
            return Err(Error::BadBufferLength {
                expected,
                got: bytes.len(),
            });
        }
        let data = bytes.iter().map(|&v| crate::image::dequantize(v)).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn to_gray8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| crate::image::quantize(v))
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Extracts the matte relating `shadow`, `free`, and `relit`.
///
/// The per-pixel relation is a ratio of 3-vectors, so the scalar coefficient
/// is resolved by least squares across the channels: with `n_k = free_k -
/// relit_k` and `d_k = shadow_k - relit_k`, the matte value is
/// `Σ n_k d_k / Σ d_k²`, clamped to `[0, 1]`. Pixels where `Σ d_k²` falls
/// below [`DENOM_EPS`] are treated as unshadowed (matte 1).
pub fn compute_matte(shadow: &ImageBuf, free: &ImageBuf, relit: &ImageBuf) -> Result<Matte> {
    check_dims(shadow.dims(), free.dims())?;
    check_dims(shadow.dims(), relit.dims())?;
    let sd = shadow.data();
    let fd = free.data();
    let rd = relit.data();
    let (w, h) = shadow.dims();
    let mut data = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let mut num = 0.0;
        let mut den = 0.0;
        for c in 0..CHANNELS {
            let j = i * CHANNELS + c;
            let d = sd[j] - rd[j];
            let n = fd[j] - rd[j];
            num += n * d;
            den += d * d;
        }
        let alpha = if den >= DENOM_EPS { num / den } else { 1.0 };
        data.push(alpha.clamp(0.0, 1.0));
    }
    Ok(Matte {
        width: w,
        height: h,
        data,
    })
}

fn blend(front: &ImageBuf, back: &ImageBuf, matte: &Matte) -> Result<ImageBuf> {
    check_dims(front.dims(), back.dims())?;
    check_dims(front.dims(), matte.dims())?;
    let fd = front.data();
    let bd = back.data();
    let (w, h) = front.dims();
    let mut data = Vec::with_capacity(fd.len());
    for (i, &alpha) in matte.data.iter().enumerate() {
        for c in 0..CHANNELS {
            let j = i * CHANNELS + c;
            data.push(fd[j] * alpha + bd[j] * (1.0 - alpha));
        }
    }
    Ok(ImageBuf::from_parts_unchecked(w, h, data))
}

/// Recomposes the shadow-free image: `shadow * α + relit * (1 - α)`.
pub fn recompose(shadow: &ImageBuf, relit: &ImageBuf, matte: &Matte) -> Result<ImageBuf> {
    blend(shadow, relit, matte)
}

/// Forms a shadow image from a shadow-free image and its darkened version:
/// `free * α + darkened * (1 - α)`. Same blend as [`recompose`] with the
/// roles substituted.
pub fn synthesize_shadow(free: &ImageBuf, darkened: &ImageBuf, matte: &Matte) -> Result<ImageBuf> {
    blend(free, darkened, matte)
}
