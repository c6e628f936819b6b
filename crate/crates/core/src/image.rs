//! Image and mask containers plus the resampling used by evaluation.
//!
//! `ImageBuf` stores interleaved RGB as `f64` in a nominal `[0, 1]` range.
//! Values are allowed to leave that range between operations (relit images
//! overshoot by design); clamping happens only at 8-bit quantization and
//! before LAB conversion. `MaskBuf` stores one scalar per pixel in `[0, 1]`;
//! a *binary* mask additionally restricts values to exactly 0 or 1.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Number of interleaved channels in an [`ImageBuf`].
pub const CHANNELS: usize = 3;

/// Maps an 8-bit sample to its normalized intensity, `v / 255` exactly.
#[inline]
pub fn dequantize(v: u8) -> f64 {
    f64::from(v) / 255.0
}

/// Maps a normalized intensity to 8 bits: clamp to `[0, 1]`, then
/// `round(v * 255)` with ties away from zero.
#[inline]
pub fn quantize(v: f64) -> u8 {
    let c = v.clamp(0.0, 1.0);
    libm::round(c * 255.0) as u8
}

fn ensure_finite(data: &[f64]) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteValue)
    }
}

pub(crate) fn check_dims(expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Three-channel floating-point raster, interleaved RGB, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageBuf {
    /// Builds an image from interleaved RGB data. Rejects length mismatches
    /// and non-finite values.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let expected = width * height * CHANNELS;
        if data.len() != expected {
            return Err(Error::BadBufferLength {
                expected,
                got: data.len(),
            });
        }
        ensure_finite(&data)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: usize, height: usize, value: [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * CHANNELS);
        for _ in 0..width * height {
            data.extend_from_slice(&value);
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Decodes interleaved 8-bit RGB bytes; each sample maps to `v / 255`.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let expected = width * height * CHANNELS;
        if bytes.len() != expected {
            return Err(Error::BadBufferLength {
                expected,
                got: bytes.len(),
            });
        }
        let data = bytes.iter().map(|&v| dequantize(v)).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Encodes to interleaved 8-bit RGB, clamping to `[0, 1]` first.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
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

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Applies `f(channel, value)` to every sample, producing a new image.
    /// The closure must return finite values.
    pub(crate) fn map_channels(&self, mut f: impl FnMut(usize, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for (i, &v) in self.data.iter().enumerate() {
            data.push(f(i % CHANNELS, v));
        }
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * CHANNELS);
        Self {
            width,
            height,
            data,
        }
    }
}

/// Single-channel raster with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskBuf {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl MaskBuf {
    /// Builds a mask from per-pixel scalars. Rejects length mismatches and
    /// values outside `[0, 1]`.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let expected = width * height;
        if data.len() != expected {
            return Err(Error::BadBufferLength {
                expected,
                got: data.len(),
            });
        }
        ensure_finite(&data)?;
        if data.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::MaskValueOutOfRange);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::from_vec(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, data)
    }

    /// Decodes 8-bit gray bytes; each sample maps to `v / 255`.
    pub fn from_gray8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let expected = width * height;
        if bytes.len() != expected {
            return Err(Error::BadBufferLength {
                expected,
                got: bytes.len(),
            });
        }
        let data = bytes.iter().map(|&v| dequantize(v)).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn to_gray8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
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

    /// True when every value is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub(crate) fn ensure_binary(&self) -> Result<()> {
        if self.is_binary() {
            Ok(())
        } else {
            Err(Error::NonBinaryMask)
        }
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }
}

/// Per-pixel CIELAB triples: `L` in `[0, 100]`, `a`/`b` signed.
#[derive(Debug, Clone, PartialEq)]
pub struct LabBuf {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl LabBuf {
    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * CHANNELS);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Source coordinate for an output sample under half-pixel-center mapping,
/// clamped into the valid source range.
#[inline]
fn source_coord(out_idx: usize, scale: f64, in_len: usize) -> f64 {
    let s = (out_idx as f64 + 0.5) * scale - 0.5;
    s.clamp(0.0, (in_len - 1) as f64)
}

/// Bilinear resampling with half-pixel-center coordinate mapping. Output
/// values are convex combinations of input samples, so constant images stay
/// constant and global bounds are preserved.
pub fn resize_bilinear(img: &ImageBuf, out_w: usize, out_h: usize) -> Result<ImageBuf> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::ZeroTargetDimension);
    }
    let (w, h) = img.dims();
    if (w, h) == (out_w, out_h) {
        return Ok(img.clone());
    }
    let scale_x = w as f64 / out_w as f64;
    let scale_y = h as f64 / out_h as f64;
    let src = img.data();
    let mut data = Vec::with_capacity(out_w * out_h * CHANNELS);
    for oy in 0..out_h {
        let sy = source_coord(oy, scale_y, h);
        let y0 = sy as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = sy - y0 as f64;
        for ox in 0..out_w {
            let sx = source_coord(ox, scale_x, w);
            let x0 = sx as usize;
            let x1 = (x0 + 1).min(w - 1);
            let fx = sx - x0 as f64;
            let i00 = (y0 * w + x0) * CHANNELS;
            let i10 = (y0 * w + x1) * CHANNELS;
            let i01 = (y1 * w + x0) * CHANNELS;
            let i11 = (y1 * w + x1) * CHANNELS;
            for c in 0..CHANNELS {
                let top = lerp(src[i00 + c], src[i10 + c], fx);
                let bottom = lerp(src[i01 + c], src[i11 + c], fx);
                data.push(lerp(top, bottom, fy));
            }
        }
    }
    Ok(ImageBuf::from_parts_unchecked(out_w, out_h, data))
}

/// Nearest-neighbor resampling; the output value set is a subset of the
/// input's, so binary masks stay binary.
pub fn resize_mask_nearest(mask: &MaskBuf, out_w: usize, out_h: usize) -> Result<MaskBuf> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::ZeroTargetDimension);
    }
    let (w, h) = mask.dims();
    if (w, h) == (out_w, out_h) {
        return Ok(mask.clone());
    }
    let scale_x = w as f64 / out_w as f64;
    let scale_y = h as f64 / out_h as f64;
    let src = mask.data();
    let mut data = Vec::with_capacity(out_w * out_h);
    for oy in 0..out_h {
        let sy = (libm::floor((oy as f64 + 0.5) * scale_y) as usize).min(h - 1);
        for ox in 0..out_w {
            let sx = (libm::floor((ox as f64 + 0.5) * scale_x) as usize).min(w - 1);
            data.push(src[sy * w + sx]);
        }
    }
    Ok(MaskBuf::from_parts_unchecked(out_w, out_h, data))
}
