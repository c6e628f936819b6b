//! Binary mask operations: erosion, thresholding, complement.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::image::MaskBuf;

/// Erodes a binary mask with a square structuring element of side
/// `2 * radius + 1` (Chebyshev distance). Out-of-bounds neighbors count as
/// background, so regions touching the frame edge erode inward.
///
/// Implemented as separable horizontal and vertical passes, which is exact
/// for the square element.
pub fn erode(mask: &MaskBuf, radius: usize) -> Result<MaskBuf> {
    mask.ensure_binary()?;
    if radius == 0 {
        return Ok(mask.clone());
    }
    let (w, h) = mask.dims();
    let src = mask.data();

    // Horizontal pass: 1 iff the whole [x-r, x+r] window is in bounds and set.
    let mut horiz = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let out = &mut horiz[y * w..(y + 1) * w];
        let mut run = 0usize; // consecutive ones ending at x
        for x in 0..w {
            run = if row[x] == 1.0 { run + 1 } else { 0 };
            if x >= 2 * radius && run > 2 * radius {
                out[x - radius] = 1.0;
            }
        }
    }

    // Vertical pass over the horizontal result.
    let mut data = vec![0.0; w * h];
    for x in 0..w {
        let mut run = 0usize;
        for y in 0..h {
            run = if horiz[y * w + x] == 1.0 { run + 1 } else { 0 };
            if y >= 2 * radius && run > 2 * radius {
                data[(y - radius) * w + x] = 1.0;
            }
        }
    }
    Ok(MaskBuf::from_vec(w, h, data).expect("erosion output is binary"))
}

/// Binarizes a probability map: 1 where `prob >= t`, else 0. The comparison
/// is inclusive.
pub fn threshold(prob: &MaskBuf, t: f64) -> MaskBuf {
    let data: Vec<f64> = prob
        .data()
        .iter()
        .map(|&v| if v >= t { 1.0 } else { 0.0 })
        .collect();
    MaskBuf::from_vec(prob.width(), prob.height(), data).expect("threshold output is binary")
}

/// Swaps 0 and 1 in a binary mask.
pub fn complement(mask: &MaskBuf) -> Result<MaskBuf> {
    mask.ensure_binary()?;
    let data: Vec<f64> = mask.data().iter().map(|&v| 1.0 - v).collect();
    Ok(MaskBuf::from_vec(mask.width(), mask.height(), data).expect("complement stays binary"))
}
