//! sRGB to CIELAB conversion (D65 white, 2° observer).
//!
//! Pipeline: clamp to `[0, 1]`, sRGB transfer curve (IEC 61966-2-1) to linear
//! RGB, linear RGB to XYZ, XYZ to LAB against the D65 white point. The matrix
//! rows sum exactly to the white point, so gray inputs land on the `a = b = 0`
//! axis up to floating-point noise.

use alloc::vec::Vec;

use crate::image::{ImageBuf, LabBuf, CHANNELS};

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [
        0.412_456_439_089_692_1,
        0.357_576_077_643_909,
        0.180_437_483_266_398_94,
    ],
    [
        0.212_672_851_405_622_48,
        0.715_152_155_287_818,
        0.072_174_993_306_559_58,
    ],
    [
        0.019_333_895_582_329_317,
        0.119_192_025_881_303,
        0.950_304_078_536_367_7,
    ],
];

const D65_WHITE: [f64; 3] = [0.950_47, 1.0, 1.088_83];

const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

/// sRGB transfer curve to linear light; input is clamped to `[0, 1]`.
#[inline]
pub fn srgb_to_linear(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    if c <= 0.04045 {
        c / 12.92
    } else {
        libm::pow((c + 0.055) / 1.055, 2.4)
    }
}

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        libm::cbrt(t)
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

/// Converts one sRGB pixel (clamped to `[0, 1]`) to `(L, a, b)`.
pub fn srgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = [
        srgb_to_linear(rgb[0]),
        srgb_to_linear(rgb[1]),
        srgb_to_linear(rgb[2]),
    ];
    let mut xyz = [0.0; 3];
    for (i, row) in SRGB_TO_XYZ.iter().enumerate() {
        xyz[i] = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / D65_WHITE[0]);
    let fy = lab_f(xyz[1] / D65_WHITE[1]);
    let fz = lab_f(xyz[2] / D65_WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Converts a whole image to LAB, clamping intensities to `[0, 1]` first.
pub fn srgb_to_lab(img: &ImageBuf) -> LabBuf {
    let mut data = Vec::with_capacity(img.data().len());
    for px in img.data().chunks_exact(CHANNELS) {
        let lab = srgb_pixel_to_lab([px[0], px[1], px[2]]);
        data.extend_from_slice(&lab);
    }
    LabBuf::from_parts_unchecked(img.width(), img.height(), data)
}
