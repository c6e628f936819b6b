//! Least-squares estimation of shadow parameters from image pairs.
//!
//! Each RGB channel is fit independently with the closed-form normal
//! equations of simple linear regression, accumulated in double precision.
//! Two degeneracy guards apply per channel: a near-constant regressor falls
//! back to a unit gain with a mean-shift offset, and a fitted gain below
//! [`W_MIN`] is clamped (with the offset refit for the clamped gain). Both
//! events mark the channel degenerate in the returned report.

use crate::error::{Error, Result};
use crate::illumination::{ShadowParams, W_MIN};
use crate::image::{check_dims, ImageBuf, MaskBuf, CHANNELS};
use crate::morphology::erode;

/// Sample-variance threshold below which a channel's regressor is treated as
/// constant.
pub const VARIANCE_EPS: f64 = 1e-8;

/// Mask erosion radius used to drop penumbra pixels before regression.
pub const PENUMBRA_ERODE_RADIUS: usize = 5;

/// Outcome of a per-channel least-squares fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitReport {
    pub params: ShadowParams,
    /// Number of pixels the regression ran over.
    pub pixel_count: usize,
    /// Root-mean-square residual of each channel's fit.
    pub per_channel_residual_rmse: [f64; 3],
    /// Channels where a fallback or clamp was applied.
    pub degenerate_channels: [bool; 3],
}

impl FitReport {
    /// True when any channel needed a fallback or clamp.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_channels.iter().any(|&d| d)
    }
}

/// Fits `free ≈ w * shadow + b` per channel over the pixels where `region`
/// is 1. Requires at least two region pixels.
pub fn fit_params(shadow: &ImageBuf, free: &ImageBuf, region: &MaskBuf) -> Result<FitReport> {
    check_dims(shadow.dims(), free.dims())?;
    check_dims(shadow.dims(), region.dims())?;
    region.ensure_binary()?;

    let selected: alloc::vec::Vec<usize> = region
        .data()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m == 1.0)
        .map(|(i, _)| i)
        .collect();
    let n = selected.len();
    if n < 2 {
        return Err(Error::TooFewSamples {
            found: n,
            required: 2,
        });
    }
    let inv_n = 1.0 / n as f64;

    let sd = shadow.data();
    let fd = free.data();
    let mut w = [0.0; 3];
    let mut b = [0.0; 3];
    let mut residual = [0.0; 3];
    let mut degenerate = [false; 3];

    for k in 0..CHANNELS {
        let mut sum_x = 0.0;
        let mut sum_y = 0.0;
        for &i in &selected {
            sum_x += sd[i * CHANNELS + k];
            sum_y += fd[i * CHANNELS + k];
        }
        let mean_x = sum_x * inv_n;
        let mean_y = sum_y * inv_n;

        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for &i in &selected {
            let dx = sd[i * CHANNELS + k] - mean_x;
            let dy = fd[i * CHANNELS + k] - mean_y;
            sxx += dx * dx;
            sxy += dx * dy;
        }

        let wk = if sxx * inv_n < VARIANCE_EPS {
            degenerate[k] = true;
            1.0
        } else {
            let raw = sxy / sxx;
            if raw < W_MIN {
                degenerate[k] = true;
                W_MIN
            } else {
                raw
            }
        };
        // Offset minimizing the residual for the chosen gain.
        let bk = mean_y - wk * mean_x;
        let mut ss_res = 0.0;
        for &i in &selected {
            let e = fd[i * CHANNELS + k] - wk * sd[i * CHANNELS + k] - bk;
            ss_res += e * e;
        }
        w[k] = wk;
        b[k] = bk;
        residual[k] = libm::sqrt(ss_res * inv_n);
    }

    Ok(FitReport {
        params: ShadowParams { w, b },
        pixel_count: n,
        per_channel_residual_rmse: residual,
        degenerate_channels: degenerate,
    })
}

/// Erodes the shadow mask by [`PENUMBRA_ERODE_RADIUS`] to exclude penumbra
/// pixels, then fits over the remaining umbra region.
pub fn fit_params_from_triplet(
    shadow: &ImageBuf,
    free: &ImageBuf,
    shadow_mask: &MaskBuf,
) -> Result<FitReport> {
    fit_params_from_triplet_with_radius(shadow, free, shadow_mask, PENUMBRA_ERODE_RADIUS)
}

/// [`fit_params_from_triplet`] with an explicit erosion radius. Radius 0
/// regresses over the raw mask.
pub fn fit_params_from_triplet_with_radius(
    shadow: &ImageBuf,
    free: &ImageBuf,
    shadow_mask: &MaskBuf,
    radius: usize,
) -> Result<FitReport> {
    check_dims(shadow.dims(), shadow_mask.dims())?;
    let region = erode(shadow_mask, radius)?;
    if region.data().iter().all(|&v| v == 0.0) {
        return Err(Error::EmptyErodedRegion { radius });
    }
    fit_params(shadow, free, &region)
}

/// Aligns a shadow-free image's tone to its shadow counterpart: fits
/// `shadow ≈ w * free + b` per channel over the complement of the shadow
/// mask (no erosion) and applies the fitted map to every pixel of `free`.
pub fn color_correct_gt(
    shadow: &ImageBuf,
    free: &ImageBuf,
    shadow_mask: &MaskBuf,
) -> Result<ImageBuf> {
    check_dims(shadow.dims(), free.dims())?;
    check_dims(shadow.dims(), shadow_mask.dims())?;
    let region = crate::morphology::complement(shadow_mask)?;
    // Swapped roles: free is the regressor, shadow the target.
    let report = fit_params(free, shadow, &region)?;
    let p = report.params;
    Ok(free.map_channels(|k, v| p.w[k] * v + p.b[k]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::illumination::relight;
    use alloc::vec::Vec;

    fn gradient_image(w: usize, h: usize) -> ImageBuf {
        ImageBuf::from_fn(w, h, |x, y| {
            let t = (x + w * y) as f64 / (w * h - 1) as f64;
            [0.1 + 0.8 * t, 0.9 - 0.7 * t, 0.2 + 0.6 * t * t]
        })
    }

    #[test]
    fn exact_linear_pair_is_recovered() {
        let shadow = gradient_image(32, 32);
        let p = ShadowParams::new([2.0, 1.5, 3.0], [0.05, -0.02, 0.0]).unwrap();
        let free = relight(&shadow, &p).unwrap();
        let region = MaskBuf::filled(32, 32, 1.0).unwrap();
        let report = fit_params(&shadow, &free, &region).unwrap();
        for k in 0..3 {
            assert!((report.params.w[k] - p.w[k]).abs() < 1e-6, "w[{k}]");
            assert!((report.params.b[k] - p.b[k]).abs() < 1e-6, "b[{k}]");
            assert!(report.per_channel_residual_rmse[k] < 1e-9);
            assert!(!report.degenerate_channels[k]);
        }
        assert_eq!(report.pixel_count, 32 * 32);
    }

    #[test]
    fn constant_region_falls_back_to_mean_shift() {
        let shadow = ImageBuf::filled(8, 8, [0.3; 3]);
        let free = ImageBuf::filled(8, 8, [0.5; 3]);
        let region = MaskBuf::filled(8, 8, 1.0).unwrap();
        let report = fit_params(&shadow, &free, &region).unwrap();
        for k in 0..3 {
            assert_eq!(report.params.w[k], 1.0);
            assert!((report.params.b[k] - 0.2).abs() < 1e-12);
            assert!(report.degenerate_channels[k]);
        }
    }

    #[test]
    fn negative_slope_clamps_to_w_min() {
        // free decreasing in shadow forces a negative raw gain.
        let shadow = ImageBuf::from_fn(16, 1, |x, _| [x as f64 / 15.0; 3]);
        let free = ImageBuf::from_fn(16, 1, |x, _| [1.0 - x as f64 / 15.0; 3]);
        let region = MaskBuf::filled(16, 1, 1.0).unwrap();
        let report = fit_params(&shadow, &free, &region).unwrap();
        for k in 0..3 {
            assert_eq!(report.params.w[k], W_MIN);
            assert!(report.degenerate_channels[k]);
        }
        report.params.validate().unwrap();
    }

    #[test]
    fn too_few_samples_rejected() {
        let shadow = ImageBuf::filled(4, 4, [0.3; 3]);
        let free = shadow.clone();
        let region =
            MaskBuf::from_fn(4, 4, |x, y| if (x, y) == (1, 1) { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(
            fit_params(&shadow, &free, &region),
            Err(Error::TooFewSamples {
                found: 1,
                required: 2
            })
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let shadow = ImageBuf::filled(4, 4, [0.3; 3]);
        let free = ImageBuf::filled(4, 5, [0.3; 3]);
        let region = MaskBuf::filled(4, 4, 1.0).unwrap();
        assert!(matches!(
            fit_params(&shadow, &free, &region),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn triplet_fit_uses_eroded_interior() {
        // 20x20 solid square: erosion by 5 keeps the inner 10x10.
        let shadow = gradient_image(40, 40);
        let p = ShadowParams::new([1.8, 2.2, 2.6], [0.01, 0.02, 0.03]).unwrap();
        let free = relight(&shadow, &p).unwrap();
        let mask = MaskBuf::from_fn(40, 40, |x, y| {
            if (10..30).contains(&x) && (10..30).contains(&y) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let report = fit_params_from_triplet(&shadow, &free, &mask).unwrap();
        assert_eq!(report.pixel_count, 100);
        for k in 0..3 {
            assert!((report.params.w[k] - p.w[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn full_mask_fits_over_border_shrunk_frame() {
        let shadow = gradient_image(24, 18);
        let free = shadow.clone();
        let mask = MaskBuf::filled(24, 18, 1.0).unwrap();
        let report = fit_params_from_triplet(&shadow, &free, &mask).unwrap();
        assert_eq!(report.pixel_count, (24 - 10) * (18 - 10));
    }

    #[test]
    fn small_mask_erodes_to_empty() {
        let shadow = gradient_image(32, 32);
        let free = shadow.clone();
        let mask = MaskBuf::from_fn(32, 32, |x, y| {
            if (4..12).contains(&x) && (4..12).contains(&y) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(matches!(
            fit_params_from_triplet(&shadow, &free, &mask),
            Err(Error::EmptyErodedRegion { radius: 5 })
        ));
    }

    #[test]
    fn residual_is_locally_optimal() {
        let shadow = gradient_image(16, 16);
        let noisy_free = shadow.map_channels(|k, v| {
            // Deterministic quasi-noise so the fit is not exact.
            1.7 * v + 0.03 + 0.01 * libm::sin(97.0 * v + k as f64)
        });
        let region = MaskBuf::filled(16, 16, 1.0).unwrap();
        let report = fit_params(&shadow, &noisy_free, &region).unwrap();

        let ss = |w: f64, b: f64, k: usize| -> f64 {
            let sd = shadow.data();
            let fd = noisy_free.data();
            let mut acc = 0.0;
            for i in 0..16 * 16 {
                let e = fd[i * 3 + k] - w * sd[i * 3 + k] - b;
                acc += e * e;
            }
            acc
        };
        for k in 0..3 {
            let (w, b) = (report.params.w[k], report.params.b[k]);
            let base = ss(w, b, k);
            for (dw, db) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
                assert!(ss(w + dw, b + db, k) >= base - 1e-12);
            }
        }
    }

    #[test]
    fn identical_inputs_give_bitwise_identical_reports() {
        let shadow = gradient_image(20, 20);
        let p = ShadowParams::new([2.1, 1.4, 2.9], [0.04, 0.0, -0.01]).unwrap();
        let free = relight(&shadow, &p).unwrap();
        let region = MaskBuf::from_fn(20, 20, |x, y| ((x + y) % 3 == 0) as u8 as f64).unwrap();
        let a = fit_params(&shadow, &free, &region).unwrap();
        let b = fit_params(&shadow, &free, &region).unwrap();
        assert_eq!(a.params.w.map(f64::to_bits), b.params.w.map(f64::to_bits));
        assert_eq!(a.params.b.map(f64::to_bits), b.params.b.map(f64::to_bits));
        assert_eq!(
            a.per_channel_residual_rmse.map(f64::to_bits),
            b.per_channel_residual_rmse.map(f64::to_bits)
        );
    }

    #[test]
    fn color_correct_identity_when_already_aligned() {
        let shadow = gradient_image(20, 20);
        let mask = MaskBuf::from_fn(20, 20, |x, _| (x < 10) as u8 as f64).unwrap();
        let corrected = color_correct_gt(&shadow, &shadow, &mask).unwrap();
        let diffs: Vec<f64> = corrected
            .data()
            .iter()
            .zip(shadow.data())
            .map(|(a, b)| (a - b).abs())
            .collect();
        assert!(diffs.iter().all(|&d| d < 1e-6));
    }

    #[test]
    fn color_correct_inverts_global_affine_drift() {
        let shadow = gradient_image(24, 24);
        let free = shadow.map_channels(|_, v| 0.9 * v + 0.05);
        let mask = MaskBuf::from_fn(24, 24, |_, y| (y < 12) as u8 as f64).unwrap();
        let corrected = color_correct_gt(&shadow, &free, &mask).unwrap();
        for y in 12..24 {
            for x in 0..24 {
                let got = corrected.pixel(x, y);
                let want = shadow.pixel(x, y);
                for c in 0..3 {
                    assert!((got[c] - want[c]).abs() < 1e-6, "({x},{y}) ch {c}");
                }
            }
        }
    }
}
