//! Quantitative comparison of removal results against ground truth.
//!
//! Both images are resized to 256x256 (bilinear; the mask with nearest
//! neighbor), clamped, converted to LAB, and compared per channel over the
//! shadow region, its complement, and the whole frame. The reported value
//! divides by channels times pixels, which makes the three region values
//! satisfy an exact consistency identity and keeps dataset pooling auditable.

use alloc::format;
use alloc::string::String;

use crate::color::srgb_to_lab;
use crate::error::Result;
use crate::image::{resize_bilinear, resize_mask_nearest, ImageBuf, MaskBuf, CHANNELS};

/// Side length both images are resampled to before comparison.
pub const EVAL_SIZE: usize = 256;

/// Which per-channel error the report aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Metric {
    /// Root of the mean squared LAB difference.
    Rmse,
    /// Mean absolute LAB difference, for comparison with evaluation scripts
    /// that report it under the RMSE name.
    Mae,
}

/// How per-image errors combine across a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Pooling {
    /// Accumulate errors and counts over all pixels of all images before
    /// the mean and root.
    Pixel,
    /// Average the per-image values.
    Image,
}

/// Accumulated error and pixel count for one region.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegionSums {
    /// Sum over pixels and channels of the squared (RMSE) or absolute (MAE)
    /// difference.
    pub err_sum: f64,
    pub px: u64,
}

impl RegionSums {
    fn merged(self, other: Self) -> Self {
        Self {
            err_sum: self.err_sum + other.err_sum,
            px: self.px + other.px,
        }
    }

    /// Mean error per channel sample; NaN for an empty region.
    pub fn mean(&self) -> f64 {
        if self.px == 0 {
            f64::NAN
        } else {
            self.err_sum / (CHANNELS as f64 * self.px as f64)
        }
    }

    /// The reported value for this region under `metric`.
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Rmse => libm::sqrt(self.mean()),
            Metric::Mae => self.mean(),
        }
    }
}

/// Per-region error sums for a single result/ground-truth pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSums {
    pub shadow: RegionSums,
    pub nonshadow: RegionSums,
}

impl PairSums {
    pub fn all(&self) -> RegionSums {
        self.shadow.merged(self.nonshadow)
    }
}

/// Region error values plus the bookkeeping needed to audit them.
///
/// An empty region reports NaN rather than a silent zero. Under the MAE
/// variant the `rmse_*` fields hold mean absolute differences.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub rmse_shadow: f64,
    pub rmse_nonshadow: f64,
    pub rmse_all: f64,
    pub n_shadow_px: u64,
    pub n_nonshadow_px: u64,
    pub metric_variant: Metric,
    pub notes: String,
}

fn base_notes() -> String {
    format!(
        "inputs assumed sRGB; LAB with D65 white; resized to {EVAL_SIZE}x{EVAL_SIZE} \
         (bilinear images, nearest-neighbor mask)"
    )
}

/// Computes per-region error sums for one pair at the evaluation size.
pub fn pair_error_sums(
    result: &ImageBuf,
    gt: &ImageBuf,
    shadow_mask: &MaskBuf,
    metric: Metric,
) -> Result<PairSums> {
    shadow_mask.ensure_binary()?;
    let result = resize_bilinear(result, EVAL_SIZE, EVAL_SIZE)?;
    let gt = resize_bilinear(gt, EVAL_SIZE, EVAL_SIZE)?;
    let mask = resize_mask_nearest(shadow_mask, EVAL_SIZE, EVAL_SIZE)?;

    let result_lab = srgb_to_lab(&result);
    let gt_lab = srgb_to_lab(&gt);

    let mut shadow = RegionSums::default();
    let mut nonshadow = RegionSums::default();
    let rd = result_lab.data();
    let gd = gt_lab.data();
    for (i, &m) in mask.data().iter().enumerate() {
        let mut err = 0.0;
        for c in 0..CHANNELS {
            let d = rd[i * CHANNELS + c] - gd[i * CHANNELS + c];
            err += match metric {
                Metric::Rmse => d * d,
                Metric::Mae => d.abs(),
            };
        }
        let region = if m == 1.0 {
            &mut shadow
        } else {
            &mut nonshadow
        };
        region.err_sum += err;
        region.px += 1;
    }
    Ok(PairSums { shadow, nonshadow })
}

/// Evaluates one result against its ground truth over the shadow region,
/// the non-shadow region, and the whole frame.
pub fn evaluate_pair(
    result: &ImageBuf,
    gt: &ImageBuf,
    shadow_mask: &MaskBuf,
    metric: Metric,
) -> Result<EvalReport> {
    let sums = pair_error_sums(result, gt, shadow_mask, metric)?;
    Ok(EvalReport {
        rmse_shadow: sums.shadow.value(metric),
        rmse_nonshadow: sums.nonshadow.value(metric),
        rmse_all: sums.all().value(metric),
        n_shadow_px: sums.shadow.px,
        n_nonshadow_px: sums.nonshadow.px,
        metric_variant: metric,
        notes: base_notes(),
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct ImagePoolRegion {
    value_sum: f64,
    /// Images whose region was non-empty.
    images: u64,
}

impl ImagePoolRegion {
    fn push(&mut self, sums: RegionSums, metric: Metric) {
        if sums.px > 0 {
            self.value_sum += sums.value(metric);
            self.images += 1;
        }
    }

    fn mean(&self) -> f64 {
        if self.images == 0 {
            f64::NAN
        } else {
            self.value_sum / self.images as f64
        }
    }
}

/// Order-independent accumulator for dataset-level evaluation.
#[derive(Debug, Clone)]
pub struct DatasetAccumulator {
    metric: Metric,
    pooling: Pooling,
    pixel_shadow: RegionSums,
    pixel_nonshadow: RegionSums,
    image_shadow: ImagePoolRegion,
    image_nonshadow: ImagePoolRegion,
    image_all: ImagePoolRegion,
    n_pairs: u64,
}

impl DatasetAccumulator {
    pub fn new(metric: Metric, pooling: Pooling) -> Self {
        Self {
            metric,
            pooling,
            pixel_shadow: RegionSums::default(),
            pixel_nonshadow: RegionSums::default(),
            image_shadow: ImagePoolRegion::default(),
            image_nonshadow: ImagePoolRegion::default(),
            image_all: ImagePoolRegion::default(),
            n_pairs: 0,
        }
    }

    pub fn push(&mut self, sums: &PairSums) {
        self.pixel_shadow = self.pixel_shadow.merged(sums.shadow);
        self.pixel_nonshadow = self.pixel_nonshadow.merged(sums.nonshadow);
        self.image_shadow.push(sums.shadow, self.metric);
        self.image_nonshadow.push(sums.nonshadow, self.metric);
        self.image_all.push(sums.all(), self.metric);
        self.n_pairs += 1;
    }

    pub fn n_pairs(&self) -> u64 {
        self.n_pairs
    }

    pub fn finalize(&self) -> EvalReport {
        let (shadow, nonshadow, all) = match self.pooling {
            Pooling::Pixel => (
                self.pixel_shadow.value(self.metric),
                self.pixel_nonshadow.value(self.metric),
                self.pixel_shadow
                    .merged(self.pixel_nonshadow)
                    .value(self.metric),
            ),
            Pooling::Image => (
                self.image_shadow.mean(),
                self.image_nonshadow.mean(),
                self.image_all.mean(),
            ),
        };
        let pooling_note = match self.pooling {
            Pooling::Pixel => "pixel pooling",
            Pooling::Image => "image pooling (mean of per-image values)",
        };
        EvalReport {
            rmse_shadow: shadow,
            rmse_nonshadow: nonshadow,
            rmse_all: all,
            n_shadow_px: self.pixel_shadow.px,
            n_nonshadow_px: self.pixel_nonshadow.px,
            metric_variant: self.metric,
            notes: format!(
                "{}; {} over {} images",
                base_notes(),
                pooling_note,
                self.n_pairs
            ),
        }
    }
}
