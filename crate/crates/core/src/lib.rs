//! Shadow image decomposition primitives.
//!
//! A shadow-free image is modeled as a per-pixel blend of the shadow image
//! and a *relit* image, where relighting is a per-channel linear gain/offset
//! transform fit between shadow and shadow-free pairs. This crate carries the
//! pure algorithmic core of that system:
//!
//! - [`image`]: float image/mask containers, 8-bit quantization rules, and
//!   the bilinear/nearest resampling used by evaluation.
//! - [`color`]: sRGB to CIELAB conversion (D65).
//! - [`illumination`]: the linear model applied forward ([`relight`]) and
//!   inverse ([`darken`]).
//! - [`fitting`]: least-squares parameter estimation and ground-truth color
//!   correction.
//! - [`decomposition`]: matte extraction and the blend operations that
//!   remove or synthesize shadows.
//! - [`morphology`]: binary mask erosion, thresholding, complement.
//! - [`evaluation`]: masked LAB error metrics with dataset pooling.
//!
//! The crate is `no_std` (with `alloc`); file formats, directory handling,
//! and the CLI live in the companion `shadowdecomp` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod color;
pub mod decomposition;
pub mod error;
pub mod evaluation;
pub mod fitting;
pub mod illumination;
pub mod image;
pub mod morphology;

pub use color::srgb_to_lab;
pub use decomposition::{compute_matte, recompose, synthesize_shadow, Matte, DENOM_EPS};
pub use error::{Error, Result};
pub use evaluation::{
    evaluate_pair, pair_error_sums, DatasetAccumulator, EvalReport, Metric, PairSums, Pooling,
    EVAL_SIZE,
};
pub use fitting::{
    color_correct_gt, fit_params, fit_params_from_triplet, fit_params_from_triplet_with_radius,
    FitReport, PENUMBRA_ERODE_RADIUS, VARIANCE_EPS,
};
pub use illumination::{darken, relight, ShadowParams, W_MIN};
pub use image::{resize_bilinear, resize_mask_nearest, ImageBuf, LabBuf, MaskBuf};
pub use morphology::{complement, erode, threshold};
