//! Triplet dataset handling: directory scanning, ground-truth color
//! correction, and shadow-parameter augmentation.
//!
//! Datasets follow the ISTD layout: three sibling directories holding shadow
//! images, shadow masks, and shadow-free images under shared filename stems.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shadowdecomp_core::evaluation::{Metric, PairSums};
use shadowdecomp_core::{
    color_correct_gt, compute_matte, darken, fit_params_from_triplet_with_radius, pair_error_sums,
    relight, synthesize_shadow, threshold, ImageBuf, MaskBuf,
};

use crate::error::{AppError, Result};
use crate::io;

/// Subdirectory names for the three triplet components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirNames {
    pub shadow: String,
    pub mask: String,
    pub free: String,
}

impl Default for DirNames {
    fn default() -> Self {
        Self {
            shadow: "A".into(),
            mask: "B".into(),
            free: "C".into(),
        }
    }
}

/// One dataset entry: a shared stem and the three files carrying it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TripletRecord {
    pub id: String,
    pub shadow_path: PathBuf,
    pub mask_path: PathBuf,
    pub free_path: PathBuf,
}

/// A stem present in some but not all subdirectories.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SkippedStem {
    pub stem: String,
    pub missing_in: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub records: Vec<TripletRecord>,
    pub skipped: Vec<SkippedStem>,
}

pub(crate) const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Maps every image stem in `dir` to its path. When a stem exists under
/// several extensions the earlier entry in [`IMAGE_EXTENSIONS`] wins.
fn index_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut by_stem: BTreeMap<String, (usize, PathBuf)> = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|source| AppError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| AppError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let Some(ext) = path.extension().and_then(|e| e.to_str()) else {
            continue;
        };
        let Some(rank) = IMAGE_EXTENSIONS
            .iter()
            .position(|e| ext.eq_ignore_ascii_case(e))
        else {
            continue;
        };
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        match by_stem.get(stem) {
            Some((existing, _)) if *existing <= rank => {}
            _ => {
                by_stem.insert(stem.to_string(), (rank, path));
            }
        }
    }
    Ok(by_stem
        .into_iter()
        .map(|(stem, (_, path))| (stem, path))
        .collect())
}

/// Scans an ISTD-layout root for triplets. Stems present in all three
/// subdirectories become records; the rest are reported as skipped.
pub fn scan_istd(root: &Path, dirs: &DirNames) -> Result<ScanReport> {
    let mut indexed = Vec::new();
    for name in [&dirs.shadow, &dirs.mask, &dirs.free] {
        let dir = root.join(name);
        if !dir.is_dir() {
            return Err(AppError::MissingSubdir { path: dir });
        }
        indexed.push((name.clone(), index_stems(&dir)?));
    }

    let mut all_stems: Vec<String> = indexed
        .iter()
        .flat_map(|(_, map)| map.keys().cloned())
        .collect();
    all_stems.sort();
    all_stems.dedup();

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for stem in all_stems {
        let missing: Vec<String> = indexed
            .iter()
            .filter(|(_, map)| !map.contains_key(&stem))
            .map(|(name, _)| name.clone())
            .collect();
        if missing.is_empty() {
            records.push(TripletRecord {
                id: stem.clone(),
                shadow_path: indexed[0].1[&stem].clone(),
                mask_path: indexed[1].1[&stem].clone(),
                free_path: indexed[2].1[&stem].clone(),
            });
        } else {
            skipped.push(SkippedStem {
                stem,
                missing_in: missing,
            });
        }
    }
    Ok(ScanReport { records, skipped })
}

/// Loads a mask, optionally binarizing a probability map at `threshold_at`,
/// and verifies the result is binary.
pub fn load_binary_mask(path: &Path, threshold_at: Option<f64>) -> Result<MaskBuf> {
    let mask = io::load_mask(path)?;
    let mask = match threshold_at {
        Some(t) => threshold(&mask, t),
        None => mask,
    };
    if !mask.is_binary() {
        return Err(AppError::InvalidInput(format!(
            "{}: mask is not binary; pass --mask-threshold to binarize it",
            path.display()
        )));
    }
    Ok(mask)
}

fn load_triplet(
    record: &TripletRecord,
    mask_threshold: Option<f64>,
) -> Result<(ImageBuf, MaskBuf, ImageBuf)> {
    let shadow = io::load_image(&record.shadow_path)?;
    let mask = load_binary_mask(&record.mask_path, mask_threshold)?;
    let free = io::load_image(&record.free_path)?;
    Ok((shadow, mask, free))
}

/// A failed record with the reason it was skipped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkipNote {
    pub id: String,
    pub reason: String,
}

/// Root-mean-square RGB distance over the pixels where `mask == mask_value`,
/// at native resolution, in normalized intensity units.
fn rgb_region_rms(a: &ImageBuf, b: &ImageBuf, mask: &MaskBuf, mask_value: f64) -> (f64, u64) {
    let mut sq = 0.0;
    let mut n = 0u64;
    for (i, &m) in mask.data().iter().enumerate() {
        if m == mask_value {
            for c in 0..3 {
                let d = a.data()[i * 3 + c] - b.data()[i * 3 + c];
                sq += d * d;
            }
            n += 1;
        }
    }
    let rms = if n == 0 {
        f64::NAN
    } else {
        (sq / (3.0 * n as f64)).sqrt()
    };
    (rms, n)
}

/// Non-shadow distances between a shadow image and a ground-truth candidate,
/// measured two ways: RGB RMS at native resolution (the quantity the
/// correction regression minimizes) and the LAB evaluation-protocol RMSE.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NonShadowDistance {
    pub rgb_rms: f64,
    pub lab_rmse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectionImageStats {
    pub id: String,
    pub before: NonShadowDistance,
    pub after: NonShadowDistance,
}

/// A value under both dataset pooling modes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Pooled {
    pub pixel: f64,
    pub image: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectionAggregate {
    pub nonshadow_rgb_rms_before: Pooled,
    pub nonshadow_rgb_rms_after: Pooled,
    pub nonshadow_lab_rmse_before: Pooled,
    pub nonshadow_lab_rmse_after: Pooled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectionSummary {
    pub corrected: usize,
    pub failed: Vec<SkipNote>,
    pub aggregate: CorrectionAggregate,
    pub per_image: Vec<CorrectionImageStats>,
}

struct CorrectionMeasurements {
    stats: CorrectionImageStats,
    rgb_before: (f64, u64),
    rgb_after: (f64, u64),
    lab_before: PairSums,
    lab_after: PairSums,
}

fn correct_one(
    record: &TripletRecord,
    output_dir: &Path,
    mask_threshold: Option<f64>,
    exact: bool,
) -> Result<CorrectionMeasurements> {
    let (shadow, mask, free) = load_triplet(record, mask_threshold)?;
    let corrected = color_correct_gt(&shadow, &free, &mask)?;

    let rgb_before = rgb_region_rms(&free, &shadow, &mask, 0.0);
    let rgb_after = rgb_region_rms(&corrected, &shadow, &mask, 0.0);
    let lab_before = pair_error_sums(&shadow, &free, &mask, Metric::Rmse)?;
    let lab_after = pair_error_sums(&shadow, &corrected, &mask, Metric::Rmse)?;

    io::save_image_exact(
        &corrected,
        &output_dir.join(format!("{}.png", record.id)),
        exact,
    )?;

    Ok(CorrectionMeasurements {
        stats: CorrectionImageStats {
            id: record.id.clone(),
            before: NonShadowDistance {
                rgb_rms: rgb_before.0,
                lab_rmse: lab_before.nonshadow.value(Metric::Rmse),
            },
            after: NonShadowDistance {
                rgb_rms: rgb_after.0,
                lab_rmse: lab_after.nonshadow.value(Metric::Rmse),
            },
        },
        rgb_before,
        rgb_after,
        lab_before,
        lab_after,
    })
}

/// Writes color-corrected ground-truth images for every triplet and reports
/// the per-image and pooled non-shadow distances before and after. Per-record
/// failures are collected; the run continues.
pub fn correct_dataset(
    records: &[TripletRecord],
    output_dir: &Path,
    mask_threshold: Option<f64>,
    exact: bool,
) -> Result<CorrectionSummary> {
    fs::create_dir_all(output_dir).map_err(|source| AppError::Io {
        path: output_dir.to_path_buf(),
        source,
    })?;

    let outcomes: Vec<(String, Result<CorrectionMeasurements>)> = records
        .par_iter()
        .map(|rec| {
            (
                rec.id.clone(),
                correct_one(rec, output_dir, mask_threshold, exact),
            )
        })
        .collect();

    let mut per_image = Vec::new();
    let mut failed = Vec::new();
    // Pixel-pooled accumulators.
    let mut rgb_sq = [0.0f64; 2];
    let mut rgb_n = 0u64;
    let mut lab = [shadowdecomp_core::evaluation::RegionSums::default(); 2];
    // Image-pooled accumulators.
    let mut rgb_mean = [0.0f64; 2];
    let mut lab_mean = [0.0f64; 2];
    let mut n_images = 0u64;

    for (id, outcome) in outcomes {
        match outcome {
            Ok(m) => {
                if m.rgb_before.1 > 0 && m.lab_before.nonshadow.px > 0 {
                    rgb_sq[0] += m.rgb_before.0.powi(2) * 3.0 * m.rgb_before.1 as f64;
                    rgb_sq[1] += m.rgb_after.0.powi(2) * 3.0 * m.rgb_after.1 as f64;
                    rgb_n += m.rgb_before.1;
                    lab[0].err_sum += m.lab_before.nonshadow.err_sum;
                    lab[0].px += m.lab_before.nonshadow.px;
                    lab[1].err_sum += m.lab_after.nonshadow.err_sum;
                    lab[1].px += m.lab_after.nonshadow.px;
                    rgb_mean[0] += m.rgb_before.0;
                    rgb_mean[1] += m.rgb_after.0;
                    lab_mean[0] += m.stats.before.lab_rmse;
                    lab_mean[1] += m.stats.after.lab_rmse;
                    n_images += 1;
                }
                per_image.push(m.stats);
            }
            Err(e) => failed.push(SkipNote {
                id,
                reason: e.to_string(),
            }),
        }
    }

    let pixel_rms = |sq: f64, n: u64| {
        if n == 0 {
            f64::NAN
        } else {
            (sq / (3.0 * n as f64)).sqrt()
        }
    };
    let image_mean = |sum: f64| {
        if n_images == 0 {
            f64::NAN
        } else {
            sum / n_images as f64
        }
    };
    let aggregate = CorrectionAggregate {
        nonshadow_rgb_rms_before: Pooled {
            pixel: pixel_rms(rgb_sq[0], rgb_n),
            image: image_mean(rgb_mean[0]),
        },
        nonshadow_rgb_rms_after: Pooled {
            pixel: pixel_rms(rgb_sq[1], rgb_n),
            image: image_mean(rgb_mean[1]),
        },
        nonshadow_lab_rmse_before: Pooled {
            pixel: lab[0].value(Metric::Rmse),
            image: image_mean(lab_mean[0]),
        },
        nonshadow_lab_rmse_after: Pooled {
            pixel: lab[1].value(Metric::Rmse),
            image: image_mean(lab_mean[1]),
        },
    };

    Ok(CorrectionSummary {
        corrected: per_image.len(),
        failed,
        aggregate,
        per_image,
    })
}

/// Gain-scaling augmentation plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub k_factors: Vec<f64>,
    pub output_dir: PathBuf,
    pub write_params: bool,
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_factors.is_empty() {
            return Err(AppError::InvalidInput("no k factors given".into()));
        }
        if self.k_factors.iter().any(|&k| !k.is_finite() || k <= 0.0) {
            return Err(AppError::InvalidInput(
                "k factors must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters actually used for one synthetic image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub id: String,
    pub w: [f64; 3],
    pub b: [f64; 3],
    pub k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub triplets_in: usize,
    pub images_written: usize,
    pub skipped: Vec<SkipNote>,
}

fn format_k(k: f64) -> String {
    format!("{k}")
}

fn copy_with_suffix(src: &Path, out_dir: &Path, id: &str, k: f64) -> Result<PathBuf> {
    let ext = src.extension().and_then(|e| e.to_str()).unwrap_or("png");
    let dest = out_dir.join(format!("{id}_k{}.{ext}", format_k(k)));
    fs::copy(src, &dest).map_err(|source| AppError::Io {
        path: dest.clone(),
        source,
    })?;
    Ok(dest)
}

struct TripletOutcome {
    written: usize,
    skipped: Vec<SkipNote>,
}

fn augment_one(
    record: &TripletRecord,
    spec: &AugmentSpec,
    dirs: &DirNames,
    erode_radius: usize,
    mask_threshold: Option<f64>,
    exact: bool,
) -> Result<TripletOutcome> {
    let (shadow, mask, free) = load_triplet(record, mask_threshold)?;
    let report = fit_params_from_triplet_with_radius(&shadow, &free, &mask, erode_radius)?;
    let params = report.params;
    let relit = relight(&shadow, &params)?;
    let matte = compute_matte(&shadow, &free, &relit)?;

    let mut written = 0;
    let mut skipped = Vec::new();
    for &k in &spec.k_factors {
        let scaled = match params.scale_gain(k) {
            Ok(p) => p,
            Err(e) => {
                skipped.push(SkipNote {
                    id: format!("{}_k{}", record.id, format_k(k)),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let darkened = darken(&free, &scaled)?;
        let synthetic = synthesize_shadow(&free, &darkened, &matte)?;
        let out_name = format!("{}_k{}.png", record.id, format_k(k));
        io::save_image_exact(
            &synthetic,
            &spec.output_dir.join(&dirs.shadow).join(&out_name),
            exact,
        )?;
        copy_with_suffix(
            &record.mask_path,
            &spec.output_dir.join(&dirs.mask),
            &record.id,
            k,
        )?;
        copy_with_suffix(
            &record.free_path,
            &spec.output_dir.join(&dirs.free),
            &record.id,
            k,
        )?;
        if spec.write_params {
            let doc = SyntheticParams {
                id: format!("{}_k{}", record.id, format_k(k)),
                w: scaled.w,
                b: scaled.b,
                k,
            };
            io::write_json(
                &spec.output_dir.join("params").join(format!(
                    "{}_k{}.json",
                    record.id,
                    format_k(k)
                )),
                &doc,
            )?;
        }
        written += 1;
    }
    Ok(TripletOutcome { written, skipped })
}

/// Synthesizes gain-scaled shadow images for every triplet. Each triplet is
/// fit once; its matte is reused across all `k` factors. Output mirrors the
/// input layout with `_k<factor>` stem suffixes; inputs are never modified.
pub fn augment_dataset(
    records: &[TripletRecord],
    spec: &AugmentSpec,
    dirs: &DirNames,
    erode_radius: usize,
    mask_threshold: Option<f64>,
    exact: bool,
) -> Result<AugmentSummary> {
    spec.validate()?;
    for sub in [&dirs.shadow, &dirs.mask, &dirs.free] {
        let dir = spec.output_dir.join(sub);
        fs::create_dir_all(&dir).map_err(|source| AppError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    if spec.write_params {
        let dir = spec.output_dir.join("params");
        fs::create_dir_all(&dir).map_err(|source| AppError::Io {
            path: dir.clone(),
            source,
        })?;
    }

    let outcomes: Vec<(String, Result<TripletOutcome>)> = records
        .par_iter()
        .map(|rec| {
            (
                rec.id.clone(),
                augment_one(rec, spec, dirs, erode_radius, mask_threshold, exact),
            )
        })
        .collect();

    let mut summary = AugmentSummary {
        triplets_in: records.len(),
        images_written: 0,
        skipped: Vec::new(),
    };
    for (id, outcome) in outcomes {
        match outcome {
            Ok(t) => {
                summary.images_written += t.written;
                summary.skipped.extend(t.skipped);
            }
            Err(e) => summary.skipped.push(SkipNote {
                id,
                reason: e.to_string(),
            }),
        }
    }
    Ok(summary)
}
