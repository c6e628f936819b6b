//! Dataset-level evaluation: match result images to triplets by stem,
//! compare each against ground truth, and pool.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shadowdecomp_core::evaluation::{DatasetAccumulator, EvalReport, Metric, PairSums, Pooling};
use shadowdecomp_core::pair_error_sums;

use crate::dataset::{load_binary_mask, SkipNote, TripletRecord};
use crate::error::{AppError, Result};
use crate::io;

#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    pub metric: Metric,
    pub pooling: Pooling,
    pub allow_missing: bool,
    pub mask_threshold: Option<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            metric: Metric::Rmse,
            pooling: Pooling::Pixel,
            allow_missing: false,
            mask_threshold: None,
        }
    }
}

/// Region values for one evaluated image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerImageEval {
    pub id: String,
    pub shadow: f64,
    pub nonshadow: f64,
    pub all: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetEvalOutcome {
    pub report: EvalReport,
    pub per_image: Vec<PerImageEval>,
    /// Triplets without a matching result image (run aborts on these unless
    /// missing results are allowed).
    pub missing: Vec<String>,
    pub failed: Vec<SkipNote>,
}

fn evaluate_one(
    record: &TripletRecord,
    result_path: &Path,
    gt_dir: Option<&Path>,
    cfg: &EvalConfig,
) -> Result<PairSums> {
    let result = io::load_image(result_path)?;
    let gt = match gt_dir {
        Some(dir) => io::load_image(&dir.join(format!("{}.png", record.id)))?,
        None => io::load_image(&record.free_path)?,
    };
    let mask = load_binary_mask(&record.mask_path, cfg.mask_threshold)?;
    Ok(pair_error_sums(&result, &gt, &mask, cfg.metric)?)
}

/// Evaluates a directory of removal results against dataset ground truth.
/// Results are matched to triplets by filename stem. With `gt_dir` set, the
/// ground-truth image is read from there (color-corrected copies) instead of
/// the triplet's own shadow-free path.
pub fn evaluate_dataset(
    results_dir: &Path,
    records: &[TripletRecord],
    gt_dir: Option<&Path>,
    cfg: &EvalConfig,
) -> Result<DatasetEvalOutcome> {
    if !results_dir.is_dir() {
        return Err(AppError::MissingSubdir {
            path: results_dir.to_path_buf(),
        });
    }
    let mut result_paths = Vec::with_capacity(records.len());
    let mut missing = Vec::new();
    for record in records {
        let found = crate::dataset::IMAGE_EXTENSIONS
            .iter()
            .map(|ext| results_dir.join(format!("{}.{ext}", record.id)))
            .find(|p| p.is_file());
        match found {
            Some(path) => result_paths.push(Some(path)),
            None => {
                missing.push(record.id.clone());
                result_paths.push(None);
            }
        }
    }
    if !missing.is_empty() && !cfg.allow_missing {
        return Err(AppError::MissingResults { ids: missing });
    }

    let outcomes: Vec<Option<(String, Result<PairSums>)>> = records
        .par_iter()
        .zip(&result_paths)
        .map(|(record, path)| {
            path.as_ref()
                .map(|p| (record.id.clone(), evaluate_one(record, p, gt_dir, cfg)))
        })
        .collect();

    let mut acc = DatasetAccumulator::new(cfg.metric, cfg.pooling);
    let mut per_image = Vec::new();
    let mut failed = Vec::new();
    for outcome in outcomes.into_iter().flatten() {
        let (id, sums) = outcome;
        match sums {
            Ok(sums) => {
                acc.push(&sums);
                per_image.push(PerImageEval {
                    id,
                    shadow: sums.shadow.value(cfg.metric),
                    nonshadow: sums.nonshadow.value(cfg.metric),
                    all: sums.all().value(cfg.metric),
                });
            }
            Err(e) => failed.push(SkipNote {
                id,
                reason: e.to_string(),
            }),
        }
    }

    Ok(DatasetEvalOutcome {
        report: acc.finalize(),
        per_image,
        missing,
        failed,
    })
}

/// Renders a report as an aligned-column text table.
pub fn format_report_table(report: &EvalReport) -> String {
    let metric = match report.metric_variant {
        Metric::Rmse => "rmse",
        Metric::Mae => "mae",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>12} {:>12}", "region", metric, "pixels");
    let _ = writeln!(
        out,
        "{:<12} {:>12.4} {:>12}",
        "shadow", report.rmse_shadow, report.n_shadow_px
    );
    let _ = writeln!(
        out,
        "{:<12} {:>12.4} {:>12}",
        "non-shadow", report.rmse_nonshadow, report.n_nonshadow_px
    );
    let _ = writeln!(
        out,
        "{:<12} {:>12.4} {:>12}",
        "all",
        report.rmse_all,
        report.n_shadow_px + report.n_nonshadow_px
    );
    out
}

/// Renders per-image rows as CSV with a header line.
pub fn format_per_image_csv(rows: &[PerImageEval]) -> String {
    let mut out = String::from("filename,shadow,nonshadow,all\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            row.id, row.shadow, row.nonshadow, row.all
        );
    }
    out
}
