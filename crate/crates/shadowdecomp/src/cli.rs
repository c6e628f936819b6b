//! Command-line front end: one subcommand per pipeline stage.
//!
//! Exit codes: 0 on success, 1 on I/O or validation failure, 2 when a fit
//! completed but needed a degeneracy fallback (outputs are still written).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use shadowdecomp_core::evaluation::{Metric, Pooling};
use shadowdecomp_core::{
    complement, compute_matte, darken, erode, fit_params_from_triplet_with_radius, recompose,
    relight, synthesize_shadow, FitReport, Matte, PENUMBRA_ERODE_RADIUS,
};

use crate::dataset::{self, AugmentSpec, DirNames};
use crate::error::{AppError, Result};
use crate::evalrun::{self, EvalConfig};
use crate::io;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "shadowdecomp",
    version,
    about = "Shadow image decomposition: fit illumination parameters, extract mattes, \
             remove and synthesize shadows, correct and augment triplet datasets, and \
             evaluate results with masked LAB metrics."
)]
pub struct Cli {
    /// Worker threads for dataset commands (default: SHADOWDECOMP_THREADS,
    /// then all cores). Thread count never changes outputs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write lossless float32 sidecars (.f32, little-endian, row-major)
    /// next to raster outputs.
    #[arg(long, global = true)]
    pub exact: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct DatasetArgs {
    /// Dataset root containing the triplet subdirectories.
    #[arg(long)]
    pub root: PathBuf,

    /// Subdirectory names for shadow,mask,shadow-free images.
    #[arg(long, value_delimiter = ',', default_values = ["A", "B", "C"])]
    pub dirs: Vec<String>,

    /// Binarize masks at this threshold on load (use 0.95 for detector
    /// probability maps). Without it, masks must already be binary.
    #[arg(long)]
    pub mask_threshold: Option<f64>,
}

impl DatasetArgs {
    fn dir_names(&self) -> Result<DirNames> {
        if self.dirs.len() != 3 {
            return Err(AppError::InvalidInput(format!(
                "--dirs needs exactly three comma-separated names, got {}",
                self.dirs.len()
            )));
        }
        Ok(DirNames {
            shadow: self.dirs[0].clone(),
            mask: self.dirs[1].clone(),
            free: self.dirs[2].clone(),
        })
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit shadow parameters from a shadow/shadow-free pair over the eroded
    /// shadow mask; writes a fit report as JSON.
    Fit {
        #[arg(long)]
        shadow: PathBuf,
        #[arg(long)]
        free: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        /// Output JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Mask erosion radius excluding penumbra pixels from the regression.
        #[arg(long, default_value_t = PENUMBRA_ERODE_RADIUS)]
        erode_radius: usize,
        #[arg(long)]
        mask_threshold: Option<f64>,
    },

    /// Apply fitted parameters to a shadow image.
    Relight {
        #[arg(long)]
        shadow: PathBuf,
        /// Params JSON (bare params or a fit report).
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },

    /// Remove the shadow from an image: relight, then blend through a matte.
    ///
    /// Parameters come from --params, or are fit against --free. The matte
    /// comes from --matte, or is computed analytically when --free is given;
    /// with neither, the eroded binary mask is used as the blend (showing
    /// the boundary artifacts a real matte avoids).
    Remove {
        #[arg(long)]
        shadow: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Ground-truth shadow-free image for oracle fitting / analytic matte.
        #[arg(long)]
        free: Option<PathBuf>,
        /// Matte file: 8-bit gray raster or .f32 sidecar.
        #[arg(long)]
        matte: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = PENUMBRA_ERODE_RADIUS)]
        erode_radius: usize,
        #[arg(long)]
        mask_threshold: Option<f64>,
    },

    /// Compute the analytic matte from a shadow/shadow-free pair.
    Matte {
        #[arg(long)]
        shadow: PathBuf,
        #[arg(long)]
        free: PathBuf,
        /// Params JSON; when absent they are fit from the triplet (requires --mask).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Output matte raster (8-bit gray PNG).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = PENUMBRA_ERODE_RADIUS)]
        erode_radius: usize,
        #[arg(long)]
        mask_threshold: Option<f64>,
    },

    /// Synthesize a shadow image from a shadow-free image, parameters, and a
    /// matte.
    Synth {
        #[arg(long)]
        free: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        matte: PathBuf,
        /// Scale every gain by this factor before darkening.
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long)]
        out: PathBuf,
    },

    /// Color-correct every shadow-free image to its shadow image's tone over
    /// the non-shadow region; writes corrected images and a summary JSON.
    CorrectGt {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Output directory for corrected images.
        #[arg(long)]
        out: PathBuf,
        /// Summary JSON path (default: <out>/correction_summary.json).
        #[arg(long)]
        summary: Option<PathBuf>,
    },

    /// Evaluate a directory of removal results against dataset ground truth.
    Evaluate {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Directory of result images named by triplet stem.
        #[arg(long)]
        results: PathBuf,
        /// Read ground truth from this directory (e.g. correct-gt output)
        /// instead of the dataset's shadow-free images.
        #[arg(long)]
        gt_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MetricArg::Rmse)]
        metric: MetricArg,
        #[arg(long, value_enum, default_value_t = PoolingArg::Pixel)]
        pooling: PoolingArg,
        /// Skip triplets without a result image instead of aborting.
        #[arg(long)]
        allow_missing: bool,
        /// Write per-image values as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the pooled report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },

    /// Synthesize gain-scaled shadow images for every triplet.
    Augment {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Output dataset root (mirrors the input layout).
        #[arg(long)]
        out: PathBuf,
        /// Gain scale factors.
        #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.9, 1.1, 1.2])]
        k: Vec<f64>,
        /// Write a params JSON per synthetic image.
        #[arg(long)]
        write_params: bool,
        #[arg(long, default_value_t = PENUMBRA_ERODE_RADIUS)]
        erode_radius: usize,
        /// Summary JSON path (default: <out>/augment_summary.json).
        #[arg(long)]
        summary: Option<PathBuf>,
    },

    /// List the triplets found under a dataset root.
    Scan {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Print the records as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MetricArg {
    Rmse,
    Mae,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Rmse => Metric::Rmse,
            MetricArg::Mae => Metric::Mae,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum PoolingArg {
    Pixel,
    Image,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Pixel => Pooling::Pixel,
            PoolingArg::Image => Pooling::Image,
        }
    }
}

/// Resolves the worker thread count: flag, then SHADOWDECOMP_THREADS.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("SHADOWDECOMP_THREADS") {
        Ok(v) => v.parse::<usize>().map(Some).map_err(|_| {
            AppError::InvalidInput(format!("SHADOWDECOMP_THREADS is not a number: {v}"))
        }),
        Err(_) => Ok(None),
    }
}

fn scan(dataset: &DatasetArgs) -> Result<dataset::ScanReport> {
    let report = dataset::scan_istd(&dataset.root, &dataset.dir_names()?)?;
    for skip in &report.skipped {
        eprintln!(
            "warning: stem '{}' missing in {}",
            skip.stem,
            skip.missing_in.join(", ")
        );
    }
    Ok(report)
}

fn fit_report(
    shadow: &Path,
    free: &Path,
    mask: &Path,
    erode_radius: usize,
    mask_threshold: Option<f64>,
) -> Result<FitReport> {
    let shadow = io::load_image(shadow)?;
    let free = io::load_image(free)?;
    let mask = dataset::load_binary_mask(mask, mask_threshold)?;
    Ok(fit_params_from_triplet_with_radius(
        &shadow,
        &free,
        &mask,
        erode_radius,
    )?)
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Fit {
            shadow,
            free,
            mask,
            out,
            erode_radius,
            mask_threshold,
        } => {
            let report = fit_report(shadow, free, mask, *erode_radius, *mask_threshold)?;
            io::write_json(out, &report)?;
            if report.is_degenerate() {
                eprintln!(
                    "warning: degenerate fit in channel(s) {:?}; report written anyway",
                    degenerate_indices(&report)
                );
                Ok(EXIT_DEGENERATE)
            } else {
                Ok(EXIT_OK)
            }
        }

        Command::Relight {
            shadow,
            params,
            out,
        } => {
            let img = io::load_image(shadow)?;
            let p = io::load_params(params)?;
            let relit = relight(&img, &p)?;
            io::save_image_exact(&relit, out, cli.exact)?;
            Ok(EXIT_OK)
        }

        Command::Remove {
            shadow,
            mask,
            params,
            free,
            matte,
            out,
            erode_radius,
            mask_threshold,
        } => {
            let shadow_img = io::load_image(shadow)?;
            let mask_buf = dataset::load_binary_mask(mask, *mask_threshold)?;
            let free_img = free.as_ref().map(|p| io::load_image(p)).transpose()?;

            let mut degenerate = false;
            let p = match params {
                Some(path) => io::load_params(path)?,
                None => {
                    let free_img = free_img.as_ref().ok_or_else(|| {
                        AppError::InvalidInput(
                            "no parameter source: pass --params or --free".into(),
                        )
                    })?;
                    let report = fit_params_from_triplet_with_radius(
                        &shadow_img,
                        free_img,
                        &mask_buf,
                        *erode_radius,
                    )?;
                    degenerate = report.is_degenerate();
                    report.params
                }
            };
            let relit = relight(&shadow_img, &p)?;

            let matte_buf = match (matte, &free_img) {
                (Some(path), _) => io::load_matte(path, shadow_img.dims())?,
                (None, Some(free_img)) => compute_matte(&shadow_img, free_img, &relit)?,
                (None, None) => {
                    // Binary-mask blend: relight exactly the eroded shadow
                    // region, keep the original elsewhere.
                    let eroded = erode(&mask_buf, *erode_radius)?;
                    Matte::from_mask(&complement(&eroded)?)
                }
            };

            let result = recompose(&shadow_img, &relit, &matte_buf)?;
            io::save_image_exact(&result, out, cli.exact)?;
            Ok(if degenerate { EXIT_DEGENERATE } else { EXIT_OK })
        }

        Command::Matte {
            shadow,
            free,
            params,
            mask,
            out,
            erode_radius,
            mask_threshold,
        } => {
            let shadow_img = io::load_image(shadow)?;
            let free_img = io::load_image(free)?;
            let mut degenerate = false;
            let p = match params {
                Some(path) => io::load_params(path)?,
                None => {
                    let mask = mask.as_ref().ok_or_else(|| {
                        AppError::InvalidInput(
                            "no parameter source: pass --params or --mask to fit".into(),
                        )
                    })?;
                    let report = fit_report(shadow, free, mask, *erode_radius, *mask_threshold)?;
                    degenerate = report.is_degenerate();
                    report.params
                }
            };
            let relit = relight(&shadow_img, &p)?;
            let matte = compute_matte(&shadow_img, &free_img, &relit)?;
            io::save_matte(&matte, out, cli.exact)?;
            Ok(if degenerate { EXIT_DEGENERATE } else { EXIT_OK })
        }

        Command::Synth {
            free,
            params,
            matte,
            k,
            out,
        } => {
            let free_img = io::load_image(free)?;
            let p = io::load_params(params)?.scale_gain(*k)?;
            let matte = io::load_matte(matte, free_img.dims())?;
            let darkened = darken(&free_img, &p)?;
            let synthetic = synthesize_shadow(&free_img, &darkened, &matte)?;
            io::save_image_exact(&synthetic, out, cli.exact)?;
            Ok(EXIT_OK)
        }

        Command::CorrectGt {
            dataset,
            out,
            summary,
        } => {
            let report = scan(dataset)?;
            let summary_path = summary
                .clone()
                .unwrap_or_else(|| out.join("correction_summary.json"));
            let result =
                dataset::correct_dataset(&report.records, out, dataset.mask_threshold, cli.exact)?;
            io::write_json(&summary_path, &result)?;
            println!(
                "corrected {} image(s), {} failed; non-shadow LAB RMSE (pixel pooled) {:.4} -> {:.4}",
                result.corrected,
                result.failed.len(),
                result.aggregate.nonshadow_lab_rmse_before.pixel,
                result.aggregate.nonshadow_lab_rmse_after.pixel,
            );
            for f in &result.failed {
                eprintln!("warning: {}: {}", f.id, f.reason);
            }
            Ok(EXIT_OK)
        }

        Command::Evaluate {
            dataset,
            results,
            gt_dir,
            metric,
            pooling,
            allow_missing,
            csv,
            json,
        } => {
            let report = scan(dataset)?;
            let cfg = EvalConfig {
                metric: (*metric).into(),
                pooling: (*pooling).into(),
                allow_missing: *allow_missing,
                mask_threshold: dataset.mask_threshold,
            };
            let outcome =
                evalrun::evaluate_dataset(results, &report.records, gt_dir.as_deref(), &cfg)?;
            for id in &outcome.missing {
                eprintln!("warning: no result image for '{id}', skipped");
            }
            for f in &outcome.failed {
                eprintln!("warning: {}: {}", f.id, f.reason);
            }
            print!("{}", evalrun::format_report_table(&outcome.report));
            if let Some(path) = csv {
                std::fs::write(path, evalrun::format_per_image_csv(&outcome.per_image)).map_err(
                    |source| AppError::Io {
                        path: path.clone(),
                        source,
                    },
                )?;
            }
            if let Some(path) = json {
                io::write_json(path, &outcome.report)?;
            }
            Ok(EXIT_OK)
        }

        Command::Augment {
            dataset,
            out,
            k,
            write_params,
            erode_radius,
            summary,
        } => {
            let report = scan(dataset)?;
            let spec = AugmentSpec {
                k_factors: k.clone(),
                output_dir: out.clone(),
                write_params: *write_params,
            };
            let summary_path = summary
                .clone()
                .unwrap_or_else(|| out.join("augment_summary.json"));
            let result = dataset::augment_dataset(
                &report.records,
                &spec,
                &dataset.dir_names()?,
                *erode_radius,
                dataset.mask_threshold,
                cli.exact,
            )?;
            io::write_json(&summary_path, &result)?;
            println!(
                "wrote {} synthetic image(s) from {} triplet(s), {} skipped",
                result.images_written,
                result.triplets_in,
                result.skipped.len()
            );
            for s in &result.skipped {
                eprintln!("warning: {}: {}", s.id, s.reason);
            }
            Ok(EXIT_OK)
        }

        Command::Scan { dataset, json } => {
            let report = scan(dataset)?;
            if *json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|source| AppError::Json {
                        path: dataset.root.clone(),
                        source
                    })?
                );
            } else {
                for rec in &report.records {
                    println!("{}", rec.id);
                }
                eprintln!(
                    "{} triplet(s), {} stem(s) skipped",
                    report.records.len(),
                    report.skipped.len()
                );
            }
            Ok(EXIT_OK)
        }
    }
}

fn degenerate_indices(report: &FitReport) -> Vec<usize> {
    report
        .degenerate_channels
        .iter()
        .enumerate()
        .filter(|(_, &d)| d)
        .map(|(i, _)| i)
        .collect()
}
