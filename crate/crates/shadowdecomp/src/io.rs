//! File I/O: 8-bit image and mask rasters, float32 sidecars, JSON documents.
//!
//! Images are 8-bit RGB (PNG, with JPEG accepted); masks may be single
//! channel or RGB, in which case channel 0 is used. The `--exact` sidecar
//! format is headerless little-endian `f32`, row-major, one sample per
//! channel; dimensions come from the raster it accompanies.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, RgbImage};
use serde::de::DeserializeOwned;
use serde::Serialize;
use shadowdecomp_core::{ImageBuf, MaskBuf, Matte, ShadowParams};

use crate::error::{AppError, Result};

fn open_dynamic(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| AppError::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AppError + '_ {
    move |source| AppError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn color_name(img: &DynamicImage) -> &'static str {
    match img {
        DynamicImage::ImageLuma8(_) => "8-bit gray",
        DynamicImage::ImageLumaA8(_) => "8-bit gray+alpha",
        DynamicImage::ImageRgb8(_) => "8-bit RGB",
        DynamicImage::ImageRgba8(_) => "8-bit RGBA",
        DynamicImage::ImageLuma16(_) => "16-bit gray",
        DynamicImage::ImageRgb16(_) => "16-bit RGB",
        _ => "unsupported pixel format",
    }
}

/// Loads an 8-bit RGB image; each sample maps to `v / 255`.
pub fn load_image(path: &Path) -> Result<ImageBuf> {
    let dynamic = open_dynamic(path)?;
    match dynamic {
        DynamicImage::ImageRgb8(rgb) => {
            let (w, h) = rgb.dimensions();
            Ok(ImageBuf::from_rgb8(w as usize, h as usize, rgb.as_raw())?)
        }
        other => Err(AppError::NotRgb8 {
            path: path.to_path_buf(),
            found: color_name(&other),
        }),
    }
}

/// Saves an image as 8-bit RGB, clamping to `[0, 1]` and rounding ties away
/// from zero. Format follows the extension (PNG unless told otherwise).
pub fn save_image(img: &ImageBuf, path: &Path) -> Result<()> {
    let raster = RgbImage::from_raw(img.width() as u32, img.height() as u32, img.to_rgb8())
        .expect("raster dimensions match buffer");
    raster.save(path).map_err(|source| AppError::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a mask from a single-channel or RGB raster, using channel 0.
pub fn load_mask(path: &Path) -> Result<MaskBuf> {
    let dynamic = open_dynamic(path)?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let bytes: Vec<u8> = match &dynamic {
        DynamicImage::ImageLuma8(gray) => gray.as_raw().clone(),
        DynamicImage::ImageRgb8(rgb) => rgb.as_raw().iter().step_by(3).copied().collect(),
        DynamicImage::ImageLumaA8(g) => g.as_raw().iter().step_by(2).copied().collect(),
        DynamicImage::ImageRgba8(rgba) => rgba.as_raw().iter().step_by(4).copied().collect(),
        other => {
            return Err(AppError::NotRgb8 {
                path: path.to_path_buf(),
                found: color_name(other),
            })
        }
    };
    Ok(MaskBuf::from_gray8(w, h, &bytes)?)
}

pub fn save_mask(mask: &MaskBuf, path: &Path) -> Result<()> {
    let raster = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, mask.to_gray8())
        .expect("raster dimensions match buffer");
    raster.save(path).map_err(|source| AppError::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// The sidecar path for a raster: same stem, `.f32` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("f32")
}

/// Writes samples as headerless little-endian `f32`.
pub fn write_f32_sidecar(path: &Path, samples: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(samples.len() * 4);
    for &v in samples {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_f32_sidecar(path: &Path, expected_samples: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.len() != expected_samples * 4 {
        return Err(AppError::BadSidecarLength {
            path: path.to_path_buf(),
            expected: expected_samples,
            got: bytes.len() / 4,
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

/// Saves a matte as an 8-bit gray PNG (`round(alpha * 255)`); with `exact`,
/// also writes the lossless `.f32` sidecar.
pub fn save_matte(matte: &Matte, path: &Path, exact: bool) -> Result<()> {
    let raster = GrayImage::from_raw(
        matte.width() as u32,
        matte.height() as u32,
        matte.to_gray8(),
    )
    .expect("raster dimensions match buffer");
    raster.save(path).map_err(|source| AppError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    if exact {
        write_f32_sidecar(&sidecar_path(path), matte.data())?;
    }
    Ok(())
}

/// Loads a matte from an 8-bit raster, or from a raw `.f32` sidecar when the
/// path carries that extension (dimensions then come from `dims`).
pub fn load_matte(path: &Path, dims: (usize, usize)) -> Result<Matte> {
    let (w, h) = dims;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("f32"))
    {
        let data = read_f32_sidecar(path, w * h)?;
        return Ok(Matte::from_vec(w, h, data)?);
    }
    let mask = load_mask(path)?;
    Ok(Matte::from_mask(&mask))
}

/// Saves an image and, with `exact`, its interleaved-RGB float sidecar.
pub fn save_image_exact(img: &ImageBuf, path: &Path, exact: bool) -> Result<()> {
    save_image(img, path)?;
    if exact {
        write_f32_sidecar(&sidecar_path(path), img.data())?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| AppError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| AppError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads shadow parameters from either a bare params document
/// (`{"w": [...], "b": [...]}`) or a full fit report containing one.
pub fn load_params(path: &Path) -> Result<ShadowParams> {
    let value: serde_json::Value = read_json(path)?;
    let params_value = value.get("params").cloned().unwrap_or(value);
    let params: ShadowParams =
        serde_json::from_value(params_value).map_err(|source| AppError::Json {
            path: path.to_path_buf(),
            source,
        })?;
    params.validate()?;
    Ok(params)
}
