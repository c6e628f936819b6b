//! Shared fixtures: synthetic triplets written as an ISTD-layout dataset.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shadowdecomp::dataset::DirNames;
use shadowdecomp::io;
use shadowdecomp_core::{darken, synthesize_shadow, ImageBuf, MaskBuf, Matte, ShadowParams};

/// Smooth image with per-channel spread everywhere, values within
/// `[0.2, 0.95]` so parameter transforms stay clear of clamping.
pub fn smooth_free_image(w: usize, h: usize, seed: u64) -> ImageBuf {
    let s = seed as f64;
    ImageBuf::from_fn(w, h, |x, y| {
        let u = x as f64 / w as f64;
        let v = y as f64 / h as f64;
        [
            0.55 + 0.32 * (6.0 * u + s).sin() * (3.0 * v).cos(),
            0.55 + 0.30 * (5.0 * v + 0.7 * s).sin() * (4.0 * u + 1.0).cos(),
            0.55 + 0.28 * (4.0 * (u + v) + 1.3 * s).sin(),
        ]
    })
}

/// Random image with independent uniform samples in `[lo, hi]`.
pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, lo: f64, hi: f64) -> ImageBuf {
    ImageBuf::from_fn(w, h, |_, _| {
        [
            rng.gen_range(lo..hi),
            rng.gen_range(lo..hi),
            rng.gen_range(lo..hi),
        ]
    })
}

pub fn rect_mask(w: usize, h: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> MaskBuf {
    MaskBuf::from_fn(w, h, |x, y| {
        ((x0..x0 + rw).contains(&x) && (y0..y0 + rh).contains(&y)) as u8 as f64
    })
    .unwrap()
}

/// Builds the shadow image of a triplet: binary matte from the mask
/// (shadowed pixels fully darkened), so the per-channel algebra is exact.
pub fn make_shadow(free: &ImageBuf, mask: &MaskBuf, params: &ShadowParams) -> ImageBuf {
    let darkened = darken(free, params).unwrap();
    let matte = Matte::from_mask(&shadowdecomp_core::complement(mask).unwrap());
    synthesize_shadow(free, &darkened, &matte).unwrap()
}

pub struct FixtureTriplet {
    pub id: String,
    pub free: ImageBuf,
    pub mask: MaskBuf,
    pub shadow: ImageBuf,
    pub params: ShadowParams,
}

pub fn fixture_triplet(id: &str, seed: u64, params: ShadowParams) -> FixtureTriplet {
    let (w, h) = (80, 64);
    let free = smooth_free_image(w, h, seed);
    let mask = rect_mask(w, h, 18, 14, 36, 32);
    let shadow = make_shadow(&free, &mask, &params);
    FixtureTriplet {
        id: id.to_string(),
        free,
        mask,
        shadow,
        params,
    }
}

/// Writes triplets into `root` under the ISTD layout and returns the root.
pub fn write_dataset(root: &Path, triplets: &[FixtureTriplet]) -> PathBuf {
    let dirs = DirNames::default();
    for sub in [&dirs.shadow, &dirs.mask, &dirs.free] {
        fs::create_dir_all(root.join(sub)).unwrap();
    }
    for t in triplets {
        io::save_image(
            &t.shadow,
            &root.join(&dirs.shadow).join(format!("{}.png", t.id)),
        )
        .unwrap();
        io::save_mask(
            &t.mask,
            &root.join(&dirs.mask).join(format!("{}.png", t.id)),
        )
        .unwrap();
        io::save_image(
            &t.free,
            &root.join(&dirs.free).join(format!("{}.png", t.id)),
        )
        .unwrap();
    }
    root.to_path_buf()
}

pub fn default_fixtures() -> Vec<FixtureTriplet> {
    vec![
        fixture_triplet(
            "scene_a",
            1,
            ShadowParams::new([2.0, 2.3, 1.9], [0.03, 0.01, 0.02]).unwrap(),
        ),
        fixture_triplet(
            "scene_b",
            2,
            ShadowParams::new([1.6, 1.8, 2.1], [0.05, 0.02, 0.0]).unwrap(),
        ),
        fixture_triplet(
            "scene_c",
            3,
            ShadowParams::new([2.8, 2.5, 2.2], [0.01, 0.04, 0.03]).unwrap(),
        ),
    ]
}

/// Mean intensity over the pixels where `mask == 1`.
pub fn mean_masked_intensity(img: &ImageBuf, mask: &MaskBuf) -> f64 {
    let mut sum = 0.0;
    let mut n = 0u64;
    for (i, &m) in mask.data().iter().enumerate() {
        if m == 1.0 {
            sum += img.data()[i * 3] + img.data()[i * 3 + 1] + img.data()[i * 3 + 2];
            n += 3;
        }
    }
    sum / n as f64
}

pub fn max_abs_diff(a: &ImageBuf, b: &ImageBuf) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
