//! End-to-end runs of the `shadowdecomp` binary.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shadowdecomp::io;
use shadowdecomp_core::{darken, synthesize_shadow, FitReport, ImageBuf, Matte, ShadowParams};
use tempfile::tempdir;

use common::{default_fixtures, fixture_triplet, max_abs_diff, rect_mask, write_dataset};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shadowdecomp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn p(path: &Path) -> String {
    path.to_str().unwrap().to_string()
}

/// Shadow-free image whose bytes are exact even values, so that gains of 2
/// with zero offset round-trip through 8-bit files with no error at all.
fn even_byte_free(w: usize, h: usize) -> ImageBuf {
    ImageBuf::from_fn(w, h, |x, y| {
        let q = |t: usize| 2.0 * ((40 + (t * 7) % 80) as f64) / 255.0;
        [q(x + y), q(x * 2 + y), q(x + 3 * y)]
    })
}

#[test]
fn fit_recovers_params_and_reports_them_as_json() {
    let dir = tempdir().unwrap();
    let t = fixture_triplet(
        "one",
        11,
        ShadowParams::new([2.0, 2.4, 1.7], [0.03, 0.0, 0.05]).unwrap(),
    );
    let root = write_dataset(dir.path(), &[t]);

    let out_json = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        "--shadow",
        &p(&root.join("A/one.png")),
        "--free",
        &p(&root.join("C/one.png")),
        "--mask",
        &p(&root.join("B/one.png")),
        "--out",
        &p(&out_json),
    ]);
    assert_code(&out, 0);

    let report: FitReport = io::read_json(&out_json).unwrap();
    for (got, want) in report.params.w.iter().zip([2.0, 2.4, 1.7]) {
        assert!((got - want).abs() < 0.02, "w {got} vs {want}");
    }
    for (got, want) in report.params.b.iter().zip([0.03, 0.0, 0.05]) {
        assert!((got - want).abs() < 0.01, "b {got} vs {want}");
    }
    assert!(!report.is_degenerate());
}

#[test]
fn fit_degenerate_exits_two_but_writes_report() {
    let dir = tempdir().unwrap();
    let flat = ImageBuf::filled(64, 64, [0.3; 3]);
    let free = ImageBuf::filled(64, 64, [0.5; 3]);
    let mask = rect_mask(64, 64, 10, 10, 40, 40);
    io::save_image(&flat, &dir.path().join("s.png")).unwrap();
    io::save_image(&free, &dir.path().join("f.png")).unwrap();
    io::save_mask(&mask, &dir.path().join("m.png")).unwrap();

    let out_json = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        "--shadow",
        &p(&dir.path().join("s.png")),
        "--free",
        &p(&dir.path().join("f.png")),
        "--mask",
        &p(&dir.path().join("m.png")),
        "--out",
        &p(&out_json),
    ]);
    assert_code(&out, 2);
    let report: FitReport = io::read_json(&out_json).unwrap();
    assert_eq!(report.degenerate_channels, [true; 3]);
    assert_eq!(report.params.w, [1.0; 3]);
}

#[test]
fn fit_empty_eroded_mask_exits_one_with_advice() {
    let dir = tempdir().unwrap();
    let t = fixture_triplet("one", 12, ShadowParams::new([2.0; 3], [0.02; 3]).unwrap());
    let root = write_dataset(dir.path(), &[t]);
    let tiny = rect_mask(80, 64, 5, 5, 8, 8);
    io::save_mask(&tiny, &root.join("B/one.png")).unwrap();

    let out = run(&[
        "fit",
        "--shadow",
        &p(&root.join("A/one.png")),
        "--free",
        &p(&root.join("C/one.png")),
        "--mask",
        &p(&root.join("B/one.png")),
        "--out",
        &p(&dir.path().join("fit.json")),
    ]);
    assert_code(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("eroded mask empty"), "stderr: {stderr}");
}

#[test]
fn missing_input_file_exits_one() {
    let dir = tempdir().unwrap();
    let out = run(&[
        "fit",
        "--shadow",
        "/nonexistent/a.png",
        "--free",
        "/nonexistent/b.png",
        "--mask",
        "/nonexistent/c.png",
        "--out",
        &p(&dir.path().join("x.json")),
    ]);
    assert_code(&out, 1);
}

#[test]
fn relight_command_matches_in_process_transform() {
    let dir = tempdir().unwrap();
    let t = fixture_triplet(
        "one",
        19,
        ShadowParams::new([2.0, 1.5, 2.5], [0.04, 0.0, 0.02]).unwrap(),
    );
    let root = write_dataset(dir.path(), std::slice::from_ref(&t));
    let params_path = dir.path().join("p.json");
    io::write_json(&params_path, &t.params).unwrap();

    let out_png = dir.path().join("relit.png");
    let out = run(&[
        "relight",
        "--shadow",
        &p(&root.join("A/one.png")),
        "--params",
        &p(&params_path),
        "--out",
        &p(&out_png),
    ]);
    assert_code(&out, 0);

    let shadow_q = io::load_image(&root.join("A/one.png")).unwrap();
    let expected = shadowdecomp_core::relight(&shadow_q, &t.params).unwrap();
    let got = io::load_image(&out_png).unwrap();
    // The CLI output is the clamped, quantized copy of the same transform.
    let expected_q =
        ImageBuf::from_rgb8(expected.width(), expected.height(), &expected.to_rgb8()).unwrap();
    assert_eq!(got, expected_q);
}

#[test]
fn remove_with_identity_params_returns_input() {
    let dir = tempdir().unwrap();
    let t = fixture_triplet("one", 13, ShadowParams::new([2.0; 3], [0.02; 3]).unwrap());
    let root = write_dataset(dir.path(), &[t]);
    let params_path = dir.path().join("id.json");
    io::write_json(&params_path, &ShadowParams::identity()).unwrap();

    let out_png = dir.path().join("out.png");
    let out = run(&[
        "remove",
        "--shadow",
        &p(&root.join("A/one.png")),
        "--mask",
        &p(&root.join("B/one.png")),
        "--params",
        &p(&params_path),
        "--out",
        &p(&out_png),
    ]);
    assert_code(&out, 0);
    let input = io::load_image(&root.join("A/one.png")).unwrap();
    let output = io::load_image(&out_png).unwrap();
    assert_eq!(input, output);
}

#[test]
fn remove_with_oracle_fit_and_analytic_matte_recovers_free() {
    let dir = tempdir().unwrap();
    let t = fixture_triplet(
        "one",
        14,
        ShadowParams::new([2.0, 2.2, 1.8], [0.03, 0.01, 0.02]).unwrap(),
    );
    let root = write_dataset(dir.path(), &[t]);

    let out_png = dir.path().join("removed.png");
    let out = run(&[
        "remove",
        "--shadow",
        &p(&root.join("A/one.png")),
        "--mask",
        &p(&root.join("B/one.png")),
        "--free",
        &p(&root.join("C/one.png")),
        "--out",
        &p(&out_png),
    ]);
    assert_code(&out, 0);

    let recovered = io::load_image(&out_png).unwrap();
    let free = io::load_image(&root.join("C/one.png")).unwrap();
    // Byte-space comparison: at most two quantization steps apart.
    let worst = recovered
        .to_rgb8()
        .iter()
        .zip(free.to_rgb8())
        .map(|(&a, b)| (i16::from(a) - i16::from(b)).abs())
        .max()
        .unwrap();
    assert!(worst <= 2, "worst byte diff {worst}");
}

#[test]
fn remove_mask_blend_mode_differs_from_matte_mode_at_boundary() {
    let dir = tempdir().unwrap();
    // Triplet with a gradual penumbra: the matte ramps over a 4-pixel band,
    // inside the 5-pixel erosion the fit applies, so the umbra stays clean.
    let (w, h) = (96, 72);
    let free = common::smooth_free_image(w, h, 21);
    let params = ShadowParams::new([2.1, 2.0, 2.3], [0.02, 0.03, 0.01]).unwrap();
    let mask = rect_mask(w, h, 24, 16, 48, 40);
    let matte = Matte::from_vec(
        w,
        h,
        (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                // Chebyshev distance into the masked rectangle.
                let inside = (24..72).contains(&x) && (16..56).contains(&y);
                if !inside {
                    return 1.0;
                }
                let depth = [x - 24, 71 - x, y - 16, 55 - y].into_iter().min().unwrap() as f64;
                (1.0 - depth / 4.0).max(0.0)
            })
            .collect(),
    )
    .unwrap();
    let darkened = darken(&free, &params).unwrap();
    let shadow = synthesize_shadow(&free, &darkened, &matte).unwrap();

    io::save_image(&shadow, &dir.path().join("s.png")).unwrap();
    io::save_mask(&mask, &dir.path().join("m.png")).unwrap();
    io::save_image(&free, &dir.path().join("f.png")).unwrap();

    let with_matte = dir.path().join("with_matte.png");
    assert_code(
        &run(&[
            "remove",
            "--shadow",
            &p(&dir.path().join("s.png")),
            "--mask",
            &p(&dir.path().join("m.png")),
            "--free",
            &p(&dir.path().join("f.png")),
            "--out",
            &p(&with_matte),
        ]),
        0,
    );

    // Binary-mask blend: params from the oracle fit, matte from the mask.
    let params_path = dir.path().join("fit.json");
    assert_code(
        &run(&[
            "fit",
            "--shadow",
            &p(&dir.path().join("s.png")),
            "--free",
            &p(&dir.path().join("f.png")),
            "--mask",
            &p(&dir.path().join("m.png")),
            "--out",
            &p(&params_path),
        ]),
        0,
    );
    let with_mask = dir.path().join("with_mask.png");
    assert_code(
        &run(&[
            "remove",
            "--shadow",
            &p(&dir.path().join("s.png")),
            "--mask",
            &p(&dir.path().join("m.png")),
            "--params",
            &p(&params_path),
            "--out",
            &p(&with_mask),
        ]),
        0,
    );

    // The fixture pair: matte mode tracks the ground truth closely, the
    // binary mask leaves a visible ring in the penumbra band.
    let free_q = io::load_image(&dir.path().join("f.png")).unwrap();
    let matte_out = io::load_image(&with_matte).unwrap();
    let mask_out = io::load_image(&with_mask).unwrap();
    let matte_err = max_abs_diff(&matte_out, &free_q);
    let mask_err = max_abs_diff(&mask_out, &free_q);
    assert!(matte_err < 0.02, "matte-mode error {matte_err}");
    assert!(
        mask_err > 5.0 * matte_err,
        "mask-mode should show artifacts: {mask_err} vs {matte_err}"
    );
}

#[test]
fn matte_command_reproduces_constructed_blend() {
    let dir = tempdir().unwrap();
    // Exact-arithmetic construction: even bytes, w = 2, b = 0.
    let (w, h) = (64, 48);
    let free = even_byte_free(w, h);
    let mask = rect_mask(w, h, 16, 12, 30, 24);
    let params = ShadowParams::new([2.0; 3], [0.0; 3]).unwrap();
    let shadow = common::make_shadow(&free, &mask, &params);
    io::save_image(&shadow, &dir.path().join("s.png")).unwrap();
    io::save_image(&free, &dir.path().join("f.png")).unwrap();
    io::save_mask(&mask, &dir.path().join("m.png")).unwrap();
    let params_path = dir.path().join("params.json");
    io::write_json(&params_path, &params).unwrap();

    let matte_path = dir.path().join("alpha.png");
    let out = run(&[
        "matte",
        "--shadow",
        &p(&dir.path().join("s.png")),
        "--free",
        &p(&dir.path().join("f.png")),
        "--params",
        &p(&params_path),
        "--out",
        &p(&matte_path),
    ]);
    assert_code(&out, 0);

    let matte = io::load_matte(&matte_path, (w, h)).unwrap();
    for y in 0..h {
        for x in 0..w {
            let expected = 1.0 - mask.value(x, y);
            assert!(
                (matte.value(x, y) - expected).abs() <= 1.0 / 255.0,
                "matte[{x},{y}] = {} expected {expected}",
                matte.value(x, y)
            );
        }
    }
}

#[test]
fn synth_command_rebuilds_the_fixture_shadow() {
    let dir = tempdir().unwrap();
    let (w, h) = (64, 48);
    let free = even_byte_free(w, h);
    let mask = rect_mask(w, h, 16, 12, 30, 24);
    let params = ShadowParams::new([2.0; 3], [0.0; 3]).unwrap();
    let shadow = common::make_shadow(&free, &mask, &params);
    io::save_image(&shadow, &dir.path().join("expected.png")).unwrap();
    io::save_image(&free, &dir.path().join("f.png")).unwrap();
    // Matte = 1 - mask, stored as the blend raster.
    let blend = Matte::from_mask(&shadowdecomp_core::complement(&mask).unwrap());
    io::save_matte(&blend, &dir.path().join("alpha.png"), false).unwrap();
    let params_path = dir.path().join("params.json");
    io::write_json(&params_path, &params).unwrap();

    let out_png = dir.path().join("synth.png");
    let out = run(&[
        "synth",
        "--free",
        &p(&dir.path().join("f.png")),
        "--params",
        &p(&params_path),
        "--matte",
        &p(&dir.path().join("alpha.png")),
        "--out",
        &p(&out_png),
    ]);
    assert_code(&out, 0);

    let got = io::load_image(&out_png).unwrap();
    let want = io::load_image(&dir.path().join("expected.png")).unwrap();
    assert!(max_abs_diff(&got, &want) <= 1.0 / 255.0);
}

#[test]
fn exact_flag_writes_float_sidecars() {
    let dir = tempdir().unwrap();
    let t = fixture_triplet("one", 15, ShadowParams::new([2.0; 3], [0.02; 3]).unwrap());
    let root = write_dataset(dir.path(), &[t]);
    let out_png = dir.path().join("matte.png");
    let out = run(&[
        "--exact",
        "matte",
        "--shadow",
        &p(&root.join("A/one.png")),
        "--free",
        &p(&root.join("C/one.png")),
        "--mask",
        &p(&root.join("B/one.png")),
        "--out",
        &p(&out_png),
    ]);
    assert_code(&out, 0);
    assert!(dir.path().join("matte.f32").exists());
}

#[test]
fn correct_gt_writes_corrected_images_summary_and_sidecars() {
    let dir = tempdir().unwrap();
    let root = write_dataset(dir.path(), &default_fixtures());
    let out_dir = dir.path().join("corrected");
    let out = run(&[
        "--exact",
        "correct-gt",
        "--root",
        &p(&root),
        "--out",
        &p(&out_dir),
    ]);
    assert_code(&out, 0);
    for id in ["scene_a", "scene_b", "scene_c"] {
        assert!(out_dir.join(format!("{id}.png")).exists());
        assert!(out_dir.join(format!("{id}.f32")).exists());
    }
    let summary: serde_json::Value =
        io::read_json(&out_dir.join("correction_summary.json")).unwrap();
    assert_eq!(summary["corrected"].as_u64().unwrap(), 3);
    assert!(summary["aggregate"]["nonshadow_rgb_rms_after"]["pixel"]
        .as_f64()
        .is_some());
}

#[test]
fn evaluate_identical_directories_reports_zero() {
    let dir = tempdir().unwrap();
    let root = write_dataset(dir.path(), &default_fixtures());
    let json_path = dir.path().join("report.json");
    let out = run(&[
        "evaluate",
        "--root",
        &p(&root),
        "--results",
        &p(&root.join("C")),
        "--json",
        &p(&json_path),
    ]);
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("shadow"), "table printed: {stdout}");
    let report: serde_json::Value = io::read_json(&json_path).unwrap();
    assert_eq!(report["rmse_all"].as_f64().unwrap(), 0.0);
    assert_eq!(report["rmse_shadow"].as_f64().unwrap(), 0.0);
}

#[test]
fn evaluate_accepts_metric_and_pooling_flags() {
    let dir = tempdir().unwrap();
    let root = write_dataset(dir.path(), &default_fixtures());
    let json_path = dir.path().join("mae_image.json");
    let out = run(&[
        "evaluate",
        "--root",
        &p(&root),
        "--results",
        &p(&root.join("A")),
        "--metric",
        "mae",
        "--pooling",
        "image",
        "--json",
        &p(&json_path),
    ]);
    assert_code(&out, 0);
    let report: serde_json::Value = io::read_json(&json_path).unwrap();
    assert_eq!(report["metric_variant"].as_str().unwrap(), "mae");
    assert!(report["notes"].as_str().unwrap().contains("image pooling"));
    assert!(report["rmse_shadow"].as_f64().unwrap() > 0.0);
}

#[test]
fn evaluate_writes_per_image_csv() {
    let dir = tempdir().unwrap();
    let root = write_dataset(dir.path(), &default_fixtures());
    let csv_path = dir.path().join("per_image.csv");
    let out = run(&[
        "evaluate",
        "--root",
        &p(&root),
        "--results",
        &p(&root.join("A")),
        "--csv",
        &p(&csv_path),
    ]);
    assert_code(&out, 0);
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "filename,shadow,nonshadow,all");
    assert_eq!(lines.count(), 3);
}

#[test]
fn augment_five_triplets_four_factors_yields_twenty() {
    let dir = tempdir().unwrap();
    let mut fixtures = default_fixtures();
    fixtures.push(fixture_triplet(
        "scene_d",
        4,
        ShadowParams::new([1.9; 3], [0.02; 3]).unwrap(),
    ));
    fixtures.push(fixture_triplet(
        "scene_e",
        5,
        ShadowParams::new([2.4; 3], [0.01; 3]).unwrap(),
    ));
    let root = write_dataset(dir.path(), &fixtures);
    let out_dir = dir.path().join("aug");
    let out = run(&[
        "augment",
        "--root",
        &p(&root),
        "--out",
        &p(&out_dir),
        "--k",
        "0.8,0.9,1.1,1.2",
    ]);
    assert_code(&out, 0);
    assert_eq!(fs::read_dir(out_dir.join("A")).unwrap().count(), 20);
    let summary: serde_json::Value = io::read_json(&out_dir.join("augment_summary.json")).unwrap();
    assert_eq!(summary["images_written"].as_u64().unwrap(), 20);
}

#[test]
fn scan_json_lists_records() {
    let dir = tempdir().unwrap();
    let root = write_dataset(dir.path(), &default_fixtures());
    let out = run(&["scan", "--root", &p(&root), "--json"]);
    assert_code(&out, 0);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["records"].as_array().unwrap().len(), 3);
}

#[test]
fn scan_accepts_custom_directory_names() {
    let dir = tempdir().unwrap();
    let root = write_dataset(dir.path(), &default_fixtures()[..1]);
    for (from, to) in [("A", "shadow"), ("B", "mask"), ("C", "free")] {
        fs::rename(root.join(from), root.join(to)).unwrap();
    }
    let out = run(&[
        "scan",
        "--root",
        &p(&root),
        "--dirs",
        "shadow,mask,free",
        "--json",
    ]);
    assert_code(&out, 0);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["records"].as_array().unwrap().len(), 1);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempdir().unwrap();
    let root = write_dataset(dir.path(), &default_fixtures());
    let mut reports = Vec::new();
    for threads in ["1", "4"] {
        let json_path = dir.path().join(format!("report_{threads}.json"));
        let out = bin()
            .env("SHADOWDECOMP_THREADS", threads)
            .args([
                "evaluate",
                "--root",
                &p(&root),
                "--results",
                &p(&root.join("A")),
                "--json",
                &p(&json_path),
            ])
            .output()
            .unwrap();
        assert_code(&out, 0);
        reports.push(fs::read(&json_path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn params_written_by_fit_load_back_bit_identically_through_remove() {
    let dir = tempdir().unwrap();
    let t = fixture_triplet(
        "one",
        16,
        ShadowParams::new([2.0, 2.2, 1.8], [0.03, 0.01, 0.02]).unwrap(),
    );
    let root = write_dataset(dir.path(), &[t]);
    let params_path = dir.path().join("fit.json");
    assert_code(
        &run(&[
            "fit",
            "--shadow",
            &p(&root.join("A/one.png")),
            "--free",
            &p(&root.join("C/one.png")),
            "--mask",
            &p(&root.join("B/one.png")),
            "--out",
            &p(&params_path),
        ]),
        0,
    );
    let report: FitReport = io::read_json(&params_path).unwrap();
    let loaded = io::load_params(&params_path).unwrap();
    assert_eq!(
        report.params.w.map(f64::to_bits),
        loaded.w.map(f64::to_bits)
    );
    assert_eq!(
        report.params.b.map(f64::to_bits),
        loaded.b.map(f64::to_bits)
    );

    // And the removal consuming that file succeeds.
    assert_code(
        &run(&[
            "remove",
            "--shadow",
            &p(&root.join("A/one.png")),
            "--mask",
            &p(&root.join("B/one.png")),
            "--params",
            &p(&params_path),
            "--free",
            &p(&root.join("C/one.png")),
            "--out",
            &p(&dir.path().join("removed.png")),
        ]),
        0,
    );
}
