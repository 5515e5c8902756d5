//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fail.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bitevol_core::calibration::{calibrate, CalibrationError, UtensilCalibration, UtensilKind};
use bitevol_core::filter::{evaluate, filter_series, VideoPrediction};
use bitevol_core::mask::{centroid, BinaryGrid, FrameObservation, InstanceMask, Label, PixelPoint};
use bitevol_core::synth::{
    reference_suite, render_video, CorruptionSpec, FaceSpec, FoodSpec, RenderedVideo, SceneSpec, SpoonSpec,
    TipSide, Trajectory,
};
use bitevol_core::volume::{ellipsoid_volume, hemisphere_from_area, hemisphere_volume, prism_volume};
use bitevol_core::{analyze_video, decide, KeyframeParams, KeyframeReason, PipelineConfig, ShapeModel, VolumeConstants};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(name: &str, elapsed: Duration, budget: Duration) -> Result<(), String> {
    if elapsed <= budget {
        Ok(())
    } else {
        Err(format!("{name} took {elapsed:.2?}, budget {budget:.0?}"))
    }
}

fn rect_mask(label: Label, w: u32, h: u32, x0: u32, y0: u32, rw: u32, rh: u32) -> InstanceMask {
    let mut g = BinaryGrid::new(w, h);
    for y in y0..y0 + rh {
        for x in x0..x0 + rw {
            g.set(x, y, true);
        }
    }
    InstanceMask::from_grid(label, 0.9, &g).unwrap()
}

fn disk_mask(label: Label, w: u32, h: u32, cx: f64, cy: f64, r: f64) -> InstanceMask {
    let mut g = BinaryGrid::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if (f64::from(x) - cx).powi(2) + (f64::from(y) - cy).powi(2) <= r * r {
                g.set(x, y, true);
            }
        }
    }
    InstanceMask::from_grid(label, 0.9, &g).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn formula_oracles() -> Outcome {
    let start = Instant::now();
    let k = VolumeConstants::default();

    let analytic = hemisphere_from_area(PI);
    let analytic_err = rel(analytic, 2.0 * PI / 3.0);

    // r = 100 px at 0.01 cm/px is a 1 cm disk.
    let disk = disk_mask(Label::Food, 240, 240, 120.0, 120.0, 100.0);
    let cal = UtensilCalibration::from_scale(UtensilKind::Spoon, 0.01).map_err(|e| e.to_string())?;
    let raster = hemisphere_volume(&disk, &cal).map_err(|e| e.to_string())?;
    let raster_err = rel(raster, 2.0 * PI / 3.0);

    let s06 = UtensilCalibration::from_scale(UtensilKind::Spoon, 0.06).map_err(|e| e.to_string())?;
    let prism = prism_volume(&rect_mask(Label::Food, 100, 100, 10, 10, 50, 20), &s06, &k).map_err(|e| e.to_string())?;
    let prism_err = rel(prism, 13.716);

    let ellipsoid =
        ellipsoid_volume(&rect_mask(Label::Food, 100, 100, 5, 5, 60, 40), &s06, &k).map_err(|e| e.to_string())?;

    let elapsed = start.elapsed();
    within_budget("formula oracles", elapsed, Duration::from_secs(1))?;
    check(
        analytic_err <= 1e-6 && raster_err <= 0.02 && prism_err <= 1e-9 && (ellipsoid - 22.236).abs() <= 1e-3,
        format!(
            "hemisphere(pi cm2) = {analytic:.6} (rel err {analytic_err:.1e}), rasterized disk = {raster:.4} \
             (rel err {:.2}%), prism = {prism:.9}, ellipsoid = {ellipsoid:.4}, {elapsed:.2?}",
            raster_err * 100.0
        ),
    )
}

fn filter_trace_and_properties() -> Outcome {
    let start = Instant::now();
    let k = VolumeConstants::default();
    let input = [10.0, 12.0, 30.0, 30.0, 30.0, 30.0, 30.0, 30.0, 14.0].map(Some);
    let golden = filter_series(&input, &k);
    let expected = [10.0, 12.0, 11.0, 11.0, 11.0, 11.0, 11.0, 0.0, 14.0];
    if golden != expected {
        return Err(format!("golden trace gave {golden:?}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bad_value = |rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
        0 => None,
        1 => Some(-rng.gen_range(0.0..10.0)),
        2 => Some(0.0),
        _ => Some(rng.gen_range(25.0..1e5)),
    };
    for case in 0..1000 {
        let n = rng.gen_range(1..200);
        match case % 3 {
            // arbitrary mix: stored values stay plausible or zero
            0 => {
                let vols: Vec<Option<f64>> = (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            Some(rng.gen_range(0.001..24.999))
                        } else {
                            bad_value(&mut rng)
                        }
                    })
                    .collect();
                if let Some(v) = filter_series(&vols, &k).into_iter().find(|v| !(0.0..25.0).contains(v)) {
                    return Err(format!("case {case}: stored {v} outside [0, 25)"));
                }
            }
            // no bad frames: output equals input
            1 => {
                let vols: Vec<Option<f64>> = (0..n).map(|_| Some(rng.gen_range(0.001..24.999))).collect();
                let raw: Vec<f64> = vols.iter().flatten().copied().collect();
                if filter_series(&vols, &k) != raw {
                    return Err(format!("case {case}: clean series was altered"));
                }
            }
            // bad runs of at most five frames are replaced by the running mean
            _ => {
                let mut vols = vec![Some(rng.gen_range(0.001..24.999))];
                while vols.len() < n {
                    if rng.gen_bool(0.3) {
                        for _ in 0..rng.gen_range(1..=5) {
                            vols.push(bad_value(&mut rng));
                        }
                        vols.push(Some(rng.gen_range(0.001..24.999)));
                    } else {
                        vols.push(Some(rng.gen_range(0.001..24.999)));
                    }
                }
                let stored = filter_series(&vols, &k);
                let (mut sum, mut count) = (0.0, 0.0);
                for (i, (v, s)) in vols.iter().zip(&stored).enumerate() {
                    let expected = match v {
                        Some(v) if k.is_plausible(*v) => {
                            sum += v;
                            count += 1.0;
                            *v
                        }
                        _ => sum / count,
                    };
                    if (expected - s).abs() > 1e-9 * expected.max(1.0) {
                        return Err(format!("case {case}, frame {i}: stored {s}, expected {expected}"));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    within_budget("filter properties", elapsed, Duration::from_secs(5))?;
    Ok(format!("golden trace exact; 1000 random series hold all properties, {elapsed:.2?}"))
}

fn silhouette_spec(rng: &mut ChaCha8Rng, bend_angle_deg: f64) -> SceneSpec {
    let bowl = rng.gen_range(100.0..=220.0_f64).round();
    let side = if rng.gen_bool(0.5) { TipSide::Left } else { TipSide::Right };
    let tip_x = rng.gen_range(30.0..80.0_f64).round();
    let tip = PixelPoint::new(
        match side {
            TipSide::Left => tip_x,
            TipSide::Right => 639.0 - tip_x,
        },
        rng.gen_range(260.0..400.0_f64).round(),
    );
    SceneSpec {
        seed: rng.gen(),
        frames: 1,
        fps: 30.0,
        image_width: 640,
        image_height: 480,
        spoon: SpoonSpec {
            bowl_length_px: bowl,
            bend_angle_deg,
            bowl_depth_px: (bowl * rng.gen_range(0.2..0.35)).round(),
            handle_length_px: rng.gen_range(120.0..180.0_f64).round(),
            handle_thickness_px: rng.gen_range(10.0..18.0_f64).round(),
            tip_side: side,
            trajectory: Trajectory {
                rest: tip,
                raised: tip,
                lift_start: 0.2,
                lift_end: 0.4,
                lower_start: 0.6,
                lower_end: 0.8,
            },
            confidence: 0.9,
        },
        food: FoodSpec {
            shape: ShapeModel::Ellipsoid,
            true_volume_cm3: rng.gen_range(8.0..16.0),
            aspect_ratio: 1.5,
            confidence: 0.85,
        },
        face: FaceSpec {
            center: PixelPoint::new(320.0, 70.0),
            radius_px: 50.0,
            sway_px: 0.0,
            confidence: 0.95,
        },
        corruption: CorruptionSpec::default(),
        constants: VolumeConstants::default(),
    }
}

fn calibrate_rendered(r: &RenderedVideo) -> Result<UtensilCalibration, String> {
    let frame = &r.video.frames[0];
    let spoon = frame.instances_with(Label::Spoon).next().ok_or("no spoon rendered")?.1;
    let food = frame.instances_with(Label::Food).next().ok_or("no food rendered")?.1;
    let c = centroid(food).map_err(|e| e.to_string())?;
    calibrate(spoon, UtensilKind::Spoon, c).map_err(|e| e.to_string())
}

fn bend_detection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_px, mut worst_scale) = (0.0_f64, 0.0_f64);
    for n in 0..50 {
        let spec = silhouette_spec(&mut rng, 30.0);
        let r = render_video(&spec).map_err(|e| format!("silhouette {n}: {e}"))?;
        let cal = calibrate_rendered(&r).map_err(|e| format!("silhouette {n}: {e}"))?;
        let truth = &r.truth.frames[0];
        let bend_err = (cal.bend_x() - truth.true_bend_x).abs();
        let scale_err = rel(cal.cm_per_px(), truth.true_cm_per_px);
        worst_px = worst_px.max(bend_err);
        worst_scale = worst_scale.max(scale_err);
        if bend_err > 3.0 || scale_err > 0.03 {
            return Err(format!(
                "silhouette {n} (bowl {} px): bend off by {bend_err:.1} px, scale off by {:.2}%",
                spec.spoon.bowl_length_px,
                scale_err * 100.0
            ));
        }
    }

    let straight = render_video(&silhouette_spec(&mut rng, 0.0)).map_err(|e| e.to_string())?;
    let frame = &straight.video.frames[0];
    let spoon = frame.instances_with(Label::Spoon).next().ok_or("no spoon rendered")?.1;
    let food = frame.instances_with(Label::Food).next().ok_or("no food rendered")?.1;
    let straight_result = calibrate(spoon, UtensilKind::Spoon, centroid(food).map_err(|e| e.to_string())?);
    check(
        matches!(straight_result, Err(CalibrationError::NoBendFound { .. })),
        format!(
            "50 silhouettes: worst bend error {worst_px:.1} px, worst scale error {:.2}%; straight handle -> {}",
            worst_scale * 100.0,
            match &straight_result {
                Ok(c) => format!("bend at x={:.1}", c.bend_x()),
                Err(e) => e.to_string(),
            }
        ),
    )
}

fn keyframe_hand_built() -> Outcome {
    let (w, h) = (400, 400);
    let frame = |face: (f64, f64)| FrameObservation {
        frame_index: 0,
        timestamp_s: 0.0,
        image_width: w,
        image_height: h,
        instances: vec![
            rect_mask(Label::Spoon, w, h, 99, 99, 3, 3),
            rect_mask(Label::Food, w, h, 109, 104, 3, 3),
            disk_mask(Label::Face, w, h, face.0, face.1, 10.0),
        ],
    };
    let params = KeyframeParams::default();
    let near = decide(&frame((150.0, 80.0)), &params);
    let near_ok = near.reason == KeyframeReason::Active
        && near.candidate.as_ref().is_some_and(|c| c.utensil_kind == UtensilKind::Spoon);
    // 250 px from the spoon against a 200 px threshold
    let far = decide(&frame((350.0, 100.0)), &params);
    check(
        near_ok && far.reason == KeyframeReason::TooFarFromFace,
        format!("near face -> {:?}, 250 px away -> {:?}", near.reason, far.reason),
    )
}

fn run_suite(videos: &[(String, RenderedVideo)], filter: bool) -> Result<f64, String> {
    let predictions: Vec<VideoPrediction> = videos
        .par_iter()
        .map(|(id, r)| {
            let config = PipelineConfig {
                shape: r.truth.shape,
                filter,
                ..PipelineConfig::default()
            };
            analyze_video(id, &r.video, &config)
                .prediction()
                .ok_or_else(|| format!("{id}: no active key-frames"))
        })
        .collect::<Result<_, _>>()?;
    let truths: BTreeMap<String, f64> = videos
        .iter()
        .map(|(id, r)| (id.clone(), r.truth.true_volume_cm3))
        .collect();
    let report = evaluate(&predictions, &truths).map_err(|e| e.to_string())?;
    Ok(report.aggregate.final_mape_pct)
}

fn render_suite(clean: bool) -> Result<Vec<(String, RenderedVideo)>, String> {
    reference_suite()
        .into_par_iter()
        .enumerate()
        .map(|(i, mut spec)| {
            if clean {
                spec.corruption = CorruptionSpec::default();
            }
            render_video(&spec)
                .map(|r| (format!("video_{i:02}"), r))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let clean = run_suite(&render_suite(true)?, true)?;
    let corrupted = render_suite(false)?;
    let filtered = run_suite(&corrupted, true)?;
    let unfiltered = run_suite(&corrupted, false)?;
    let elapsed = start.elapsed();
    within_budget("reference suite", elapsed, Duration::from_secs(60))?;
    check(
        clean <= 10.0 && filtered <= 30.0 && filtered < unfiltered,
        format!(
            "final MAPE clean {clean:.2}%, corrupted+filter {filtered:.2}%, corrupted no-filter {unfiltered:.2}%, \
             {elapsed:.2?}"
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bitevol"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("bitevol {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    run_cli(&["synth", "--reference-suite", "--seed", "42", "--out", &p("videos")])?;
    run_cli(&["estimate", &p("videos"), "--out", &p("run_a")])?;
    run_cli(&["estimate", &p("videos"), "--out", &p("run_b")])?;
    let read = |d: &str| fs::read(Path::new(&p(d)).join("results.json")).map_err(|e| e.to_string());
    let (a, b) = (read("run_a")?, read("run_b")?);
    check(a == b, format!("results.json of two runs: {} bytes each, identical = {}", a.len(), a == b))
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("formula oracles", formula_oracles),
        ("spurious-segmentation filter", filter_trace_and_properties),
        ("bend detection", bend_detection),
        ("key-frame decision", keyframe_hand_built),
        ("end-to-end reference suite", end_to_end),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
