//! Deterministic synthetic scenes with exact ground truth.
//!
//! A scene is a side view of a table spoon carrying food, moved from a
//! resting position up towards a face and back down. The spoon silhouette is
//! a flat-rimmed bowl (lower half-ellipse) with a straight handle leaving the
//! rim at the neck bend angle. The food blob is sized so that the volume
//! model it was generated for recovers the true volume at the true scale.
//!
//! Randomness comes from ChaCha8 seeded with the scene seed: one stream for
//! scene jitter, an independent stream (seed XOR [`CORRUPTION_STREAM`]) for
//! corruption draws, so a clean render and a corrupted render of the same
//! spec agree on every uncorrupted frame.

mod raster;
mod suite;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::UtensilKind;
use crate::mask::interchange::{Video, VideoDocument};
use crate::mask::{centroid, FrameObservation, InstanceMask, Label, PixelPoint};
use crate::volume::{ShapeModel, VolumeConstants};

pub use raster::{rasterize, PixelBox};
pub use suite::{reference_suite, REFERENCE_SUITE_SIZE};

pub const CORRUPTION_STREAM: u64 = 0x5eed_c0de_0bad_f00d;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("scene out of bounds: {0}")]
    SpecOutOfBounds(String),
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TipSide {
    Left,
    Right,
}

impl TipSide {
    fn sign(self) -> f64 {
        match self {
            TipSide::Left => 1.0,
            TipSide::Right => -1.0,
        }
    }
}

fn default_bend_angle() -> f64 {
    30.0
}
fn default_fps() -> f64 {
    30.0
}
fn default_aspect() -> f64 {
    1.5
}

/// Tip path: at rest, lifted linearly to `raised`, held, lowered back.
/// Phase boundaries are fractions of the video length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rest: PixelPoint,
    pub raised: PixelPoint,
    pub lift_start: f64,
    pub lift_end: f64,
    pub lower_start: f64,
    pub lower_end: f64,
}

impl Trajectory {
    /// Tip position at normalized time `t` in `[0, 1]`, snapped to pixel centers.
    pub fn tip_at(&self, t: f64) -> (i64, i64) {
        let k = if t < self.lift_start {
            0.0
        } else if t < self.lift_end {
            (t - self.lift_start) / (self.lift_end - self.lift_start)
        } else if t < self.lower_start {
            1.0
        } else if t < self.lower_end {
            1.0 - (t - self.lower_start) / (self.lower_end - self.lower_start)
        } else {
            0.0
        };
        let x = self.rest.x + k * (self.raised.x - self.rest.x);
        let y = self.rest.y + k * (self.raised.y - self.rest.y);
        (x.round() as i64, y.round() as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpoonSpec {
    pub bowl_length_px: f64,
    #[serde(default = "default_bend_angle")]
    pub bend_angle_deg: f64,
    pub bowl_depth_px: f64,
    pub handle_length_px: f64,
    pub handle_thickness_px: f64,
    pub tip_side: TipSide,
    pub trajectory: Trajectory,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoodSpec {
    pub shape: ShapeModel,
    pub true_volume_cm3: f64,
    /// Horizontal over vertical semi-axis of the food silhouette.
    #[serde(default = "default_aspect")]
    pub aspect_ratio: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub center: PixelPoint,
    pub radius_px: f64,
    /// Horizontal sway amplitude; the phase is drawn from the seed.
    #[serde(default)]
    pub sway_px: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    /// Food mask merged with a large mislabeled region.
    pub spurious_rate: f64,
    /// Food mask replaced by a region covering most of the image.
    pub giant_mask_rate: f64,
    /// Spoon or food instance missing from the frame.
    pub dropout_rate: f64,
}

impl CorruptionSpec {
    pub fn is_clean(&self) -> bool {
        self.spurious_rate == 0.0 && self.giant_mask_rate == 0.0 && self.dropout_rate == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub frames: u32,
    #[serde(default = "default_fps")]
    pub fps: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub spoon: SpoonSpec,
    pub food: FoodSpec,
    pub face: FaceSpec,
    #[serde(default)]
    pub corruption: CorruptionSpec,
    #[serde(default)]
    pub constants: VolumeConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corruption {
    Spurious,
    GiantMask,
    SpoonDropout,
    FoodDropout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTruth {
    pub frame_index: u64,
    pub true_cm_per_px: f64,
    pub true_tip_x: f64,
    pub true_bend_x: f64,
    pub keyframe_should_be_active: bool,
    pub corruption: Option<Corruption>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub shape: ShapeModel,
    pub true_volume_cm3: f64,
    pub frames: Vec<FrameTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedVideo {
    pub video: Video,
    pub truth: GroundTruth,
}

impl RenderedVideo {
    pub fn document(&self) -> VideoDocument {
        VideoDocument::from_video(&self.video)
    }

    pub fn video_json(&self) -> Vec<u8> {
        self.document().to_json()
    }

    pub fn truth_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(&self.truth).expect("ground truth serializes")
    }
}

/// Spoon placement for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpoonPose {
    pub tip_x: f64,
    pub rim_y: f64,
    pub side: TipSide,
}

impl SpoonPose {
    pub fn bend_x(&self, spoon: &SpoonSpec) -> f64 {
        self.tip_x + self.side.sign() * spoon.bowl_length_px
    }
}

/// Spoon silhouette membership and bounds in image coordinates.
#[derive(Debug, Clone, Copy)]
pub struct SpoonShape {
    pose: SpoonPose,
    length: f64,
    depth: f64,
    handle_length: f64,
    thickness: f64,
    cos: f64,
    sin: f64,
}

impl SpoonShape {
    pub fn new(spoon: &SpoonSpec, pose: SpoonPose) -> Self {
        let theta = spoon.bend_angle_deg.to_radians();
        Self {
            pose,
            length: spoon.bowl_length_px,
            depth: spoon.bowl_depth_px,
            handle_length: spoon.handle_length_px,
            thickness: spoon.handle_thickness_px,
            cos: theta.cos(),
            sin: theta.sin(),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        // u runs from the tip towards the handle regardless of orientation
        let u = self.pose.side.sign() * (x - self.pose.tip_x);
        let dy = y - self.pose.rim_y;
        if (0.0..=self.length).contains(&u) && dy >= 0.0 {
            let half = self.length / 2.0;
            let q = (u - half) / half;
            if dy <= self.depth * (1.0 - q * q).max(0.0).sqrt() {
                return true;
            }
        }
        let du = u - self.length;
        let along = du * self.cos - dy * self.sin;
        let across = du * self.sin + dy * self.cos;
        (0.0..=self.handle_length).contains(&along) && (0.0..=self.thickness).contains(&across)
    }

    pub fn bbox(&self) -> PixelBox {
        let far_u = self.length + self.handle_length * self.cos + self.thickness * self.sin;
        let top = self.pose.rim_y - self.handle_length * self.sin;
        let bottom = self.pose.rim_y + self.depth.max(self.thickness * self.cos);
        let (a, b) = (self.pose.tip_x, self.pose.tip_x + self.pose.side.sign() * far_u);
        PixelBox {
            min_x: a.min(b),
            max_x: a.max(b),
            min_y: top,
            max_y: bottom,
        }
    }
}

/// Axis-aligned ellipse on pixel centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = (x - self.cx) / self.rx;
        let dy = (y - self.cy) / self.ry;
        dx * dx + dy * dy <= 1.0
    }

    pub fn bbox(&self) -> PixelBox {
        PixelBox {
            min_x: self.cx - self.rx,
            max_x: self.cx + self.rx,
            min_y: self.cy - self.ry,
            max_y: self.cy + self.ry,
        }
    }

    pub fn area(&self) -> f64 {
        PI * self.rx * self.ry
    }
}

/// Semi-axis and center offset so that a pixel-center ellipse spans exactly
/// `count` pixels: odd counts sit on a pixel center, even counts between two.
fn span_exactly(count: u32) -> (f64, f64) {
    let n = f64::from(count.max(1));
    if count % 2 == 1 {
        ((n - 1.0) / 2.0 + 0.25, 0.0)
    } else {
        (n / 2.0 - 0.25, 0.5)
    }
}

/// Food silhouette in pixels for the given scale, sitting on the rim with
/// its center above the bowl center.
pub fn food_ellipse(food: &FoodSpec, k: &VolumeConstants, cm_per_px: f64, bowl_center_x: f64, rim_y: f64) -> Ellipse {
    let s = cm_per_px;
    let place = |rx: f64, ry: f64, off_x: f64, off_y: f64| Ellipse {
        cx: bowl_center_x.round() + off_x,
        cy: (rim_y - ry).round() + off_y,
        rx,
        ry,
    };
    match food.shape {
        ShapeModel::Ellipsoid => {
            let c = k.spoon_width_cm / 2.0;
            let ab = (food.true_volume_cm3 - k.bowl_surplus_cm3) / (4.0 / 3.0 * PI * c);
            let b = (ab / food.aspect_ratio).sqrt();
            let a = food.aspect_ratio * b;
            // inclusive extents of 2a/s and 2b/s pixels
            let (rx, ox) = span_exactly((2.0 * a / s).round() as u32);
            let (ry, oy) = span_exactly((2.0 * b / s).round() as u32);
            place(rx, ry, ox, oy)
        }
        ShapeModel::Prism => {
            let area_px = food.true_volume_cm3 / (k.spoon_width_cm * s * s);
            let ry = (area_px / (PI * food.aspect_ratio)).sqrt();
            place(food.aspect_ratio * ry, ry, 0.0, 0.0)
        }
        ShapeModel::Hemisphere => {
            let area_cm2 = (1.5 * food.true_volume_cm3 * PI.sqrt()).powf(2.0 / 3.0);
            let r = (area_cm2 / PI).sqrt() / s;
            place(r, r, 0.0, 0.0)
        }
    }
}

impl SceneSpec {
    pub fn true_cm_per_px(&self) -> f64 {
        UtensilKind::Spoon.reference_length_cm() / self.spoon.bowl_length_px
    }

    fn check_rate(name: &str, v: f64) -> Result<(), SynthError> {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(SynthError::InvalidSpec(format!("{name} must be in [0, 1], got {v}")))
        }
    }

    fn check_positive(name: &str, v: f64) -> Result<(), SynthError> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(SynthError::InvalidSpec(format!("{name} must be positive, got {v}")))
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.frames == 0 || self.image_width == 0 || self.image_height == 0 {
            return Err(SynthError::InvalidSpec("frames and image size must be non-zero".into()));
        }
        Self::check_positive("fps", self.fps)?;
        let c = &self.corruption;
        Self::check_rate("spurious_rate", c.spurious_rate)?;
        Self::check_rate("giant_mask_rate", c.giant_mask_rate)?;
        Self::check_rate("dropout_rate", c.dropout_rate)?;
        for conf in [self.spoon.confidence, self.food.confidence, self.face.confidence] {
            Self::check_rate("confidence", conf)?;
        }
        let sp = &self.spoon;
        Self::check_positive("bowl_length_px", sp.bowl_length_px)?;
        Self::check_positive("bowl_depth_px", sp.bowl_depth_px)?;
        Self::check_positive("handle_length_px", sp.handle_length_px)?;
        Self::check_positive("handle_thickness_px", sp.handle_thickness_px)?;
        if !(0.0..80.0).contains(&sp.bend_angle_deg) {
            return Err(SynthError::InvalidSpec(format!(
                "bend_angle_deg must be in [0, 80), got {}",
                sp.bend_angle_deg
            )));
        }
        let tr = &sp.trajectory;
        let phases = [0.0, tr.lift_start, tr.lift_end, tr.lower_start, tr.lower_end, 1.0];
        if phases.windows(2).any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt())) {
            return Err(SynthError::InvalidSpec(
                "trajectory phases must satisfy 0 <= lift_start <= lift_end <= lower_start <= lower_end <= 1".into(),
            ));
        }
        Self::check_positive("true_volume_cm3", self.food.true_volume_cm3)?;
        Self::check_positive("aspect_ratio", self.food.aspect_ratio)?;
        Self::check_positive("face radius_px", self.face.radius_px)?;
        self.constants.validate().map_err(SynthError::InvalidSpec)?;
        if self.food.shape == ShapeModel::Ellipsoid && self.food.true_volume_cm3 <= self.constants.bowl_surplus_cm3 {
            return Err(SynthError::InvalidSpec(format!(
                "ellipsoid volume must exceed the bowl surplus of {} cm3",
                self.constants.bowl_surplus_cm3
            )));
        }

        for i in 0..self.frames {
            let pose = self.pose_at(i);
            let (w, h) = (self.image_width, self.image_height);
            let spoon = SpoonShape::new(&self.spoon, pose).bbox();
            if !spoon.inside(w, h) {
                return Err(SynthError::SpecOutOfBounds(format!("spoon leaves the image at frame {i}")));
            }
            if !self.food_at(pose).bbox().inside(w, h) {
                return Err(SynthError::SpecOutOfBounds(format!("food leaves the image at frame {i}")));
            }
        }
        let f = &self.face;
        let face_box = PixelBox {
            min_x: f.center.x - f.sway_px.abs() - f.radius_px - 1.0,
            max_x: f.center.x + f.sway_px.abs() + f.radius_px + 1.0,
            min_y: f.center.y - f.radius_px,
            max_y: f.center.y + f.radius_px,
        };
        if !face_box.inside(self.image_width, self.image_height) {
            return Err(SynthError::SpecOutOfBounds("face leaves the image".into()));
        }
        Ok(())
    }

    fn normalized_time(&self, i: u32) -> f64 {
        if self.frames <= 1 {
            0.0
        } else {
            f64::from(i) / f64::from(self.frames - 1)
        }
    }

    pub fn pose_at(&self, i: u32) -> SpoonPose {
        let (x, y) = self.spoon.trajectory.tip_at(self.normalized_time(i));
        SpoonPose {
            tip_x: x as f64,
            rim_y: y as f64,
            side: self.spoon.tip_side,
        }
    }

    fn food_at(&self, pose: SpoonPose) -> Ellipse {
        let center_x = pose.tip_x + pose.side.sign() * self.spoon.bowl_length_px / 2.0;
        food_ellipse(&self.food, &self.constants, self.true_cm_per_px(), center_x, pose.rim_y)
    }

    fn face_at(&self, i: u32, phase: f64) -> Ellipse {
        let t = f64::from(i) / self.fps;
        let f = &self.face;
        Ellipse {
            cx: (f.center.x + f.sway_px * (2.0 * PI * 0.25 * t + phase).sin()).round(),
            cy: f.center.y.round(),
            rx: f.radius_px,
            ry: f.radius_px,
        }
    }
}

struct FrameDraws {
    dropout: f64,
    which: f64,
    giant: f64,
    spurious: f64,
}

fn mask(spec: &SceneSpec, label: Label, confidence: f64, rle: Vec<u32>) -> InstanceMask {
    InstanceMask::new(label, confidence, spec.image_width, spec.image_height, rle)
        .expect("rasterizer emits valid RLE")
}

/// Render the scene and its ground truth. Same spec, same bytes.
pub fn render_video(spec: &SceneSpec) -> Result<RenderedVideo, SynthError> {
    spec.validate()?;
    let mut scene_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let face_phase = scene_rng.gen::<f64>() * 2.0 * PI;
    let mut corruption_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ CORRUPTION_STREAM);
    let draws: Vec<FrameDraws> = (0..spec.frames)
        .map(|_| FrameDraws {
            dropout: corruption_rng.gen(),
            which: corruption_rng.gen(),
            giant: corruption_rng.gen(),
            spurious: corruption_rng.gen(),
        })
        .collect();

    let (w, h) = (spec.image_width, spec.image_height);
    let threshold = 0.5 * f64::from(h);
    let rendered: Vec<(FrameObservation, FrameTruth)> = (0..spec.frames)
        .into_par_iter()
        .map(|i| {
            let pose = spec.pose_at(i);
            let spoon_shape = SpoonShape::new(&spec.spoon, pose);
            let spoon = mask(
                spec,
                Label::Spoon,
                spec.spoon.confidence,
                rasterize(w, h, spoon_shape.bbox(), |x, y| spoon_shape.contains(x, y)),
            );
            let food_shape = spec.food_at(pose);
            let food = mask(
                spec,
                Label::Food,
                spec.food.confidence,
                rasterize(w, h, food_shape.bbox(), |x, y| food_shape.contains(x, y)),
            );
            let face_shape = spec.face_at(i, face_phase);
            let face = mask(
                spec,
                Label::Face,
                spec.face.confidence,
                rasterize(w, h, face_shape.bbox(), |x, y| face_shape.contains(x, y)),
            );

            let spoon_c = centroid(&spoon).expect("spoon is non-empty");
            let face_c = centroid(&face).expect("face is non-empty");
            let active = spoon_c.distance(&face_c) < threshold;

            let d = &draws[i as usize];
            let c = &spec.corruption;
            let corruption = if d.dropout < c.dropout_rate {
                Some(if d.which < 0.5 {
                    Corruption::SpoonDropout
                } else {
                    Corruption::FoodDropout
                })
            } else if d.giant < c.giant_mask_rate {
                Some(Corruption::GiantMask)
            } else if d.spurious < c.spurious_rate {
                Some(Corruption::Spurious)
            } else {
                None
            };

            let mut instances = vec![spoon, food, face];
            match corruption {
                Some(Corruption::SpoonDropout) => {
                    instances.remove(0);
                }
                Some(Corruption::FoodDropout) => {
                    instances.remove(1);
                }
                Some(Corruption::GiantMask) => {
                    let region = PixelBox {
                        min_x: 0.1 * f64::from(w),
                        max_x: 0.9 * f64::from(w),
                        min_y: 0.15 * f64::from(h),
                        max_y: 0.85 * f64::from(h),
                    };
                    let rle = rasterize(w, h, region, |_, _| true);
                    instances[1] = mask(spec, Label::Food, spec.food.confidence, rle);
                }
                Some(Corruption::Spurious) => {
                    // food merged with a mislabeled region under the bowl
                    let l = spec.spoon.bowl_length_px;
                    let region = PixelBox {
                        min_x: food_shape.cx - 0.6 * l,
                        max_x: food_shape.cx + 0.6 * l,
                        min_y: pose.rim_y + 0.2 * l,
                        max_y: pose.rim_y + 0.8 * l,
                    };
                    let bbox = food_shape.bbox().union(&region);
                    let rle = rasterize(w, h, bbox, |x, y| {
                        food_shape.contains(x, y)
                            || (region.min_x..=region.max_x).contains(&x) && (region.min_y..=region.max_y).contains(&y)
                    });
                    instances[1] = mask(spec, Label::Food, spec.food.confidence, rle);
                }
                None => {}
            }

            let frame = FrameObservation {
                frame_index: u64::from(i),
                timestamp_s: f64::from(i) / spec.fps,
                image_width: w,
                image_height: h,
                instances,
            };
            let truth = FrameTruth {
                frame_index: u64::from(i),
                true_cm_per_px: spec.true_cm_per_px(),
                true_tip_x: pose.tip_x,
                true_bend_x: pose.bend_x(&spec.spoon),
                keyframe_should_be_active: active,
                corruption,
            };
            (frame, truth)
        })
        .collect();

    let (frames, frame_truths): (Vec<_>, Vec<_>) = rendered.into_iter().unzip();
    Ok(RenderedVideo {
        video: Video { fps: spec.fps, frames },
        truth: GroundTruth {
            seed: spec.seed,
            shape: spec.food.shape,
            true_volume_cm3: spec.food.true_volume_cm3,
            frames: frame_truths,
        },
    })
}
