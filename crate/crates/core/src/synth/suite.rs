use super::{CorruptionSpec, FaceSpec, FoodSpec, SceneSpec, SpoonSpec, TipSide, Trajectory};
use crate::mask::PixelPoint;
use crate::volume::{ShapeModel, VolumeConstants};

pub const REFERENCE_SUITE_SIZE: usize = 10;

const WIDTH: u32 = 640;
const HEIGHT: u32 = 480;
const BOWL_LENGTHS_PX: [f64; REFERENCE_SUITE_SIZE] =
    [100.0, 150.0, 180.0, 120.0, 170.0, 110.0, 160.0, 130.0, 175.0, 140.0];
const SHAPES: [ShapeModel; 3] = [ShapeModel::Ellipsoid, ShapeModel::Prism, ShapeModel::Hemisphere];
const CLEAN: [usize; 2] = [2, 7];

fn mirror(p: PixelPoint, side: TipSide) -> PixelPoint {
    match side {
        TipSide::Left => p,
        TipSide::Right => PixelPoint::new(f64::from(WIDTH - 1) - p.x, p.y),
    }
}

/// Ten scenes of 8 to 12 s at 30 fps with true volumes spread evenly over
/// 10..=17 cm3. Shapes cycle ellipsoid, prism, hemisphere; videos 2 and 7
/// are uncorrupted.
pub fn reference_suite() -> Vec<SceneSpec> {
    (0..REFERENCE_SUITE_SIZE)
        .map(|i| {
            let fi = i as f64;
            let side = if i % 2 == 0 { TipSide::Left } else { TipSide::Right };
            let bowl = BOWL_LENGTHS_PX[i];
            let corruption = if CLEAN.contains(&i) {
                CorruptionSpec::default()
            } else {
                CorruptionSpec {
                    spurious_rate: 0.06 + 0.02 * (i % 4) as f64,
                    giant_mask_rate: 0.03 + 0.01 * (i % 3) as f64,
                    dropout_rate: 0.03 + 0.01 * (i % 2) as f64,
                }
            };
            SceneSpec {
                seed: 1000 + i as u64,
                frames: 240 + (120.0 * fi / 9.0).round() as u32,
                fps: 30.0,
                image_width: WIDTH,
                image_height: HEIGHT,
                spoon: SpoonSpec {
                    bowl_length_px: bowl,
                    bend_angle_deg: 30.0,
                    bowl_depth_px: 0.25 * bowl,
                    handle_length_px: 170.0,
                    handle_thickness_px: 14.0,
                    tip_side: side,
                    trajectory: Trajectory {
                        rest: mirror(PixelPoint::new(70.0, 410.0), side),
                        raised: mirror(PixelPoint::new(170.0 + 4.0 * fi, 250.0), side),
                        lift_start: 0.15,
                        lift_end: 0.35,
                        lower_start: 0.8,
                        lower_end: 0.95,
                    },
                    confidence: 0.9,
                },
                food: FoodSpec {
                    shape: SHAPES[i % SHAPES.len()],
                    true_volume_cm3: 10.0 + 7.0 * fi / 9.0,
                    aspect_ratio: 1.5,
                    confidence: 0.85,
                },
                face: FaceSpec {
                    center: PixelPoint::new(320.0, 90.0),
                    radius_px: 55.0,
                    sway_px: 12.0,
                    confidence: 0.95,
                },
                corruption,
                constants: VolumeConstants::default(),
            }
        })
        .collect()
}
