use bitevol_core::mask::centroid;
use bitevol_core::synth::{reference_suite, render_video, CorruptionSpec};
use bitevol_core::volume::model_volume;
use bitevol_core::{calibrate, Label, ShapeModel, UtensilKind, VolumeConstants};

/// Estimated volume for a single clean frame with the given bowl size.
fn estimate(bowl_px: f64, shape: ShapeModel) -> f64 {
    let mut spec = reference_suite().remove(0);
    spec.frames = 1;
    spec.image_width = 1000;
    spec.image_height = 700;
    spec.spoon.bowl_length_px = bowl_px;
    spec.spoon.bowl_depth_px = 0.25 * bowl_px;
    spec.spoon.trajectory.rest.y = 500.0;
    spec.food.shape = shape;
    spec.corruption = CorruptionSpec::default();
    let r = render_video(&spec).unwrap();
    let frame = &r.video.frames[0];
    let spoon = frame.instances_with(Label::Spoon).next().unwrap().1;
    let food = frame.instances_with(Label::Food).next().unwrap().1;
    let cal = calibrate(spoon, UtensilKind::Spoon, centroid(food).unwrap()).unwrap();
    model_volume(shape, food, &cal, &VolumeConstants::default()).unwrap()
}

#[test]
fn doubling_pixel_scale_keeps_volume() {
    for shape in ShapeModel::ALL {
        let small = estimate(200.0, shape);
        let large = estimate(400.0, shape);
        assert!(
            ((large - small) / small).abs() < 0.03,
            "{shape}: {small} cm3 at 200 px vs {large} cm3 at 400 px"
        );
    }
}
