//! Metric scale recovery from the utensil silhouette.
//!
//! The top edge of a utensil mask is flat (or gently curved) along the bowl
//! of a spoon / the tines of a fork, then kinks where the neck bends into
//! the handle. Locating that kink gives the pixel length of a part whose
//! physical length is standard, hence centimetres per pixel in the
//! utensil's plane.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::{top_curve, InstanceMask, Label, MaskError, PixelPoint};

/// Moving-average window applied to the top curve before differentiation.
pub const SMOOTHING_WINDOW: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error("curve has no points")]
    EmptyCurve,
    #[error("degenerate curve: {0}")]
    DegenerateCurve(&'static str),
    #[error("smoothing window must be odd and >= 1, got {0}")]
    InvalidWindow(usize),
    #[error("no neck bend above {threshold_deg} degrees along the utensil top curve")]
    NoBendFound { threshold_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UtensilKind {
    Spoon,
    Fork,
}

impl UtensilKind {
    /// Detection threshold, about half the physical neck bend (30 and 15 degrees).
    pub fn bend_angle_threshold_deg(self) -> f64 {
        match self {
            UtensilKind::Spoon => 15.0,
            UtensilKind::Fork => 7.0,
        }
    }

    /// Bowl length of a table spoon, tip-to-neck length of a fork.
    pub fn reference_length_cm(self) -> f64 {
        match self {
            UtensilKind::Spoon => 6.0,
            UtensilKind::Fork => 7.5,
        }
    }

    pub fn from_label(label: Label) -> Option<Self> {
        match label {
            Label::Spoon => Some(UtensilKind::Spoon),
            Label::Fork => Some(UtensilKind::Fork),
            _ => None,
        }
    }

    pub fn label(self) -> Label {
        match self {
            UtensilKind::Spoon => Label::Spoon,
            UtensilKind::Fork => Label::Fork,
        }
    }
}

/// Which end of the curve the traversal starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traverse {
    /// Lowest x first.
    FromStart,
    /// Highest x first.
    FromEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtensilCalibration {
    cm_per_px: f64,
    tip_x: f64,
    bend_x: f64,
    bowl_length_px: f64,
    kind: UtensilKind,
}

impl UtensilCalibration {
    pub fn new(kind: UtensilKind, tip_x: f64, bend_x: f64) -> Result<Self, CalibrationError> {
        let bowl_length_px = (bend_x - tip_x).abs();
        if !(bowl_length_px > 0.0 && bowl_length_px.is_finite()) {
            return Err(CalibrationError::DegenerateCurve("bend coincides with tip"));
        }
        Ok(Self {
            cm_per_px: kind.reference_length_cm() / bowl_length_px,
            tip_x,
            bend_x,
            bowl_length_px,
            kind,
        })
    }

    /// Calibration with a known scale and no utensil geometry behind it.
    pub fn from_scale(kind: UtensilKind, cm_per_px: f64) -> Result<Self, CalibrationError> {
        if !(cm_per_px > 0.0 && cm_per_px.is_finite()) {
            return Err(CalibrationError::DegenerateCurve("scale must be positive"));
        }
        Self::new(kind, 0.0, kind.reference_length_cm() / cm_per_px)
    }

    pub fn cm_per_px(&self) -> f64 {
        self.cm_per_px
    }

    pub fn tip_x(&self) -> f64 {
        self.tip_x
    }

    pub fn bend_x(&self) -> f64 {
        self.bend_x
    }

    pub fn bowl_length_px(&self) -> f64 {
        self.bowl_length_px
    }

    pub fn kind(&self) -> UtensilKind {
        self.kind
    }
}

/// Centered moving average of y, window truncated at the curve ends.
pub fn smooth_curve(curve: &[PixelPoint], window: usize) -> Result<Vec<PixelPoint>, CalibrationError> {
    if curve.is_empty() {
        return Err(CalibrationError::EmptyCurve);
    }
    if window == 0 || window.is_multiple_of(2) {
        return Err(CalibrationError::InvalidWindow(window));
    }
    let half = window / 2;
    let mut prefix = Vec::with_capacity(curve.len() + 1);
    prefix.push(0.0);
    for p in curve {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + p.y);
    }
    Ok(curve
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(curve.len() - 1);
            let mean = (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64;
            PixelPoint::new(p.x, mean)
        })
        .collect())
}

/// Slope between each pair of adjacent points; one shorter than the input.
pub fn curve_gradient(curve: &[PixelPoint]) -> Result<Vec<f64>, CalibrationError> {
    if curve.len() < 2 {
        return Err(CalibrationError::DegenerateCurve("need at least two points"));
    }
    curve
        .windows(2)
        .map(|w| slope(&w[0], &w[1]))
        .collect()
}

fn slope(a: &PixelPoint, b: &PixelPoint) -> Result<f64, CalibrationError> {
    let dx = b.x - a.x;
    if dx == 0.0 {
        return Err(CalibrationError::DegenerateCurve("repeated x coordinate"));
    }
    Ok((b.y - a.y) / dx)
}

/// Locate the neck bend, walking the (already smoothed) curve from the tip.
///
/// The slope angle of every segment is compared against the slope angle of
/// the first segment at the tip. The bend is the tip-side point of the
/// first segment whose angle deviates by more than the utensil's threshold,
/// in either vertical direction.
pub fn detect_bend(
    curve: &[PixelPoint],
    kind: UtensilKind,
    traverse: Traverse,
) -> Result<f64, CalibrationError> {
    if curve.len() < 3 {
        return Err(CalibrationError::DegenerateCurve("need at least three points"));
    }
    let ordered: Vec<PixelPoint> = match traverse {
        Traverse::FromStart => curve.to_vec(),
        Traverse::FromEnd => curve.iter().rev().copied().collect(),
    };
    let angles = curve_gradient(&ordered)?
        .into_iter()
        .map(|g| g.atan().to_degrees())
        .collect::<Vec<_>>();
    let reference = angles[0];
    let threshold = kind.bend_angle_threshold_deg();
    angles
        .iter()
        .position(|a| (a - reference).abs() > threshold)
        .map(|k| ordered[k].x)
        .ok_or(CalibrationError::NoBendFound {
            threshold_deg: threshold,
        })
}

/// Per-frame scale from a utensil mask. The curve end horizontally nearer
/// the food is taken as the tip.
pub fn calibrate(
    utensil: &InstanceMask,
    kind: UtensilKind,
    food_centroid: PixelPoint,
) -> Result<UtensilCalibration, CalibrationError> {
    let curve = smooth_curve(&top_curve(utensil)?, SMOOTHING_WINDOW)?;
    if curve.len() < 3 {
        return Err(CalibrationError::DegenerateCurve("utensil top curve too short"));
    }
    let first = curve[0];
    let last = curve[curve.len() - 1];
    let (tip, traverse) =
        if (first.x - food_centroid.x).abs() <= (last.x - food_centroid.x).abs() {
            (first, Traverse::FromStart)
        } else {
            (last, Traverse::FromEnd)
        };
    let bend_x = detect_bend(&curve, kind, traverse)?;
    UtensilCalibration::new(kind, tip.x, bend_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::BinaryGrid;
    use proptest::prelude::*;

    fn curve(points: &[(f64, f64)]) -> Vec<PixelPoint> {
        points.iter().map(|&(x, y)| PixelPoint::new(x, y)).collect()
    }

    /// Flat for x <= kink, then slope tan(angle) (image y grows downward, so
    /// a rising handle has negative dy).
    fn kinked(len: u32, kink: u32, angle_deg: f64) -> Vec<PixelPoint> {
        let t = angle_deg.to_radians().tan();
        (0..=len)
            .map(|x| {
                let run = f64::from(x.saturating_sub(kink));
                PixelPoint::new(f64::from(x), 50.0 - t * run)
            })
            .collect()
    }

    #[test]
    fn smoothing_examples() {
        let flat = curve(&[(0.0, 3.0), (1.0, 3.0), (2.0, 3.0), (3.0, 3.0)]);
        assert_eq!(smooth_curve(&flat, 5).unwrap(), flat);

        let zig = curve(&[(0.0, 0.0), (1.0, 10.0), (2.0, 0.0), (3.0, 10.0), (4.0, 0.0)]);
        let s = smooth_curve(&zig, 5).unwrap();
        assert!((s[2].y - 4.0).abs() < 1e-12);
        // truncated window at the ends: mean of y[0..=2]
        assert!((s[0].y - 10.0 / 3.0).abs() < 1e-12);
        assert!(s.iter().zip(&zig).all(|(a, b)| a.x == b.x));

        let single = curve(&[(7.0, 2.0)]);
        assert_eq!(smooth_curve(&single, 5).unwrap(), single);
    }

    #[test]
    fn smoothing_errors() {
        assert_eq!(smooth_curve(&[], 5), Err(CalibrationError::EmptyCurve));
        let c = curve(&[(0.0, 0.0)]);
        assert_eq!(smooth_curve(&c, 4), Err(CalibrationError::InvalidWindow(4)));
        assert_eq!(smooth_curve(&c, 0), Err(CalibrationError::InvalidWindow(0)));
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(curve_gradient(&curve(&[(0.0, 0.0), (1.0, 1.0)])).unwrap(), vec![1.0]);
        let horizontal: Vec<_> = (0..10).map(|x| PixelPoint::new(f64::from(x), 4.0)).collect();
        assert_eq!(curve_gradient(&horizontal).unwrap(), vec![0.0; 9]);
        assert_eq!(curve_gradient(&curve(&[(0.0, 0.0), (2.0, 1.0)])).unwrap(), vec![0.5]);
        assert!(matches!(
            curve_gradient(&curve(&[(1.0, 0.0), (1.0, 1.0)])),
            Err(CalibrationError::DegenerateCurve(_))
        ));
        assert!(curve_gradient(&curve(&[(1.0, 0.0)])).is_err());
    }

    #[test]
    fn bend_on_exact_kink() {
        let c = kinked(200, 100, 30.0);
        assert_eq!(detect_bend(&c, UtensilKind::Spoon, Traverse::FromStart).unwrap(), 100.0);
        // walking from the handle end, the far side is now the reference
        assert_eq!(detect_bend(&c, UtensilKind::Spoon, Traverse::FromEnd).unwrap(), 100.0);
    }

    #[test]
    fn bend_on_smoothed_kink_stays_close() {
        let c = smooth_curve(&kinked(200, 100, 30.0), SMOOTHING_WINDOW).unwrap();
        let x = detect_bend(&c, UtensilKind::Spoon, Traverse::FromStart).unwrap();
        assert!((x - 100.0).abs() <= 2.0, "bend at {x}");
    }

    #[test]
    fn straight_and_shallow_curves_have_no_bend() {
        let line = kinked(200, 300, 30.0);
        assert!(matches!(
            detect_bend(&line, UtensilKind::Spoon, Traverse::FromStart),
            Err(CalibrationError::NoBendFound { .. })
        ));
        let shallow = kinked(200, 100, 10.0);
        assert!(matches!(
            detect_bend(&shallow, UtensilKind::Spoon, Traverse::FromStart),
            Err(CalibrationError::NoBendFound { .. })
        ));
        // the same 10 degree kink clears the fork threshold
        assert_eq!(detect_bend(&shallow, UtensilKind::Fork, Traverse::FromStart).unwrap(), 100.0);
    }

    #[test]
    fn bend_in_either_vertical_direction() {
        let down = kinked(200, 100, -30.0);
        assert_eq!(detect_bend(&down, UtensilKind::Spoon, Traverse::FromStart).unwrap(), 100.0);
    }

    #[test]
    fn first_bend_from_tip_wins() {
        // two kinks: at 60 and at 140
        let c: Vec<_> = (0..=200)
            .map(|x| {
                let y = if x <= 60 { 0.0 } else if x <= 140 { -(f64::from(x) - 60.0) } else { -80.0 };
                PixelPoint::new(f64::from(x), y)
            })
            .collect();
        assert_eq!(detect_bend(&c, UtensilKind::Spoon, Traverse::FromStart).unwrap(), 60.0);
        assert_eq!(detect_bend(&c, UtensilKind::Spoon, Traverse::FromEnd).unwrap(), 140.0);
    }

    #[test]
    fn calibration_invariants() {
        let cal = UtensilCalibration::new(UtensilKind::Spoon, 20.0, 120.0).unwrap();
        assert_eq!(cal.bowl_length_px(), 100.0);
        assert!((cal.cm_per_px() - 0.06).abs() < 1e-15);
        let fork = UtensilCalibration::new(UtensilKind::Fork, 250.0, 100.0).unwrap();
        assert!((fork.cm_per_px() - 0.05).abs() < 1e-15);
        assert!(UtensilCalibration::new(UtensilKind::Spoon, 5.0, 5.0).is_err());
    }

    #[test]
    fn calibrate_single_pixel_utensil_fails() {
        let m = InstanceMask::new(Label::Spoon, 1.0, 3, 3, vec![4, 1, 4]).unwrap();
        let err = calibrate(&m, UtensilKind::Spoon, PixelPoint::new(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, CalibrationError::DegenerateCurve(_)));
    }

    #[test]
    fn calibrate_on_hand_drawn_silhouette() {
        // flat rim from x=20 to x=120 on row 100, then a 45 degree handle rising 40 px
        let mut g = BinaryGrid::new(200, 140);
        for x in 20..=120u32 {
            for y in 100..110 {
                g.set(x, y, true);
            }
        }
        for k in 1..=40u32 {
            for y in (100 - k)..(108 - k) {
                g.set(120 + k, y, true);
            }
        }
        let m = InstanceMask::from_grid(Label::Spoon, 0.9, &g).unwrap();
        let cal = calibrate(&m, UtensilKind::Spoon, PixelPoint::new(60.0, 95.0)).unwrap();
        assert_eq!(cal.tip_x(), 20.0);
        assert!((cal.bend_x() - 120.0).abs() <= 2.0, "bend {}", cal.bend_x());

        // food near the other end flips the traversal; handle end is then the "tip"
        let flipped = calibrate(&m, UtensilKind::Spoon, PixelPoint::new(170.0, 60.0)).unwrap();
        assert_eq!(flipped.tip_x(), 160.0);
    }

    proptest! {
        #[test]
        fn bend_invariant_under_vertical_shift(shift in -500.0f64..500.0, kink in 10u32..190) {
            let c = kinked(200, kink, 30.0);
            let moved: Vec<_> = c.iter().map(|p| PixelPoint::new(p.x, p.y + shift)).collect();
            let a = detect_bend(&c, UtensilKind::Spoon, Traverse::FromStart).unwrap();
            let b = detect_bend(&moved, UtensilKind::Spoon, Traverse::FromStart).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
