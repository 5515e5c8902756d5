//! Measurement-position detection: pick the (food, utensil) pair that is
//! lifted towards the face, and decide whether the frame is a key frame.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::calibration::UtensilKind;
use crate::mask::{area_px, centroid, FrameObservation, InstanceMask, Label, PixelPoint};

pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementCandidate {
    pub food: InstanceMask,
    pub utensil: InstanceMask,
    pub utensil_kind: UtensilKind,
    pub food_centroid: PixelPoint,
    pub utensil_centroid: PixelPoint,
    pub food_to_utensil_px: f64,
    pub utensil_to_face_px: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyframeReason {
    NoUtensil,
    NoFood,
    NoFace,
    TooFarFromFace,
    Active,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyframeDecision {
    pub reason: KeyframeReason,
    pub candidate: Option<MeasurementCandidate>,
}

impl KeyframeDecision {
    fn inactive(reason: KeyframeReason) -> Self {
        Self {
            reason,
            candidate: None,
        }
    }

    pub fn is_active(&self) -> bool {
        self.reason == KeyframeReason::Active
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyframeParams {
    /// Face distance threshold as a fraction of image height.
    pub threshold_fraction: f64,
    /// Equidistant spoon and fork candidates resolve to the spoon.
    pub prefer_spoon: bool,
}

impl Default for KeyframeParams {
    fn default() -> Self {
        Self {
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            prefer_spoon: true,
        }
    }
}

/// Highest-confidence instance of `label`; ties go to the larger mask,
/// then to the earlier instance.
pub fn best_instance(frame: &FrameObservation, label: Label) -> Option<&InstanceMask> {
    frame
        .instances_with(label)
        .min_by(|(ia, a), (ib, b)| {
            b.confidence()
                .partial_cmp(&a.confidence())
                .unwrap_or(Ordering::Equal)
                .then_with(|| area_px(b).cmp(&area_px(a)))
                .then_with(|| ia.cmp(ib))
        })
        .map(|(_, m)| m)
}

pub fn select_utensils(frame: &FrameObservation) -> (Option<&InstanceMask>, Option<&InstanceMask>) {
    (
        best_instance(frame, Label::Spoon),
        best_instance(frame, Label::Fork),
    )
}

/// Nearest non-empty food instance (by centroid) for each present utensil.
pub fn pair_food(
    frame: &FrameObservation,
    spoon: Option<&InstanceMask>,
    fork: Option<&InstanceMask>,
) -> Vec<MeasurementCandidate> {
    let foods: Vec<(&InstanceMask, PixelPoint)> = frame
        .instances_with(Label::Food)
        .filter_map(|(_, m)| centroid(m).ok().map(|c| (m, c)))
        .collect();
    if foods.is_empty() {
        return Vec::new();
    }
    [(spoon, UtensilKind::Spoon), (fork, UtensilKind::Fork)]
        .into_iter()
        .filter_map(|(utensil, kind)| {
            let utensil = utensil?;
            let uc = centroid(utensil).ok()?;
            let (food, fc, d) = foods
                .iter()
                .map(|(m, c)| (*m, *c, c.distance(&uc)))
                .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal))?;
            Some(MeasurementCandidate {
                food: food.clone(),
                utensil: utensil.clone(),
                utensil_kind: kind,
                food_centroid: fc,
                utensil_centroid: uc,
                food_to_utensil_px: d,
                utensil_to_face_px: None,
            })
        })
        .collect()
}

pub fn decide(frame: &FrameObservation, params: &KeyframeParams) -> KeyframeDecision {
    let (spoon, fork) = select_utensils(frame);
    if spoon.is_none() && fork.is_none() {
        return KeyframeDecision::inactive(KeyframeReason::NoUtensil);
    }
    let mut candidates = pair_food(frame, spoon, fork);
    if candidates.is_empty() {
        return KeyframeDecision::inactive(KeyframeReason::NoFood);
    }
    let Some(face) = best_instance(frame, Label::Face).and_then(|m| centroid(m).ok()) else {
        return KeyframeDecision::inactive(KeyframeReason::NoFace);
    };
    for c in &mut candidates {
        c.utensil_to_face_px = Some(c.utensil_centroid.distance(&face));
    }
    let rank = |c: &MeasurementCandidate| match (c.utensil_kind, params.prefer_spoon) {
        (UtensilKind::Spoon, true) | (UtensilKind::Fork, false) => 0,
        _ => 1,
    };
    let chosen = candidates
        .into_iter()
        .min_by(|a, b| {
            a.utensil_to_face_px
                .partial_cmp(&b.utensil_to_face_px)
                .unwrap_or(Ordering::Equal)
                .then_with(|| rank(a).cmp(&rank(b)))
        })
        .expect("non-empty candidates");
    let limit = params.threshold_fraction * f64::from(frame.image_height);
    if chosen.utensil_to_face_px.unwrap_or(f64::INFINITY) < limit {
        KeyframeDecision {
            reason: KeyframeReason::Active,
            candidate: Some(chosen),
        }
    } else {
        KeyframeDecision::inactive(KeyframeReason::TooFarFromFace)
    }
}
