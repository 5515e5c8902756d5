//! Shape models turning a calibrated food mask into cubic centimetres.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibration::UtensilCalibration;
use crate::keyframe::MeasurementCandidate;
use crate::mask::{area_px, extents, InstanceMask, MaskError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeModel {
    /// Mask area extruded by the spoon width.
    Prism,
    /// Mask area read as the base disk of a hemisphere.
    Hemisphere,
    /// Mask extents as two semi-axes, spoon half-width as the third, plus
    /// a fixed bowl volume.
    Ellipsoid,
}

impl ShapeModel {
    pub const ALL: [ShapeModel; 3] = [ShapeModel::Prism, ShapeModel::Hemisphere, ShapeModel::Ellipsoid];

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeModel::Prism => "prism",
            ShapeModel::Hemisphere => "hemisphere",
            ShapeModel::Ellipsoid => "ellipsoid",
        }
    }
}

impl fmt::Display for ShapeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShapeModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeModel::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown shape {s:?} (expected prism, hemisphere or ellipsoid)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VolumeConstants {
    /// Assumed table-spoon width; prism depth and ellipsoid out-of-plane axis.
    pub spoon_width_cm: f64,
    /// Bowl volume under the rim, added to ellipsoid estimates.
    pub bowl_surplus_cm3: f64,
    /// Estimates at or above this are treated as spurious.
    pub max_plausible_cm3: f64,
}

impl Default for VolumeConstants {
    fn default() -> Self {
        Self {
            spoon_width_cm: 3.81,
            bowl_surplus_cm3: 5.0,
            max_plausible_cm3: 25.0,
        }
    }
}

impl VolumeConstants {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("spoon_width_cm", self.spoon_width_cm),
            ("bowl_surplus_cm3", self.bowl_surplus_cm3),
            ("max_plausible_cm3", self.max_plausible_cm3),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Strictly between zero and the plausibility cap.
    pub fn is_plausible(&self, cm3: f64) -> bool {
        cm3 > 0.0 && cm3 < self.max_plausible_cm3
    }
}

fn area_cm2(food: &InstanceMask, cal: &UtensilCalibration) -> Result<f64, MaskError> {
    let area = area_px(food);
    if area == 0 {
        return Err(MaskError::EmptyMask);
    }
    Ok(area as f64 * cal.cm_per_px().powi(2))
}

pub fn prism_volume(
    food: &InstanceMask,
    cal: &UtensilCalibration,
    k: &VolumeConstants,
) -> Result<f64, MaskError> {
    Ok(area_cm2(food, cal)? * k.spoon_width_cm)
}

pub fn hemisphere_volume(food: &InstanceMask, cal: &UtensilCalibration) -> Result<f64, MaskError> {
    Ok(hemisphere_from_area(area_cm2(food, cal)?))
}

/// Volume of the hemisphere whose base disk has area `area_cm2`.
pub fn hemisphere_from_area(area_cm2: f64) -> f64 {
    let r = (area_cm2 / PI).sqrt();
    2.0 / 3.0 * PI * r.powi(3)
}

pub fn ellipsoid_volume(
    food: &InstanceMask,
    cal: &UtensilCalibration,
    k: &VolumeConstants,
) -> Result<f64, MaskError> {
    let e = extents(food)?;
    let s = cal.cm_per_px();
    Ok(ellipsoid_from_axes(
        f64::from(e.width_px()) * s / 2.0,
        f64::from(e.height_px()) * s / 2.0,
        k,
    ))
}

/// Ellipsoid with in-plane semi-axes `a`, `b` (cm) plus the bowl surplus.
pub fn ellipsoid_from_axes(a: f64, b: f64, k: &VolumeConstants) -> f64 {
    let c = k.spoon_width_cm / 2.0;
    4.0 / 3.0 * PI * a * b * c + k.bowl_surplus_cm3
}

pub fn model_volume(
    model: ShapeModel,
    food: &InstanceMask,
    cal: &UtensilCalibration,
    k: &VolumeConstants,
) -> Result<f64, MaskError> {
    match model {
        ShapeModel::Prism => prism_volume(food, cal, k),
        ShapeModel::Hemisphere => hemisphere_volume(food, cal),
        ShapeModel::Ellipsoid => ellipsoid_volume(food, cal, k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub frame_index: u64,
    pub model: ShapeModel,
    pub raw_cm3: Option<f64>,
    pub plausible: bool,
}

impl VolumeEstimate {
    pub fn new(frame_index: u64, model: ShapeModel, raw_cm3: Option<f64>, k: &VolumeConstants) -> Self {
        Self {
            frame_index,
            model,
            raw_cm3,
            plausible: raw_cm3.is_some_and(|v| k.is_plausible(v)),
        }
    }
}

/// Volume for one frame's chosen pair. A missing calibration yields an
/// estimate with no raw value.
pub fn estimate_frame(
    frame_index: u64,
    candidate: &MeasurementCandidate,
    cal: Option<&UtensilCalibration>,
    model: ShapeModel,
    k: &VolumeConstants,
) -> Result<VolumeEstimate, MaskError> {
    let raw = match cal {
        Some(cal) => Some(model_volume(model, &candidate.food, cal, k)?),
        None => None,
    };
    Ok(VolumeEstimate::new(frame_index, model, raw, k))
}
