//! Per-video orchestration: downsample, key-frame detection, calibration,
//! volume, filtering, aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{calibrate, UtensilKind};
use crate::filter::{aggregate, filter_series, unfiltered_series, FilteredSeries, VideoPrediction};
use crate::keyframe::{decide, KeyframeParams, KeyframeReason};
use crate::mask::interchange::Video;
use crate::mask::FrameObservation;
use crate::volume::{estimate_frame, ShapeModel, VolumeConstants};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("downsample_stride must be >= 1")]
    ZeroStride,
    #[error("keyframe_threshold must be in (0, 1], got {0}")]
    Threshold(f64),
    #[error("{0}")]
    Constants(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub shape: ShapeModel,
    pub keyframe_threshold: f64,
    pub downsample_stride: u32,
    pub constants: VolumeConstants,
    pub prefer_spoon: bool,
    /// Run the spurious-segmentation filter; when off, raw volumes are averaged.
    pub filter: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            shape: ShapeModel::Ellipsoid,
            keyframe_threshold: 0.5,
            downsample_stride: 5,
            constants: VolumeConstants::default(),
            prefer_spoon: true,
            filter: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.downsample_stride == 0 {
            return Err(ConfigError::ZeroStride);
        }
        if !(self.keyframe_threshold > 0.0 && self.keyframe_threshold <= 1.0) {
            return Err(ConfigError::Threshold(self.keyframe_threshold));
        }
        self.constants.validate().map_err(ConfigError::Constants)
    }

    fn keyframe_params(&self) -> KeyframeParams {
        KeyframeParams {
            threshold_fraction: self.keyframe_threshold,
            prefer_spoon: self.prefer_spoon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub frame_index: u64,
    pub keyframe: KeyframeReason,
    pub in_window: bool,
    pub utensil: Option<UtensilKind>,
    pub utensil_to_face_px: Option<f64>,
    pub cm_per_px: Option<f64>,
    pub bowl_length_px: Option<f64>,
    pub calibration_error: Option<String>,
    pub raw_cm3: Option<f64>,
    pub plausible: bool,
    pub stored_cm3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoResult {
    pub video_id: String,
    pub shape: ShapeModel,
    pub filtered: bool,
    pub frames_total: usize,
    pub frames_processed: usize,
    pub active_frames: usize,
    pub window_start_frame: Option<u64>,
    pub window_end_frame: Option<u64>,
    pub final_cm3: Option<f64>,
    pub frames: Vec<FrameResult>,
}

impl VideoResult {
    /// Stored predictions inside the key-frame window.
    pub fn window_series(&self) -> Vec<f64> {
        self.frames.iter().filter_map(|f| f.stored_cm3).collect()
    }

    pub fn prediction(&self) -> Option<VideoPrediction> {
        Some(VideoPrediction {
            video_id: self.video_id.clone(),
            series: FilteredSeries {
                stored_cm3: self.window_series(),
                final_cm3: self.final_cm3?,
            },
        })
    }
}

/// Frames kept after downsampling on frame index.
pub fn downsample(frames: &[FrameObservation], stride: u32) -> Vec<&FrameObservation> {
    let stride = u64::from(stride.max(1));
    frames.iter().filter(|f| f.frame_index % stride == 0).collect()
}

fn analyze_frame(frame: &FrameObservation, config: &PipelineConfig) -> FrameResult {
    let decision = decide(frame, &config.keyframe_params());
    let mut result = FrameResult {
        frame_index: frame.frame_index,
        keyframe: decision.reason,
        in_window: false,
        utensil: None,
        utensil_to_face_px: None,
        cm_per_px: None,
        bowl_length_px: None,
        calibration_error: None,
        raw_cm3: None,
        plausible: false,
        stored_cm3: None,
    };
    let Some(candidate) = decision.candidate else {
        return result;
    };
    result.utensil = Some(candidate.utensil_kind);
    result.utensil_to_face_px = candidate.utensil_to_face_px;
    let cal = match calibrate(&candidate.utensil, candidate.utensil_kind, candidate.food_centroid) {
        Ok(cal) => Some(cal),
        Err(e) => {
            result.calibration_error = Some(e.to_string());
            None
        }
    };
    result.cm_per_px = cal.map(|c| c.cm_per_px());
    result.bowl_length_px = cal.map(|c| c.bowl_length_px());
    if let Ok(est) = estimate_frame(frame.frame_index, &candidate, cal.as_ref(), config.shape, &config.constants) {
        result.raw_cm3 = est.raw_cm3;
        result.plausible = est.plausible;
    }
    result
}

/// Run the whole pipeline over one video.
pub fn analyze_video(video_id: &str, video: &Video, config: &PipelineConfig) -> VideoResult {
    let kept = downsample(&video.frames, config.downsample_stride);
    let mut frames: Vec<FrameResult> = kept.par_iter().map(|f| analyze_frame(f, config)).collect();

    let active = |f: &FrameResult| f.keyframe == KeyframeReason::Active;
    let first = frames.iter().position(active);
    let last = frames.iter().rposition(active);
    let mut final_cm3 = None;
    if let (Some(first), Some(last)) = (first, last) {
        let window = &mut frames[first..=last];
        let vols: Vec<Option<f64>> = window.iter().map(|f| f.raw_cm3.filter(|_| active(f))).collect();
        let stored = if config.filter {
            filter_series(&vols, &config.constants)
        } else {
            unfiltered_series(&vols)
        };
        for (f, s) in window.iter_mut().zip(&stored) {
            f.in_window = true;
            f.stored_cm3 = Some(*s);
        }
        final_cm3 = aggregate(&stored, &vec![true; stored.len()])
            .ok()
            .map(|s| s.final_cm3);
    }

    VideoResult {
        video_id: video_id.to_string(),
        shape: config.shape,
        filtered: config.filter,
        frames_total: video.frames.len(),
        frames_processed: frames.len(),
        active_frames: frames.iter().filter(|f| active(f)).count(),
        window_start_frame: first.map(|i| frames[i].frame_index),
        window_end_frame: last.map(|i| frames[i].frame_index),
        final_cm3,
        frames,
    }
}
