//! JSON interchange format: one document per video.
//!
//! ```json
//! {"version": 1, "fps": 30.0, "frames": [
//!   {"frame_index": 0, "timestamp_s": 0.0, "image_width": 640, "image_height": 480,
//!    "instances": [{"label": "Spoon", "confidence": 0.93, "rle": [1204, 18, 622]}]}
//! ]}
//! ```
//!
//! Unknown keys are ignored, missing keys are errors. Instance masks take
//! their dimensions from the enclosing frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FrameObservation, InstanceMask, Label, MaskError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported interchange version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("frame {frame_index}, instance {instance}: {source}")]
    Instance {
        frame_index: u64,
        instance: usize,
        source: MaskError,
    },
    #[error("frame {frame_index}: frame indices must be strictly increasing (previous {previous})")]
    NonIncreasingFrameIndex { frame_index: u64, previous: u64 },
    #[error("frame {frame_index}: invalid image size {width}x{height}")]
    InvalidImageSize {
        frame_index: u64,
        width: u32,
        height: u32,
    },
}

impl InterchangeError {
    /// Frame the error was found in, when it is frame-specific.
    pub fn frame_index(&self) -> Option<u64> {
        match self {
            Self::Instance { frame_index, .. }
            | Self::NonIncreasingFrameIndex { frame_index, .. }
            | Self::InvalidImageSize { frame_index, .. } => Some(*frame_index),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub label: Label,
    pub confidence: f64,
    pub rle: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub timestamp_s: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub instances: Vec<InstanceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoDocument {
    pub version: u32,
    pub fps: f64,
    pub frames: Vec<FrameRecord>,
}

/// A parsed and validated video.
#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    pub fps: f64,
    pub frames: Vec<FrameObservation>,
}

impl VideoDocument {
    pub fn from_json(bytes: &[u8]) -> Result<Self, InterchangeError> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("interchange document serializes")
    }

    pub fn from_video(video: &Video) -> Self {
        let frames = video
            .frames
            .iter()
            .map(|f| FrameRecord {
                frame_index: f.frame_index,
                timestamp_s: f.timestamp_s,
                image_width: f.image_width,
                image_height: f.image_height,
                instances: f
                    .instances
                    .iter()
                    .map(|m| InstanceRecord {
                        label: m.label(),
                        confidence: m.confidence(),
                        rle: m.rle().to_vec(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            version: FORMAT_VERSION,
            fps: video.fps,
            frames,
        }
    }

    /// Validate every frame and build masks.
    pub fn into_video(self) -> Result<Video, InterchangeError> {
        if self.version != FORMAT_VERSION {
            return Err(InterchangeError::UnsupportedVersion(self.version));
        }
        let mut previous: Option<u64> = None;
        let mut frames = Vec::with_capacity(self.frames.len());
        for rec in self.frames {
            let frame_index = rec.frame_index;
            if let Some(prev) = previous {
                if frame_index <= prev {
                    return Err(InterchangeError::NonIncreasingFrameIndex {
                        frame_index,
                        previous: prev,
                    });
                }
            }
            previous = Some(frame_index);
            if rec.image_width == 0 || rec.image_height == 0 {
                return Err(InterchangeError::InvalidImageSize {
                    frame_index,
                    width: rec.image_width,
                    height: rec.image_height,
                });
            }
            let instances = rec
                .instances
                .into_iter()
                .enumerate()
                .map(|(i, inst)| {
                    InstanceMask::new(
                        inst.label,
                        inst.confidence,
                        rec.image_width,
                        rec.image_height,
                        inst.rle,
                    )
                    .map_err(|source| InterchangeError::Instance {
                        frame_index,
                        instance: i,
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            frames.push(FrameObservation {
                frame_index,
                timestamp_s: rec.timestamp_s,
                image_width: rec.image_width,
                image_height: rec.image_height,
                instances,
            });
        }
        Ok(Video {
            fps: self.fps,
            frames,
        })
    }
}

pub fn parse_video(bytes: &[u8]) -> Result<Video, InterchangeError> {
    VideoDocument::from_json(bytes)?.into_video()
}
