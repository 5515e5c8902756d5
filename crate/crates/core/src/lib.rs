//! Food volume estimation on utensils from per-frame instance masks.
//!
//! The pipeline reads labeled RLE masks for every video frame, finds the
//! frames where a food-bearing spoon or fork is lifted towards the face,
//! recovers the pixel scale from the utensil's neck bend, fits one of three
//! shape models to the food mask, filters spurious frames and averages the
//! survivors into one volume per bite.

pub mod calibration;
pub mod filter;
pub mod keyframe;
pub mod mask;
pub mod pipeline;
pub mod synth;
pub mod volume;

pub use calibration::{calibrate, UtensilCalibration, UtensilKind};
pub use keyframe::{decide, KeyframeDecision, KeyframeParams, KeyframeReason};
pub use mask::{FrameObservation, InstanceMask, Label, PixelPoint};
pub use pipeline::{analyze_video, PipelineConfig, VideoResult};
pub use volume::{ShapeModel, VolumeConstants, VolumeEstimate};
