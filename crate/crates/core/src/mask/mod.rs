//! Mask data model: labels, RLE-encoded instance masks, frames and the
//! pixel-geometry primitives the rest of the pipeline is built on.
//!
//! Masks are stored run-length encoded in row-major order. The first run
//! counts background pixels (it may be zero), runs then alternate between
//! foreground and background. Pixel `(x, y)` is the pixel center at integer
//! coordinates, `y` growing downward.

mod geometry;
pub mod interchange;
mod rle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geometry::{area_px, centroid, extents, top_curve, Extents};
pub use rle::{rle_decode, rle_encode, BinaryGrid, RowSpan, Spans};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskError {
    #[error("malformed RLE: {0}")]
    MalformedRle(String),
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("unknown label {0:?} (expected Food, Spoon, Fork or Face)")]
    UnknownLabel(String),
    #[error("confidence {0} outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("invalid mask dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
}

/// Instance class emitted by the upstream segmenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Food,
    Spoon,
    Fork,
    Face,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Food, Label::Spoon, Label::Fork, Label::Face];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Food => "Food",
            Label::Spoon => "Spoon",
            Label::Fork => "Fork",
            Label::Face => "Face",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| MaskError::UnknownLabel(s.to_string()))
    }
}

/// A point in image space, measured in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub x: f64,
    pub y: f64,
}

impl PixelPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &PixelPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One labeled binary mask with its detector confidence.
///
/// Construction validates the RLE, so every `InstanceMask` in circulation
/// satisfies `sum(rle) == width * height` and has no interior zero runs.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMask {
    label: Label,
    confidence: f64,
    width: u32,
    height: u32,
    rle: Vec<u32>,
}

impl InstanceMask {
    pub fn new(
        label: Label,
        confidence: f64,
        width: u32,
        height: u32,
        rle: Vec<u32>,
    ) -> Result<Self, MaskError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(MaskError::InvalidConfidence(confidence));
        }
        rle::validate(width, height, &rle)?;
        Ok(Self {
            label,
            confidence,
            width,
            height,
            rle,
        })
    }

    pub fn from_grid(label: Label, confidence: f64, grid: &BinaryGrid) -> Result<Self, MaskError> {
        Self::new(label, confidence, grid.width(), grid.height(), rle_encode(grid))
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn rle(&self) -> &[u32] {
        &self.rle
    }

    /// Foreground row segments in row-major order.
    pub fn spans(&self) -> Spans<'_> {
        Spans::new(self.width, &self.rle)
    }

    pub fn is_empty(&self) -> bool {
        area_px(self) == 0
    }
}

/// Every instance observed in one video frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObservation {
    pub frame_index: u64,
    pub timestamp_s: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub instances: Vec<InstanceMask>,
}

impl FrameObservation {
    pub fn instances_with(&self, label: Label) -> impl Iterator<Item = (usize, &InstanceMask)> {
        self.instances
            .iter()
            .enumerate()
            .filter(move |(_, m)| m.label() == label)
    }
}
