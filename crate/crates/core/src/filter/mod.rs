//! Sequential spurious-segmentation filter and final aggregation.
//!
//! The filter keeps a running mean of plausible per-frame volumes. An
//! implausible (or missing) volume is replaced by the current mean, up to
//! five times in a row; once that budget is spent the mean is dropped and
//! zero is stored until a plausible volume arrives again.

mod metrics;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::VolumeConstants;

pub use metrics::{evaluate, render_table, EvalError, EvalReport, MetricSummary, VideoMetrics, VideoPrediction};

/// Consecutive bad frames tolerated before the running mean is discarded.
pub const BAD_FRAME_BUDGET: u8 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("no frames inside the key-frame window")]
    NoActiveFrames,
    #[error("series length {stored} does not match window flags length {flags}")]
    LengthMismatch { stored: usize, flags: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    pub running_mean_cm3: f64,
    pub good_count: u64,
    pub bad_budget: u8,
}

impl Default for FilterState {
    fn default() -> Self {
        Self {
            running_mean_cm3: 0.0,
            good_count: 0,
            bad_budget: BAD_FRAME_BUDGET,
        }
    }
}

/// Advance the filter by one frame, returning the new state and the value
/// stored for this frame.
pub fn filter_step(state: FilterState, vol: Option<f64>, bounds: &VolumeConstants) -> (FilterState, f64) {
    match vol {
        Some(v) if bounds.is_plausible(v) => {
            let good_count = state.good_count + 1;
            let running_mean_cm3 = state.running_mean_cm3 + (v - state.running_mean_cm3) / good_count as f64;
            let next = FilterState {
                running_mean_cm3,
                good_count,
                bad_budget: BAD_FRAME_BUDGET,
            };
            (next, v)
        }
        _ if state.bad_budget == 0 => (
            FilterState {
                running_mean_cm3: 0.0,
                good_count: 0,
                bad_budget: 0,
            },
            0.0,
        ),
        _ => (
            FilterState {
                bad_budget: state.bad_budget - 1,
                ..state
            },
            state.running_mean_cm3,
        ),
    }
}

/// Run the filter over a whole sequence from the initial state.
pub fn filter_series(vols: &[Option<f64>], bounds: &VolumeConstants) -> Vec<f64> {
    vols.iter()
        .scan(FilterState::default(), |state, &v| {
            let (next, stored) = filter_step(*state, v, bounds);
            *state = next;
            Some(stored)
        })
        .collect()
}

/// Pass-through used when filtering is disabled: raw volumes are kept as
/// they are and frames without a volume store zero.
pub fn unfiltered_series(vols: &[Option<f64>]) -> Vec<f64> {
    vols.iter().map(|v| v.unwrap_or(0.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredSeries {
    /// Stored prediction for every frame inside the window, in order.
    pub stored_cm3: Vec<f64>,
    pub final_cm3: f64,
}

impl FilteredSeries {
    /// Stored prediction closest to the ground truth.
    pub fn best_frame_cm3(&self, truth_cm3: f64) -> f64 {
        self.stored_cm3
            .iter()
            .copied()
            .min_by(|a, b| (a - truth_cm3).abs().total_cmp(&(b - truth_cm3).abs()))
            .expect("series is never empty")
    }
}

/// Mean of the stored predictions inside the key-frame window.
pub fn aggregate(stored: &[f64], in_window: &[bool]) -> Result<FilteredSeries, FilterError> {
    if stored.len() != in_window.len() {
        return Err(FilterError::LengthMismatch {
            stored: stored.len(),
            flags: in_window.len(),
        });
    }
    let kept: Vec<f64> = stored
        .iter()
        .zip(in_window)
        .filter_map(|(&s, &w)| w.then_some(s))
        .collect();
    if kept.is_empty() {
        return Err(FilterError::NoActiveFrames);
    }
    let final_cm3 = kept.iter().sum::<f64>() / kept.len() as f64;
    Ok(FilteredSeries {
        stored_cm3: kept,
        final_cm3,
    })
}
