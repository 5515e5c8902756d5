use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::FilteredSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no ground truth for video {0:?}")]
    MissingGroundTruth(String),
    #[error("ground truth for video {video_id:?} must be positive, got {value}")]
    NonPositiveGroundTruth { video_id: String, value: f64 },
    #[error("video {0:?} has no predictions inside its key-frame window")]
    NoPredictions(String),
    #[error("no videos to evaluate")]
    Empty,
}

/// What the pipeline predicted for one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoPrediction {
    pub video_id: String,
    pub series: FilteredSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMetrics {
    pub video_id: String,
    pub truth_cm3: f64,
    pub final_cm3: f64,
    pub best_frame_cm3: f64,
    pub per_frame_mae_cm3: f64,
    pub per_frame_mape_pct: f64,
    pub final_mae_cm3: f64,
    pub final_mape_pct: f64,
    pub best_frame_mae_cm3: f64,
    pub best_frame_mape_pct: f64,
}

/// Unweighted means of the per-video metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub videos: usize,
    pub per_frame_mae_cm3: f64,
    pub per_frame_mape_pct: f64,
    pub final_mae_cm3: f64,
    pub final_mape_pct: f64,
    pub best_frame_mae_cm3: f64,
    pub best_frame_mape_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_video: Vec<VideoMetrics>,
    pub aggregate: MetricSummary,
}

fn video_metrics(pred: &VideoPrediction, truth: f64) -> Result<VideoMetrics, EvalError> {
    let stored = &pred.series.stored_cm3;
    if stored.is_empty() {
        return Err(EvalError::NoPredictions(pred.video_id.clone()));
    }
    // per-frame error is averaged inside each video first, so long videos
    // do not dominate the aggregate
    let per_frame_mae = stored.iter().map(|s| (s - truth).abs()).sum::<f64>() / stored.len() as f64;
    let final_cm3 = pred.series.final_cm3;
    let best = pred.series.best_frame_cm3(truth);
    let final_mae = (final_cm3 - truth).abs();
    let best_mae = (best - truth).abs();
    let pct = |err: f64| 100.0 * err / truth;
    Ok(VideoMetrics {
        video_id: pred.video_id.clone(),
        truth_cm3: truth,
        final_cm3,
        best_frame_cm3: best,
        per_frame_mae_cm3: per_frame_mae,
        per_frame_mape_pct: pct(per_frame_mae),
        final_mae_cm3: final_mae,
        final_mape_pct: pct(final_mae),
        best_frame_mae_cm3: best_mae,
        best_frame_mape_pct: pct(best_mae),
    })
}

pub fn evaluate(
    predictions: &[VideoPrediction],
    truths: &BTreeMap<String, f64>,
) -> Result<EvalReport, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::Empty);
    }
    let per_video = predictions
        .iter()
        .map(|p| {
            let truth = *truths
                .get(&p.video_id)
                .ok_or_else(|| EvalError::MissingGroundTruth(p.video_id.clone()))?;
            if !(truth > 0.0 && truth.is_finite()) {
                return Err(EvalError::NonPositiveGroundTruth {
                    video_id: p.video_id.clone(),
                    value: truth,
                });
            }
            video_metrics(p, truth)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = per_video.len() as f64;
    let mean = |f: fn(&VideoMetrics) -> f64| per_video.iter().map(f).sum::<f64>() / n;
    let aggregate = MetricSummary {
        videos: per_video.len(),
        per_frame_mae_cm3: mean(|m| m.per_frame_mae_cm3),
        per_frame_mape_pct: mean(|m| m.per_frame_mape_pct),
        final_mae_cm3: mean(|m| m.final_mae_cm3),
        final_mape_pct: mean(|m| m.final_mape_pct),
        best_frame_mae_cm3: mean(|m| m.best_frame_mae_cm3),
        best_frame_mape_pct: mean(|m| m.best_frame_mape_pct),
    };
    Ok(EvalReport { per_video, aggregate })
}

/// Plain-text report: per-frame and final errors, then the best-frame table.
pub fn render_table(report: &EvalReport) -> String {
    let id_width = report
        .per_video
        .iter()
        .map(|m| m.video_id.len())
        .chain(["Video".len(), "Mean".len()])
        .max()
        .unwrap_or(5);
    let mut out = String::new();
    let mut rows = String::new();
    let line = |out: &mut String, id: &str, truth: Option<f64>, pf_mae: f64, pf_mape: f64, f_mae: f64, f_mape: f64| {
        let truth = truth.map_or_else(|| "-".to_string(), |t| format!("{t:.3}"));
        let _ = writeln!(
            out,
            "{id:<id_width$} | {truth:>12} | {pf_mae:>13.3} | {:>14} | {f_mae:>13.3} | {:>13}",
            format!("{pf_mape:.1}%"),
            format!("{f_mape:.1}%"),
        );
    };
    let _ = writeln!(
        out,
        "{:<id_width$} | {:>12} | {:>13} | {:>14} | {:>13} | {:>13}",
        "Video", "Truth (cm^3)", "Per Frame MAE", "Per Frame MAPE", "Final MAE", "Final MAPE"
    );
    for m in &report.per_video {
        line(
            &mut rows,
            &m.video_id,
            Some(m.truth_cm3),
            m.per_frame_mae_cm3,
            m.per_frame_mape_pct,
            m.final_mae_cm3,
            m.final_mape_pct,
        );
    }
    let a = &report.aggregate;
    let rule = "-".repeat(id_width + 80);
    out.push_str(&rule);
    out.push('\n');
    out.push_str(&rows);
    out.push_str(&rule);
    out.push('\n');
    line(
        &mut out,
        "Mean",
        None,
        a.per_frame_mae_cm3,
        a.per_frame_mape_pct,
        a.final_mae_cm3,
        a.final_mape_pct,
    );

    let _ = writeln!(out);
    let _ = writeln!(out, "Best frame prediction");
    let _ = writeln!(
        out,
        "{:<id_width$} | {:>14} | {:>15}",
        "Video", "Best Frame MAE", "Best Frame MAPE"
    );
    let rule = "-".repeat(id_width + 36);
    let _ = writeln!(out, "{rule}");
    for m in &report.per_video {
        let _ = writeln!(
            out,
            "{:<id_width$} | {:>14.3} | {:>15}",
            m.video_id,
            m.best_frame_mae_cm3,
            format!("{:.1}%", m.best_frame_mape_pct)
        );
    }
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(
        out,
        "{:<id_width$} | {:>14.3} | {:>15}",
        "Mean",
        a.best_frame_mae_cm3,
        format!("{:.1}%", a.best_frame_mape_pct)
    );
    out
}
