use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use bitevol_core::mask::interchange::parse_video;
use bitevol_core::{analyze_video, PipelineConfig, VideoResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::files::{create_dir, expand_inputs, video_id, write_json};
use crate::{EstimateArgs, Failure};

pub const RESULTS_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultsFile {
    pub version: u32,
    pub videos: Vec<VideoResult>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub video_id: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VideoSummary {
    pub video_id: String,
    pub frames_processed: usize,
    pub active_frames: usize,
    pub window_start_frame: Option<u64>,
    pub window_end_frame: Option<u64>,
    pub window_frames: usize,
    pub final_cm3: Option<f64>,
}

/// Everything needed to replay a run.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub inputs: Vec<InputRecord>,
    pub config: PipelineConfig,
    pub videos: Vec<VideoSummary>,
}

fn load_config(args: &EstimateArgs) -> Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let value: serde_json::Value =
                serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
            // accept a manifest from an earlier run as well as a bare config
            let config = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(config).with_context(|| format!("invalid config in {}", path.display()))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(shape) = args.shape {
        config.shape = shape;
    }
    if let Some(t) = args.keyframe_threshold {
        config.keyframe_threshold = t;
    }
    if let Some(s) = args.stride {
        config.downsample_stride = s;
    }
    if args.no_filter {
        config.filter = false;
    }
    config.validate()?;
    Ok(config)
}

fn process(path: &PathBuf, config: &PipelineConfig) -> Result<(InputRecord, VideoResult)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let video = parse_video(&bytes).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let id = video_id(path);
    let result = analyze_video(&id, &video, config);
    let record = InputRecord {
        path: path.clone(),
        video_id: id,
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    Ok((record, result))
}

pub fn run(args: &EstimateArgs) -> Result<(), Failure> {
    let config = load_config(args)?;
    let paths = expand_inputs(&args.inputs)?;
    if paths.is_empty() {
        return Err(Failure::input(anyhow!("no interchange files found in the given inputs")));
    }
    let mut seen = BTreeSet::new();
    for p in &paths {
        if !seen.insert(video_id(p)) {
            return Err(Failure::input(anyhow!("duplicate video id {:?} ({})", video_id(p), p.display())));
        }
    }

    let processed: Vec<(InputRecord, VideoResult)> = paths
        .par_iter()
        .map(|p| process(p, &config))
        .collect::<Result<_>>()?;
    let (inputs, videos): (Vec<_>, Vec<_>) = processed.into_iter().unzip();

    create_dir(&args.out)?;
    let summaries = videos
        .iter()
        .map(|v| VideoSummary {
            video_id: v.video_id.clone(),
            frames_processed: v.frames_processed,
            active_frames: v.active_frames,
            window_start_frame: v.window_start_frame,
            window_end_frame: v.window_end_frame,
            window_frames: v.frames.iter().filter(|f| f.in_window).count(),
            final_cm3: v.final_cm3,
        })
        .collect::<Vec<_>>();
    for s in &summaries {
        match s.final_cm3 {
            Some(v) => println!(
                "{}: {:.3} cm3 over {} window frames ({} processed)",
                s.video_id, v, s.window_frames, s.frames_processed
            ),
            None => println!("{}: no active key-frames ({} processed)", s.video_id, s.frames_processed),
        }
    }
    let any_active = summaries.iter().any(|s| s.final_cm3.is_some());

    write_json(
        &args.out.join("results.json"),
        &ResultsFile {
            version: RESULTS_VERSION,
            videos,
        },
    )?;
    write_json(
        &args.out.join("manifest.json"),
        &RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            config,
            videos: summaries,
        },
    )?;

    if !any_active {
        return Err(Failure {
            code: Failure::NO_KEYFRAMES,
            error: anyhow!("no active key-frames in any video"),
        });
    }
    Ok(())
}

pub fn read_results(path: &PathBuf) -> Result<ResultsFile> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let results: ResultsFile =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    if results.version != RESULTS_VERSION {
        bail!("unsupported results version {}", results.version);
    }
    Ok(results)
}
