use std::collections::BTreeMap;
use std::fs;

use anyhow::{Context, Result};
use bitevol_core::synth::{reference_suite, render_video, SceneSpec};
use rayon::prelude::*;

use crate::files::{create_dir, video_id, write_json, GROUND_TRUTH_FILE, TRUTH_SUFFIX};
use crate::{Failure, SynthArgs};

fn scenes(args: &SynthArgs) -> Result<Vec<(String, SceneSpec)>> {
    if args.reference_suite {
        return Ok(reference_suite()
            .into_iter()
            .enumerate()
            .map(|(i, mut spec)| {
                if let Some(seed) = args.seed {
                    spec.seed = seed.wrapping_add(i as u64);
                }
                (format!("video_{i:02}"), spec)
            })
            .collect());
    }
    let path = args.spec.as_ref().expect("clap enforces a source");
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut spec: SceneSpec =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing scene spec {}", path.display()))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    Ok(vec![(video_id(path), spec)])
}

pub fn run(args: &SynthArgs) -> Result<(), Failure> {
    let scenes = scenes(args)?;
    let rendered = scenes
        .par_iter()
        .map(|(id, spec)| render_video(spec).map(|r| (id.clone(), r)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::input)?;

    create_dir(&args.out)?;
    let mut truths = BTreeMap::new();
    for (id, r) in &rendered {
        let video_path = args.out.join(format!("{id}.json"));
        fs::write(&video_path, r.video_json()).with_context(|| format!("writing {}", video_path.display()))?;
        let truth_path = args.out.join(format!("{id}{TRUTH_SUFFIX}"));
        fs::write(&truth_path, r.truth_json()).with_context(|| format!("writing {}", truth_path.display()))?;
        truths.insert(id.clone(), r.truth.true_volume_cm3);
        println!(
            "{id}: {} frames, {} {:.3} cm3",
            r.video.frames.len(),
            r.truth.shape,
            r.truth.true_volume_cm3
        );
    }
    write_json(&args.out.join(GROUND_TRUTH_FILE), &truths)?;
    Ok(())
}
