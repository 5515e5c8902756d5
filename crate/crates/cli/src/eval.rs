use std::collections::BTreeMap;
use std::fs;

use anyhow::{anyhow, Context};
use bitevol_core::filter::{evaluate, render_table};

use crate::estimate::read_results;
use crate::files::{create_dir, write_json};
use crate::{EvalArgs, Failure};

pub fn run(args: &EvalArgs) -> Result<(), Failure> {
    let results = read_results(&args.results)?;
    if results.videos.is_empty() {
        return Err(Failure::input(anyhow!("{} holds no videos", args.results.display())));
    }
    let bytes = fs::read(&args.truth).with_context(|| format!("reading {}", args.truth.display()))?;
    let truths: BTreeMap<String, f64> =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", args.truth.display()))?;

    let predictions = results
        .videos
        .iter()
        .map(|v| {
            v.prediction()
                .ok_or_else(|| anyhow!("video {:?} has no active key-frames to score", v.video_id))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let report = evaluate(&predictions, &truths).map_err(Failure::input)?;
    let table = render_table(&report);
    print!("{table}");

    if let Some(out) = &args.out {
        create_dir(out)?;
        write_json(&out.join("eval_report.json"), &report)?;
        fs::write(out.join("eval_report.txt"), &table).context("writing eval_report.txt")?;
    }
    Ok(())
}
