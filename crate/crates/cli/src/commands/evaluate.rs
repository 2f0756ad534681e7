use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use woodmask_core::agreement::{build_agreement_report, other_annotators, Rater};
use woodmask_core::manifest::load_manifest;
use woodmask_core::metrics::{
    aggregate, evaluate_pair, write_histograms_csv, EdgeCasePolicy, Metric, PairEvaluation,
};
use woodmask_core::png_io::read_mask_png;
use woodmask_core::split::{Bucket, SplitAssignment};
use woodmask_core::{Error, LabelMask, SampleRecord};

use crate::args::{AgreeArgs, EvalArgs};
use crate::failure::{CmdResult, Failure};
use crate::output::{guard, write_with};
use crate::Outcome;

pub const METRICS_CSV: &str = "metrics.csv";
pub const PER_SAMPLE_CSV: &str = "per_sample.csv";
pub const CONFUSION_CSV: &str = "confusion.csv";
pub const CONFUSION_NORMALIZED_CSV: &str = "confusion_normalized.csv";
pub const HISTOGRAMS_CSV: &str = "histograms.csv";

fn read_split(path: &Path) -> CmdResult<SplitAssignment> {
    let file = File::open(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Ok(SplitAssignment::read_csv(BufReader::new(file))?)
}

pub fn eval(args: EvalArgs) -> CmdResult<Outcome> {
    let manifest = load_manifest(&args.manifest)?;
    if args.bins == 0 {
        return Err(Failure::validation("--bins must be at least 1"));
    }
    let bucket: Option<(SplitAssignment, Bucket)> = match (&args.split, &args.bucket) {
        (Some(path), Some(name)) => Some((read_split(path)?, name.parse()?)),
        _ => None,
    };
    let outputs: Vec<PathBuf> = [METRICS_CSV, PER_SAMPLE_CSV, CONFUSION_CSV, CONFUSION_NORMALIZED_CSV, HISTOGRAMS_CSV]
        .iter()
        .map(|f| args.out_dir.join(f))
        .collect();
    let mut inputs = vec![args.manifest.as_path()];
    inputs.extend(args.split.as_deref());
    for out in &outputs {
        guard(out, &inputs)?;
    }

    let samples: Vec<&SampleRecord> = manifest
        .subset(args.subset)
        .filter(|s| s.masks.contains_key(&args.variant))
        .filter(|s| match &bucket {
            Some((assignment, b)) => assignment.bucket(&s.sample_id) == Some(*b),
            None => true,
        })
        .collect();
    let load_prediction = |s: &SampleRecord| -> Result<Option<LabelMask>, Error> {
        match (&args.predictions, &args.model) {
            (Some(dir), _) => {
                let path = dir.join(format!("{}.png", s.sample_id));
                if path.exists() {
                    read_mask_png(&path).map(Some)
                } else {
                    Ok(None)
                }
            }
            (None, Some(model)) if s.predictions.contains_key(model) => manifest.load_prediction(s, model).map(Some),
            _ => Ok(None),
        }
    };
    let evaluated: Vec<Option<PairEvaluation>> = samples
        .par_iter()
        .map(|s| {
            let Some(pred) = load_prediction(s)? else {
                return Ok(None);
            };
            let gt = manifest.load_mask(s, &args.variant)?;
            evaluate_pair(&gt, &pred, &EdgeCasePolicy::default())
                .map(Some)
                .map_err(|e| Error::InvalidSample {
                    sample: s.sample_id.clone(),
                    reason: e.to_string(),
                })
        })
        .collect::<Result<_, Error>>()?;

    let missing: Vec<&str> = samples
        .iter()
        .zip(&evaluated)
        .filter(|(_, e)| e.is_none())
        .map(|(s, _)| s.sample_id.as_str())
        .collect();
    if !missing.is_empty() {
        tracing::warn!("no prediction for {}", missing.join(", "));
    }
    let pairs: Vec<(&str, &PairEvaluation)> = samples
        .iter()
        .zip(&evaluated)
        .filter_map(|(s, e)| Some((s.sample_id.as_str(), e.as_ref()?)))
        .collect();
    if pairs.is_empty() {
        return Err(Failure::validation(format!(
            "nothing to evaluate: {} samples selected, none with a prediction",
            samples.len()
        )));
    }
    let reports: Vec<_> = pairs.iter().map(|(_, e)| e.report()).collect();
    let matrices: Vec<_> = pairs.iter().map(|(_, e)| e.confusion).collect();
    let (report, micro) = aggregate(&reports, &matrices)?;

    let mut written = Vec::new();
    written.push(write_with(&outputs[0], |w| Ok(report.write_csv(w)?))?);
    written.push(write_with(&outputs[1], |w| {
        let io = |e: std::io::Error| Failure::io(format!("{}: {e}", outputs[1].display()));
        let mut header = "sample_id".to_string();
        for m in Metric::ALL {
            write!(header, ",{}", m.name()).unwrap();
        }
        writeln!(w, "{header},model_score").map_err(io)?;
        for ((id, _), r) in pairs.iter().zip(&reports) {
            let mut line = id.to_string();
            for m in Metric::ALL {
                line.push(',');
                if let Some(v) = r.row(m).all {
                    write!(line, "{v:.6}").unwrap();
                }
            }
            line.push(',');
            if let Some(v) = r.model_score {
                write!(line, "{v:.6}").unwrap();
            }
            writeln!(w, "{line}").map_err(io)?;
        }
        Ok(())
    })?);
    written.push(write_with(&outputs[2], |w| Ok(micro.write_csv(w)?))?);
    written.push(write_with(&outputs[3], |w| Ok(micro.write_normalized_csv(w)?))?);
    written.push(write_with(&outputs[4], |w| Ok(write_histograms_csv(&reports, args.bins, w)?))?);

    let mut summary = format!("{} samples evaluated", pairs.len());
    if !missing.is_empty() {
        write!(summary, ", {} without prediction", missing.len()).unwrap();
    }
    summary.push('\n');
    summary.push_str(&report.to_table());
    Ok(Outcome {
        summary,
        reports: written,
    })
}

pub fn agree(args: AgreeArgs) -> CmdResult<Outcome> {
    let manifest = load_manifest(&args.manifest)?;
    guard(&args.out, &[&args.manifest])?;
    let has_baseline = manifest
        .subset(args.subset)
        .any(|s| s.annotations.contains_key(&args.baseline));
    if !has_baseline {
        return Err(Failure::validation(format!(
            "baseline {:?} has no annotations in subset {}",
            args.baseline, args.subset
        )));
    }
    let annotators = if args.annotators.is_empty() {
        other_annotators(&manifest, args.subset, &args.baseline)
    } else {
        args.annotators.clone()
    };
    let mut raters: Vec<Rater> = annotators.into_iter().map(Rater::Annotator).collect();
    raters.extend(args.model.iter().map(|m| Rater::Model {
        name: m.clone(),
        model: m.clone(),
    }));
    if raters.is_empty() {
        return Err(Failure::validation("no annotator or model to compare with the baseline"));
    }
    let table = build_agreement_report(
        &manifest,
        args.subset,
        &args.baseline,
        &raters,
        &args.morphology.params(),
        &EdgeCasePolicy::default(),
    )?;
    for d in &table.diagnostics {
        tracing::warn!("{d}");
    }
    let out = write_with(&args.out, |w| Ok(table.write_csv(w)?))?;
    let mut summary = table.to_table();
    for d in &table.diagnostics {
        writeln!(summary, "note: {d}").unwrap();
    }
    Ok(Outcome {
        summary,
        reports: vec![out],
    })
}
