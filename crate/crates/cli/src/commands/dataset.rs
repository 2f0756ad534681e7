use std::fmt::Write as _;
use std::io::Write as _;

use rayon::prelude::*;
use woodmask_core::labelstudio::{import_labelstudio_export, ImportOptions};
use woodmask_core::manifest::{load_manifest, save_manifest};
use woodmask_core::png_io::encode_mask_png;
use woodmask_core::split::split as split_manifest;
use woodmask_core::stats::class_area_stats;
use woodmask_core::{build_label_mask, ClassId, DatasetManifest, Error, NUM_CLASSES};

use crate::args::{FlattenArgs, IngestArgs, SplitArgs, StatsArgs};
use crate::failure::{CmdResult, Failure};
use crate::output::{check_variant_name, guard, parent_dir, write_with};
use crate::Outcome;

pub fn ingest(args: IngestArgs) -> CmdResult<Outcome> {
    guard(&args.out, &[&args.export])?;
    let options = ImportOptions {
        default_subset: Some(args.default_subset),
        image_root: args.image_root.clone(),
    };
    let report = import_labelstudio_export(&args.export, &options)?;
    for warning in &report.warnings {
        tracing::warn!("{warning}");
    }
    let mut manifest = DatasetManifest::new(report.records);
    manifest.split_seed = args.split_seed;
    manifest.base_dir = parent_dir(&args.out);
    manifest.validate()?;
    save_manifest(&args.out, &manifest)?;

    let regions: usize = manifest
        .samples
        .iter()
        .flat_map(|s| s.annotations.values())
        .map(Vec::len)
        .sum();
    Ok(Outcome {
        summary: format!(
            "imported {} samples, {} regions, {} skipped results\n",
            manifest.samples.len(),
            regions,
            report.skipped_regions
        ),
        reports: vec![args.out],
    })
}

struct Built {
    annotator: String,
    regions: usize,
    clipped: bool,
    counts: [u64; NUM_CLASSES],
    png: Vec<u8>,
}

pub fn flatten(args: FlattenArgs) -> CmdResult<Outcome> {
    check_variant_name(&args.variant)?;
    let manifest = load_manifest(&args.manifest)?;
    guard(&args.out_manifest, &[&args.manifest])?;
    if manifest.has_variant(&args.variant) {
        return Err(Failure::validation(format!(
            "variant {:?} already exists; choose another --variant",
            args.variant
        )));
    }
    let params = args.morphology.params();
    let built: Vec<Option<Built>> = manifest
        .samples
        .par_iter()
        .map(|s| {
            let annotator = match &args.annotator {
                Some(a) => a.as_str(),
                None => match s.latest_annotator() {
                    Some(a) => a,
                    None => return Ok(None),
                },
            };
            let Some(regions) = s.annotations.get(annotator) else {
                return Ok(None);
            };
            let b = build_label_mask(regions, &manifest.hierarchy, &params, s.width, s.height).map_err(|e| {
                Error::InvalidSample {
                    sample: s.sample_id.clone(),
                    reason: e.to_string(),
                }
            })?;
            Ok(Some(Built {
                annotator: annotator.to_string(),
                regions: regions.len(),
                clipped: b.clipped,
                counts: b.mask.class_counts(),
                png: encode_mask_png(&b.mask)?,
            }))
        })
        .collect::<Result<_, Error>>()?;

    let out_dir = parent_dir(&args.out_manifest);
    let mut updated = manifest.clone();
    updated.rebase(&out_dir)?;
    let mut written = 0;
    let mut skipped = Vec::new();
    let mut unclipped = Vec::new();
    for (sample, b) in updated.samples.iter_mut().zip(&built) {
        let Some(b) = b else {
            skipped.push(sample.sample_id.clone());
            continue;
        };
        if !b.clipped {
            tracing::warn!(sample = %sample.sample_id, "no Crosscut region, clipping skipped");
            unclipped.push(sample.sample_id.clone());
        }
        let rel = format!("masks/{}/{}.png", args.variant, sample.sample_id);
        let path = out_dir.join(&rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(&path, &b.png).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        sample.masks.insert(args.variant.clone(), rel);
        written += 1;
    }
    save_manifest(&args.out_manifest, &updated)?;

    let mut reports = vec![args.out_manifest.clone()];
    if let Some(path) = &args.report {
        reports.push(write_with(path, |w| {
            let mut header = "sample_id,annotator,regions,clipped".to_string();
            for c in ClassId::ALL {
                write!(header, ",{}", c.short_name()).unwrap();
            }
            writeln!(w, "{header}").map_err(io_err(path))?;
            for (sample, b) in manifest.samples.iter().zip(&built) {
                let Some(b) = b else { continue };
                let counts: Vec<String> = b.counts.iter().map(u64::to_string).collect();
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    sample.sample_id,
                    b.annotator,
                    b.regions,
                    b.clipped,
                    counts.join(",")
                )
                .map_err(io_err(path))?;
            }
            Ok(())
        })?);
    }

    let mut summary = format!("wrote {written} {} masks", args.variant);
    if !skipped.is_empty() {
        write!(summary, "; {} samples without annotations skipped", skipped.len()).unwrap();
    }
    if !unclipped.is_empty() {
        write!(summary, "; {} without crosscut: {}", unclipped.len(), unclipped.join(", ")).unwrap();
    }
    summary.push('\n');
    Ok(Outcome { summary, reports })
}

fn io_err(path: &std::path::Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::io(format!("{}: {e}", path.display()))
}

pub fn stats(args: StatsArgs) -> CmdResult<Outcome> {
    let manifest = load_manifest(&args.manifest)?;
    guard(&args.out, &[&args.manifest])?;
    let stats = class_area_stats(&manifest, &args.variant)?;
    let out = write_with(&args.out, |w| Ok(stats.write_csv(w)?))?;

    let mut summary = format!("{:<10}{:>8}", "subset", "images");
    for c in ClassId::FOREGROUND {
        write!(summary, "{:>8}", c.short_name()).unwrap();
    }
    summary.push('\n');
    for row in &stats.rows {
        write!(summary, "{:<10}{:>8}", row.subset, row.n_images).unwrap();
        for p in row.percent {
            write!(summary, "{p:>8.2}").unwrap();
        }
        summary.push('\n');
    }
    if !stats.excluded.is_empty() {
        tracing::warn!("excluded without crosscut area: {}", stats.excluded.join(", "));
        writeln!(summary, "excluded (no crosscut area): {}", stats.excluded.join(", ")).unwrap();
    }
    Ok(Outcome {
        summary,
        reports: vec![out],
    })
}

pub fn split(args: SplitArgs) -> CmdResult<Outcome> {
    let manifest = load_manifest(&args.manifest)?;
    guard(&args.out, &[&args.manifest])?;
    let seed = args.seed.unwrap_or(manifest.split_seed);
    let assignment = split_manifest(&manifest, seed)?;
    let out = write_with(&args.out, |w| Ok(assignment.write_csv(w)?))?;
    let [train, val, test] = assignment.counts();
    Ok(Outcome {
        summary: format!("seed {seed}: training {train}, validation {val}, test {test}\n"),
        reports: vec![out],
    })
}
