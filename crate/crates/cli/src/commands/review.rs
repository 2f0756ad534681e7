use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use woodmask_core::manifest::load_manifest;
use woodmask_core::overlay::render_overlay;
use woodmask_core::png_io::write_mask_png;
use woodmask_core::{cast_rot_maybe, ClassId, Error};
use woodmask_curation::{
    http, plan_variant, write_variant, CurationError, DecisionLog, Service, ServiceConfig, State, SystemClock,
};

use crate::args::{ApplyDecisionsArgs, CastProposalsArgs, ServeArgs};
use crate::failure::{CmdResult, Failure};
use crate::output::{guard, write_with};
use crate::Outcome;

pub const PROPOSALS_CSV: &str = "proposals.csv";

pub fn cast_proposals(args: CastProposalsArgs) -> CmdResult<Outcome> {
    let manifest = load_manifest(&args.manifest)?;
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(Failure::validation("--alpha must be within 0..=1"));
    }
    let image_root = args.image_root.clone().unwrap_or_else(|| manifest.base_dir.clone());
    let csv_path = args.out_dir.join(PROPOSALS_CSV);
    guard(&csv_path, &[&args.manifest])?;

    // (sample id, RotMaybe pixel count) for every sample that has some.
    let rows: Vec<Option<(String, u64)>> = manifest
        .samples
        .par_iter()
        .filter(|s| s.masks.contains_key(&args.variant))
        .map(|s| {
            let mask = manifest.load_mask(s, &args.variant)?;
            let n = mask.class_counts()[ClassId::RotMaybe.index()];
            if n == 0 {
                return Ok(None);
            }
            let photo = if args.overlays {
                let path = manifest.image_path(s, &image_root);
                let photo = image::open(&path).map_err(|e| Error::Malformed {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                Some(photo.to_rgb8())
            } else {
                None
            };
            for (target, tag) in [(ClassId::Rot, "rot"), (ClassId::Crosscut, "crosscut")] {
                let cast = cast_rot_maybe(&mask, target)?;
                write_mask_png(&args.out_dir.join(format!("{}.{tag}.png", s.sample_id)), &cast)?;
                if let Some(photo) = &photo {
                    let path = args.out_dir.join(format!("{}.{tag}.overlay.png", s.sample_id));
                    render_overlay(photo, &cast, args.alpha)?
                        .save(&path)
                        .map_err(|e| Error::Malformed {
                            path: path.clone(),
                            reason: e.to_string(),
                        })?;
                }
            }
            Ok(Some((s.sample_id.clone(), n)))
        })
        .collect::<Result<_, Error>>()?;
    let rows: Vec<(String, u64)> = rows.into_iter().flatten().collect();

    let csv = write_with(&csv_path, |w| {
        let io = |e: std::io::Error| Failure::io(format!("{}: {e}", csv_path.display()));
        writeln!(w, "sample_id,rot_maybe_pixels,rot,crosscut").map_err(io)?;
        for (id, n) in &rows {
            writeln!(w, "{id},{n},{id}.rot.png,{id}.crosscut.png").map_err(io)?;
        }
        Ok(())
    })?;
    Ok(Outcome {
        summary: format!("{} samples with RotMaybe, 2 castings each\n", rows.len()),
        reports: vec![csv],
    })
}

pub fn serve(args: ServeArgs) -> CmdResult<Outcome> {
    let config = ServiceConfig {
        manifest: args.manifest,
        image_root: args.image_root,
        state_dir: args.state_dir,
    };
    let service = Service::open(&config, Arc::new(SystemClock))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::io(format!("runtime: {e}")))?;
    eprintln!("serving on http://{}", args.addr);
    runtime
        .block_on(http::serve(service, args.addr))
        .map_err(|e| Failure::io(format!("{}: {e}", args.addr)))?;
    Ok(Outcome {
        summary: "stopped\n".into(),
        reports: vec![],
    })
}

pub fn apply_decisions(args: ApplyDecisionsArgs) -> CmdResult<Outcome> {
    let manifest = load_manifest(&args.manifest)?;
    guard(&args.out_manifest, &[&args.manifest, &args.log])?;
    if !args.log.exists() {
        return Err(Failure::io(format!("{}: no such file", args.log.display())));
    }
    let events = DecisionLog::read(&args.log)?;
    let state = State::replay(&events)?;
    let session = state.session(&args.session)?;
    if let Some(v) = &session.applied_variant {
        tracing::info!(session = %args.session, variant = %v, "session was already applied by the service");
    }
    let plan = plan_variant(&manifest, session)?;
    let summary = write_variant(&manifest, session, &args.variant, &plan, &args.out_manifest)
        .map_err(|e| match e {
            CurationError::Conflict(m) => Failure::validation(m),
            other => other.into(),
        })?;
    let mut text = format!(
        "session {}: {} masks written as {:?}, {} from decisions, {} kept",
        summary.session_id, summary.samples_written, summary.variant, summary.replaced, summary.kept
    );
    let progress = session.progress();
    if progress.decided < progress.total {
        write!(text, "; {} of {} items undecided", progress.total - progress.decided, progress.total).unwrap();
    }
    text.push('\n');
    Ok(Outcome {
        summary: text,
        reports: vec![args.out_manifest],
    })
}
