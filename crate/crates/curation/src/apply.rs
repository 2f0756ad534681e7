//! Turning a session's decisions into a new mask variant.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use woodmask_core::manifest::{save_manifest, VARIANT_ORIGINAL};
use woodmask_core::png_io::write_mask_png;
use woodmask_core::{cast_rot_maybe, DatasetManifest, LabelMask, SampleRecord};

use crate::error::{CurationError, Result};
use crate::model::{OptionSource, Session};

/// Mask variant a session's options are derived from.
pub fn base_variant(session: &Session) -> &str {
    session.filter.variant.as_deref().unwrap_or(VARIANT_ORIGINAL)
}

pub fn option_mask(manifest: &DatasetManifest, sample: &SampleRecord, source: &OptionSource) -> Result<LabelMask> {
    Ok(match source {
        OptionSource::Casting { variant, target } => cast_rot_maybe(&manifest.load_mask(sample, variant)?, *target)?,
        OptionSource::Variant { variant } => manifest.load_mask(sample, variant)?,
        OptionSource::Prediction { model } => manifest.load_prediction(sample, model)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantPlan {
    /// New mask per sample, for every sample that has the base variant.
    pub masks: BTreeMap<String, LabelMask>,
    /// Samples whose mask was replaced by a chosen option.
    pub replaced: Vec<String>,
}

/// Computes the variant without touching the file system beyond reading
/// masks. Decided items take the chosen option; skipped and undecided items,
/// and samples outside the session, keep the base mask.
pub fn plan_variant(manifest: &DatasetManifest, session: &Session) -> Result<VariantPlan> {
    let base = base_variant(session);
    let chosen: BTreeMap<&str, &OptionSource> = session
        .items
        .iter()
        .filter_map(|item| {
            let side = item.decision.as_ref()?.choice.side()?;
            Some((item.sample_id.as_str(), item.options.get(side)))
        })
        .collect();
    let mut plan = VariantPlan {
        masks: BTreeMap::new(),
        replaced: Vec::new(),
    };
    for sample in manifest.samples.iter().filter(|s| s.masks.contains_key(base)) {
        let mask = match chosen.get(sample.sample_id.as_str()) {
            Some(source) => {
                plan.replaced.push(sample.sample_id.clone());
                option_mask(manifest, sample, source)?
            }
            None => manifest.load_mask(sample, base)?,
        };
        plan.masks.insert(sample.sample_id.clone(), mask);
    }
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApplySummary {
    pub session_id: String,
    pub variant: String,
    pub manifest: String,
    pub samples_written: usize,
    pub replaced: usize,
    pub kept: usize,
}

/// Writes the planned masks to `masks/<variant>/` next to `out_manifest` and
/// saves a manifest there that references them. Existing variants are never
/// overwritten.
pub fn write_variant(
    manifest: &DatasetManifest,
    session: &Session,
    variant: &str,
    plan: &VariantPlan,
    out_manifest: &Path,
) -> Result<ApplySummary> {
    validate_variant_name(variant)?;
    if manifest.has_variant(variant) {
        return Err(CurationError::Conflict(format!("variant {variant:?} already exists")));
    }
    let out_dir = out_manifest
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut updated = manifest.clone();
    updated.rebase(out_dir)?;
    for sample in &mut updated.samples {
        let Some(mask) = plan.masks.get(&sample.sample_id) else {
            continue;
        };
        let rel = format!("masks/{variant}/{}.png", sample.sample_id);
        write_mask_png(&out_dir.join(&rel), mask)?;
        sample.masks.insert(variant.to_string(), rel);
    }
    save_manifest(out_manifest, &updated)?;
    Ok(ApplySummary {
        session_id: session.session_id.clone(),
        variant: variant.to_string(),
        manifest: out_manifest.display().to_string(),
        samples_written: plan.masks.len(),
        replaced: plan.replaced.len(),
        kept: plan.masks.len() - plan.replaced.len(),
    })
}

fn validate_variant_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(CurationError::Invalid(format!(
            "variant name {name:?} must be non-empty and use only letters, digits, '_' or '-'"
        )))
    }
}
