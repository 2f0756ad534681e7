//! Pairwise agreement between annotators (a model can act as one): per-class
//! Cohen's kappa and IoU, averaged over the samples both sides annotated.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::class::{ClassId, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::manifest::{DatasetManifest, SampleRecord, Subset};
use crate::mask::LabelMask;
use crate::metrics::{class_metrics, confusion, multiclass_kappa, ConfusionMatrix, EdgeCasePolicy};
use crate::morphology::MorphologyParams;
use crate::pipeline::build_label_mask;

/// Masks keyed by sample id.
pub type MaskSet = BTreeMap<String, LabelMask>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseAgreement {
    pub n_samples: usize,
    /// Mean over samples of the per-sample multiclass kappa.
    pub kappa_all: f64,
    /// Multiclass kappa of the pooled confusion matrix.
    pub kappa_pooled: f64,
    pub kappa: [f64; NUM_CLASSES],
    /// Mean of the per-class values.
    pub iou_all: f64,
    /// Class mean of IoU computed on the pooled confusion matrix.
    pub iou_pooled: f64,
    pub iou: [f64; NUM_CLASSES],
    /// Samples present on one side only.
    pub excluded: Vec<String>,
}

/// Compares two mask sets on their common samples. Fails when they share no
/// sample or a shared sample differs in size.
pub fn pairwise_agreement(baseline: &MaskSet, other: &MaskSet, policy: &EdgeCasePolicy) -> Result<PairwiseAgreement> {
    let common: Vec<(&String, &LabelMask, &LabelMask)> = baseline
        .iter()
        .filter_map(|(id, a)| other.get(id).map(|b| (id, a, b)))
        .collect();
    let excluded: Vec<String> = baseline
        .keys()
        .filter(|id| !other.contains_key(*id))
        .chain(other.keys().filter(|id| !baseline.contains_key(*id)))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if common.is_empty() {
        return Err(Error::Invalid("no sample annotated on both sides".into()));
    }

    let matrices: Vec<ConfusionMatrix> = common
        .par_iter()
        .map(|(id, a, b)| {
            confusion(a, b).map_err(|e| Error::InvalidSample {
                sample: (*id).clone(),
                reason: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;

    let n = matrices.len() as f64;
    let mut kappa = [0.0; NUM_CLASSES];
    let mut iou = [0.0; NUM_CLASSES];
    let mut kappa_all = 0.0;
    let mut pooled = ConfusionMatrix::default();
    for cm in &matrices {
        for class in ClassId::ALL {
            let m = class_metrics(cm, class, policy);
            kappa[class.index()] += m.kappa.to_f64();
            iou[class.index()] += m.iou.to_f64();
        }
        kappa_all += multiclass_kappa(cm, policy).to_f64();
        pooled += cm;
    }
    for v in kappa.iter_mut().chain(iou.iter_mut()) {
        *v /= n;
    }
    let iou_pooled = ClassId::ALL
        .iter()
        .map(|&c| class_metrics(&pooled, c, policy).iou.to_f64())
        .sum::<f64>()
        / NUM_CLASSES as f64;

    Ok(PairwiseAgreement {
        n_samples: matrices.len(),
        kappa_all: kappa_all / n,
        kappa_pooled: multiclass_kappa(&pooled, policy).to_f64(),
        kappa,
        iou_all: iou.iter().sum::<f64>() / NUM_CLASSES as f64,
        iou_pooled,
        iou,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementRow {
    pub annotator: String,
    #[serde(flatten)]
    pub values: PairwiseAgreement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementTable {
    pub baseline: String,
    pub subset: Subset,
    /// Samples in the subset with a baseline annotation.
    pub n_samples: usize,
    pub rows: Vec<AgreementRow>,
    pub diagnostics: Vec<String>,
}

/// Who to compare against the baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rater {
    Annotator(String),
    /// Model predictions registered under `model`, reported as `name`.
    Model { name: String, model: String },
}

impl Rater {
    fn name(&self) -> &str {
        match self {
            Rater::Annotator(a) => a,
            Rater::Model { name, .. } => name,
        }
    }
}

/// Mask set of one annotator over `samples`, built from their regions.
pub fn annotator_masks(
    manifest: &DatasetManifest,
    samples: &[&SampleRecord],
    annotator: &str,
    params: &MorphologyParams,
) -> Result<MaskSet> {
    samples
        .par_iter()
        .filter_map(|s| s.annotations.get(annotator).map(|regions| (s, regions)))
        .map(|(s, regions)| {
            let built = build_label_mask(regions, &manifest.hierarchy, params, s.width, s.height)
                .map_err(|e| Error::InvalidSample {
                    sample: s.sample_id.clone(),
                    reason: e.to_string(),
                })?;
            Ok((s.sample_id.clone(), built.mask))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}

fn model_masks(manifest: &DatasetManifest, samples: &[&SampleRecord], model: &str) -> Result<MaskSet> {
    samples
        .par_iter()
        .filter(|s| s.predictions.contains_key(model))
        .map(|s| Ok((s.sample_id.clone(), manifest.load_prediction(s, model)?)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}

/// All annotators appearing in `subset` except `baseline`, sorted.
pub fn other_annotators(manifest: &DatasetManifest, subset: Subset, baseline: &str) -> Vec<String> {
    manifest
        .subset(subset)
        .flat_map(|s| s.annotations.keys())
        .filter(|a| a.as_str() != baseline)
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// One row per rater compared with `baseline` on `subset`. Raters sharing no
/// sample with the baseline are left out with a diagnostic.
pub fn build_agreement_report(
    manifest: &DatasetManifest,
    subset: Subset,
    baseline: &str,
    raters: &[Rater],
    params: &MorphologyParams,
    policy: &EdgeCasePolicy,
) -> Result<AgreementTable> {
    let samples: Vec<&SampleRecord> = manifest.subset(subset).collect();
    let reference = annotator_masks(manifest, &samples, baseline, params)?;
    let mut table = AgreementTable {
        baseline: baseline.to_string(),
        subset,
        n_samples: reference.len(),
        rows: Vec::new(),
        diagnostics: Vec::new(),
    };
    for rater in raters {
        if rater.name() == baseline {
            table.diagnostics.push(format!("{baseline}: baseline is not compared with itself"));
            continue;
        }
        let masks = match rater {
            Rater::Annotator(a) => annotator_masks(manifest, &samples, a, params)?,
            Rater::Model { model, .. } => model_masks(manifest, &samples, model)?,
        };
        if reference.keys().all(|id| !masks.contains_key(id)) {
            table
                .diagnostics
                .push(format!("{}: no sample shared with baseline {baseline}", rater.name()));
            continue;
        }
        let values = pairwise_agreement(&reference, &masks, policy)?;
        if !values.excluded.is_empty() {
            table.diagnostics.push(format!(
                "{}: {} sample(s) excluded: {}",
                rater.name(),
                values.excluded.len(),
                values.excluded.join(", ")
            ));
        }
        table.rows.push(AgreementRow {
            annotator: rater.name().to_string(),
            values,
        });
    }
    Ok(table)
}

impl AgreementTable {
    /// Kappa block then IoU block:
    /// `measure,annotator,n_samples,All,All(pooled),BG,...,IC`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = ["measure", "annotator", "n_samples", "All", "All(pooled)"]
            .map(String::from)
            .to_vec();
        header.extend(ClassId::ALL.iter().map(|c| c.short_name().to_string()));
        w.write_record(&header)?;
        for measure in ["kappa", "iou"] {
            for row in &self.rows {
                let v = &row.values;
                let (all, pooled, per_class) = match measure {
                    "kappa" => (v.kappa_all, v.kappa_pooled, &v.kappa),
                    _ => (v.iou_all, v.iou_pooled, &v.iou),
                };
                let mut record = vec![
                    measure.to_string(),
                    row.annotator.clone(),
                    v.n_samples.to_string(),
                    format!("{all:.6}"),
                    format!("{pooled:.6}"),
                ];
                record.extend(per_class.iter().map(|x| format!("{x:.6}")));
                w.write_record(&record)?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Three-decimal table for standard output.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "baseline {} on {} ({} samples)\n{:<8}{:<12}{:>8}",
            self.baseline, self.subset, self.n_samples, "", "", "All"
        );
        for c in ClassId::ALL {
            out.push_str(&format!("{:>8}", c.short_name()));
        }
        out.push('\n');
        for (measure, label) in [("kappa", "Kappa"), ("iou", "IoU")] {
            for row in &self.rows {
                let v = &row.values;
                let (all, per_class) = if measure == "kappa" {
                    (v.kappa_all, &v.kappa)
                } else {
                    (v.iou_all, &v.iou)
                };
                out.push_str(&format!("{label:<8}{:<12}{all:>8.3}", row.annotator));
                for x in per_class {
                    out.push_str(&format!("{x:>8.3}"));
                }
                out.push('\n');
            }
        }
        out
    }
}
