//! Import of LabelStudio JSON exports.
//!
//! Only polygon results (`"type": "polygonlabels"`) are understood. Their
//! points are given in percent of the image size and converted to pixels.
//! Other result types are skipped and counted.

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::Value;

use crate::class::ClassId;
use crate::error::{Error, Result};
use crate::manifest::{SampleRecord, Subset};
use crate::region::{Geometry, RegionAnnotation, RegionSource};

#[derive(Debug, Deserialize)]
struct Task {
    #[serde(default)]
    id: Value,
    #[serde(default)]
    data: serde_json::Map<String, Value>,
    #[serde(default)]
    annotations: Vec<Annotation>,
}

#[derive(Debug, Deserialize)]
struct Annotation {
    #[serde(default)]
    completed_by: Value,
    #[serde(default)]
    result: Vec<ResultItem>,
    #[serde(default)]
    updated_at: Option<String>,
    #[serde(default)]
    was_cancelled: bool,
}

#[derive(Debug, Deserialize)]
struct ResultItem {
    #[serde(default)]
    id: Option<String>,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    original_width: Option<u32>,
    #[serde(default)]
    original_height: Option<u32>,
    #[serde(default)]
    origin: Option<String>,
    #[serde(default)]
    value: Value,
}

#[derive(Debug, Deserialize)]
struct PolygonValue {
    points: Vec<[f64; 2]>,
    polygonlabels: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ImportOptions {
    /// Subset for tasks whose data carries no `subset` field.
    pub default_subset: Option<Subset>,
    /// Where to look for images when a task has no result to take the
    /// dimensions from.
    pub image_root: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct ImportReport {
    pub records: Vec<SampleRecord>,
    pub skipped_regions: usize,
    pub warnings: Vec<String>,
}

pub fn import_labelstudio_export(path: &Path, options: &ImportOptions) -> Result<ImportReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    import_labelstudio_str(&text, options).map_err(|e| match e {
        Error::Malformed { reason, .. } => Error::Malformed {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })
}

pub fn import_labelstudio_str(text: &str, options: &ImportOptions) -> Result<ImportReport> {
    let tasks: Vec<Task> = serde_json::from_str(text).map_err(|e| Error::Malformed {
        path: PathBuf::from("<export>"),
        reason: e.to_string(),
    })?;
    let mut report = ImportReport::default();
    for task in tasks {
        let record = import_task(task, options, &mut report)?;
        report.records.push(record);
    }
    Ok(report)
}

fn value_to_id(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn annotator_id(completed_by: &Value) -> String {
    match completed_by {
        Value::Object(map) => map
            .get("email")
            .and_then(value_to_id)
            .or_else(|| map.get("id").and_then(value_to_id)),
        other => value_to_id(other),
    }
    .unwrap_or_else(|| "unknown".to_string())
}

fn import_task(task: Task, options: &ImportOptions, report: &mut ImportReport) -> Result<SampleRecord> {
    let image = task
        .data
        .get("image")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let task_id = value_to_id(&task.id).unwrap_or_default();
    let sample_id = task
        .data
        .get("sample_id")
        .and_then(value_to_id)
        .or_else(|| {
            Path::new(&image)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| format!("task-{task_id}"));
    let subset = match task.data.get("subset").and_then(Value::as_str) {
        Some(name) => name.parse().map_err(|_| Error::InvalidSample {
            sample: sample_id.clone(),
            reason: format!("unknown subset {name:?}"),
        })?,
        None => options.default_subset.unwrap_or(Subset::Data),
    };

    let (mut width, mut height) = (
        task.data.get("width").and_then(Value::as_u64).unwrap_or(0) as u32,
        task.data.get("height").and_then(Value::as_u64).unwrap_or(0) as u32,
    );
    if let Some(item) = task
        .annotations
        .iter()
        .flat_map(|a| &a.result)
        .find(|r| r.original_width.is_some() && r.original_height.is_some())
    {
        width = item.original_width.unwrap_or_default();
        height = item.original_height.unwrap_or_default();
    }
    if (width == 0 || height == 0) && !image.is_empty() {
        if let Some(root) = &options.image_root {
            let file = Path::new(&image).file_name().map(|f| root.join(f));
            if let Some(dims) = file.and_then(|f| image::image_dimensions(f).ok()) {
                (width, height) = dims;
            }
        }
    }

    let mut annotations: Vec<Annotation> =
        task.annotations.into_iter().filter(|a| !a.was_cancelled).collect();
    // Stable: ties keep export order.
    annotations.sort_by(|a, b| a.updated_at.cmp(&b.updated_at));

    let mut by_annotator: IndexMap<String, Vec<RegionAnnotation>> = IndexMap::new();
    for annotation in annotations {
        let annotator = annotator_id(&annotation.completed_by);
        let mut regions = Vec::new();
        for item in annotation.result {
            if item.kind != "polygonlabels" {
                report.skipped_regions += 1;
                report.warnings.push(format!(
                    "{sample_id}: skipped unsupported {} result",
                    item.kind
                ));
                continue;
            }
            let value: PolygonValue =
                serde_json::from_value(item.value).map_err(|e| Error::InvalidSample {
                    sample: sample_id.clone(),
                    reason: format!("malformed polygon: {e}"),
                })?;
            let (w, h) = (
                item.original_width.unwrap_or(width) as f64,
                item.original_height.unwrap_or(height) as f64,
            );
            let points: Vec<[f64; 2]> = value
                .points
                .iter()
                .map(|[x, y]| [(x * w / 100.0).clamp(0.0, w), (y * h / 100.0).clamp(0.0, h)])
                .collect();
            let source = match item.origin.as_deref() {
                Some(o) if o.starts_with("prediction") => RegionSource::SamPreannotation,
                _ => RegionSource::Human,
            };
            for label in &value.polygonlabels {
                let class: ClassId = label.parse().map_err(|_| Error::InvalidSample {
                    sample: sample_id.clone(),
                    reason: format!("unknown class name {label:?}"),
                })?;
                regions.push(RegionAnnotation {
                    id: item.id.clone(),
                    class,
                    geometry: Geometry::Polygon {
                        points: points.clone(),
                    },
                    annotator: annotator.clone(),
                    source,
                });
            }
        }
        // A later revision by the same annotator replaces the earlier one and
        // moves to the end of the revision order.
        by_annotator.shift_remove(&annotator);
        by_annotator.insert(annotator, regions);
    }

    Ok(SampleRecord {
        sample_id,
        image,
        width,
        height,
        subset,
        annotations: by_annotator,
        masks: Default::default(),
        predictions: Default::default(),
    })
}
