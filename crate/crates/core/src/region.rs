//! Annotator-drawn regions.

use serde::{Deserialize, Serialize};

use crate::class::ClassId;
use crate::error::{Error, Result};
use crate::rle::Rle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionSource {
    Human,
    Model,
    SamPreannotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Geometry {
    /// Closed polygon in pixel coordinates; the last vertex connects back
    /// to the first.
    Polygon { points: Vec<[f64; 2]> },
    /// Binary run-length mask (values 0/1).
    Rle(Rle),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAnnotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub class: ClassId,
    pub geometry: Geometry,
    pub annotator: String,
    pub source: RegionSource,
}

impl RegionAnnotation {
    pub fn polygon(class: ClassId, points: Vec<[f64; 2]>, annotator: impl Into<String>) -> Self {
        Self {
            id: None,
            class,
            geometry: Geometry::Polygon { points },
            annotator: annotator.into(),
            source: RegionSource::Human,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn with_source(mut self, source: RegionSource) -> Self {
        self.source = source;
        self
    }

    /// Human-readable handle for diagnostics.
    pub fn describe(&self) -> String {
        match &self.id {
            Some(id) => format!("{id} ({} by {})", self.class, self.annotator),
            None => format!("{} region by {}", self.class, self.annotator),
        }
    }

    /// Checks the region against a canvas of the given size.
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if self.class == ClassId::Background {
            return Err(Error::InvalidRegion {
                region: self.describe(),
                reason: "regions cannot carry the Background class".into(),
            });
        }
        match &self.geometry {
            Geometry::Polygon { points } => {
                let mut distinct: Vec<[f64; 2]> = Vec::with_capacity(points.len());
                for p in points {
                    if !p[0].is_finite() || !p[1].is_finite() {
                        return Err(Error::InvalidRegion {
                            region: self.describe(),
                            reason: format!("non-finite vertex {p:?}"),
                        });
                    }
                    if p[0] < 0.0 || p[1] < 0.0 || p[0] > width as f64 || p[1] > height as f64 {
                        return Err(Error::InvalidRegion {
                            region: self.describe(),
                            reason: format!(
                                "vertex ({}, {}) outside the {width}x{height} canvas",
                                p[0], p[1]
                            ),
                        });
                    }
                    if !distinct.contains(p) {
                        distinct.push(*p);
                    }
                }
                if distinct.len() < 3 {
                    return Err(Error::DegeneratePolygon {
                        region: self.describe(),
                        reason: format!("{} distinct vertices, need at least 3", distinct.len()),
                    });
                }
            }
            Geometry::Rle(rle) => {
                if rle.width != width || rle.height != height {
                    return Err(Error::InvalidRegion {
                        region: self.describe(),
                        reason: format!(
                            "mask is {}x{}, canvas is {width}x{height}",
                            rle.width, rle.height
                        ),
                    });
                }
                rle.validate().map_err(|e| Error::InvalidRegion {
                    region: self.describe(),
                    reason: e.to_string(),
                })?;
            }
        }
        Ok(())
    }
}
