//! Class-area statistics per subset: the mean share of each non-background
//! class, in percent of the sample's crosscut area (all non-background
//! pixels).

use std::io::Write;

use crate::class::{ClassId, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::manifest::{DatasetManifest, Subset};
use crate::mask::LabelMask;

pub const FULL_SET: &str = "Full Set";

#[derive(Debug, Clone, PartialEq)]
pub struct AreaRow {
    pub subset: String,
    pub n_images: usize,
    /// Mean percentages in `ClassId::FOREGROUND` order: CC, R, R(m), PW, DC, IC.
    pub percent: [f64; NUM_CLASSES - 1],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AreaStats {
    pub rows: Vec<AreaRow>,
    /// Samples left out because their mask has no crosscut area.
    pub excluded: Vec<String>,
}

/// Percent of the crosscut area per foreground class, or `None` when the
/// mask is entirely background.
pub fn sample_area_percent(mask: &LabelMask) -> Option<[f64; NUM_CLASSES - 1]> {
    let counts = mask.class_counts();
    let total: u64 = counts[1..].iter().sum();
    if total == 0 {
        return None;
    }
    Some(std::array::from_fn(|k| {
        counts[k + 1] as f64 * 100.0 / total as f64
    }))
}

/// Builds the table from already loaded masks. Rows: the full set, then each
/// subset that has at least one usable sample.
pub fn area_stats<'a, I>(samples: I) -> AreaStats
where
    I: IntoIterator<Item = (&'a str, Subset, &'a LabelMask)>,
{
    let mut sums = [[0.0f64; NUM_CLASSES - 1]; 4];
    let mut counts = [0usize; 4];
    let mut excluded = Vec::new();
    for (id, subset, mask) in samples {
        let Some(pct) = sample_area_percent(mask) else {
            excluded.push(id.to_string());
            continue;
        };
        for group in [0, 1 + subset as usize] {
            counts[group] += 1;
            for (s, p) in sums[group].iter_mut().zip(pct) {
                *s += p;
            }
        }
    }
    let names = [FULL_SET, "examples", "warmup", "data"];
    let rows = (0..4)
        .filter(|&g| counts[g] > 0)
        .map(|g| AreaRow {
            subset: names[g].to_string(),
            n_images: counts[g],
            percent: sums[g].map(|s| s / counts[g] as f64),
        })
        .collect();
    AreaStats { rows, excluded }
}

/// Loads every sample's mask for `variant` and tabulates it.
pub fn class_area_stats(manifest: &DatasetManifest, variant: &str) -> Result<AreaStats> {
    let masks = manifest
        .samples
        .iter()
        .map(|s| manifest.load_mask(s, variant))
        .collect::<Result<Vec<_>>>()?;
    Ok(area_stats(
        manifest
            .samples
            .iter()
            .zip(&masks)
            .map(|(s, m)| (s.sample_id.as_str(), s.subset, m)),
    ))
}

impl AreaStats {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["subset", "n_images"];
        header.extend(ClassId::FOREGROUND.iter().map(|c| c.short_name()));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.subset.clone(), row.n_images.to_string()];
            record.extend(row.percent.iter().map(|p| format!("{p:.2}")));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}
