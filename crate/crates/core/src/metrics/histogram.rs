use std::io::Write;

use serde::Serialize;

use super::{report::MetricReport, Metric};
use crate::class::{ClassId, NUM_CLASSES};
use crate::error::{Error, Result};

/// Distribution of one metric for one class (or `All`) across samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramReport {
    pub metric: Metric,
    /// Class short name, or `All`.
    pub class: String,
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    /// Samples where the value was undefined.
    pub n_undefined: usize,
}

impl HistogramReport {
    pub fn bin_edges(&self, bin: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + bin as f64 * width, self.lo + (bin + 1) as f64 * width)
    }
}

/// Equal-width histogram over the metric's natural range. Values outside the
/// range (pixel diff can exceed 1) land in the edge bins; the upper bound is
/// inclusive.
pub fn histogram(
    metric: Metric,
    class: Option<ClassId>,
    reports: &[MetricReport],
    bins: usize,
) -> Result<HistogramReport> {
    if bins == 0 {
        return Err(Error::Invalid("histogram needs at least one bin".into()));
    }
    let (lo, hi) = metric.range();
    let mut counts = vec![0; bins];
    let mut n_undefined = 0;
    for report in reports {
        let row = report.row(metric);
        let value = match class {
            Some(c) => row.per_class[c.index()],
            None => row.all,
        };
        match value {
            Some(v) => {
                let pos = ((v - lo) / (hi - lo) * bins as f64).floor();
                counts[pos.clamp(0.0, (bins - 1) as f64) as usize] += 1;
            }
            None => n_undefined += 1,
        }
    }
    Ok(HistogramReport {
        metric,
        class: class.map_or("All".to_string(), |c| c.short_name().to_string()),
        lo,
        hi,
        counts,
        n_undefined,
    })
}

/// Histograms for every metric, for `All` and each class, in long CSV form:
/// `metric,class,bin_lo,bin_hi,count`.
pub fn write_histograms_csv<W: Write>(reports: &[MetricReport], bins: usize, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "class", "bin_lo", "bin_hi", "count"])?;
    let targets = std::iter::once(None).chain(ClassId::ALL.into_iter().map(Some));
    let targets: Vec<Option<ClassId>> = targets.collect();
    debug_assert_eq!(targets.len(), NUM_CLASSES + 1);
    for metric in Metric::ALL {
        for &class in &targets {
            let h = histogram(metric, class, reports, bins)?;
            for (bin, count) in h.counts.iter().enumerate() {
                let (a, b) = h.bin_edges(bin);
                w.write_record([
                    metric.name().to_string(),
                    h.class.clone(),
                    format!("{a:.4}"),
                    format!("{b:.4}"),
                    count.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
