use std::io::Write;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::class::{ClassId, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::mask::LabelMask;

/// Pixel counts: `counts[i][j]` pixels of ground-truth class `i` predicted as
/// class `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

/// One-vs-rest reduction for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl BinaryCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn in_truth(&self) -> bool {
        self.tp + self.fn_ > 0
    }

    pub fn in_prediction(&self) -> bool {
        self.tp + self.fp > 0
    }
}

/// Pixel-wise confusion of two masks of equal size.
pub fn confusion(gt: &LabelMask, pred: &LabelMask) -> Result<ConfusionMatrix> {
    gt.same_shape(pred)?;
    let mut cm = ConfusionMatrix::default();
    for (&g, &p) in gt.labels().iter().zip(pred.labels()) {
        cm.counts[g.index()][p.index()] += 1;
    }
    Ok(cm)
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, class: ClassId) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn col_sum(&self, class: ClassId) -> u64 {
        self.counts.iter().map(|row| row[class.index()]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|k| self.counts[k][k]).sum()
    }

    pub fn binary(&self, class: ClassId) -> BinaryCounts {
        let k = class.index();
        let tp = self.counts[k][k];
        let fn_ = self.row_sum(class) - tp;
        let fp = self.col_sum(class) - tp;
        BinaryCounts {
            tp,
            fp,
            fn_,
            tn: self.total() - tp - fn_ - fp,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::default();
        for i in 0..NUM_CLASSES {
            for j in 0..NUM_CLASSES {
                t.counts[j][i] = self.counts[i][j];
            }
        }
        t
    }

    /// Each row as a percentage of its ground-truth total; empty rows are 0.
    pub fn row_normalized(&self) -> [[f64; NUM_CLASSES]; NUM_CLASSES] {
        std::array::from_fn(|i| {
            let total: u64 = self.counts[i].iter().sum();
            std::array::from_fn(|j| {
                if total == 0 {
                    0.0
                } else {
                    self.counts[i][j] as f64 * 100.0 / total as f64
                }
            })
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_grid(writer, |i, j| self.counts[i][j].to_string())
    }

    pub fn write_normalized_csv<W: Write>(&self, writer: W) -> Result<()> {
        let norm = self.row_normalized();
        self.write_grid(writer, |i, j| format!("{:.2}", norm[i][j]))
    }

    fn write_grid<W: Write>(&self, writer: W, cell: impl Fn(usize, usize) -> String) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["gt\\pred".to_string()];
        header.extend(ClassId::ALL.iter().map(|c| c.short_name().to_string()));
        w.write_record(&header)?;
        for (i, class) in ClassId::ALL.iter().enumerate() {
            let mut row = vec![class.short_name().to_string()];
            row.extend((0..NUM_CLASSES).map(|j| cell(i, j)));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

impl AddAssign<&ConfusionMatrix> for ConfusionMatrix {
    fn add_assign(&mut self, rhs: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().flatten().zip(rhs.counts.iter().flatten()) {
            *a += b;
        }
    }
}
