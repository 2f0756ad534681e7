//! Segmentation metrics over (ground truth, prediction) mask pairs.
//!
//! Per-class values use the one-vs-rest reduction of the confusion matrix.
//! When a class is missing from both masks every metric takes the policy's
//! best value, and when it is missing from exactly one, the worst value.
//! Exact per-pair values are kept as integer ratios ([`Fraction`]);
//! reports and aggregates are `f64`.

mod confusion;
mod fraction;
mod histogram;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use confusion::{confusion, BinaryCounts, ConfusionMatrix};
pub use fraction::Fraction;
pub use histogram::{histogram, write_histograms_csv, HistogramReport};
pub use report::{aggregate, evaluate_pair, EdgeCaseCounts, MetricReport, MetricRow, PairEvaluation};

use crate::class::{ClassId, NUM_CLASSES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    F1,
    Iou,
    Kappa,
    PixelDiff,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Accuracy,
        Metric::Precision,
        Metric::Recall,
        Metric::F1,
        Metric::Iou,
        Metric::Kappa,
        Metric::PixelDiff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
            Metric::Iou => "iou",
            Metric::Kappa => "kappa",
            Metric::PixelDiff => "pixel_diff",
        }
    }

    pub fn higher_is_better(self) -> bool {
        self != Metric::PixelDiff
    }

    /// Value range used for histogram bins.
    pub fn range(self) -> (f64, f64) {
        match self {
            Metric::Kappa => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeCase {
    BothAbsent,
    OneAbsent,
    Normal,
}

/// Best and worst value per metric, substituted for classes missing from one
/// or both masks. Extremes are integers so substitutions stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCasePolicy {
    bounds: [(i64, i64); 7],
}

impl Default for EdgeCasePolicy {
    fn default() -> Self {
        let mut bounds = [(1, 0); 7];
        bounds[Metric::Kappa as usize] = (1, -1);
        bounds[Metric::PixelDiff as usize] = (0, 1);
        Self { bounds }
    }
}

impl EdgeCasePolicy {
    pub fn with(mut self, metric: Metric, best: i64, worst: i64) -> Result<Self> {
        let better = if metric.higher_is_better() {
            best > worst
        } else {
            best < worst
        };
        if !better {
            return Err(Error::Invalid(format!(
                "{metric}: best {best} is not better than worst {worst}"
            )));
        }
        self.bounds[metric as usize] = (best, worst);
        Ok(self)
    }

    pub fn best(&self, metric: Metric) -> Fraction {
        Fraction::from_int(self.bounds[metric as usize].0)
    }

    pub fn worst(&self, metric: Metric) -> Fraction {
        Fraction::from_int(self.bounds[metric as usize].1)
    }
}

/// Per-class values for one mask pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassMetrics {
    pub class: ClassId,
    pub edge_case: EdgeCase,
    pub accuracy: Fraction,
    pub precision: Fraction,
    pub recall: Fraction,
    pub f1: Fraction,
    pub iou: Fraction,
    pub kappa: Fraction,
}

impl ClassMetrics {
    pub fn get(&self, metric: Metric) -> Option<Fraction> {
        match metric {
            Metric::Accuracy => Some(self.accuracy),
            Metric::Precision => Some(self.precision),
            Metric::Recall => Some(self.recall),
            Metric::F1 => Some(self.f1),
            Metric::Iou => Some(self.iou),
            Metric::Kappa => Some(self.kappa),
            Metric::PixelDiff => None,
        }
    }
}

pub fn edge_case(counts: &BinaryCounts) -> EdgeCase {
    match (counts.in_truth(), counts.in_prediction()) {
        (false, false) => EdgeCase::BothAbsent,
        (true, true) => EdgeCase::Normal,
        _ => EdgeCase::OneAbsent,
    }
}

/// Cohen's kappa from agreement count and the sum of marginal products:
/// `(N * agree - S) / (N^2 - S)`, with `S = sum_k rows_k * cols_k`.
fn kappa(total: u64, agree: u64, marginal_products: u128, perfect: Fraction) -> Fraction {
    let n = total as i128;
    let s = marginal_products as i128;
    if n * n == s {
        // chance agreement is certain: both masks are one identical class
        return perfect;
    }
    Fraction::new(n * agree as i128 - s, n * n - s)
}

pub fn class_metrics(cm: &ConfusionMatrix, class: ClassId, policy: &EdgeCasePolicy) -> ClassMetrics {
    let b = cm.binary(class);
    let edge_case = edge_case(&b);
    let substitute = |pick: fn(&EdgeCasePolicy, Metric) -> Fraction| ClassMetrics {
        class,
        edge_case,
        accuracy: pick(policy, Metric::Accuracy),
        precision: pick(policy, Metric::Precision),
        recall: pick(policy, Metric::Recall),
        f1: pick(policy, Metric::F1),
        iou: pick(policy, Metric::Iou),
        kappa: pick(policy, Metric::Kappa),
    };
    match edge_case {
        EdgeCase::BothAbsent => substitute(EdgeCasePolicy::best),
        EdgeCase::OneAbsent => substitute(EdgeCasePolicy::worst),
        EdgeCase::Normal => {
            let (tp, fp, fn_, tn) = (b.tp as i128, b.fp as i128, b.fn_ as i128, b.tn as i128);
            let n = b.total();
            let marginals = (b.tp + b.fp) as u128 * (b.tp + b.fn_) as u128
                + (b.fn_ + b.tn) as u128 * (b.fp + b.tn) as u128;
            ClassMetrics {
                class,
                edge_case,
                accuracy: Fraction::new(tp + tn, n as i128),
                precision: Fraction::new(tp, tp + fp),
                recall: Fraction::new(tp, tp + fn_),
                f1: Fraction::new(2 * tp, 2 * tp + fp + fn_),
                iou: Fraction::new(tp, tp + fp + fn_),
                kappa: kappa(n, b.tp + b.tn, marginals, policy.best(Metric::Kappa)),
            }
        }
    }
}

/// Multiclass Cohen's kappa over the full label map.
pub fn multiclass_kappa(cm: &ConfusionMatrix, policy: &EdgeCasePolicy) -> Fraction {
    let total = cm.total();
    if total == 0 {
        return policy.best(Metric::Kappa);
    }
    let marginals: u128 = ClassId::ALL
        .iter()
        .map(|&c| cm.row_sum(c) as u128 * cm.col_sum(c) as u128)
        .sum();
    kappa(total, cm.trace(), marginals, policy.best(Metric::Kappa))
}

/// Fraction of pixels labeled identically.
pub fn multiclass_accuracy(cm: &ConfusionMatrix, policy: &EdgeCasePolicy) -> Fraction {
    match cm.total() {
        0 => policy.best(Metric::Accuracy),
        n => Fraction::new(cm.trace() as i128, n as i128),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelDiffTarget {
    All,
    Class(ClassId),
}

/// Misclassified share of the non-background ground truth:
/// `(FP + FN) / sum_{k>=1} (TP_k + FN_k)`. For `All`, FP and FN are summed
/// over the non-background classes. `None` when the ground truth is entirely
/// background.
pub fn pixel_diff(cm: &ConfusionMatrix, target: PixelDiffTarget) -> Option<Fraction> {
    let denominator: u64 = ClassId::FOREGROUND.iter().map(|&c| cm.row_sum(c)).sum();
    if denominator == 0 {
        return None;
    }
    let errors = |c: ClassId| {
        let b = cm.binary(c);
        b.fp + b.fn_
    };
    let numerator: u64 = match target {
        PixelDiffTarget::All => ClassId::FOREGROUND.iter().map(|&c| errors(c)).sum(),
        PixelDiffTarget::Class(c) => errors(c),
    };
    Some(Fraction::new(numerator as i128, denominator as i128))
}

/// Weighted F1 composite in percent: `100 * (f1_all + 2 f1_rot + f1_ic) / 4`.
pub fn model_score(f1_all: f64, f1_rot: f64, f1_ic: f64) -> f64 {
    100.0 * (f1_all + 2.0 * f1_rot + f1_ic) / 4.0
}

/// Per-class pixel diff with the edge-case rule applied: a class absent from
/// both masks scores the policy best; otherwise the raw value.
pub fn class_pixel_diff(cm: &ConfusionMatrix, class: ClassId, policy: &EdgeCasePolicy) -> Option<Fraction> {
    let raw = pixel_diff(cm, PixelDiffTarget::Class(class))?;
    Some(match edge_case(&cm.binary(class)) {
        EdgeCase::BothAbsent => policy.best(Metric::PixelDiff),
        _ => raw,
    })
}

pub(crate) fn all_class_metrics(cm: &ConfusionMatrix, policy: &EdgeCasePolicy) -> [ClassMetrics; NUM_CLASSES] {
    ClassId::ALL.map(|c| class_metrics(cm, c, policy))
}
