use std::io::Write;

use serde::Serialize;

use super::{
    all_class_metrics, class_pixel_diff, confusion, model_score, multiclass_accuracy,
    multiclass_kappa, pixel_diff, ClassMetrics, ConfusionMatrix, EdgeCase, EdgeCasePolicy,
    Fraction, Metric, PixelDiffTarget,
};
use crate::class::{ClassId, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::mask::LabelMask;

/// Exact evaluation of one mask pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEvaluation {
    pub confusion: ConfusionMatrix,
    pub classes: [ClassMetrics; NUM_CLASSES],
    /// Per-class pixel diff, `None` when the ground truth is all background.
    pub pixel_diff: [Option<Fraction>; NUM_CLASSES],
    pub pixel_diff_all: Option<Fraction>,
    pub kappa_multiclass: Fraction,
    pub accuracy_multiclass: Fraction,
}

impl PairEvaluation {
    pub fn from_confusion(cm: ConfusionMatrix, policy: &EdgeCasePolicy) -> Self {
        Self {
            classes: all_class_metrics(&cm, policy),
            pixel_diff: ClassId::ALL.map(|c| class_pixel_diff(&cm, c, policy)),
            pixel_diff_all: pixel_diff(&cm, PixelDiffTarget::All),
            kappa_multiclass: multiclass_kappa(&cm, policy),
            accuracy_multiclass: multiclass_accuracy(&cm, policy),
            confusion: cm,
        }
    }

    pub fn class_value(&self, metric: Metric, class: ClassId) -> Option<Fraction> {
        match metric {
            Metric::PixelDiff => self.pixel_diff[class.index()],
            m => self.classes[class.index()].get(m),
        }
    }

    pub fn report(&self) -> MetricReport {
        let rows = Metric::ALL.map(|metric| {
            let per_class: [Option<f64>; NUM_CLASSES] =
                ClassId::ALL.map(|c| self.class_value(metric, c).map(Fraction::to_f64));
            let class_mean = mean(per_class.iter().flatten().copied());
            let all = match metric {
                Metric::Kappa => Some(self.kappa_multiclass.to_f64()),
                Metric::Accuracy => Some(self.accuracy_multiclass.to_f64()),
                Metric::PixelDiff => self.pixel_diff_all.map(Fraction::to_f64),
                _ => class_mean,
            };
            MetricRow {
                all,
                class_mean,
                per_class,
            }
        });
        let mut edge_cases = [EdgeCaseCounts::default(); NUM_CLASSES];
        for (counts, class) in edge_cases.iter_mut().zip(&self.classes) {
            counts.record(class.edge_case);
        }
        let mut report = MetricReport {
            n_samples: 1,
            rows,
            model_score: None,
            edge_cases,
        };
        report.model_score = report.score_from_f1();
        report
    }
}

/// Evaluates a mask pair into its full report.
pub fn evaluate_pair(gt: &LabelMask, pred: &LabelMask, policy: &EdgeCasePolicy) -> Result<PairEvaluation> {
    Ok(PairEvaluation::from_confusion(confusion(gt, pred)?, policy))
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EdgeCaseCounts {
    pub both_absent: usize,
    pub one_absent: usize,
    pub normal: usize,
}

impl EdgeCaseCounts {
    fn record(&mut self, edge: EdgeCase) {
        match edge {
            EdgeCase::BothAbsent => self.both_absent += 1,
            EdgeCase::OneAbsent => self.one_absent += 1,
            EdgeCase::Normal => self.normal += 1,
        }
    }
}

/// One metric across the `All` aggregates and every class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MetricRow {
    /// Headline aggregate: class mean for precision, recall, f1 and iou;
    /// multiclass value for kappa and accuracy; the summed formula for
    /// pixel diff.
    pub all: Option<f64>,
    /// Unweighted mean of the seven per-class values.
    pub class_mean: Option<f64>,
    pub per_class: [Option<f64>; NUM_CLASSES],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub n_samples: usize,
    /// Indexed by `Metric as usize`.
    pub rows: [MetricRow; 7],
    pub model_score: Option<f64>,
    pub edge_cases: [EdgeCaseCounts; NUM_CLASSES],
}

impl MetricReport {
    pub fn row(&self, metric: Metric) -> &MetricRow {
        &self.rows[metric as usize]
    }

    pub fn value(&self, metric: Metric, class: ClassId) -> Option<f64> {
        self.row(metric).per_class[class.index()]
    }

    fn score_from_f1(&self) -> Option<f64> {
        let f1 = self.row(Metric::F1);
        Some(model_score(
            f1.all?,
            f1.per_class[ClassId::Rot.index()]?,
            f1.per_class[ClassId::IngrowthCrack.index()]?,
        ))
    }

    /// Wide CSV: one row per metric, columns `All`, `All(mean)` and one per
    /// class, then a `model_score` row. Undefined values are empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(report_header("metric"))?;
        for metric in Metric::ALL {
            let mut record = vec![metric.name().to_string()];
            record.extend(row_cells(self.row(metric)));
            w.write_record(&record)?;
        }
        let mut record = vec!["model_score".to_string(), fmt_opt(self.model_score)];
        record.extend(std::iter::repeat_n(String::new(), NUM_CLASSES + 1));
        w.write_record(&record)?;
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Human-readable table with two decimals, like the published tables.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<12}{:>8}", "", "All");
        for c in ClassId::ALL {
            out.push_str(&format!("{:>8}", c.short_name()));
        }
        out.push('\n');
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
        for metric in Metric::ALL {
            let row = self.row(metric);
            out.push_str(&format!("{:<12}{:>8}", metric.name(), cell(row.all)));
            for v in row.per_class {
                out.push_str(&format!("{:>8}", cell(v)));
            }
            out.push('\n');
        }
        out.push_str(&format!("{:<12}{:>8}\n", "ModelScore", cell(self.model_score)));
        out
    }
}

pub(crate) fn report_header(first: &str) -> Vec<String> {
    let mut header = vec![first.to_string(), "All".to_string(), "All(mean)".to_string()];
    header.extend(ClassId::ALL.iter().map(|c| c.short_name().to_string()));
    header
}

pub(crate) fn row_cells(row: &MetricRow) -> Vec<String> {
    let mut cells = vec![fmt_opt(row.all), fmt_opt(row.class_mean)];
    cells.extend(row.per_class.iter().map(|v| fmt_opt(*v)));
    cells
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:.6}"))
}

/// Macro aggregation over samples (unweighted mean of each defined value)
/// plus the micro-average confusion matrix (element-wise sum). The set-level
/// ModelScore is recomputed from the aggregated F1 values.
pub fn aggregate(
    reports: &[MetricReport],
    matrices: &[ConfusionMatrix],
) -> Result<(MetricReport, ConfusionMatrix)> {
    if reports.is_empty() {
        return Err(Error::Invalid("cannot aggregate zero reports".into()));
    }
    let rows = Metric::ALL.map(|metric| {
        let rows = || reports.iter().map(move |r| r.row(metric));
        MetricRow {
            all: mean(rows().filter_map(|r| r.all)),
            class_mean: mean(rows().filter_map(|r| r.class_mean)),
            per_class: std::array::from_fn(|k| mean(rows().filter_map(|r| r.per_class[k]))),
        }
    });
    let mut edge_cases = [EdgeCaseCounts::default(); NUM_CLASSES];
    for r in reports {
        for (total, c) in edge_cases.iter_mut().zip(&r.edge_cases) {
            total.both_absent += c.both_absent;
            total.one_absent += c.one_absent;
            total.normal += c.normal;
        }
    }
    let mut report = MetricReport {
        n_samples: reports.iter().map(|r| r.n_samples).sum(),
        rows,
        model_score: None,
        edge_cases,
    };
    report.model_score = report.score_from_f1();

    let mut micro = ConfusionMatrix::default();
    for cm in matrices {
        micro += cm;
    }
    Ok((report, micro))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(raw: &[u8]) -> LabelMask {
        LabelMask::from_raw(raw.len() as u32, 1, raw).unwrap()
    }

    #[test]
    fn identical_masks_score_best() {
        let m = mask(&[0, 1, 1, 2, 3, 4, 5, 6]);
        let r = evaluate_pair(&m, &m, &EdgeCasePolicy::default()).unwrap().report();
        for metric in [Metric::F1, Metric::Iou, Metric::Kappa, Metric::Accuracy, Metric::Precision] {
            assert_eq!(r.row(metric).all, Some(1.0), "{metric}");
            assert!(r.row(metric).per_class.iter().all(|v| *v == Some(1.0)));
        }
        assert_eq!(r.row(Metric::PixelDiff).all, Some(0.0));
        assert_eq!(r.model_score, Some(100.0));
    }

    #[test]
    fn fully_wrong_prediction() {
        let gt = mask(&[1, 1, 2, 2]);
        let pred = mask(&[2, 2, 1, 1]);
        let r = evaluate_pair(&gt, &pred, &EdgeCasePolicy::default()).unwrap().report();
        // five classes absent from both score 1, CC and R score 0
        assert!((r.row(Metric::F1).all.unwrap() - 5.0 / 7.0).abs() < 1e-12);
        assert_eq!(r.value(Metric::F1, ClassId::Rot), Some(0.0));
        assert_eq!(r.row(Metric::PixelDiff).all, Some(2.0));
        assert_eq!(r.row(Metric::Accuracy).all, Some(0.0));
    }

    #[test]
    fn hand_built_fixture() {
        // gt:   CC CC CC CC R  R  BG BG
        // pred: CC CC CC R  R  BG BG BG
        let gt = mask(&[1, 1, 1, 1, 2, 2, 0, 0]);
        let pred = mask(&[1, 1, 1, 2, 2, 0, 0, 0]);
        let e = evaluate_pair(&gt, &pred, &EdgeCasePolicy::default()).unwrap();
        let cc = &e.classes[1];
        assert_eq!(cc.precision, Fraction::ONE);
        assert_eq!(cc.recall, Fraction::new(3, 4));
        assert_eq!(cc.f1, Fraction::new(6, 7));
        let rot = &e.classes[2];
        assert_eq!(rot.precision, Fraction::new(1, 2));
        assert_eq!(rot.recall, Fraction::new(1, 2));
        assert_eq!(rot.iou, Fraction::new(1, 3));
        let bg = &e.classes[0];
        assert_eq!(bg.precision, Fraction::new(2, 3));
        assert_eq!(bg.recall, Fraction::ONE);
        // FP+FN over non-background classes: CC 0+1, R 1+1 -> 3 of 6 gt pixels
        assert_eq!(e.pixel_diff_all, Some(Fraction::new(3, 6)));
        assert_eq!(e.accuracy_multiclass, Fraction::new(6, 8));
        // rows: BG 2, CC 4, R 2; cols: BG 3, CC 3, R 2
        // kappa = (8*6 - (6 + 12 + 4)) / (64 - 22) = 26/42
        assert_eq!(e.kappa_multiclass, Fraction::new(13, 21));
        let r = e.report();
        // BG 4/5, CC 6/7, R 1/2, the four absent classes 1
        let f1_mean = (0.8 + 6.0 / 7.0 + 0.5 + 4.0) / 7.0;
        assert!((r.row(Metric::F1).all.unwrap() - f1_mean).abs() < 1e-12);
        let expect_score = 100.0 * (f1_mean + 2.0 * 0.5 + 1.0) / 4.0;
        assert!((r.model_score.unwrap() - expect_score).abs() < 1e-9);
    }

    #[test]
    fn aggregate_means_and_micro_sum() {
        let p = EdgeCasePolicy::default();
        let a = evaluate_pair(&mask(&[1, 1]), &mask(&[1, 1]), &p).unwrap();
        let b = evaluate_pair(&mask(&[1, 2]), &mask(&[1, 1]), &p).unwrap();
        let (agg, micro) = aggregate(&[a.report()], &[a.confusion]).unwrap();
        assert_eq!(agg, a.report());
        assert_eq!(micro, a.confusion);

        let (agg, micro) = aggregate(&[a.report(), b.report()], &[a.confusion, b.confusion]).unwrap();
        assert_eq!(agg.n_samples, 2);
        // CC f1: 1 and 2/3
        let expect = (1.0 + 2.0 / 3.0) / 2.0;
        assert!((agg.value(Metric::F1, ClassId::Crosscut).unwrap() - expect).abs() < 1e-12);
        assert_eq!(micro.counts[1][1], 3);
        assert_eq!(micro.counts[2][1], 1);
        assert_eq!(agg.edge_cases[ClassId::Rot.index()].one_absent, 1);
        assert_eq!(agg.edge_cases[ClassId::Rot.index()].both_absent, 1);
        assert!(aggregate(&[], &[]).is_err());
    }

    #[test]
    fn undefined_pixel_diff_is_excluded() {
        let p = EdgeCasePolicy::default();
        let a = evaluate_pair(&mask(&[0, 0]), &mask(&[0, 1]), &p).unwrap();
        let b = evaluate_pair(&mask(&[1, 1]), &mask(&[1, 2]), &p).unwrap();
        assert_eq!(a.report().row(Metric::PixelDiff).all, None);
        let (agg, _) = aggregate(&[a.report(), b.report()], &[]).unwrap();
        assert_eq!(agg.row(Metric::PixelDiff).all, Some(1.0));
    }

    #[test]
    fn csv_layout() {
        let m = mask(&[1, 2]);
        let r = evaluate_pair(&m, &m, &EdgeCasePolicy::default()).unwrap().report();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "metric,All,All(mean),BG,CC,R,R(m),PW,DC,IC");
        assert_eq!(lines.len(), 9);
        assert!(lines[8].starts_with("model_score,100.000000,"));
    }
}
