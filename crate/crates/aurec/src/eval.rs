//! Frame-level detection metrics.
//!
//! Any ratio with a zero denominator is reported as 0.

use ctbn::io::fmt_sig9;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("prediction has {pred} frames, truth {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("no frames to evaluate")]
    EmptyFrames,
    #[error("{0} prediction tracks for {1} truth tracks")]
    TrackCount(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn add(&mut self, other: &Self) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }

    pub fn f1(&self) -> f64 {
        let tp = self.tp as f64;
        ratio(2.0 * tp, 2.0 * tp + self.fp as f64 + self.fn_ as f64)
    }

    pub fn tpr(&self) -> f64 {
        ratio(self.tp as f64, (self.tp + self.fn_) as f64)
    }

    pub fn fpr(&self) -> f64 {
        ratio(self.fp as f64, (self.fp + self.tn) as f64)
    }

    pub fn mcc(&self) -> f64 {
        let (tp, fp, tn, fn_) = (self.tp as f64, self.fp as f64, self.tn as f64, self.fn_ as f64);
        let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
        ratio(tp * tn - fp * fn_, den)
    }
}

fn check_len(pred: usize, truth: usize) -> Result<(), EvalError> {
    if pred != truth {
        return Err(EvalError::LengthMismatch { pred, truth });
    }
    Ok(())
}

pub fn confusion(pred: &[u8], truth: &[u8]) -> Result<ConfusionCounts, EvalError> {
    check_len(pred.len(), truth.len())?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p != 0, t != 0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roc {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, sorted by FPR.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl Roc {
    /// Two columns, `fpr,tpr`, one point per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (f, t) in &self.points {
            out.push_str(&format!("{},{}\n", fmt_sig9(*f), fmt_sig9(*t)));
        }
        out
    }
}

/// ROC curve swept over the distinct probabilities (at most `n_thresholds`
/// of them, chosen by quantile), with the trapezoid area under it.
pub fn roc_curve(probs: &[f64], truth: &[u8], n_thresholds: usize) -> Result<Roc, EvalError> {
    check_len(probs.len(), truth.len())?;
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    let positives = truth.iter().filter(|&&t| t != 0).count() as f64;
    let negatives = truth.len() as f64 - positives;
    // one operating point per distinct threshold, descending
    let mut sweep = Vec::new();
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let p = probs[order[i]];
        while i < order.len() && probs[order[i]] == p {
            if truth[order[i]] != 0 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        sweep.push((ratio(fp, negatives), ratio(tp, positives)));
    }
    if n_thresholds >= 1 && sweep.len() > n_thresholds {
        let last = sweep.len() - 1;
        sweep = (0..n_thresholds)
            .map(|k| sweep[if n_thresholds == 1 { last } else { (k * last + (n_thresholds - 1) / 2) / (n_thresholds - 1) }])
            .collect();
    }
    let mut points = Vec::with_capacity(sweep.len() + 2);
    points.push((0.0, 0.0));
    points.extend(sweep);
    points.push((1.0, 1.0));
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    points.dedup();
    let auc = points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();
    Ok(Roc { points, auc })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuMetrics {
    pub name: String,
    pub counts: ConfusionCounts,
    pub f1: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub mcc: f64,
}

impl AuMetrics {
    fn new(name: String, counts: ConfusionCounts) -> Self {
        Self { f1: counts.f1(), tpr: counts.tpr(), fpr: counts.fpr(), mcc: counts.mcc(), name, counts }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub rows: Vec<AuMetrics>,
    /// Unweighted mean of each metric over the rows; counts are pooled.
    pub macro_average: AuMetrics,
}

impl MetricsTable {
    pub fn to_text(&self) -> String {
        let mut out = String::from("au,tp,fp,tn,fn,f1,tpr,fpr,mcc\n");
        for r in self.rows.iter().chain(std::iter::once(&self.macro_average)) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.name,
                r.counts.tp,
                r.counts.fp,
                r.counts.tn,
                r.counts.fn_,
                fmt_sig9(r.f1),
                fmt_sig9(r.tpr),
                fmt_sig9(r.fpr),
                fmt_sig9(r.mcc)
            ));
        }
        out
    }
}

/// Per-AU metrics over aligned frame tracks plus their macro average.
pub fn evaluate_run(names: &[String], pred: &[Vec<u8>], truth: &[Vec<u8>]) -> Result<MetricsTable, EvalError> {
    if pred.len() != truth.len() || names.len() != truth.len() {
        return Err(EvalError::TrackCount(pred.len(), truth.len()));
    }
    if truth.is_empty() || truth.iter().all(Vec::is_empty) {
        return Err(EvalError::EmptyFrames);
    }
    let rows: Vec<AuMetrics> = names
        .iter()
        .zip(pred.iter().zip(truth))
        .map(|(n, (p, t))| Ok(AuMetrics::new(n.clone(), confusion(p, t)?)))
        .collect::<Result<_, EvalError>>()?;
    let k = rows.len() as f64;
    let mut pooled = ConfusionCounts::default();
    rows.iter().for_each(|r| pooled.add(&r.counts));
    let mean = |f: fn(&AuMetrics) -> f64| rows.iter().map(f).sum::<f64>() / k;
    let macro_average = AuMetrics {
        name: "macro".into(),
        counts: pooled,
        f1: mean(|r| r.f1),
        tpr: mean(|r| r.tpr),
        fpr: mean(|r| r.fpr),
        mcc: mean(|r| r.mcc),
    };
    Ok(MetricsTable { rows, macro_average })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tallies() {
        let c = confusion(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 2, fp: 0, tn: 1, fn_: 0 });
        let c = confusion(&[0, 1, 0], &[1, 0, 1]).unwrap();
        assert_eq!((c.tp, c.tn), (0, 0));
        let c = confusion(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 1, tn: 1, fn_: 1 });
        assert_eq!(c.f1(), 0.5);
        assert_eq!(c.mcc(), 0.0);
        assert!(matches!(confusion(&[1], &[1, 0]), Err(EvalError::LengthMismatch { .. })));
    }

    #[test]
    fn conventions() {
        let perfect = ConfusionCounts { tp: 3, fp: 0, tn: 2, fn_: 0 };
        assert_eq!((perfect.f1(), perfect.mcc(), perfect.tpr(), perfect.fpr()), (1.0, 1.0, 1.0, 0.0));
        let empty = confusion(&[0, 0, 0], &[0, 0, 0]).unwrap();
        assert_eq!((empty.f1(), empty.fpr(), empty.mcc()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn roc_edges() {
        let truth = [1, 0, 1, 1, 0];
        let p: Vec<f64> = truth.iter().map(|&t| f64::from(t)).collect();
        assert_eq!(roc_curve(&p, &truth, 100).unwrap().auc, 1.0);
        let roc = roc_curve(&[0.9, 0.2, 0.4, 0.1], &[1, 0, 0, 0], 100).unwrap();
        assert!(roc.points.contains(&(0.0, 1.0)));
        assert_eq!(roc.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn macro_average() {
        let names = vec!["A".to_string(), "B".to_string()];
        let t = evaluate_run(&names, &[vec![1, 0, 1], vec![0, 1, 0]], &[vec![1, 0, 1], vec![1, 0, 1]]).unwrap();
        assert_eq!(t.rows[0].f1, 1.0);
        assert_eq!(t.rows[1].f1, 0.0);
        assert_eq!(t.macro_average.f1, 0.5);
        assert_eq!(evaluate_run(&names, &[vec![], vec![]], &[vec![], vec![]]), Err(EvalError::EmptyFrames));
    }
}
