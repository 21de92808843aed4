use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Empirical ROC curve; a case is called positive when its score is `>=` the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Distinct scores in decreasing order; point `k + 1` uses `thresholds[k]`.
    pub thresholds: Vec<f64>,
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

pub(crate) fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l).count();
    (pos, labels.len() - pos)
}

pub(crate) fn check_inputs(scores: &[f64], labels: &[bool]) -> Result<(usize, usize), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::ShapeMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(MetricsError::NonFinite);
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    Ok((pos, neg))
}

/// ROC curve with trapezoidal AUC.
///
/// Tied scores form a single diagonal step, so the area equals the
/// Mann–Whitney statistic with ties counted as one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocCurve, MetricsError> {
    let (n_pos, n_neg) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut thresholds = Vec::new();
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    // accumulate the area in integer half-units: Σ fp_step · (2·tp_before + tp_step)
    let mut area2: u128 = 0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (mut dtp, mut dfp) = (0usize, 0usize);
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] {
                dtp += 1;
            } else {
                dfp += 1;
            }
            k += 1;
        }
        area2 += dfp as u128 * (2 * tp + dtp) as u128;
        tp += dtp;
        fp += dfp;
        thresholds.push(s);
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    let auc = area2 as f64 / (2.0 * n_pos as f64 * n_neg as f64);
    Ok(RocCurve { thresholds, points, auc, n_pos, n_neg })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_ties() {
        let labels = [false, false, true, true];
        assert_eq!(roc_auc(&[0.0, 0.0, 1.0, 1.0], &labels).unwrap().auc, 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &labels).unwrap().auc, 0.5);
        assert_eq!(roc_auc(&[1.0, 1.0, 0.0, 0.0], &labels).unwrap().auc, 0.0);
    }

    #[test]
    fn curve_endpoints_and_monotone() {
        let r = roc_auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap();
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
        assert!(r.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
        assert!((r.auc - 0.75).abs() < 1e-15);
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(roc_auc(&[0.1, 0.2], &[true, true]), Err(MetricsError::SingleClass)));
    }
}
