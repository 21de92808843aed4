use serde::{Deserialize, Serialize};

use super::roc::check_inputs;
use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoudenCut {
    /// Call a case positive when `score >= threshold`.
    pub threshold: f64,
    pub j: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// Cut maximizing `sensitivity + specificity − 1`.
///
/// Every distinct score is tried as a cut; ties in J go to the higher
/// specificity. The returned threshold is the midpoint between the winning
/// score and the next lower distinct score, or the score itself when it is
/// the minimum.
pub fn youden_threshold(scores: &[f64], labels: &[bool]) -> Result<YoudenCut, MetricsError> {
    let (n_pos, n_neg) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut best: Option<(f64, f64, f64, usize)> = None; // (j, sen, spec, index of first case below)
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let sen = tp as f64 / n_pos as f64;
        let spec = (n_neg - fp) as f64 / n_neg as f64;
        let j = sen + spec - 1.0;
        let better = match best {
            None => true,
            Some((bj, _, bspec, _)) => j > bj || (j == bj && spec > bspec),
        };
        if better {
            best = Some((j, sen, spec, k));
        }
    }
    let (j, sensitivity, specificity, k) = best.expect("at least one distinct score");
    let cut = scores[order[k - 1]];
    let threshold = if k < order.len() { 0.5 * (cut + scores[order[k]]) } else { cut };
    Ok(YoudenCut { threshold, j, sensitivity, specificity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_scores_give_gap_midpoint() {
        let c = youden_threshold(&[0.1, 0.2, 0.6, 0.9], &[false, false, true, true]).unwrap();
        assert!((c.threshold - 0.4).abs() < 1e-15);
        assert_eq!(c.j, 1.0);
    }

    #[test]
    fn all_ties() {
        let c = youden_threshold(&[0.3; 5], &[false, true, true, false, true]).unwrap();
        assert_eq!(c.threshold, 0.3);
        assert_eq!(c.j, 0.0);
    }
}
