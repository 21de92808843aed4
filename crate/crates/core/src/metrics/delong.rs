//! DeLong structural-components variance of the empirical AUC.

use serde::{Deserialize, Serialize};

use super::roc::check_inputs;
use super::MetricsError;
use crate::stats::{mean, sample_covariance, two_sided_p, Z_975};

/// Denominator below which a paired comparison is reported as `p = 1`.
pub const DEGENERATE_VARIANCE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelongResult {
    pub auc_a: f64,
    pub auc_b: Option<f64>,
    pub var_a: f64,
    pub var_b: Option<f64>,
    pub cov_ab: Option<f64>,
    /// Paired z statistic; `None` for the single-curve form.
    pub z: Option<f64>,
    pub p: Option<f64>,
    pub ci_a: (f64, f64),
    pub ci_b: Option<(f64, f64)>,
    /// Set when the paired variance was too small to form a z statistic.
    pub degenerate: bool,
}

/// Per-case structural components.
#[derive(Debug, Clone)]
pub struct StructuralComponents {
    /// One entry per positive case: fraction of negatives it outranks (ties ½).
    pub v10: Vec<f64>,
    /// One entry per negative case: fraction of positives that outrank it.
    pub v01: Vec<f64>,
}

impl StructuralComponents {
    pub fn auc(&self) -> f64 {
        mean(&self.v10)
    }
}

/// Structural components in `O(n log n)` via sorted class scores.
pub fn structural_components(scores: &[f64], labels: &[bool]) -> Result<StructuralComponents, MetricsError> {
    check_inputs(scores, labels)?;
    let mut pos: Vec<f64> = Vec::new();
    let mut neg: Vec<f64> = Vec::new();
    for (&s, &l) in scores.iter().zip(labels) {
        if l {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    let positives = pos.clone();
    let negatives = neg.clone();
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    // (count strictly below, count equal) in a sorted slice
    let below_equal = |sorted: &[f64], x: f64| {
        let lo = sorted.partition_point(|&v| v < x);
        let hi = sorted.partition_point(|&v| v <= x);
        (lo as f64, (hi - lo) as f64)
    };
    let (m, n) = (pos.len() as f64, neg.len() as f64);
    let v10 = positives
        .iter()
        .map(|&x| {
            let (b, e) = below_equal(&neg, x);
            (b + 0.5 * e) / n
        })
        .collect();
    let v01 = negatives
        .iter()
        .map(|&y| {
            let (b, e) = below_equal(&pos, y);
            (m - b - e + 0.5 * e) / m
        })
        .collect();
    Ok(StructuralComponents { v10, v01 })
}

fn check_sizes(sc: &StructuralComponents) -> Result<(), MetricsError> {
    if sc.v10.len() < 2 || sc.v01.len() < 2 {
        return Err(MetricsError::TooFewCases);
    }
    Ok(())
}

fn ci(auc: f64, var: f64) -> (f64, f64) {
    let h = Z_975 * var.max(0.0).sqrt();
    ((auc - h).clamp(0.0, 1.0), (auc + h).clamp(0.0, 1.0))
}

/// AUC with its DeLong variance `S10/m + S01/n` and 95% normal CI.
pub fn delong_variance(scores: &[f64], labels: &[bool]) -> Result<DelongResult, MetricsError> {
    let sc = structural_components(scores, labels)?;
    check_sizes(&sc)?;
    let auc = sc.auc();
    let var = sample_covariance(&sc.v10, &sc.v10) / sc.v10.len() as f64 + sample_covariance(&sc.v01, &sc.v01) / sc.v01.len() as f64;
    Ok(DelongResult {
        auc_a: auc,
        auc_b: None,
        var_a: var,
        var_b: None,
        cov_ab: None,
        z: None,
        p: None,
        ci_a: ci(auc, var),
        ci_b: None,
        degenerate: false,
    })
}

/// Paired DeLong test for two scorers evaluated on the same cases.
pub fn delong_paired(scores_a: &[f64], scores_b: &[f64], labels: &[bool]) -> Result<DelongResult, MetricsError> {
    if scores_a.len() != scores_b.len() {
        return Err(MetricsError::ShapeMismatch(scores_a.len(), scores_b.len()));
    }
    let a = structural_components(scores_a, labels)?;
    let b = structural_components(scores_b, labels)?;
    check_sizes(&a)?;
    let (m, n) = (a.v10.len() as f64, a.v01.len() as f64);
    let cov = |x: &StructuralComponents, y: &StructuralComponents| sample_covariance(&x.v10, &y.v10) / m + sample_covariance(&x.v01, &y.v01) / n;
    let (var_a, var_b, cov_ab) = (cov(&a, &a), cov(&b, &b), cov(&a, &b));
    let (auc_a, auc_b) = (a.auc(), b.auc());
    let denom = var_a + var_b - 2.0 * cov_ab;
    let (z, p, degenerate) = if denom < DEGENERATE_VARIANCE {
        (0.0, 1.0, true)
    } else {
        let z = (auc_a - auc_b) / denom.sqrt();
        (z, two_sided_p(z), false)
    };
    Ok(DelongResult {
        auc_a,
        auc_b: Some(auc_b),
        var_a,
        var_b: Some(var_b),
        cov_ab: Some(cov_ab),
        z: Some(z),
        p: Some(p),
        ci_a: ci(auc_a, var_a),
        ci_b: Some(ci(auc_b, var_b)),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation_has_zero_variance() {
        let r = delong_variance(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap();
        assert_eq!(r.auc_a, 1.0);
        assert_eq!(r.var_a, 0.0);
        assert_eq!(r.ci_a, (1.0, 1.0));
    }

    #[test]
    fn identical_scorers() {
        let s = [0.3, 0.1, 0.7, 0.5, 0.9, 0.2];
        let l = [false, false, true, false, true, true];
        let r = delong_paired(&s, &s, &l).unwrap();
        assert_eq!(r.p, Some(1.0));
        assert_eq!(r.z, Some(0.0));
    }

    #[test]
    fn monotone_transform_is_identical_auc() {
        let s = [0.3, 0.1, 0.7, 0.5, 0.9, 0.2, 0.45];
        let t: Vec<f64> = s.iter().map(|x: &f64| (5.0 * x).exp()).collect();
        let l = [false, false, true, false, true, true, false];
        let r = delong_paired(&s, &t, &l).unwrap();
        assert_eq!(r.auc_a, r.auc_b.unwrap());
        assert_eq!(r.p, Some(1.0));
    }

    #[test]
    fn too_few_cases() {
        assert!(matches!(delong_variance(&[0.1, 0.9, 0.5], &[false, true, true]), Err(MetricsError::TooFewCases)));
    }
}
