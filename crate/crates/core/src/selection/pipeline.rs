use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_labels, collinearity_prune, icc_filter, lasso_select, FeatureMatrix, IccReport, LassoConfig, LassoPath, PruneResult, SelectionError};
use crate::metrics::{roc_auc, MetricsError};

/// AUC of the raw feature as a score, oriented so that it is at least 0.5.
pub fn univariable_auc(feature: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    let a = roc_auc(feature, labels)?.auc;
    Ok(a.max(1.0 - a))
}

pub fn univariable_aucs(m: &FeatureMatrix, labels: &[bool]) -> Result<BTreeMap<String, f64>, SelectionError> {
    m.names
        .iter()
        .zip(&m.columns)
        .map(|(n, c)| {
            univariable_auc(c, labels).map(|a| (n.clone(), a)).map_err(|e| match e {
                MetricsError::SingleClass => SelectionError::SingleClass,
                MetricsError::NonFinite => SelectionError::NonFinite(n.clone()),
                _ => SelectionError::ShapeMismatch,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub icc_threshold: f64,
    pub corr_threshold: f64,
    pub lasso: LassoConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { icc_threshold: 0.85, corr_threshold: 0.85, lasso: LassoConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub step: String,
    pub input: Vec<String>,
    pub kept: Vec<String>,
    /// `(feature, reason)`.
    pub dropped: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub steps: Vec<SelectionStep>,
    pub icc: IccReport,
    pub aucs: BTreeMap<String, f64>,
    pub prune: PruneResult,
    pub lasso: LassoPath,
    pub selected: Vec<String>,
}

/// ICC filter, collinearity pruning and LASSO in sequence.
///
/// Rater A's measurements feed the two later steps; rater B only serves the
/// reproducibility filter.
pub fn run_selection(rater_a: &FeatureMatrix, rater_b: &FeatureMatrix, y: &[bool], cfg: &SelectionConfig) -> Result<SelectionReport, SelectionError> {
    check_labels(rater_a.n_rows(), y)?;
    let icc = icc_filter(rater_a, rater_b, cfg.icc_threshold)?;
    let after_icc = icc.kept();
    let icc_step = SelectionStep {
        step: "icc".into(),
        input: rater_a.names.clone(),
        kept: after_icc.clone(),
        dropped: icc
            .rows
            .iter()
            .filter(|r| !r.kept)
            .map(|r| {
                let why = match r.icc {
                    Some(v) => format!("ICC {v:.4} <= {}", cfg.icc_threshold),
                    None => "ICC undefined: constant for both raters".into(),
                };
                (r.feature.clone(), why)
            })
            .collect(),
    };
    if after_icc.is_empty() {
        return Err(SelectionError::Empty);
    }
    let m = rater_a.select(&after_icc).expect("kept names come from the matrix");
    let aucs = univariable_aucs(&m, y)?;
    let prune = collinearity_prune(&m, cfg.corr_threshold, &aucs);
    let prune_step = SelectionStep {
        step: "collinearity".into(),
        input: after_icc,
        kept: prune.kept.clone(),
        dropped: prune
            .dropped
            .iter()
            .map(|d| (d.feature.clone(), format!("|r| = {:.4} with {}; AUC {:.4} vs {:.4}", d.r.abs(), d.partner, d.auc, d.partner_auc)))
            .collect(),
    };
    let m = m.select(&prune.kept).expect("kept names come from the matrix");
    let lasso = lasso_select(&m, y, &cfg.lasso)?;
    let lasso_step = SelectionStep {
        step: "lasso".into(),
        input: prune.kept.clone(),
        kept: lasso.selected.clone(),
        dropped: prune
            .kept
            .iter()
            .filter(|n| !lasso.selected.contains(n))
            .map(|n| (n.clone(), format!("zero coefficient at lambda {:.6e} ({})", lasso.chosen_lambda, lasso.rule)))
            .collect(),
    };
    Ok(SelectionReport { steps: vec![icc_step, prune_step, lasso_step], selected: lasso.selected.clone(), icc, aucs, prune, lasso })
}
