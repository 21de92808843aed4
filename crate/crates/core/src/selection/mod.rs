//! Reproducibility filter, collinearity pruning and L1-penalized selection.

mod collinearity;
mod icc;
mod lasso;
mod pipeline;

pub use collinearity::{collinearity_prune, correlation_matrix, CorrelationMatrix, DroppedFeature, PruneResult};
pub use icc::{icc_2_1, icc_filter, IccReport, IccRow, MeanSquares};
pub use lasso::{lasso_fit, lasso_select, stratified_folds, LambdaRule, LassoConfig, LassoFit, LassoPath, LassoPoint};
pub use pipeline::{run_selection, univariable_auc, univariable_aucs, SelectionConfig, SelectionReport, SelectionStep};

/// Rows are lesions, columns are named features.
pub type FeatureMatrix = crate::model::Design;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("matrices disagree in shape or feature names")]
    ShapeMismatch,
    #[error("labels contain a single class")]
    SingleClass,
    #[error("each class needs at least two rows")]
    TooFewPerClass,
    #[error("feature {0} contains non-finite values")]
    NonFinite(String),
    #[error("no features to select from")]
    Empty,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub(crate) fn check_labels(n: usize, y: &[bool]) -> Result<(), SelectionError> {
    if y.len() != n {
        return Err(SelectionError::ShapeMismatch);
    }
    let pos = y.iter().filter(|&&t| t).count();
    if pos == 0 || pos == n {
        return Err(SelectionError::SingleClass);
    }
    if pos < 2 || n - pos < 2 {
        return Err(SelectionError::TooFewPerClass);
    }
    Ok(())
}

pub(crate) fn check_finite(m: &FeatureMatrix) -> Result<(), SelectionError> {
    for (name, col) in m.names.iter().zip(&m.columns) {
        if col.iter().any(|v| !v.is_finite()) {
            return Err(SelectionError::NonFinite(name.clone()));
        }
    }
    Ok(())
}
