//! Confusion-matrix metrics, ROC/AUC, DeLong inference and operating thresholds.

mod confusion;
mod consensus;
mod delong;
mod report;
mod roc;
mod youden;

pub use confusion::{binary_metrics, BinaryMetrics, ConfusionMatrix};
pub use consensus::{consensus_reference, Candidacy};
pub use delong::{delong_paired, delong_variance, structural_components, DelongResult, StructuralComponents, DEGENERATE_VARIANCE};
pub use report::{evaluate, EvalReport, MethodRow, MethodScores};
pub use roc::{roc_auc, RocCurve};
pub use youden::{youden_threshold, YoudenCut};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("both classes must be present")]
    SingleClass,
    #[error("each class needs at least two cases")]
    TooFewCases,
    #[error("length mismatch: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error("scores contain NaN")]
    NonFinite,
}
