//! Lesion morphometry, feature selection, logistic nomograms and ROC evaluation.

pub mod morphometry;
pub mod metrics;
pub mod stats;
pub mod model;
pub mod selection;
pub mod io;
pub mod pipeline;
