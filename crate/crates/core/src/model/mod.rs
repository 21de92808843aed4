//! BI-RADS encoding, logistic fitting and nomograms.

mod encoding;
pub mod lexicon;
mod logistic;
mod nomogram;
mod screening;

pub use encoding::{descriptor_levels, BiradsDescriptors, BiradsRecord, Design, EncodedColumn, EncodingScheme, EncodingSpec, Task, DESCRIPTOR_NAMES};
pub use lexicon::{Lexicon, UnknownLevel};
pub use logistic::{check_rank, fit_logistic, CoefficientSummary, LogisticModel, MAX_ITERATIONS, SCORE_TOLERANCE, SEPARATION_NORM};
pub use nomogram::{
    build_nomogram, paper_fixture_nomogram, published_odds_ratios, Axis, AxisKind, AxisSpec, Band, FeatureValue, FieldError, Nomogram, NomogramScore,
    NomogramSource, PointsTick, PointsToLinearPredictor, Provenance, MAX_AXIS_POINTS,
};
pub use screening::{fit_multivariable, screen_univariable, EliminationStep, MultivariableFit, ScreenOutcome, ScreenReport, ScreenResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("each outcome class needs at least two rows")]
    TooFewPerClass,
    #[error("design is rank deficient (columns {columns:?})")]
    RankDeficient { columns: Vec<String> },
    #[error("complete or quasi-complete separation: coefficients diverge")]
    Separation,
    #[error("IRLS did not converge in {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("column lengths do not match the outcome")]
    ShapeMismatch,
    #[error("design contains non-finite values")]
    NonFinite,
    #[error("no predictor survived backward elimination")]
    AllDropped,
    #[error("predictor {0} has zero range")]
    ZeroRange(String),
}
