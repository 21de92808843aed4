//! Point-scale rendering of a logistic model.
//!
//! Each predictor gets a linear axis with 0 points at its lowest-risk value;
//! the axis with the widest `|β|·range` spans 100 points. Total points map
//! back to the linear predictor by `lp = beta0 + scale · total`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::encoding::{descriptor_levels, Task};
use super::logistic::LogisticModel;
use super::FitError;
use crate::stats::sigmoid;

pub const MAX_AXIS_POINTS: f64 = 100.0;
const CONTINUOUS_TICKS: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisKind {
    /// Ordinal levels; level `k` (0-based) is encoded as `k + 1`.
    Categorical { levels: Vec<String> },
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsTick {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    pub points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    #[serde(flatten)]
    pub kind: AxisKind,
    pub coefficient: f64,
    /// Encoded value range `[lo, hi]`.
    pub range: (f64, f64),
    pub points_table: Vec<PointsTick>,
}

impl Axis {
    /// Encoded value with the lowest linear-predictor contribution.
    pub fn min_risk_value(&self) -> f64 {
        if self.coefficient >= 0.0 {
            self.range.0
        } else {
            self.range.1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointsToLinearPredictor {
    pub beta0: f64,
    /// Linear-predictor units per point.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NomogramSource {
    Fitted,
    PaperFixture,
}

/// Presentation band: applies when `probability >= min_probability`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub label: String,
    pub min_probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub created_by: String,
    #[serde(default)]
    pub config_hash: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nomogram {
    pub id: String,
    pub task: Task,
    pub source: NomogramSource,
    pub predictors: Vec<Axis>,
    pub total_points_to_probability: PointsToLinearPredictor,
    /// Set when the intercept is unknown and probabilities are only relative.
    pub relative_risk_only: bool,
    /// Round each axis' points to this step before summing.
    #[serde(default)]
    pub points_resolution: Option<f64>,
    #[serde(default)]
    pub bands: Vec<Band>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomogramScore {
    pub total_points: f64,
    pub per_predictor: Vec<(String, f64)>,
    pub linear_predictor: f64,
    pub probability: f64,
    pub calibrated: bool,
    pub band: Option<String>,
    /// Predictors whose input was clamped into the axis range.
    pub clamped: Vec<String>,
}

/// Axis declaration used to build a nomogram from a fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub kind: AxisKind,
    pub range: (f64, f64),
}

impl AxisSpec {
    pub fn categorical(levels: Vec<String>) -> Self {
        let k = levels.len() as f64;
        Self { kind: AxisKind::Categorical { levels }, range: (1.0, k) }
    }

    /// Ordinal axis for a BI-RADS descriptor.
    pub fn descriptor(name: &str) -> Option<Self> {
        descriptor_levels(name).map(|l| Self::categorical(l.into_iter().map(String::from).collect()))
    }

    pub fn continuous(lo: f64, hi: f64) -> Self {
        Self { kind: AxisKind::Continuous, range: (lo, hi) }
    }
}

/// A user-facing input value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Value(f64),
    Level(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{field}: {message}")]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

fn points_table(kind: &AxisKind, coefficient: f64, range: (f64, f64), scale: f64) -> Vec<PointsTick> {
    let base = if coefficient >= 0.0 { range.0 } else { range.1 };
    let pts = |v: f64| coefficient * (v - base) / scale;
    match kind {
        AxisKind::Categorical { levels } => levels
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let v = (k + 1) as f64;
                PointsTick { value: v, label: Some(l.clone()), points: pts(v) }
            })
            .collect(),
        AxisKind::Continuous => (0..CONTINUOUS_TICKS)
            .map(|k| {
                let v = range.0 + (range.1 - range.0) * k as f64 / (CONTINUOUS_TICKS - 1) as f64;
                PointsTick { value: v, label: None, points: pts(v) }
            })
            .collect(),
    }
}

fn assemble(id: String, task: Task, source: NomogramSource, intercept: f64, named: Vec<(String, f64, AxisSpec)>) -> Result<Nomogram, FitError> {
    for (name, _, spec) in &named {
        if !(spec.range.1 > spec.range.0) || !spec.range.0.is_finite() || !spec.range.1.is_finite() {
            return Err(FitError::ZeroRange(name.clone()));
        }
    }
    let widest = named
        .iter()
        .map(|(_, b, s)| b.abs() * (s.range.1 - s.range.0))
        .fold(0.0, f64::max);
    // all-zero slopes: keep a unit scale so points are identically 0
    let scale = if widest > 0.0 { widest / MAX_AXIS_POINTS } else { 1.0 };
    let mut beta0 = intercept;
    let predictors = named
        .into_iter()
        .map(|(name, coefficient, spec)| {
            let axis = Axis {
                points_table: points_table(&spec.kind, coefficient, spec.range, scale),
                name,
                kind: spec.kind,
                coefficient,
                range: spec.range,
            };
            beta0 += axis.coefficient * axis.min_risk_value();
            axis
        })
        .collect();
    Ok(Nomogram {
        id,
        task,
        source,
        predictors,
        total_points_to_probability: PointsToLinearPredictor { beta0, scale },
        relative_risk_only: false,
        points_resolution: None,
        bands: Vec::new(),
        provenance: Provenance { created_by: concat!("lesionkit ", env!("CARGO_PKG_VERSION")).to_string(), ..Default::default() },
    })
}

/// Nomogram for a fitted model; `axes[j]` describes `model.predictors[j]`.
pub fn build_nomogram(id: &str, task: Task, model: &LogisticModel, axes: Vec<AxisSpec>) -> Result<Nomogram, FitError> {
    if axes.len() != model.predictors.len() {
        return Err(FitError::ShapeMismatch);
    }
    let named = model
        .predictors
        .iter()
        .cloned()
        .zip(model.coefficients.iter().copied())
        .zip(axes)
        .map(|((n, b), s)| (n, b, s))
        .collect();
    assemble(id.to_string(), task, NomogramSource::Fitted, model.intercept, named)
}

/// Published multivariable odds ratios, `(descriptor, OR)`.
pub fn published_odds_ratios(task: Task) -> &'static [(&'static str, f64)] {
    match task {
        Task::Biopsy => &[("shape", 0.575), ("orientation", 0.398), ("margin", 2.024), ("posterior", 2.142), ("calcifications", 0.607)],
        Task::Malignancy => &[("orientation", 0.435), ("margin", 1.454), ("calcifications", 0.591)],
    }
}

/// Nomogram with slopes `ln(OR)` from the published multivariable tables.
///
/// The intercept was not published, so it defaults to 0 and the nomogram is
/// flagged relative-risk-only.
pub fn paper_fixture_nomogram(task: Task, intercept: Option<f64>) -> Nomogram {
    let named = published_odds_ratios(task)
        .iter()
        .map(|&(name, or)| (name.to_string(), or.ln(), AxisSpec::descriptor(name).expect("known descriptor")))
        .collect();
    let mut n = assemble(format!("{}-paper-fixture", task.as_str()), task, NomogramSource::PaperFixture, intercept.unwrap_or(0.0), named)
        .expect("published axes have positive range");
    n.relative_risk_only = intercept.is_none();
    n.provenance.notes = vec![
        "slopes are ln(odds ratio) of published multivariable estimates under ordinal level coding".into(),
        "the published coding and reference levels are not stated; margin OR is stored as printed".into(),
    ];
    if n.relative_risk_only {
        n.provenance.notes.push("intercept unknown: probabilities are uncalibrated".into());
    }
    n
}

impl Nomogram {
    pub fn predictor_names(&self) -> Vec<&str> {
        self.predictors.iter().map(|a| a.name.as_str()).collect()
    }

    /// Scores encoded inputs given in axis order; out-of-range values are clamped.
    pub fn score(&self, values: &[f64]) -> NomogramScore {
        debug_assert_eq!(values.len(), self.predictors.len());
        let map = self.total_points_to_probability;
        let mut clamped = Vec::new();
        let mut per_predictor = Vec::with_capacity(self.predictors.len());
        let mut total = 0.0;
        for (axis, &v) in self.predictors.iter().zip(values) {
            let x = v.clamp(axis.range.0, axis.range.1);
            if x != v {
                clamped.push(axis.name.clone());
            }
            let mut pts = axis.coefficient * (x - axis.min_risk_value()) / map.scale;
            if let Some(q) = self.points_resolution {
                pts = (pts / q).round() * q;
            }
            total += pts;
            per_predictor.push((axis.name.clone(), pts));
        }
        let linear_predictor = map.beta0 + map.scale * total;
        let probability = sigmoid(linear_predictor);
        let band = self
            .bands
            .iter()
            .filter(|b| probability >= b.min_probability)
            .max_by(|a, b| a.min_probability.total_cmp(&b.min_probability))
            .map(|b| b.label.clone());
        NomogramScore {
            total_points: total,
            per_predictor,
            linear_predictor,
            probability,
            calibrated: !self.relative_risk_only,
            band,
            clamped,
        }
    }

    /// Validates a named feature map and encodes it in axis order.
    pub fn encode_features(&self, features: &BTreeMap<String, FeatureValue>) -> Result<Vec<f64>, Vec<FieldError>> {
        let mut errors = Vec::new();
        let mut values = Vec::with_capacity(self.predictors.len());
        for axis in &self.predictors {
            let err = |m: String| FieldError { field: axis.name.clone(), message: m };
            match (features.get(&axis.name), &axis.kind) {
                (None, _) => errors.push(err("missing".into())),
                (Some(FeatureValue::Level(l)), AxisKind::Categorical { levels }) => match levels.iter().position(|x| x == l) {
                    Some(k) => values.push((k + 1) as f64),
                    None => errors.push(err(format!("unknown level {l:?}; expected one of {levels:?}"))),
                },
                (Some(FeatureValue::Value(_)), AxisKind::Categorical { levels }) => {
                    errors.push(err(format!("expected a level name, one of {levels:?}")))
                }
                (Some(FeatureValue::Value(v)), AxisKind::Continuous) => {
                    if v.is_finite() {
                        values.push(*v)
                    } else {
                        errors.push(err("value must be finite".into()))
                    }
                }
                (Some(FeatureValue::Level(_)), AxisKind::Continuous) => errors.push(err("expected a number".into())),
            }
        }
        for k in features.keys() {
            if !self.predictors.iter().any(|a| &a.name == k) {
                errors.push(FieldError { field: k.clone(), message: "not a predictor of this nomogram".into() });
            }
        }
        if errors.is_empty() {
            Ok(values)
        } else {
            Err(errors)
        }
    }

    pub fn score_features(&self, features: &BTreeMap<String, FeatureValue>) -> Result<NomogramScore, Vec<FieldError>> {
        self.encode_features(features).map(|v| self.score(&v))
    }

    /// Feature map with every predictor at its lowest-risk value.
    pub fn min_risk_features(&self) -> BTreeMap<String, FeatureValue> {
        self.predictors
            .iter()
            .map(|a| {
                let v = a.min_risk_value();
                let fv = match &a.kind {
                    AxisKind::Categorical { levels } => FeatureValue::Level(levels[v as usize - 1].clone()),
                    AxisKind::Continuous => FeatureValue::Value(v),
                };
                (a.name.clone(), fv)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(names: &[&str], betas: &[f64], intercept: f64) -> LogisticModel {
        let p = betas.len();
        LogisticModel {
            predictors: names.iter().map(|s| s.to_string()).collect(),
            intercept,
            coefficients: betas.to_vec(),
            covariance: vec![vec![0.0; p + 1]; p + 1],
            n: 0,
            events: 0,
            iterations: 0,
        }
    }

    #[test]
    fn single_axis_spans_hundred_points() {
        let m = model(&["x"], &[-0.7], 0.3);
        let n = build_nomogram("t", Task::Biopsy, &m, vec![AxisSpec::continuous(2.0, 6.0)]).unwrap();
        let t = &n.predictors[0].points_table;
        let max = t.iter().map(|p| p.points).fold(f64::MIN, f64::max);
        let min = t.iter().map(|p| p.points).fold(f64::MAX, f64::min);
        assert!((max - 100.0).abs() < 1e-12);
        assert_eq!(min, 0.0);
        assert_eq!(n.score(&[6.0]).total_points, 0.0);
    }

    #[test]
    fn proportional_axes() {
        let m = model(&["a", "b"], &[2.0, 0.5], 0.0);
        let n = build_nomogram("t", Task::Biopsy, &m, vec![AxisSpec::continuous(0.0, 1.0), AxisSpec::continuous(0.0, 2.0)]).unwrap();
        let s = n.score(&[1.0, 2.0]);
        assert!((s.per_predictor[0].1 - 100.0).abs() < 1e-12);
        assert!((s.per_predictor[1].1 - 50.0).abs() < 1e-12);
    }

    #[test]
    fn zero_range_rejected() {
        let m = model(&["x"], &[1.0], 0.0);
        assert_eq!(
            build_nomogram("t", Task::Biopsy, &m, vec![AxisSpec::continuous(1.0, 1.0)]),
            Err(FitError::ZeroRange("x".into()))
        );
    }

    #[test]
    fn fixture_slopes() {
        let b = paper_fixture_nomogram(Task::Biopsy, None);
        let margin = b.predictors.iter().find(|a| a.name == "margin").unwrap();
        assert!((margin.coefficient - 0.7051).abs() < 1e-4);
        let m = paper_fixture_nomogram(Task::Malignancy, None);
        assert!((m.predictors[0].coefficient + 0.8324).abs() < 1e-4);
        assert!(b.relative_risk_only);
        assert!(!b.score(&[1.0; 5]).calibrated);
    }

    #[test]
    fn clamping_and_validation() {
        let n = paper_fixture_nomogram(Task::Malignancy, None);
        let s = n.score(&[0.0, 3.0, 9.0]);
        assert_eq!(s.clamped, vec!["orientation".to_string(), "calcifications".to_string()]);
        let mut f = n.min_risk_features();
        assert_eq!(n.score_features(&f).unwrap().total_points, 0.0);
        f.insert("margin".into(), FeatureValue::Level("speculated".into()));
        f.insert("bogus".into(), FeatureValue::Value(1.0));
        f.remove("orientation");
        let errs = n.score_features(&f).unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(fields, vec!["orientation", "margin", "bogus"]);
    }

    #[test]
    fn bands_pick_highest_applicable() {
        let mut n = paper_fixture_nomogram(Task::Biopsy, Some(-2.0));
        n.bands = vec![
            Band { label: "routine".into(), min_probability: 0.0 },
            Band { label: "biopsy advised".into(), min_probability: 0.5 },
        ];
        assert_eq!(n.score(&[1.0; 5]).band.as_deref(), Some("routine"));
        let hi: Vec<f64> = n.predictors.iter().map(|a| if a.coefficient > 0.0 { a.range.1 } else { a.range.0 }).collect();
        assert_eq!(n.score(&hi).band.as_deref(), Some("biopsy advised"));
    }
}
