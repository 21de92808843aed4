//! Univariable screening and backward-elimination multivariable fitting.

use serde::{Deserialize, Serialize};

use super::encoding::Design;
use super::logistic::{check_rank, fit_logistic, CoefficientSummary, LogisticModel};
use super::FitError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ScreenOutcome {
    Fitted { summary: CoefficientSummary, kept: bool },
    /// The fit was impossible (zero cells, constant predictor, ...).
    NotComputable { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub predictor: String,
    pub outcome: ScreenOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub alpha: f64,
    pub results: Vec<ScreenResult>,
}

impl ScreenReport {
    pub fn kept(&self) -> Vec<String> {
        self.results
            .iter()
            .filter(|r| matches!(r.outcome, ScreenOutcome::Fitted { kept: true, .. }))
            .map(|r| r.predictor.clone())
            .collect()
    }
}

/// One single-predictor fit per column; predictors with Wald `p < alpha` are kept.
pub fn screen_univariable(x: &Design, y: &[bool], alpha: f64) -> ScreenReport {
    let results = x
        .names
        .iter()
        .zip(&x.columns)
        .map(|(name, col)| {
            let single = Design::new(vec![name.clone()], vec![col.clone()]);
            let outcome = match fit_logistic(&single, y) {
                Ok(m) => {
                    let summary = m.summary().remove(0);
                    let kept = summary.p < alpha;
                    ScreenOutcome::Fitted { summary, kept }
                }
                Err(e) => ScreenOutcome::NotComputable { reason: e.to_string() },
            };
            ScreenResult { predictor: name.clone(), outcome }
        })
        .collect();
    ScreenReport { alpha, results }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationStep {
    pub dropped: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariableFit {
    pub model: LogisticModel,
    pub steps: Vec<EliminationStep>,
}

/// Backward elimination: refit after dropping the largest-p predictor while any `p >= alpha`.
pub fn fit_multivariable(x: &Design, y: &[bool], alpha: f64) -> Result<MultivariableFit, FitError> {
    if x.names.is_empty() {
        return Err(FitError::AllDropped);
    }
    check_rank(x)?;
    let mut current = x.names.clone();
    let mut steps = Vec::new();
    loop {
        let d = x.select(&current).expect("subset of known columns");
        let model = fit_logistic(&d, y)?;
        let p = model.p_values();
        let (worst, &pmax) = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("at least one predictor");
        if pmax < alpha {
            return Ok(MultivariableFit { model, steps });
        }
        steps.push(EliminationStep { dropped: current[worst].clone(), p: pmax });
        current.remove(worst);
        if current.is_empty() {
            return Err(FitError::AllDropped);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_constant_predictors_are_not_computable() {
        let y = vec![false, true, false, true, true, false];
        let perfect: Vec<f64> = y.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
        let x = Design::new(vec!["perfect".into(), "constant".into()], vec![perfect, vec![3.0; 6]]);
        let r = screen_univariable(&x, &y, 0.05);
        assert!(r.kept().is_empty());
        for res in &r.results {
            assert!(matches!(res.outcome, ScreenOutcome::NotComputable { .. }), "{res:?}");
        }
        if let ScreenOutcome::NotComputable { reason } = &r.results[0].outcome {
            assert!(reason.contains("separation"));
        }
    }

    #[test]
    fn duplicated_predictors_surface_rank_deficiency() {
        let a = vec![1., 2., 3., 4., 2., 1., 5., 3.];
        let x = Design::new(vec!["a".into(), "a2".into()], vec![a.clone(), a]);
        let y = [false, true, false, true, true, false, true, false];
        assert!(matches!(fit_multivariable(&x, &y, 0.05), Err(FitError::RankDeficient { .. })));
        let empty = Design::new(vec![], vec![]);
        assert_eq!(fit_multivariable(&empty, &y, 0.05), Err(FitError::AllDropped));
    }
}
