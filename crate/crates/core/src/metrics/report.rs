//! Evaluation report laid out like a diagnostic-performance table.

use serde::{Deserialize, Serialize};

use super::{binary_metrics, delong_paired, delong_variance, BinaryMetrics, ConfusionMatrix, MetricsError};

/// One method's scores (continuous, or 0/1 calls) and its operating threshold.
#[derive(Debug, Clone)]
pub struct MethodScores {
    pub name: String,
    pub scores: Vec<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub confusion: ConfusionMatrix,
    pub metrics: BinaryMetrics,
    pub auc: f64,
    pub auc_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub partition: String,
    pub n: usize,
    pub n_pos: usize,
    pub rows: Vec<MethodRow>,
    pub methods: Vec<String>,
    /// Paired DeLong p-values, `None` on the diagonal.
    pub pairwise_p: Vec<Vec<Option<f64>>>,
}

pub fn evaluate(partition: &str, methods: &[MethodScores], labels: &[bool]) -> Result<EvalReport, MetricsError> {
    let mut rows = Vec::with_capacity(methods.len());
    for m in methods {
        let predicted: Vec<bool> = m.scores.iter().map(|&s| s >= m.threshold).collect();
        let confusion = ConfusionMatrix::from_predictions(&predicted, labels)?;
        let d = delong_variance(&m.scores, labels)?;
        rows.push(MethodRow {
            method: m.name.clone(),
            confusion,
            metrics: binary_metrics(&confusion)?,
            auc: d.auc_a,
            auc_ci: d.ci_a,
        });
    }
    let k = methods.len();
    let mut pairwise_p = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let p = delong_paired(&methods[i].scores, &methods[j].scores, labels)?.p;
            pairwise_p[i][j] = p;
            pairwise_p[j][i] = p;
        }
    }
    Ok(EvalReport {
        partition: partition.to_string(),
        n: labels.len(),
        n_pos: labels.iter().filter(|&&l| l).count(),
        rows,
        methods: methods.iter().map(|m| m.name.clone()).collect(),
        pairwise_p,
    })
}
