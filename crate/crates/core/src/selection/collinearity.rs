use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::stats::pearson;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub r: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.r[i][j])
    }
}

pub fn correlation_matrix(m: &FeatureMatrix) -> CorrelationMatrix {
    let p = m.columns.len();
    let mut r = vec![vec![0.0; p]; p];
    for i in 0..p {
        r[i][i] = 1.0;
        for j in i + 1..p {
            let v = pearson(&m.columns[i], &m.columns[j]);
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    CorrelationMatrix { names: m.names.clone(), r }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedFeature {
    pub feature: String,
    pub partner: String,
    pub r: f64,
    pub auc: f64,
    pub partner_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneResult {
    pub threshold: f64,
    pub kept: Vec<String>,
    /// In drop order.
    pub dropped: Vec<DroppedFeature>,
    pub correlation: CorrelationMatrix,
}

/// Repeatedly resolves the most correlated remaining pair with `|r| > threshold`
/// by dropping its member with lower AUC; equal AUCs drop the name that sorts later.
///
/// # Panics
/// If `aucs` lacks a column.
pub fn collinearity_prune(m: &FeatureMatrix, threshold: f64, aucs: &BTreeMap<String, f64>) -> PruneResult {
    let correlation = correlation_matrix(m);
    let names = &m.names;
    let auc: Vec<f64> = names.iter().map(|n| *aucs.get(n).unwrap_or_else(|| panic!("no AUC for {n}"))).collect();
    let mut active = vec![true; names.len()];
    let mut dropped = Vec::new();
    loop {
        let mut worst: Option<(f64, usize, usize)> = None;
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                if !(active[i] && active[j]) {
                    continue;
                }
                let r = correlation.r[i][j].abs();
                if r <= threshold {
                    continue;
                }
                let better = match worst {
                    None => true,
                    Some((w, a, b)) => r > w || (r == w && (&names[i], &names[j]) < (&names[a], &names[b])),
                };
                if better {
                    worst = Some((r, i, j));
                }
            }
        }
        let Some((_, i, j)) = worst else { break };
        let drop_j = auc[i] > auc[j] || (auc[i] == auc[j] && names[i] < names[j]);
        let (d, k) = if drop_j { (j, i) } else { (i, j) };
        active[d] = false;
        dropped.push(DroppedFeature {
            feature: names[d].clone(),
            partner: names[k].clone(),
            r: correlation.r[i][j],
            auc: auc[d],
            partner_auc: auc[k],
        });
    }
    let kept = names.iter().zip(&active).filter(|(_, &a)| a).map(|(n, _)| n.clone()).collect();
    PruneResult { threshold, kept, dropped, correlation }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_auc_twin_is_dropped() {
        let a = vec![1.0, 3.0, 2.0, 5.0, 4.0];
        let b = vec![0.5, 9.0, 1.0, 2.0, 2.5];
        let m = FeatureMatrix::new(vec!["a".into(), "b".into(), "twin".into()], vec![a.clone(), b, a]);
        let aucs = BTreeMap::from([("a".to_string(), 0.7), ("b".to_string(), 0.6), ("twin".to_string(), 0.65)]);
        let r = collinearity_prune(&m, 0.85, &aucs);
        assert_eq!(r.kept, vec!["a", "b"]);
        assert_eq!(r.dropped[0].feature, "twin");
        let tied = BTreeMap::from([("a".to_string(), 0.7), ("b".to_string(), 0.6), ("twin".to_string(), 0.7)]);
        assert_eq!(collinearity_prune(&m, 0.85, &tied).kept, vec!["a", "b"]);
    }
}
