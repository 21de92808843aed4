use serde::{Deserialize, Serialize};

use super::{check_finite, FeatureMatrix, SelectionError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSquares {
    /// Between subjects.
    pub msr: f64,
    /// Between raters.
    pub msc: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccRow {
    pub feature: String,
    /// `None` when the feature is constant for both raters.
    pub icc: Option<f64>,
    pub mean_squares: MeanSquares,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccReport {
    pub threshold: f64,
    pub rows: Vec<IccRow>,
}

impl IccReport {
    pub fn kept(&self) -> Vec<String> {
        self.rows.iter().filter(|r| r.kept).map(|r| r.feature.clone()).collect()
    }
}

/// Two-way random, absolute-agreement, single-measurement ICC for two raters.
///
/// Returns the mean squares and the estimate, which is `None` when the
/// total sum of squares is zero.
pub fn icc_2_1(a: &[f64], b: &[f64]) -> (MeanSquares, Option<f64>) {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let k = 2.0;
    let row_means: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    let grand = row_means.iter().sum::<f64>() / n;
    let (ca, cb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let ssr = k * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ssc = n * ((ca - grand).powi(2) + (cb - grand).powi(2));
    let sse: f64 = a
        .iter()
        .zip(b)
        .zip(&row_means)
        .map(|((x, y), m)| (x - m - ca + grand).powi(2) + (y - m - cb + grand).powi(2))
        .sum();
    let ms = MeanSquares { msr: ssr / (n - 1.0), msc: ssc / (k - 1.0), mse: sse / ((n - 1.0) * (k - 1.0)) };
    if ssr + ssc + sse == 0.0 {
        return (ms, None);
    }
    let den = ms.msr + (k - 1.0) * ms.mse + k * (ms.msc - ms.mse) / n;
    if den <= 0.0 {
        return (ms, None);
    }
    let icc = ((ms.msr - ms.mse) / den).clamp(-1.0, 1.0);
    (ms, Some(icc))
}

/// Keeps features whose ICC(2,1) between the two raters exceeds `threshold`.
pub fn icc_filter(rater_a: &FeatureMatrix, rater_b: &FeatureMatrix, threshold: f64) -> Result<IccReport, SelectionError> {
    if rater_a.names != rater_b.names || rater_a.n_rows() != rater_b.n_rows() || rater_a.n_rows() < 2 {
        return Err(SelectionError::ShapeMismatch);
    }
    check_finite(rater_a)?;
    check_finite(rater_b)?;
    let rows = rater_a
        .names
        .iter()
        .zip(rater_a.columns.iter().zip(&rater_b.columns))
        .map(|(name, (a, b))| {
            let (mean_squares, icc) = icc_2_1(a, b);
            IccRow { feature: name.clone(), icc, mean_squares, kept: icc.is_some_and(|v| v > threshold) }
        })
        .collect();
    Ok(IccReport { threshold, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_raters_agree_perfectly() {
        let a = vec![1.0, 4.0, 2.5, 7.0];
        assert_eq!(icc_2_1(&a, &a).1, Some(1.0));
        assert_eq!(icc_2_1(&[3.0; 4], &[3.0; 4]).1, None);
    }

    #[test]
    fn symmetric_in_rater_order() {
        let a = [9.0, 6.0, 8.0, 7.0, 10.0, 6.0];
        let b = [2.0, 1.0, 4.0, 1.0, 5.0, 2.0];
        assert_eq!(icc_2_1(&a, &b), icc_2_1(&b, &a));
    }
}
