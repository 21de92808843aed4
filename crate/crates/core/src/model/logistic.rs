//! Maximum-likelihood logistic regression by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::encoding::Design;
use super::FitError;
use crate::stats::{sigmoid, two_sided_p, Z_975};

/// Convergence threshold on the largest score component (standardized design).
pub const SCORE_TOLERANCE: f64 = 1e-8;
/// Slope norm on the standardized scale beyond which the fit is declared separated.
pub const SEPARATION_NORM: f64 = 50.0;
pub const MAX_ITERATIONS: usize = 100;
/// Fitted probabilities this close to 0 or 1 are treated as separation.
const FITTED_EXTREME: f64 = 1e-10;
const STEP_TOLERANCE: f64 = 1e-6;
/// Relative eigenvalue floor of the standardized Gram matrix.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub predictors: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Inverse observed information, intercept first.
    pub covariance: Vec<Vec<f64>>,
    pub n: usize,
    pub events: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub name: String,
    pub beta: f64,
    pub se: f64,
    pub z: f64,
    pub p: f64,
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl LogisticModel {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(x))
    }

    pub fn std_error(&self, j: usize) -> f64 {
        self.covariance[j + 1][j + 1].max(0.0).sqrt()
    }

    /// Wald statistics, odds ratios and 95% CIs for each slope.
    pub fn summary(&self) -> Vec<CoefficientSummary> {
        self.predictors
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let beta = self.coefficients[j];
                let se = self.std_error(j);
                let z = beta / se;
                CoefficientSummary {
                    name: name.clone(),
                    beta,
                    se,
                    z,
                    p: two_sided_p(z),
                    odds_ratio: beta.exp(),
                    ci_low: (beta - Z_975 * se).exp(),
                    ci_high: (beta + Z_975 * se).exp(),
                }
            })
            .collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.summary().into_iter().map(|s| s.p).collect()
    }
}

struct Standardized {
    z: DMatrix<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

fn standardize(x: &Design) -> Result<Standardized, FitError> {
    let n = x.n_rows();
    let p = x.columns.len();
    let mut z = DMatrix::from_element(n, p + 1, 1.0);
    let mut means = Vec::with_capacity(p);
    let mut sds = Vec::with_capacity(p);
    for (j, col) in x.columns.iter().enumerate() {
        let m = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
        if !(sd > 0.0) {
            return Err(FitError::RankDeficient { columns: vec![x.names[j].clone()] });
        }
        for i in 0..n {
            z[(i, j + 1)] = (col[i] - m) / sd;
        }
        means.push(m);
        sds.push(sd);
    }
    Ok(Standardized { z, means, sds })
}

/// Errors with `RankDeficient` when the design (with intercept) is not of full column rank.
pub fn check_rank(x: &Design) -> Result<(), FitError> {
    let s = standardize(x)?;
    let g = s.z.transpose() * &s.z;
    let eig = SymmetricEigen::new(g);
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let (imin, min) = eig
        .eigenvalues
        .iter()
        .cloned()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    if min <= RANK_TOLERANCE * max {
        // name the columns loading on the null direction
        let v = eig.eigenvectors.column(imin);
        let columns = (1..v.len()).filter(|&k| v[k].abs() > 0.1).map(|k| x.names[k - 1].clone()).collect();
        return Err(FitError::RankDeficient { columns });
    }
    Ok(())
}

fn log_likelihood(z: &DMatrix<f64>, y: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let eta = z * b;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &t)| {
            // log σ(e) = −softplus(−e)
            let log1pe = |v: f64| if v > 0.0 { v + (-v).exp().ln_1p() } else { v.exp().ln_1p() };
            t * -log1pe(-e) + (1.0 - t) * -log1pe(e)
        })
        .sum()
}

/// Fits `y ~ x` by IRLS with step halving.
pub fn fit_logistic(x: &Design, y: &[bool]) -> Result<LogisticModel, FitError> {
    let n = y.len();
    if x.columns.iter().any(|c| c.len() != n) {
        return Err(FitError::ShapeMismatch);
    }
    if x.columns.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let events = y.iter().filter(|&&t| t).count();
    if events < 2 || n - events < 2 {
        return Err(FitError::TooFewPerClass);
    }
    check_rank(x)?;
    let s = standardize(x)?;
    let p = x.columns.len();
    let yv = DVector::from_iterator(n, y.iter().map(|&t| if t { 1.0 } else { 0.0 }));
    let mut b = DVector::zeros(p + 1);
    let prior = events as f64 / n as f64;
    b[0] = (prior / (1.0 - prior)).ln();
    let mut ll = log_likelihood(&s.z, &yv, &b);
    let mut info = DMatrix::zeros(p + 1, p + 1);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..=MAX_ITERATIONS {
        iterations = it;
        let eta = &s.z * &b;
        let mu = eta.map(sigmoid);
        let w = mu.map(|m| m * (1.0 - m));
        let score = s.z.transpose() * (&yv - &mu);
        let mut zw = s.z.clone();
        for (i, mut row) in zw.row_iter_mut().enumerate() {
            row *= w[i];
        }
        info = s.z.transpose() * zw;
        let step = match info.clone().cholesky() {
            Some(ch) => ch.solve(&score),
            None => return Err(FitError::Separation),
        };
        // a vanishing score with a non-vanishing Newton step means the
        // likelihood is still climbing toward an infinite estimate
        if score.amax() < SCORE_TOLERANCE && step.norm() < STEP_TOLERANCE * (1.0 + b.norm()) {
            converged = true;
            break;
        }
        if it == MAX_ITERATIONS {
            break;
        }
        let mut t = 1.0;
        let mut next = &b + &step;
        let mut ll_next = log_likelihood(&s.z, &yv, &next);
        while ll_next < ll - 1e-12 * ll.abs() && t > 1e-9 {
            t *= 0.5;
            next = &b + &step * t;
            ll_next = log_likelihood(&s.z, &yv, &next);
        }
        b = next;
        ll = ll_next;
        if b.rows(1, p).norm() > SEPARATION_NORM {
            return Err(FitError::Separation);
        }
    }
    if !converged {
        return Err(FitError::NonConvergence { iterations });
    }
    // converged only because the score underflowed on perfectly fitted rows
    let mu = (&s.z * &b).map(sigmoid);
    if mu.iter().any(|&m| m < FITTED_EXTREME || m > 1.0 - FITTED_EXTREME) {
        return Err(FitError::Separation);
    }
    let cov_std = info.clone().cholesky().ok_or(FitError::Separation)?.inverse();
    // back to the original scale: β = T b
    let mut t = DMatrix::zeros(p + 1, p + 1);
    t[(0, 0)] = 1.0;
    for j in 0..p {
        t[(0, j + 1)] = -s.means[j] / s.sds[j];
        t[(j + 1, j + 1)] = 1.0 / s.sds[j];
    }
    let beta = &t * &b;
    let cov = &t * cov_std * t.transpose();
    let cov = (0..=p).map(|i| (0..=p).map(|j| 0.5 * (cov[(i, j)] + cov[(j, i)])).collect()).collect();
    Ok(LogisticModel {
        predictors: x.names.clone(),
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        covariance: cov,
        n,
        events,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(counts: [[usize; 2]; 2]) -> (Design, Vec<bool>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (xv, row) in counts.iter().enumerate() {
            for (yv, &c) in row.iter().enumerate() {
                for _ in 0..c {
                    x.push(xv as f64);
                    y.push(yv == 1);
                }
            }
        }
        (Design::new(vec!["x".into()], vec![x]), y)
    }

    #[test]
    fn cross_product_ratio() {
        let (x, y) = two_by_two([[10, 20], [20, 10]]);
        let m = fit_logistic(&x, &y).unwrap();
        assert!((m.coefficients[0] - 0.25f64.ln()).abs() < 1e-9);
        assert!((m.intercept - 2f64.ln()).abs() < 1e-9);
        // Woolf: se² = Σ 1/cell
        let se_w = (1.0 / 10.0 + 1.0 / 20.0 + 1.0 / 20.0 + 1.0 / 10.0f64).sqrt();
        assert!((m.std_error(0) - se_w).abs() < 1e-9, "{} vs {se_w}", m.std_error(0));
        let s = &m.summary()[0];
        assert!(s.ci_low < s.odds_ratio && s.odds_ratio < s.ci_high);
    }

    #[test]
    fn separation_is_an_error() {
        let x = Design::new(vec!["x".into()], vec![vec![1., 2., 3., 4., 5., 6.]]);
        let y = [false, false, false, true, true, true];
        assert_eq!(fit_logistic(&x, &y), Err(FitError::Separation));
    }

    #[test]
    fn rank_deficiency() {
        let a = vec![1., 2., 3., 4., 2., 1., 5., 3.];
        let x = Design::new(vec!["a".into(), "b".into()], vec![a.clone(), a.iter().map(|v| 2.0 * v).collect()]);
        let y = [false, true, false, true, true, false, true, false];
        assert!(matches!(fit_logistic(&x, &y), Err(FitError::RankDeficient { .. })));
        let c = Design::new(vec!["c".into()], vec![vec![1.0; 8]]);
        assert!(matches!(fit_logistic(&c, &y), Err(FitError::RankDeficient { .. })));
    }

    #[test]
    fn needs_two_per_class() {
        let x = Design::new(vec!["x".into()], vec![vec![1., 2., 3.]]);
        assert_eq!(fit_logistic(&x, &[true, false, false]), Err(FitError::TooFewPerClass));
    }
}
