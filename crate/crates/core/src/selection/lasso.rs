//! L1-penalized logistic regression by cyclic coordinate descent.
//!
//! Objective on standardized predictors:
//! `-(1/n) loglik(β₀, β) + λ Σ|β_j|`, intercept unpenalized. Each outer step
//! replaces the log-likelihood by its quadratic expansion and solves the
//! penalized weighted least-squares problem by coordinate descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_finite, check_labels, FeatureMatrix, SelectionError};
use crate::stats::sigmoid;

const MAX_OUTER: usize = 200;
const WEIGHT_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LambdaRule {
    #[default]
    #[serde(rename = "min")]
    Min,
    /// Largest λ within one standard error of the minimum.
    #[serde(rename = "1se")]
    OneSe,
}

impl std::str::FromStr for LambdaRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "min" => Ok(Self::Min),
            "1se" => Ok(Self::OneSe),
            _ => Err(format!("unknown lambda rule {s:?} (expected min or 1se)")),
        }
    }
}

impl std::fmt::Display for LambdaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Min => "min",
            Self::OneSe => "1se",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub folds: usize,
    pub rule: LambdaRule,
    pub seed: u64,
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    /// Convergence bound on the largest coefficient change in a sweep.
    pub tolerance: f64,
    /// Coordinate sweeps allowed per λ.
    pub max_sweeps: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self { folds: 10, rule: LambdaRule::Min, seed: 0, n_lambda: 100, lambda_min_ratio: 1e-3, tolerance: 1e-8, max_sweeps: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPoint {
    pub lambda: f64,
    pub intercept: f64,
    /// On the standardized scale.
    pub coefficients: Vec<f64>,
    pub nonzero: usize,
    pub converged: bool,
    pub sweeps: usize,
    pub kkt_residual: f64,
    pub cv_mean: f64,
    pub cv_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    pub predictors: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Descending.
    pub points: Vec<LassoPoint>,
    pub rule: LambdaRule,
    pub index_min: usize,
    pub index_1se: usize,
    pub chosen_index: usize,
    pub chosen_lambda: f64,
    pub selected: Vec<String>,
    /// Intercept and slopes at the chosen λ on the original scale.
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LassoPath {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    /// λ values at which coordinate descent hit its sweep limit.
    pub fn nonconverged(&self) -> Vec<f64> {
        self.points.iter().filter(|p| !p.converged).map(|p| p.lambda).collect()
    }
}

/// Single-λ fit reported on both scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub lambda: f64,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub std_intercept: f64,
    pub std_coefficients: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    pub kkt_residual: f64,
}

struct Standardized {
    /// Column-major, centered and scaled by the population standard deviation.
    cols: Vec<Vec<f64>>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl Standardized {
    fn new(cols: &[Vec<f64>], rows: &[usize]) -> Self {
        let n = rows.len() as f64;
        let mut means = Vec::with_capacity(cols.len());
        let mut sds = Vec::with_capacity(cols.len());
        let out = cols
            .iter()
            .map(|c| {
                let m = rows.iter().map(|&i| c[i]).sum::<f64>() / n;
                let v = rows.iter().map(|&i| (c[i] - m).powi(2)).sum::<f64>() / n;
                // constant columns stay at zero and never enter the model
                let sd = if v > 0.0 { v.sqrt() } else { 1.0 };
                means.push(m);
                sds.push(sd);
                rows.iter().map(|&i| (c[i] - m) / sd).collect()
            })
            .collect();
        Self { cols: out, means, sds }
    }

    fn apply(&self, cols: &[Vec<f64>], rows: &[usize]) -> Vec<Vec<f64>> {
        cols.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(c, (m, s))| rows.iter().map(|&i| (c[i] - m) / s).collect())
            .collect()
    }

    fn to_original(&self, b0: f64, b: &[f64]) -> (f64, Vec<f64>) {
        let slopes: Vec<f64> = b.iter().zip(&self.sds).map(|(v, s)| v / s).collect();
        let shift: f64 = slopes.iter().zip(&self.means).map(|(v, m)| v * m).sum();
        (b0 - shift, slopes)
    }
}

fn linear_predictor(x: &[Vec<f64>], b0: f64, b: &[f64]) -> Vec<f64> {
    let n = x.first().map_or(0, Vec::len);
    let mut eta = vec![b0; n];
    for (col, &bj) in x.iter().zip(b) {
        if bj != 0.0 {
            for (e, v) in eta.iter_mut().zip(col) {
                *e += bj * v;
            }
        }
    }
    eta
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Mean binomial deviance `2/n Σ [softplus(η) − yη]`.
fn mean_deviance(eta: &[f64], y: &[f64]) -> f64 {
    2.0 * eta.iter().zip(y).map(|(e, t)| softplus(*e) - t * e).sum::<f64>() / eta.len() as f64
}

fn objective(x: &[Vec<f64>], y: &[f64], lambda: f64, b0: f64, b: &[f64]) -> f64 {
    0.5 * mean_deviance(&linear_predictor(x, b0, b), y) + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
}

fn gradient(x: &[Vec<f64>], y: &[f64], b0: f64, b: &[f64]) -> (f64, Vec<f64>) {
    let n = y.len() as f64;
    let resid: Vec<f64> = linear_predictor(x, b0, b).iter().zip(y).map(|(e, t)| t - sigmoid(*e)).collect();
    let g0 = resid.iter().sum::<f64>() / n;
    let g = x.iter().map(|c| c.iter().zip(&resid).map(|(v, r)| v * r).sum::<f64>() / n).collect();
    (g0, g)
}

/// Largest violation of the subgradient optimality conditions.
fn kkt_residual(x: &[Vec<f64>], y: &[f64], lambda: f64, b0: f64, b: &[f64]) -> f64 {
    let (g0, g) = gradient(x, y, b0, b);
    g.iter().zip(b).fold(g0.abs(), |acc, (gj, bj)| {
        let v = if *bj != 0.0 { (gj - lambda * bj.signum()).abs() } else { (gj.abs() - lambda).max(0.0) };
        acc.max(v)
    })
}

fn null_intercept(y: &[f64]) -> f64 {
    let p = y.iter().sum::<f64>() / y.len() as f64;
    (p / (1.0 - p)).ln()
}

fn lambda_max(x: &[Vec<f64>], y: &[f64]) -> f64 {
    let (_, g) = gradient(x, y, null_intercept(y), &vec![0.0; x.len()]);
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn soft(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

struct Solution {
    b0: f64,
    b: Vec<f64>,
    converged: bool,
    sweeps: usize,
}

fn solve(x: &[Vec<f64>], y: &[f64], lambda: f64, warm: (f64, &[f64]), cfg: &LassoConfig) -> Solution {
    let n = y.len() as f64;
    let p = x.len();
    if lambda >= lambda_max(x, y) {
        return Solution { b0: null_intercept(y), b: vec![0.0; p], converged: true, sweeps: 0 };
    }
    let (mut b0, mut b) = (warm.0, warm.1.to_vec());
    let mut obj = objective(x, y, lambda, b0, &b);
    let mut sweeps = 0;
    for _ in 0..MAX_OUTER {
        let eta = linear_predictor(x, b0, &b);
        let mu: Vec<f64> = eta.iter().map(|e| sigmoid(*e)).collect();
        let w: Vec<f64> = mu.iter().map(|m| (m * (1.0 - m)).max(WEIGHT_FLOOR)).collect();
        let mut r: Vec<f64> = y.iter().zip(&mu).zip(&w).map(|((t, m), wi)| (t - m) / wi).collect();
        let sw: f64 = w.iter().sum();
        let xwx: Vec<f64> = x.iter().map(|c| c.iter().zip(&w).map(|(v, wi)| wi * v * v).sum::<f64>() / n).collect();
        let (mut nb0, mut nb) = (b0, b.clone());
        loop {
            sweeps += 1;
            let d0 = r.iter().zip(&w).map(|(ri, wi)| ri * wi).sum::<f64>() / sw;
            nb0 += d0;
            r.iter_mut().for_each(|ri| *ri -= d0);
            let mut max_change = d0.abs();
            for j in 0..p {
                if xwx[j] == 0.0 {
                    continue;
                }
                let col = &x[j];
                let g = col.iter().zip(&r).zip(&w).map(|((v, ri), wi)| wi * v * ri).sum::<f64>() / n + xwx[j] * nb[j];
                let new = soft(g, lambda) / xwx[j];
                let d = new - nb[j];
                if d != 0.0 {
                    nb[j] = new;
                    r.iter_mut().zip(col).for_each(|(ri, v)| *ri -= d * v);
                    max_change = max_change.max(d.abs());
                }
            }
            if max_change < cfg.tolerance || sweeps >= cfg.max_sweeps {
                break;
            }
        }
        // backtrack along the proximal Newton direction if the objective rose
        let mut new_obj = objective(x, y, lambda, nb0, &nb);
        let mut t = 1.0;
        while new_obj > obj && t > 1e-10 {
            t *= 0.5;
            nb0 = b0 + t * (nb0 - b0);
            nb.iter_mut().zip(&b).for_each(|(v, old)| *v = old + t * (*v - old));
            new_obj = objective(x, y, lambda, nb0, &nb);
        }
        let change = b.iter().zip(&nb).fold((nb0 - b0).abs(), |m, (a, c)| m.max((a - c).abs()));
        b0 = nb0;
        b = nb;
        obj = new_obj.min(obj);
        if change < cfg.tolerance {
            return Solution { b0, b, converged: true, sweeps };
        }
        if sweeps >= cfg.max_sweeps {
            break;
        }
    }
    Solution { b0, b, converged: false, sweeps }
}

fn prepare(m: &FeatureMatrix, y: &[bool]) -> Result<Vec<f64>, SelectionError> {
    if m.columns.is_empty() {
        return Err(SelectionError::Empty);
    }
    check_labels(m.n_rows(), y)?;
    check_finite(m)?;
    Ok(y.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect())
}

/// Penalized fit at a single λ, started from the null model.
pub fn lasso_fit(m: &FeatureMatrix, y: &[bool], lambda: f64, cfg: &LassoConfig) -> Result<LassoFit, SelectionError> {
    let yv = prepare(m, y)?;
    let rows: Vec<usize> = (0..yv.len()).collect();
    let s = Standardized::new(&m.columns, &rows);
    let zero = vec![0.0; m.columns.len()];
    let sol = solve(&s.cols, &yv, lambda, (null_intercept(&yv), &zero), cfg);
    let (intercept, coefficients) = s.to_original(sol.b0, &sol.b);
    Ok(LassoFit {
        lambda,
        intercept,
        coefficients,
        kkt_residual: kkt_residual(&s.cols, &yv, lambda, sol.b0, &sol.b),
        std_intercept: sol.b0,
        std_coefficients: sol.b,
        converged: sol.converged,
        sweeps: sol.sweeps,
    })
}

/// Stratified fold labels: each class is shuffled and dealt round-robin.
pub fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

/// Warm-started path over `lambdas`; returns per-λ solutions.
fn path(x: &[Vec<f64>], y: &[f64], lambdas: &[f64], cfg: &LassoConfig) -> Vec<Solution> {
    let mut out: Vec<Solution> = Vec::with_capacity(lambdas.len());
    let mut warm = (null_intercept(y), vec![0.0; x.len()]);
    for &l in lambdas {
        let s = solve(x, y, l, (warm.0, &warm.1), cfg);
        warm = (s.b0, s.b.clone());
        out.push(s);
    }
    out
}

/// Full regularization path with stratified K-fold cross-validated deviance.
pub fn lasso_select(m: &FeatureMatrix, y: &[bool], cfg: &LassoConfig) -> Result<LassoPath, SelectionError> {
    let yv = prepare(m, y)?;
    if cfg.folds < 2 || cfg.folds > yv.len() {
        return Err(SelectionError::InvalidConfig(format!("{} folds for {} rows", cfg.folds, yv.len())));
    }
    if cfg.n_lambda < 2 || !(cfg.lambda_min_ratio > 0.0 && cfg.lambda_min_ratio < 1.0) {
        return Err(SelectionError::InvalidConfig("lambda grid needs n_lambda >= 2 and 0 < ratio < 1".into()));
    }
    let all: Vec<usize> = (0..yv.len()).collect();
    let s = Standardized::new(&m.columns, &all);
    let lmax = lambda_max(&s.cols, &yv);
    let steps = (cfg.n_lambda - 1) as f64;
    let lambdas: Vec<f64> = (0..cfg.n_lambda)
        .map(|k| if k == 0 { lmax } else { lmax * cfg.lambda_min_ratio.powf(k as f64 / steps) })
        .collect();
    let full = path(&s.cols, &yv, &lambdas, cfg);

    let fold = stratified_folds(y, cfg.folds, cfg.seed);
    let fold_dev: Vec<Vec<f64>> = (0..cfg.folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = all.iter().copied().filter(|&i| fold[i] != f).collect();
            let test: Vec<usize> = all.iter().copied().filter(|&i| fold[i] == f).collect();
            let ytr: Vec<f64> = train.iter().map(|&i| yv[i]).collect();
            let yte: Vec<f64> = test.iter().map(|&i| yv[i]).collect();
            let st = Standardized::new(&m.columns, &train);
            let xte = st.apply(&m.columns, &test);
            path(&st.cols, &ytr, &lambdas, cfg)
                .iter()
                .map(|sol| mean_deviance(&linear_predictor(&xte, sol.b0, &sol.b), &yte))
                .collect()
        })
        .collect();

    let k = cfg.folds as f64;
    let points: Vec<LassoPoint> = full
        .into_iter()
        .zip(&lambdas)
        .enumerate()
        .map(|(li, (sol, &lambda))| {
            let vals: Vec<f64> = fold_dev.iter().map(|d| d[li]).collect();
            let cv_mean = vals.iter().sum::<f64>() / k;
            let var = vals.iter().map(|v| (v - cv_mean).powi(2)).sum::<f64>() / (k - 1.0);
            LassoPoint {
                lambda,
                kkt_residual: kkt_residual(&s.cols, &yv, lambda, sol.b0, &sol.b),
                nonzero: sol.b.iter().filter(|v| **v != 0.0).count(),
                intercept: sol.b0,
                coefficients: sol.b,
                converged: sol.converged,
                sweeps: sol.sweeps,
                cv_mean,
                cv_se: (var / k).sqrt(),
            }
        })
        .collect();

    let index_min = points
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if p.cv_mean < points[best].cv_mean { i } else { best });
    let bound = points[index_min].cv_mean + points[index_min].cv_se;
    let index_1se = points.iter().position(|p| p.cv_mean <= bound).unwrap_or(index_min);
    let chosen_index = match cfg.rule {
        LambdaRule::Min => index_min,
        LambdaRule::OneSe => index_1se,
    };
    let chosen = &points[chosen_index];
    let (intercept, coefficients) = s.to_original(chosen.intercept, &chosen.coefficients);
    let selected = m.names.iter().zip(&chosen.coefficients).filter(|(_, v)| **v != 0.0).map(|(n, _)| n.clone()).collect();
    Ok(LassoPath {
        predictors: m.names.clone(),
        chosen_lambda: chosen.lambda,
        means: s.means,
        sds: s.sds,
        rule: cfg.rule,
        index_min,
        index_1se,
        chosen_index,
        selected,
        intercept,
        coefficients,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (FeatureMatrix, Vec<bool>) {
        let a: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64).collect();
        let b: Vec<f64> = (0..40).map(|i| ((i * 5) % 13) as f64 * 0.3).collect();
        let y: Vec<bool> = (0..40).map(|i| (a[i] + 0.5 * b[i] + ((i * 3) % 5) as f64) > 7.0).collect();
        (FeatureMatrix::new(vec!["a".into(), "b".into()], vec![a, b]), y)
    }

    #[test]
    fn folds_are_balanced() {
        let y: Vec<bool> = (0..53).map(|i| i % 3 == 0).collect();
        let f = stratified_folds(&y, 10, 7);
        for k in 0..10 {
            let pos = (0..53).filter(|&i| f[i] == k && y[i]).count();
            assert!((1..=2).contains(&pos));
        }
        assert_eq!(f, stratified_folds(&y, 10, 7));
    }

    #[test]
    fn path_starts_empty_and_satisfies_kkt() {
        let (m, y) = toy();
        let p = lasso_select(&m, &y, &LassoConfig { folds: 5, ..Default::default() }).unwrap();
        assert!(p.points[0].coefficients.iter().all(|v| *v == 0.0));
        for pt in &p.points {
            assert!(pt.kkt_residual < 1e-6, "{} {}", pt.lambda, pt.kkt_residual);
            assert!(pt.converged);
        }
        assert!(p.points.windows(2).all(|w| w[0].lambda > w[1].lambda));
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("1se".parse::<LambdaRule>(), Ok(LambdaRule::OneSe));
        assert!("max".parse::<LambdaRule>().is_err());
    }
}
