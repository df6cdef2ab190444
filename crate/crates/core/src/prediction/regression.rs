//! Penalised linear regression with internal standardisation, and the
//! cross-validated evaluation protocol built on it.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{FeatureMatrix, Imputer};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_SWEEPS: usize = 10_000;
pub const SWEEP_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_ETA_GRID: [f64; 4] = [0.01, 0.02, 0.03, 0.04];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    /// `eta * ||w||_1`, solved by coordinate descent.
    #[default]
    L1,
    /// `eta * ||w||^2 / 2`, solved in closed form.
    L2,
}

impl std::str::FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "lasso" => Ok(Penalty::L1),
            "l2" | "ridge" => Ok(Penalty::L2),
            other => Err(Error::Config(format!("unknown penalty {other:?}"))),
        }
    }
}

/// Fitted linear model in the original feature scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel<F> {
    pub feature_names: Vec<String>,
    /// One weight per input column; dropped columns get zero.
    pub weights: Vec<F>,
    pub intercept: F,
    pub penalty: Penalty,
    pub eta: F,
    /// Zero-variance columns left out of the fit.
    pub dropped: Vec<String>,
    pub sweeps: usize,
}

impl<F: Scalar> RegressionModel<F> {
    pub fn predict_row(&self, row: &[F]) -> F {
        self.intercept + row.iter().zip(&self.weights).map(|(&x, &w)| x * w).sum::<F>()
    }

    pub fn predict(&self, x: &FeatureMatrix<F>) -> Vec<F> {
        (0..x.n_rows()).map(|r| self.predict_row(x.row(r))).collect()
    }
}

fn soft_threshold<F: Scalar>(z: F, t: F) -> F {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        F::zero()
    }
}

/// Solves `a x = b` for symmetric positive definite `a` (row-major, `p x p`).
fn cholesky_solve<F: Scalar>(mut a: Vec<F>, mut b: Vec<F>, p: usize) -> Result<Vec<F>> {
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if !(d > F::zero()) {
            return Err(Error::Evaluation("normal equations are singular".into()));
        }
        let d = d.sqrt();
        a[j * p + j] = d;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / d;
        }
    }
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * p + k] * b[k];
        }
        b[i] = s / a[i * p + i];
    }
    for i in (0..p).rev() {
        let mut s = b[i];
        for k in (i + 1)..p {
            s -= a[k * p + i] * b[k];
        }
        b[i] = s / a[i * p + i];
    }
    Ok(b)
}

/// Minimises `||y - Xw - b||^2 / (2n) + eta * P(w)` over `w` and the
/// unpenalised intercept `b`, with the columns of `X` standardised first.
pub fn fit_regularized_linear<F: Scalar>(x: &FeatureMatrix<F>, y: &[F], eta: F, penalty: Penalty) -> Result<RegressionModel<F>> {
    let n = x.n_rows();
    if n == 0 || y.len() != n {
        return Err(Error::Evaluation(format!("{n} rows but {} targets", y.len())));
    }
    if x.has_missing() {
        return Err(Error::Contract("regression input still has missing values".into()));
    }
    if !(eta >= F::zero()) {
        return Err(Error::Config(format!("eta must be non-negative, got {eta}")));
    }
    let nf = F::from_count(n);
    let p_all = x.n_cols();
    let y_mean = y.iter().copied().sum::<F>() / nf;

    let mut cols = Vec::new();
    let mut centers = Vec::new();
    let mut scales = Vec::new();
    let mut dropped = Vec::new();
    for c in 0..p_all {
        let mu = (0..n).map(|r| x.value(r, c)).sum::<F>() / nf;
        let var = (0..n).map(|r| (x.value(r, c) - mu) * (x.value(r, c) - mu)).sum::<F>() / nf;
        let sd = var.sqrt();
        if sd > F::epsilon() * (F::one() + mu.abs()) {
            cols.push(c);
            centers.push(mu);
            scales.push(sd);
        } else {
            log::debug!("feature {:?} has zero variance and was dropped", x.names()[c]);
            dropped.push(x.names()[c].clone());
        }
    }
    let p = cols.len();
    // standardised design, column-major
    let z: Vec<Vec<F>> = (0..p)
        .map(|j| (0..n).map(|r| (x.value(r, cols[j]) - centers[j]) / scales[j]).collect())
        .collect();
    let yc: Vec<F> = y.iter().map(|&v| v - y_mean).collect();

    let mut beta = vec![F::zero(); p];
    let mut sweeps = 0;
    match penalty {
        Penalty::L1 => {
            let mut resid = yc.clone();
            let tol = F::lit(SWEEP_TOLERANCE);
            while sweeps < MAX_SWEEPS && p > 0 {
                sweeps += 1;
                let mut max_step = F::zero();
                for j in 0..p {
                    let zj = &z[j];
                    let rho = zj.iter().zip(&resid).map(|(&a, &r)| a * r).sum::<F>() / nf + beta[j];
                    let new = soft_threshold(rho, eta);
                    let step = new - beta[j];
                    if step != F::zero() {
                        for (r, &a) in resid.iter_mut().zip(zj) {
                            *r -= a * step;
                        }
                        beta[j] = new;
                        max_step = max_step.max(step.abs());
                    }
                }
                if max_step < tol {
                    break;
                }
            }
        }
        Penalty::L2 => {
            if p > 0 {
                let mut a = vec![F::zero(); p * p];
                for i in 0..p {
                    for j in i..p {
                        let v = z[i].iter().zip(&z[j]).map(|(&u, &w)| u * w).sum::<F>() / nf;
                        a[i * p + j] = v;
                        a[j * p + i] = v;
                    }
                    a[i * p + i] += eta;
                }
                let b: Vec<F> = (0..p).map(|j| z[j].iter().zip(&yc).map(|(&u, &v)| u * v).sum::<F>() / nf).collect();
                beta = cholesky_solve(a, b, p)?;
            }
        }
    }

    let mut weights = vec![F::zero(); p_all];
    let mut intercept = y_mean;
    for j in 0..p {
        let w = beta[j] / scales[j];
        weights[cols[j]] = w;
        intercept -= w * centers[j];
    }
    Ok(RegressionModel {
        feature_names: x.names().to_vec(),
        weights,
        intercept,
        penalty,
        eta,
        dropped,
        sweeps,
    })
}

/// Mean absolute error.
pub fn mae<F: Scalar>(predicted: &[F], truth: &[F]) -> Result<F> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(Error::Evaluation(format!(
            "MAE needs equal non-empty inputs, got {} and {}",
            predicted.len(),
            truth.len()
        )));
    }
    Ok(predicted.iter().zip(truth).map(|(&a, &b)| (a - b).abs()).sum::<F>() / F::from_count(truth.len()))
}

/// Coefficient of determination. A constant target scores 1 when fitted
/// exactly and 0 otherwise.
pub fn r_squared<F: Scalar>(predicted: &[F], truth: &[F]) -> F {
    let n = F::from_count(truth.len().max(1));
    let mean = truth.iter().copied().sum::<F>() / n;
    let sst = truth.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>();
    let sse = predicted.iter().zip(truth).map(|(&a, &b)| (a - b) * (a - b)).sum::<F>();
    if sst > F::zero() {
        F::one() - sse / sst
    } else if sse == F::zero() {
        F::one()
    } else {
        F::zero()
    }
}

/// Fits every `eta` in `grid` and keeps the one with the highest in-sample
/// R²; ties go to the smallest `eta`.
pub fn select_eta<F: Scalar>(x: &FeatureMatrix<F>, y: &[F], grid: &[F], penalty: Penalty) -> Result<(RegressionModel<F>, F)> {
    if grid.is_empty() {
        return Err(Error::Config("eta grid is empty".into()));
    }
    let mut etas = grid.to_vec();
    etas.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut best: Option<(RegressionModel<F>, F)> = None;
    for eta in etas {
        let model = fit_regularized_linear(x, y, eta, penalty)?;
        let r2 = r_squared(&model.predict(x), y);
        if best.as_ref().is_none_or(|(_, b)| r2 > *b) {
            best = Some((model, r2));
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// Seeded shuffle of `0..n` dealt round-robin into `folds` folds.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig<F> {
    pub folds: usize,
    pub seed: u64,
    pub eta_grid: Vec<F>,
    pub penalty: Penalty,
}

impl<F: Scalar> Default for CvConfig<F> {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            seed: 0,
            eta_grid: DEFAULT_ETA_GRID.iter().map(|&e| F::lit(e)).collect(),
            penalty: Penalty::L1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport<F> {
    /// Over all held-out predictions.
    pub mae: F,
    /// Mean in-sample R² of the per-fold models.
    pub r2: F,
    /// Most frequently selected eta (smallest on ties).
    pub eta: F,
    pub fold_maes: Vec<F>,
    pub fold_etas: Vec<F>,
    /// Held-out prediction for every row, in row order.
    pub predictions: Vec<F>,
}

/// k-fold cross-validation. Imputation means, standardisation and eta
/// selection use the training rows of each fold only.
pub fn cross_validate<F: Scalar>(x: &FeatureMatrix<F>, y: &[F], config: &CvConfig<F>) -> Result<EvaluationReport<F>> {
    let n = x.n_rows();
    if config.folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {}", config.folds)));
    }
    if n < config.folds || y.len() != n {
        return Err(Error::Evaluation(format!(
            "{n} cascades ({} targets) are too few for {}-fold cross-validation",
            y.len(),
            config.folds
        )));
    }
    let fold = fold_assignment(n, config.folds, config.seed);
    let per_fold = (0..config.folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
            let test: Vec<usize> = (0..n).filter(|&i| fold[i] == f).collect();
            let x_train = x.select_rows(&train);
            let imputer = Imputer::fit(&x_train);
            let (x_train, _) = imputer.transform(&x_train);
            let (x_test, _) = imputer.transform(&x.select_rows(&test));
            let y_train: Vec<F> = train.iter().map(|&i| y[i]).collect();
            let y_test: Vec<F> = test.iter().map(|&i| y[i]).collect();
            let (model, r2) = select_eta(&x_train, &y_train, &config.eta_grid, config.penalty)?;
            let pred = model.predict(&x_test);
            let fold_mae = mae(&pred, &y_test)?;
            Ok((test, pred, fold_mae, model.eta, r2))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut predictions = vec![F::zero(); n];
    let mut fold_maes = Vec::new();
    let mut fold_etas = Vec::new();
    let mut r2_sum = F::zero();
    for (test, pred, m, eta, r2) in per_fold {
        for (i, p) in test.into_iter().zip(pred) {
            predictions[i] = p;
        }
        fold_maes.push(m);
        fold_etas.push(eta);
        r2_sum += r2;
    }
    let mut tally: Vec<(F, usize)> = Vec::new();
    for &e in &fold_etas {
        match tally.iter_mut().find(|(v, _)| *v == e) {
            Some(t) => t.1 += 1,
            None => tally.push((e, 1)),
        }
    }
    tally.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal)));
    Ok(EvaluationReport {
        mae: mae(&predictions, y)?,
        r2: r2_sum / F::from_count(config.folds),
        eta: tally[0].0,
        fold_maes,
        fold_etas,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix<f64> {
        let p = rows.first().map_or(0, Vec::len);
        let mut m = FeatureMatrix::new((0..p).map(|j| format!("x{j}")).collect()).unwrap();
        for (i, r) in rows.iter().enumerate() {
            m.push_row(format!("r{i}"), &r.iter().map(|&v| Some(v)).collect::<Vec<_>>()).unwrap();
        }
        m
    }

    #[test]
    fn exact_line() {
        let x = matrix(&(0..20).map(|i| vec![i as f64]).collect::<Vec<_>>());
        let y: Vec<f64> = (0..20).map(|i| 2.0 * i as f64).collect();
        for pen in [Penalty::L1, Penalty::L2] {
            let m = fit_regularized_linear(&x, &y, 0.0, pen).unwrap();
            assert!((m.weights[0] - 2.0).abs() < 1e-8, "{pen:?}");
            assert!(m.intercept.abs() < 1e-8);
        }
    }

    #[test]
    fn heavy_l1_zeroes_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 3.0 - r[2] + rng.random::<f64>()).collect();
        let m = fit_regularized_linear(&matrix(&rows), &y, 1e6, Penalty::L1).unwrap();
        assert!(m.weights.iter().all(|&w| w == 0.0));
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        assert!((m.intercept - ybar).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_dropped() {
        let x = matrix(&(0..10).map(|i| vec![i as f64, 7.0]).collect::<Vec<_>>());
        let y: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        let m = fit_regularized_linear(&x, &y, 0.0, Penalty::L2).unwrap();
        assert_eq!(m.dropped, vec!["x1".to_string()]);
        assert_eq!(m.weights[1], 0.0);
        assert!((m.weights[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mae_and_r2() {
        assert_eq!(mae(&[3.0, 5.0], &[4.0, 4.0]).unwrap(), 1.0);
        assert_eq!(mae(&[4.0, 4.0], &[4.0, 4.0]).unwrap(), 0.0);
        assert!(mae::<f64>(&[], &[]).is_err());
        assert_eq!(r_squared(&[1.0, 2.0], &[1.0, 2.0]), 1.0);
        assert_eq!(r_squared(&[3.0, 3.0], &[3.0, 3.0]), 1.0);
        assert_eq!(r_squared(&[2.0, 3.0], &[3.0, 3.0]), 0.0);
    }

    #[test]
    fn eta_selection() {
        let x = matrix(&(0..30).map(|i| vec![i as f64, (i * i % 7) as f64]).collect::<Vec<_>>());
        let y: Vec<f64> = (0..30).map(|i| 0.5 * i as f64 + (i * i % 7) as f64).collect();
        let (m, _) = select_eta(&x, &y, &[0.04, 0.01, 0.03, 0.02], Penalty::L1).unwrap();
        assert_eq!(m.eta, 0.01);
        let (m, _) = select_eta(&x, &y, &[0.03], Penalty::L1).unwrap();
        assert_eq!(m.eta, 0.03);
        assert!(select_eta(&x, &y, &[], Penalty::L1).is_err());
    }

    #[test]
    fn folds_partition_rows() {
        let f = fold_assignment(23, 10, 5);
        let mut sizes = [0; 10];
        for &k in &f {
            sizes[k] += 1;
        }
        assert!(sizes.iter().all(|&s| s == 2 || s == 3));
        assert_eq!(sizes.iter().sum::<usize>(), 23);
        assert_eq!(f, fold_assignment(23, 10, 5));
    }

    #[test]
    fn cv_on_too_few_rows() {
        let x = matrix(&(0..5).map(|i| vec![i as f64]).collect::<Vec<_>>());
        let y = vec![0.0; 5];
        assert!(matches!(cross_validate(&x, &y, &CvConfig::default()), Err(Error::Evaluation(_))));
    }
}
