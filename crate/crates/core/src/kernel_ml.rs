//! RBF kernel ridge regression, kernel nearest-centroid classification and
//! seeded cross-validation over `(γ, λ)` grids.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative eigenvalue floor below which an unregularized kernel is singular.
const SINGULAR_RTOL: f64 = 1e-12;

/// Pairwise squared euclidean distances between the rows of `x` and `y`.
pub fn squared_distances(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != y.ncols() {
        return Err(Error::DimMismatch(x.ncols(), y.ncols()));
    }
    Ok(DMatrix::from_fn(x.nrows(), y.nrows(), |i, j| (x.row(i) - y.row(j)).norm_squared()))
}

/// `K_ij = exp(-γ ‖x_i - y_j‖²)` over the rows of `x` and `y`.
pub fn rbf_kernel(x: &DMatrix<f64>, y: &DMatrix<f64>, gamma: f64) -> Result<DMatrix<f64>> {
    Ok(squared_distances(x, y)?.map(|d| (-gamma * d).exp()))
}

fn check_hyper(gamma: f64, ridge: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Config(format!("gamma must be finite and non-negative, got {gamma}")));
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::Config(format!("ridge must be finite and non-negative, got {ridge}")));
    }
    Ok(())
}

/// Solves `(K + λI) α = y`.
fn solve_dual(kernel: &DMatrix<f64>, targets: &DVector<f64>, ridge: f64) -> Result<DVector<f64>> {
    let n = kernel.nrows();
    let system = kernel + DMatrix::identity(n, n) * ridge;
    if ridge == 0.0 {
        let eig = system.clone().symmetric_eigen();
        let max = eig.eigenvalues.amax();
        if eig.eigenvalues.min() <= SINGULAR_RTOL * max.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularSystem);
        }
    }
    system.cholesky().map(|c| c.solve(targets)).ok_or(Error::SingularSystem)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub gamma: f64,
    pub ridge: f64,
    pub feature_dim: usize,
    pub coefficients: Vec<f64>,
    /// Training rows, one per coefficient.
    pub support: Vec<Vec<f64>>,
    pub train_mae: f64,
}

pub fn fit_krr(features: &DMatrix<f64>, targets: &[f64], gamma: f64, ridge: f64) -> Result<KernelModel> {
    check_hyper(gamma, ridge)?;
    let n = features.nrows();
    if n < 2 {
        return Err(Error::TooFewSamples { samples: n, required: 2 });
    }
    if targets.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: targets.len() });
    }
    let kernel = rbf_kernel(features, features, gamma)?;
    let y = DVector::from_column_slice(targets);
    let alpha = solve_dual(&kernel, &y, ridge)?;
    let fitted = &kernel * &alpha;
    let train_mae = mean_absolute_error(fitted.as_slice(), targets);
    Ok(KernelModel {
        gamma,
        ridge,
        feature_dim: features.ncols(),
        coefficients: alpha.iter().copied().collect(),
        support: features.row_iter().map(|r| r.iter().copied().collect()).collect(),
        train_mae,
    })
}

impl KernelModel {
    fn support_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.support.len(), self.feature_dim, |i, j| self.support[i][j])
    }

    pub fn predict(&self, features: &DMatrix<f64>) -> Result<Vec<f64>> {
        let kernel = rbf_kernel(features, &self.support_matrix(), self.gamma)?;
        Ok((kernel * DVector::from_column_slice(&self.coefficients)).iter().copied().collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Classifies by the smallest RKHS distance `‖φ(x) - μ_c‖` to a class mean.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestCentroid {
    gamma: f64,
    classes: Vec<i64>,
    members: Vec<DMatrix<f64>>,
    /// `mean_{k,l} K(x_k, x_l)` within each class.
    self_terms: Vec<f64>,
}

impl NearestCentroid {
    pub fn fit(features: &DMatrix<f64>, labels: &[i64], gamma: f64) -> Result<Self> {
        check_hyper(gamma, 0.0)?;
        if labels.len() != features.nrows() {
            return Err(Error::SizeMismatch { expected: features.nrows(), found: labels.len() });
        }
        if features.nrows() < 2 {
            return Err(Error::TooFewSamples { samples: features.nrows(), required: 2 });
        }
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let mut members = Vec::with_capacity(classes.len());
        let mut self_terms = Vec::with_capacity(classes.len());
        for &c in &classes {
            let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            let m = features.select_rows(&rows);
            self_terms.push(rbf_kernel(&m, &m, gamma)?.mean());
            members.push(m);
        }
        Ok(NearestCentroid { gamma, classes, members, self_terms })
    }

    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    /// Ties go to the smallest class label.
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<Vec<i64>> {
        let cross = self
            .members
            .iter()
            .map(|m| rbf_kernel(features, m, self.gamma))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..features.nrows())
            .map(|i| {
                let mut best = (f64::INFINITY, self.classes[0]);
                for (c, k) in cross.iter().enumerate() {
                    let dist = self.self_terms[c] - 2.0 * k.row(i).mean();
                    if dist < best.0 {
                        best = (dist, self.classes[c]);
                    }
                }
                best.1
            })
            .collect())
    }
}

pub fn mean_absolute_error(predicted: &[f64], truth: &[f64]) -> f64 {
    predicted.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / truth.len().max(1) as f64
}

pub fn accuracy(predicted: &[i64], truth: &[i64]) -> f64 {
    predicted.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// KRR scored by mean absolute error.
    Regression,
    /// Kernel nearest centroid scored by accuracy; the ridge grid is unused.
    Classification,
}

impl Task {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Task::Regression => a < b,
            Task::Classification => a > b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub gammas: Vec<f64>,
    pub ridges: Vec<f64>,
}

impl Grids {
    /// Ridge values are `1 / C` over the regression `C` pool.
    pub fn regression() -> Self {
        Grids::from_c_pool(
            &[0.00003, 0.0003, 0.003, 0.03, 0.3, 3.0, 30.0],
            &[400000.0, 40000.0, 4000.0, 400.0, 40.0, 4.0, 0.4],
        )
    }

    pub fn classification() -> Self {
        Grids::from_c_pool(
            &[0.00001, 0.0001, 0.001, 0.01, 0.1, 1.0, 10.0, 100.0],
            &[0.001, 0.01, 0.1, 1.0, 10.0, 25.0, 50.0, 100.0, 1000.0],
        )
    }

    pub fn from_c_pool(gammas: &[f64], c_pool: &[f64]) -> Self {
        Grids { gammas: gammas.to_vec(), ridges: c_pool.iter().map(|c| 1.0 / c).collect() }
    }

    /// Cells ordered by `γ`, then `λ`, both ascending.
    fn cells(&self) -> Vec<(f64, f64)> {
        let mut gammas = self.gammas.clone();
        let mut ridges = self.ridges.clone();
        gammas.sort_by(f64::total_cmp);
        ridges.sort_by(f64::total_cmp);
        gammas.iter().flat_map(|&g| ridges.iter().map(move |&r| (g, r))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub task: Task,
    pub grids: Grids,
    /// Rescale features to zero mean and unit variance on each training split.
    pub standardize: bool,
}

impl CvConfig {
    pub fn regression(seed: u64) -> Self {
        CvConfig { folds: 10, seed, task: Task::Regression, grids: Grids::regression(), standardize: false }
    }

    pub fn classification(seed: u64) -> Self {
        CvConfig { folds: 10, seed, task: Task::Classification, grids: Grids::classification(), standardize: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub gamma: f64,
    pub ridge: f64,
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub seed: u64,
    pub task: Task,
    pub folds: Vec<FoldResult>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl CvReport {
    pub fn fold_csv(&self) -> String {
        let mut out = String::from("fold,metric\n");
        for f in &self.folds {
            writeln!(out, "{},{:.11e}", f.fold, f.metric).expect("writing to a String");
        }
        out
    }

    /// `mean ± std`, as a percentage for classification.
    pub fn summary(&self) -> String {
        match self.task {
            Task::Regression => format!("{:.4} ± {:.4}", self.mean, self.std),
            Task::Classification => format!("{:.2}% ± {:.2}", 100.0 * self.mean, 100.0 * self.std),
        }
    }
}

/// Seeded Fisher–Yates fold assignment: `fold[i]` for every sample.
pub fn fold_assignment(samples: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 3 {
        return Err(Error::Config(format!("cross-validation needs at least 3 folds, got {folds}")));
    }
    if samples < folds {
        return Err(Error::TooFewSamples { samples, required: folds });
    }
    let mut order: Vec<usize> = (0..samples).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; samples];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    Ok(fold)
}

/// Column mean and scale fitted on the training rows; constant columns keep scale 1.
fn standardizer(x: &DMatrix<f64>, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    (0..x.ncols())
        .map(|j| {
            let mean = rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / n;
            let var = rows.iter().map(|&i| (x[(i, j)] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            (mean, if sd > 1e-12 { sd } else { 1.0 })
        })
        .unzip()
}

fn standardize(x: &DMatrix<f64>, mean: &[f64], scale: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - mean[j]) / scale[j])
}

/// Evaluates one `(γ, λ)` cell: train on `train`, score on `test`. Indices
/// refer to rows of the precomputed squared-distance matrix.
fn evaluate(
    task: Task,
    dist: &DMatrix<f64>,
    y: &[f64],
    train: &[usize],
    test: &[usize],
    gamma: f64,
    ridge: f64,
) -> Result<f64> {
    let k_train = DMatrix::from_fn(train.len(), train.len(), |a, b| (-gamma * dist[(train[a], train[b])]).exp());
    let k_test = DMatrix::from_fn(test.len(), train.len(), |a, b| (-gamma * dist[(test[a], train[b])]).exp());
    match task {
        Task::Regression => {
            let targets = DVector::from_iterator(train.len(), train.iter().map(|&i| y[i]));
            let alpha = solve_dual(&k_train, &targets, ridge)?;
            let predicted = k_test * alpha;
            let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            Ok(mean_absolute_error(predicted.as_slice(), &truth))
        }
        Task::Classification => {
            let labels: Vec<i64> = train.iter().map(|&i| y[i] as i64).collect();
            let mut classes = labels.clone();
            classes.sort_unstable();
            classes.dedup();
            let mut best = vec![(f64::INFINITY, 0i64); test.len()];
            for &c in &classes {
                let idx: Vec<usize> = (0..train.len()).filter(|&a| labels[a] == c).collect();
                let self_term =
                    idx.iter().flat_map(|&a| idx.iter().map(move |&b| (a, b))).map(|(a, b)| k_train[(a, b)]).sum::<f64>()
                        / (idx.len() * idx.len()) as f64;
                for (t, slot) in best.iter_mut().enumerate() {
                    let cross = idx.iter().map(|&a| k_test[(t, a)]).sum::<f64>() / idx.len() as f64;
                    let d = self_term - 2.0 * cross;
                    if d < slot.0 {
                        *slot = (d, c);
                    }
                }
            }
            let hits = best.iter().zip(test).filter(|((_, c), &i)| *c == y[i] as i64).count();
            Ok(hits as f64 / test.len() as f64)
        }
    }
}

/// Nested cross-validation. For each outer test fold the remaining folds run
/// an inner cross-validation over the grid; the winning cell is refit on all
/// of them and scored on the test fold. With `standardize` set, features are
/// rescaled with statistics of the outer training rows. Grid ties go to the smallest `γ`,
/// then the smallest `λ`.
///
/// Classification labels are read from `targets` as integers.
pub fn cross_validate(features: &DMatrix<f64>, targets: &[f64], config: &CvConfig) -> Result<CvReport> {
    let n = features.nrows();
    if targets.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: targets.len() });
    }
    if config.grids.gammas.is_empty() || config.grids.ridges.is_empty() {
        return Err(Error::Config("hyperparameter grids must be non-empty".into()));
    }
    for &(g, r) in &config.grids.cells() {
        check_hyper(g, r)?;
    }
    let fold = fold_assignment(n, config.folds, config.seed)?;
    let cells = config.grids.cells();
    let rows_in = |f: usize| (0..n).filter(|&i| fold[i] == f).collect::<Vec<_>>();

    let mut results = Vec::with_capacity(config.folds);
    for test_fold in 0..config.folds {
        let test = rows_in(test_fold);
        let train: Vec<usize> = (0..n).filter(|&i| fold[i] != test_fold).collect();
        let dist = if config.standardize {
            let (mean, scale) = standardizer(features, &train);
            let x = standardize(features, &mean, &scale);
            squared_distances(&x, &x)?
        } else {
            squared_distances(features, features)?
        };

        let inner_folds: Vec<usize> = (0..config.folds).filter(|&f| f != test_fold).collect();
        let scores: Vec<Result<f64>> = cells
            .par_iter()
            .map(|&(gamma, ridge)| {
                let mut total = 0.0;
                for &v in &inner_folds {
                    let val = rows_in(v);
                    let fit: Vec<usize> = train.iter().copied().filter(|&i| fold[i] != v).collect();
                    total += evaluate(config.task, &dist, targets, &fit, &val, gamma, ridge)?;
                }
                Ok(total / inner_folds.len() as f64)
            })
            .collect();

        let mut best: Option<(f64, f64, f64)> = None;
        for (&(gamma, ridge), score) in cells.iter().zip(scores) {
            let score = match score {
                Ok(s) => s,
                Err(Error::SingularSystem) => continue,
                Err(e) => return Err(e),
            };
            if best.is_none_or(|(_, _, s)| config.task.better(score, s)) {
                best = Some((gamma, ridge, score));
            }
        }
        let (gamma, ridge, _) = best.ok_or(Error::SingularSystem)?;
        let metric = evaluate(config.task, &dist, targets, &train, &test, gamma, ridge)?;
        log::debug!("fold {test_fold}: gamma {gamma}, ridge {ridge}, metric {metric}");
        results.push(FoldResult { fold: test_fold, gamma, ridge, metric });
    }

    let k = results.len() as f64;
    let mean = results.iter().map(|r| r.metric).sum::<f64>() / k;
    let std = (results.iter().map(|r| (r.metric - mean).powi(2)).sum::<f64>() / k).sqrt();
    Ok(CvReport { seed: config.seed, task: config.task, folds: results, mean, std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn kernel_examples() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let k = rbf_kernel(&x, &x, 2.0).unwrap();
        assert_eq!((k[(0, 0)], k[(1, 1)]), (1.0, 1.0));
        assert_eq!(rbf_kernel(&x, &x, 0.0).unwrap(), DMatrix::from_element(2, 2, 1.0));
        let gamma = 0.7;
        let y = DMatrix::from_row_slice(1, 1, &[(2f64.ln() / gamma).sqrt()]);
        let half = rbf_kernel(&DMatrix::zeros(1, 1), &y, gamma).unwrap()[(0, 0)];
        assert!((half - 0.5).abs() < 1e-15);
        assert_eq!(rbf_kernel(&x, &DMatrix::zeros(1, 2), 1.0).unwrap_err(), Error::DimMismatch(1, 2));
    }

    #[test]
    fn krr_interpolates_without_ridge() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 0.5, 1.3, 2.0]);
        let y = [1.0, -2.0, 0.5, 3.0];
        let model = fit_krr(&x, &y, 1.0, 0.0).unwrap();
        assert!(model.train_mae <= 1e-6);
        let p = model.predict(&DMatrix::from_row_slice(1, 1, &[1.3])).unwrap();
        assert!((p[0] - 0.5).abs() <= 1e-6);
    }

    #[test]
    fn krr_constant_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_matrix(12, 3, &mut rng);
        for gamma in [0.01, 0.3, 5.0] {
            // With tiny ridge the constant is recovered at the training points and
            // a nearby test point.
            let model = fit_krr(&x, &[4.0; 12], gamma, 1e-10).unwrap();
            let p = model.predict(&x).unwrap();
            assert!(p.iter().all(|v| (v - 4.0).abs() < 1e-4), "{p:?}");
        }
    }

    #[test]
    fn krr_errors() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert_eq!(fit_krr(&x, &[0.0, 1.0], 1.0, 0.0).unwrap_err(), Error::SingularSystem);
        assert!(fit_krr(&x, &[0.0, 1.0], 1.0, 0.1).is_ok());
        assert!(matches!(
            fit_krr(&DMatrix::zeros(1, 1), &[0.0], 1.0, 1.0),
            Err(Error::TooFewSamples { samples: 1, required: 2 })
        ));
        assert!(matches!(fit_krr(&x, &[0.0, 1.0], -1.0, 0.1), Err(Error::Config(_))));
    }

    #[test]
    fn model_json_round_trip() {
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 1.0, 0.0, 2.0, 2.0]);
        let model = fit_krr(&x, &[1.0, 2.0, 3.0], 0.5, 0.1).unwrap();
        let back: KernelModel = serde_json::from_str(&model.to_json()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.predict(&x).unwrap(), model.predict(&x).unwrap());
    }

    #[test]
    fn ridge_path_is_monotone() {
        // Residual y - Kα = λ(K + λI)⁻¹y grows in λ along every eigendirection
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_matrix(20, 4, &mut rng);
        let y: Vec<f64> = (0..20).map(|_| rng.sample(StandardNormal)).collect();
        let mut last = 0.0;
        for ridge in [1e-6, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0] {
            let model = fit_krr(&x, &y, 0.2, ridge).unwrap();
            let p = model.predict(&x).unwrap();
            let sse: f64 = p.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(sse >= last - 1e-12);
            last = sse;
        }
    }

    #[test]
    fn predictions_ignore_training_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_matrix(15, 3, &mut rng);
        let y: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let mut perm: Vec<usize> = (0..15).collect();
        perm.shuffle(&mut rng);
        let xp = x.select_rows(&perm);
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let test = random_matrix(4, 3, &mut rng);
        let a = fit_krr(&x, &y, 0.4, 0.01).unwrap().predict(&test).unwrap();
        let b = fit_krr(&xp, &yp, 0.4, 0.01).unwrap().predict(&test).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    fn blobs(per_class: usize, rng: &mut ChaCha8Rng) -> (DMatrix<f64>, Vec<f64>) {
        let x = DMatrix::from_fn(2 * per_class, 2, |i, _| {
            let centre = if i < per_class { -5.0 } else { 5.0 };
            centre + 0.3 * rng.sample::<f64, _>(StandardNormal)
        });
        let y = (0..2 * per_class).map(|i| if i < per_class { 0.0 } else { 1.0 }).collect();
        (x, y)
    }

    #[test]
    fn nearest_centroid_separates_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, y) = blobs(10, &mut rng);
        let labels: Vec<i64> = y.iter().map(|&v| v as i64).collect();
        let model = NearestCentroid::fit(&x, &labels, 0.1).unwrap();
        assert_eq!(model.classes(), &[0, 1]);
        assert_eq!(accuracy(&model.predict(&x).unwrap(), &labels), 1.0);
    }

    #[test]
    fn separable_cv_is_perfect() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (x, y) = blobs(30, &mut rng);
        let report = cross_validate(&x, &y, &CvConfig::classification(4)).unwrap();
        assert_eq!((report.mean, report.std), (1.0, 0.0));
        assert_eq!(report.folds.len(), 10);
        assert!(report.fold_csv().starts_with("fold,metric\n0,1.00000000000e0\n"));
        assert_eq!(report.summary(), "100.00% ± 0.00");
    }

    #[test]
    fn shuffled_labels_give_chance_accuracy() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 200;
        let x = random_matrix(n, 5, &mut rng);
        let mut y: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
        y.shuffle(&mut rng);
        let report = cross_validate(&x, &y, &CvConfig::classification(9)).unwrap();
        // Binomial null over n test predictions: p = 1/2, σ = sqrt(p(1-p)/n)
        let sigma = (0.25 / n as f64).sqrt();
        assert!((report.mean - 0.5).abs() <= 3.0 * sigma, "accuracy {}", report.mean);
    }

    #[test]
    fn cv_regression_recovers_smooth_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_matrix(80, 2, &mut rng);
        let y: Vec<f64> = x.row_iter().map(|r| r[0].sin() + 0.5 * r[1]).collect();
        let report = cross_validate(&x, &y, &CvConfig::regression(0)).unwrap();
        let mean_y = y.iter().sum::<f64>() / y.len() as f64;
        let sd = (y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        assert!(report.mean < 0.1 * sd, "mae {} sd {sd}", report.mean);
        assert_eq!(report, cross_validate(&x, &y, &CvConfig::regression(0)).unwrap());
    }

    #[test]
    fn fold_assignment_rules() {
        let f = fold_assignment(23, 10, 7).unwrap();
        assert_eq!(f, fold_assignment(23, 10, 7).unwrap());
        for k in 0..10 {
            let size = f.iter().filter(|&&v| v == k).count();
            assert!(size == 2 || size == 3);
        }
        assert!(matches!(fold_assignment(5, 10, 0), Err(Error::TooFewSamples { samples: 5, required: 10 })));
        assert!(matches!(fold_assignment(5, 2, 0), Err(Error::Config(_))));
    }

    #[test]
    fn grid_ties_prefer_small_gamma_then_ridge() {
        // Constant targets make every cell score the same on each fold
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_matrix(30, 2, &mut rng);
        let y = vec![1.0; 30];
        let config = CvConfig {
            folds: 3,
            seed: 0,
            task: Task::Classification,
            grids: Grids { gammas: vec![1.0, 0.1, 10.0], ridges: vec![0.5, 0.01] },
            standardize: true,
        };
        let report = cross_validate(&x, &y, &config).unwrap();
        assert!(report.folds.iter().all(|f| f.gamma == 0.1 && f.ridge == 0.01));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn kernel_is_psd(seed in any::<u64>(), n in 2usize..25, d in 1usize..6, gamma in 0.01f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_matrix(n, d, &mut rng);
            let k = rbf_kernel(&x, &x, gamma).unwrap();
            prop_assert!(k.iter().all(|&v| v > 0.0 && v <= 1.0));
            prop_assert!(k.clone().symmetric_eigen().eigenvalues.min() >= -1e-8);
        }
    }
}
