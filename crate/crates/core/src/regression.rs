//! Linear models `g(x) = w . x`: OLS, ridge, and least squares under the
//! norm constraint `||w||_2 <= W`.

use faer::Mat;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Role};

/// Relative tolerance on `||w(alpha)|| = W` at the end of the bisection.
pub const NORM_TOL: f64 = 1e-8;

const MAX_BISECTIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: targets.len(),
            });
        }
        if let Some(first) = rows.first() {
            let p = first.len();
            if let Some(bad) = rows.iter().find(|r| r.len() != p) {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: bad.len(),
                });
            }
        }
        let finite = rows.iter().flatten().chain(&targets).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("design matrix has non-finite entries".into()));
        }
        Ok(Self { rows, targets })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// `Tr K = sum_i ||x_i||^2`.
    pub fn gram_trace(&self) -> f64 {
        self.rows.iter().flatten().map(|v| v * v).sum()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    fn matrix(&self) -> Mat<f64> {
        Mat::from_fn(self.len(), self.n_features(), |i, j| self.rows[i][j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Ols,
    Ridge { alpha: f64 },
    Constrained { w_bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub weights: Vec<f64>,
    pub norm_budget: Option<f64>,
    pub method: String,
}

impl RegressionModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum()
    }

    pub fn norm(&self) -> f64 {
        l2(&self.weights)
    }
}

/// SVD factors with the projected targets `U^T y`.
struct Factored {
    v: Mat<f64>,
    s: Vec<f64>,
    uty: Vec<f64>,
    cutoff: f64,
}

impl Factored {
    fn new(x: &DesignMatrix) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyData);
        }
        let m = x.matrix();
        let (rows, cols) = m.shape();
        let svd = m
            .thin_svd()
            .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
        let u = svd.U();
        let s: Vec<f64> = svd.S().column_vector().iter().copied().collect();
        let uty = (0..s.len())
            .map(|k| u.col(k).iter().zip(x.targets()).map(|(a, b)| a * b).sum())
            .collect();
        let v = svd.V().to_owned();
        let smax = s.iter().copied().fold(0.0, f64::max);
        let cutoff = smax * f64::EPSILON * rows.max(cols) as f64;
        Ok(Self { v, s, uty, cutoff })
    }

    /// `V diag(s / (s^2 + alpha)) U^T y`; at `alpha = 0` singular values below
    /// the cutoff are dropped (minimum-norm least squares).
    fn solve(&self, alpha: f64) -> Vec<f64> {
        let scaled: Vec<f64> = self
            .s
            .iter()
            .zip(&self.uty)
            .map(|(&s, &b)| {
                if alpha == 0.0 {
                    if s > self.cutoff {
                        b / s
                    } else {
                        0.0
                    }
                } else {
                    b * s / (s * s + alpha)
                }
            })
            .collect();
        (0..self.v.nrows())
            .map(|i| scaled.iter().enumerate().map(|(k, c)| self.v[(i, k)] * c).sum())
            .collect()
    }
}

pub fn fit_ols(x: &DesignMatrix) -> Result<RegressionModel> {
    let w = Factored::new(x)?.solve(0.0);
    Ok(RegressionModel {
        weights: w,
        norm_budget: None,
        method: "ols".into(),
    })
}

/// Minimizes `||y - Xw||^2 + alpha ||w||^2`.
pub fn fit_ridge(x: &DesignMatrix, alpha: f64) -> Result<RegressionModel> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::Domain(format!("ridge penalty must be >= 0, got {alpha}")));
    }
    let w = Factored::new(x)?.solve(alpha);
    Ok(RegressionModel {
        weights: w,
        norm_budget: None,
        method: "ridge".into(),
    })
}

/// Least squares subject to `||w||_2 <= W`.
///
/// The minimum-norm OLS solution is returned when it is feasible. Otherwise
/// the optimum lies on the sphere `||w|| = W`, where it coincides with the
/// ridge solution whose norm equals `W`; `||w(alpha)||` decreases
/// monotonically in `alpha`, so the penalty is found by bisection.
pub fn fit_constrained(x: &DesignMatrix, w_bound: f64) -> Result<RegressionModel> {
    if !(w_bound > 0.0 && w_bound.is_finite()) {
        return Err(Error::Domain(format!("norm budget must be > 0, got {w_bound}")));
    }
    let f = Factored::new(x)?;
    let ols = f.solve(0.0);
    let w = if l2(&ols) <= w_bound {
        ols
    } else {
        constrained_boundary(&f, w_bound)?
    };
    Ok(RegressionModel {
        weights: w,
        norm_budget: Some(w_bound),
        method: "constrained".into(),
    })
}

fn l2(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn constrained_boundary(f: &Factored, w_bound: f64) -> Result<Vec<f64>> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut w_hi = f.solve(hi);
    let mut expansions = 0;
    while l2(&w_hi) > w_bound {
        lo = hi;
        hi *= 2.0;
        w_hi = f.solve(hi);
        expansions += 1;
        if expansions > 2000 {
            return Err(Error::Numerical("could not bracket the ridge penalty".into()));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        if (w_bound - l2(&w_hi)) <= NORM_TOL * w_bound {
            return Ok(w_hi);
        }
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { hi / 2.0 };
        if mid <= lo || mid >= hi {
            // Interval collapsed to adjacent floats; w_hi is feasible.
            return Ok(w_hi);
        }
        let w_mid = f.solve(mid);
        if l2(&w_mid) > w_bound {
            lo = mid;
        } else {
            hi = mid;
            w_hi = w_mid;
        }
    }
    Err(Error::Numerical(format!(
        "ridge bisection did not reach ||w|| = {w_bound} within {MAX_BISECTIONS} steps"
    )))
}

pub fn fit(x: &DesignMatrix, method: Method) -> Result<RegressionModel> {
    match method {
        Method::Ols => fit_ols(x),
        Method::Ridge { alpha } => fit_ridge(x, alpha),
        Method::Constrained { w_bound } => fit_constrained(x, w_bound),
    }
}

/// Test-set error. `r2` is `None` when the targets have zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub r2: Option<f64>,
    pub mse: f64,
    pub n_train: usize,
    pub n_test: usize,
}

pub fn evaluate(model: &RegressionModel, test: &DesignMatrix) -> Result<Metrics> {
    if test.is_empty() {
        return Err(Error::EmptyData);
    }
    if test.n_features() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            actual: test.n_features(),
        });
    }
    let n = test.len() as f64;
    let mean = test.targets().iter().sum::<f64>() / n;
    let (ss_res, ss_tot) = test
        .rows()
        .iter()
        .zip(test.targets())
        .fold((0.0, 0.0), |(res, tot), (x, y)| {
            let e = y - model.predict(x);
            (res + e * e, tot + (y - mean) * (y - mean))
        });
    Ok(Metrics {
        r2: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        mse: ss_res / n,
        n_train: 0,
        n_test: test.len(),
    })
}

/// Mean squared residual on `data`.
pub fn mean_squared_error(model: &RegressionModel, data: &DesignMatrix) -> f64 {
    data.rows()
        .iter()
        .zip(data.targets())
        .map(|(x, y)| (y - model.predict(x)).powi(2))
        .sum::<f64>()
        / data.len().max(1) as f64
}

/// Seeded shuffle of `0..n`; the first `ceil(ratio * n)` indices train.
pub fn train_test_split(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut substream(seed, Role::Split, 0, 0, 0));
    // Guard against 0.8 * 55 = 44.000000000000007 rounding up.
    let n_train = ((ratio * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let test = idx.split_off(n_train.min(n));
    Ok((idx, test))
}
