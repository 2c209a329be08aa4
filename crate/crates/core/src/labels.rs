//! Targets `y = Tr[f(H) rho]` evaluated through the sector spectra.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::Spectrum;
use crate::states::StateVector;

/// Points used when bounding the sup-norm of a Fourier series.
const SUP_GRID: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetFunction {
    /// `exp(-beta x)`.
    ExpNegBeta { beta: f64 },
    /// `cos(t x)`.
    Cosine { t: f64 },
    /// `sin(t x)`.
    Sine { t: f64 },
    /// `sum_l c_{2l} cos(l pi x / C) - sum_{l>=1} c_{2l-1} sin(l pi x / C)`,
    /// the basis in which the feature vector with weights `c` is exact.
    FourierSeries { coefficients: Vec<f64> },
    /// `1` for `x >= threshold`, else `0`.
    Step { threshold: f64 },
}

/// A target function on `[-C, C]` with its sup-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub function: TargetFunction,
    /// Half-width `C` of the domain.
    pub domain: f64,
    pub sup_norm: f64,
}

impl FunctionSpec {
    pub fn new(function: TargetFunction, domain: f64) -> Result<Self> {
        if !(domain.is_finite() && domain > 0.0) {
            return Err(Error::Domain(format!("domain half-width must be positive, got {domain}")));
        }
        if let TargetFunction::FourierSeries { coefficients } = &function {
            if coefficients.len() % 2 == 0 {
                return Err(Error::InvalidDimension(format!(
                    "Fourier coefficients need odd length 2K+1, got {}",
                    coefficients.len()
                )));
            }
        }
        let sup_norm = sup_norm(&function, domain);
        Ok(Self {
            function,
            domain,
            sup_norm,
        })
    }

    pub fn exp_neg_beta(beta: f64, domain: f64) -> Result<Self> {
        Self::new(TargetFunction::ExpNegBeta { beta }, domain)
    }

    pub fn fourier_series(coefficients: Vec<f64>, domain: f64) -> Result<Self> {
        Self::new(TargetFunction::FourierSeries { coefficients }, domain)
    }

    /// Fourier series of order `order` with Gaussian direction and `||c||_2 = norm`.
    pub fn random_fourier<R: Rng + ?Sized>(
        order: usize,
        domain: f64,
        norm: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let raw: Vec<f64> = (0..2 * order + 1).map(|_| StandardNormal.sample(rng)).collect();
        let len = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self::fourier_series(raw.iter().map(|c| c * norm / len).collect(), domain)
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        match &self.function {
            TargetFunction::FourierSeries { coefficients } => Some(coefficients),
            _ => None,
        }
    }

    /// Heuristic norm budget `(1 / 2C) int_{-C}^{C} |f|^2 dx` (Simpson rule).
    pub fn suggested_norm_budget(&self) -> f64 {
        let n = 2000;
        let h = 2.0 * self.domain / n as f64;
        let sum: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * eval_unchecked(&self.function, self.domain, -self.domain + i as f64 * h).powi(2)
            })
            .sum();
        sum * h / 3.0 / (2.0 * self.domain)
    }
}

fn eval_unchecked(f: &TargetFunction, domain: f64, x: f64) -> f64 {
    match f {
        TargetFunction::ExpNegBeta { beta } => (-beta * x).exp(),
        TargetFunction::Cosine { t } => (t * x).cos(),
        TargetFunction::Sine { t } => (t * x).sin(),
        TargetFunction::FourierSeries { coefficients } => {
            let u = PI * x / domain;
            coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    if k % 2 == 0 {
                        c * ((k / 2) as f64 * u).cos()
                    } else {
                        -c * (k.div_ceil(2) as f64 * u).sin()
                    }
                })
                .sum()
        }
        TargetFunction::Step { threshold } => {
            if x >= *threshold {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn sup_norm(f: &TargetFunction, c: f64) -> f64 {
    match f {
        TargetFunction::ExpNegBeta { beta } => (beta.abs() * c).exp(),
        TargetFunction::Cosine { .. } => 1.0,
        TargetFunction::Sine { t } => {
            if t.abs() * c >= PI / 2.0 {
                1.0
            } else {
                (t.abs() * c).sin()
            }
        }
        TargetFunction::FourierSeries { coefficients } => {
            // Grid maximum plus the Lipschitz slack over half a grid cell.
            let h = 2.0 * c / SUP_GRID as f64;
            let grid_max = (0..=SUP_GRID)
                .map(|i| eval_unchecked(f, c, -c + i as f64 * h).abs())
                .fold(0.0, f64::max);
            let lipschitz: f64 = coefficients
                .iter()
                .enumerate()
                .map(|(k, a)| a.abs() * k.div_ceil(2) as f64 * PI / c)
                .sum();
            grid_max + lipschitz * h / 2.0
        }
        TargetFunction::Step { threshold } => {
            if *threshold <= c {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Pointwise `f(x)` on `[-C, C]`.
pub fn eval_f(fspec: &FunctionSpec, x: f64) -> Result<f64> {
    let c = fspec.domain;
    if x.is_nan() || x.abs() > c * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("x = {x} lies outside [-{c}, {c}]")));
    }
    Ok(eval_unchecked(&fspec.function, c, x))
}

/// `Tr[f(H) |psi><psi|] = sum_l p_l f(lambda_l)` over all occupied sectors.
pub fn label(spectrum: &Spectrum, psi: &StateVector, fspec: &FunctionSpec) -> Result<f64> {
    let mut y = 0.0;
    for block in psi.compress() {
        let sys = spectrum.sector(block.magnetization)?;
        let cache = sys.spectral_cache(&block.amplitudes)?;
        for (lam, p) in cache.eigenvalues.iter().zip(&cache.weights) {
            y += p * eval_f(fspec, *lam)?;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::CouplingSpec;
    use crate::states::basis_state;

    #[test]
    fn exponential_values() {
        let f = FunctionSpec::exp_neg_beta(1.0, 3.0).unwrap();
        assert_eq!(eval_f(&f, 0.0).unwrap(), 1.0);
        assert!((eval_f(&f, -3.0).unwrap() - 20.085_536_923_187_668).abs() < 1e-12);
        assert!((f.sup_norm - 3f64.exp()).abs() < 1e-12);
        assert!(matches!(eval_f(&f, 3.5), Err(Error::Domain(_))));
    }

    #[test]
    fn single_cosine_series() {
        let f = FunctionSpec::fourier_series(vec![0.0, 0.0, 1.0], 3.0).unwrap();
        for x in [-2.9, -1.0, 0.0, 0.4, 3.0] {
            assert!((eval_f(&f, x).unwrap() - (PI * x / 3.0).cos()).abs() < 1e-14);
        }
        assert!(f.sup_norm >= 1.0 && f.sup_norm < 1.0 + 1e-3);
        assert!(FunctionSpec::fourier_series(vec![1.0, 2.0], 3.0).is_err());
    }

    #[test]
    fn sup_norm_dominates_dense_grid() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        let specs = vec![
            FunctionSpec::random_fourier(5, 3.0, 1.0, &mut rng).unwrap(),
            FunctionSpec::new(TargetFunction::Sine { t: 0.2 }, 3.0).unwrap(),
            FunctionSpec::new(TargetFunction::Cosine { t: 2.0 }, 3.0).unwrap(),
            FunctionSpec::new(TargetFunction::Step { threshold: 0.5 }, 3.0).unwrap(),
            FunctionSpec::exp_neg_beta(-0.5, 3.0).unwrap(),
        ];
        for f in &specs {
            for i in 0..=10_000 {
                let x = -3.0 + 6.0 * i as f64 / 10_000.0;
                assert!(eval_f(f, x).unwrap().abs() <= f.sup_norm + 1e-12);
            }
        }
    }

    #[test]
    fn constant_series_gives_unit_label() {
        let spec = CouplingSpec::normalized(4, vec![0.2, -0.5, 0.3]).unwrap();
        let spectrum = Spectrum::new(spec);
        let f = FunctionSpec::fourier_series(vec![1.0], 3.0).unwrap();
        let y = label(&spectrum, &basis_state(4, "0101").unwrap(), &f).unwrap();
        assert!((y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_site_thermal_label() {
        let spectrum = Spectrum::new(CouplingSpec::new(2, vec![1.0]).unwrap());
        let f = FunctionSpec::exp_neg_beta(1.0, 3.0).unwrap();
        let y = label(&spectrum, &basis_state(2, "01").unwrap(), &f).unwrap();
        let expected = ((-1f64).exp() + 3f64.exp()) / 2.0;
        assert!((y - expected).abs() < 1e-12);
        assert!((y - 10.226_71).abs() < 1e-5);
    }

    #[test]
    fn norm_budget_heuristic_for_constant() {
        let f = FunctionSpec::fourier_series(vec![2.0], 3.0).unwrap();
        assert!((f.suggested_norm_budget() - 4.0).abs() < 1e-10);
    }
}
