//! Closed-form generalization and shot-count bounds for the Fourier-feature
//! model under the norm constraint `||w|| <= W`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Truncation order `K`.
    pub order: usize,
    /// Weight norm budget `W`.
    pub w_bound: f64,
    /// `||f||_inf` on `[-C, C]`.
    pub f_inf: f64,
    pub n_data: usize,
    pub delta: f64,
    /// Sup-norm error of the best order-`K` Fourier approximation.
    pub eps_k: f64,
    /// Additive feature noise level.
    pub eta: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.n_data == 0 {
            return Err(Error::Domain("N_d must be >= 1".into()));
        }
        for (name, v) in [
            ("W", self.w_bound),
            ("f_inf", self.f_inf),
            ("eps_K", self.eps_k),
            ("eta", self.eta),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn sqrt_dim(&self) -> f64 {
        ((2 * self.order + 1) as f64).sqrt()
    }

    /// Bound `W sqrt(2K+1) + ||f||_inf` on `|g - y|`.
    pub fn loss_range(&self) -> f64 {
        self.sqrt_dim() * self.w_bound + self.f_inf
    }
}

/// The terms of the expected-loss bound, itemized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    pub approximation: f64,
    pub complexity: f64,
    pub confidence: f64,
    pub noise_linear: f64,
    pub noise_quadratic: f64,
    pub total: f64,
}

/// Itemized bound; the noise terms are zero when `eta = 0`.
pub fn bound_terms(b: &BoundInputs) -> Result<BoundTerms> {
    b.validate()?;
    let dim = (2 * b.order + 1) as f64;
    let nd = b.n_data as f64;
    let range = b.loss_range();
    let approximation = b.eps_k * b.eps_k;
    let complexity = 4.0 * range * b.w_bound * (dim / nd).sqrt();
    let confidence = 3.0 * range * range * ((2.0 / b.delta).ln() / (2.0 * nd)).sqrt();
    let noise_linear = 4.0 * b.eta * b.w_bound * b.sqrt_dim() * range;
    let noise_quadratic = 2.0 * b.eta * b.eta * b.w_bound * b.w_bound * dim;
    Ok(BoundTerms {
        approximation,
        complexity,
        confidence,
        noise_linear,
        noise_quadratic,
        total: approximation + complexity + confidence + noise_linear + noise_quadratic,
    })
}

/// `eps_K^2 + 4 (sqrt(2K+1) W + ||f||) W sqrt((2K+1)/N_d)
///  + 3 (sqrt(2K+1) W + ||f||)^2 sqrt(ln(2/delta) / (2 N_d))`.
pub fn theorem1_rhs(b: &BoundInputs) -> Result<f64> {
    let t = bound_terms(b)?;
    Ok(t.approximation + t.complexity + t.confidence)
}

/// Noisy-feature bound: `theorem1_rhs + 4 eta W sqrt(2K+1) (||f|| + W sqrt(2K+1))
/// + 2 eta^2 W^2 (2K+1)`.
pub fn appendix_b_rhs(b: &BoundInputs) -> Result<f64> {
    Ok(bound_terms(b)?.total)
}

/// `K = ceil(ln(1/eps) / eps)` and `N_d = ceil((W ||f|| ln(1/eps) / eps)^4)`,
/// taking every hidden constant as 1.
pub fn corollary2_params(eps: f64, w_bound: f64, f_inf: f64) -> Result<(usize, u64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(w_bound >= 0.0 && f_inf >= 0.0) {
        return Err(Error::Domain("W and ||f|| must be >= 0".into()));
    }
    let rate = (1.0 / eps).ln() / eps;
    let n = (w_bound * f_inf * rate).powi(4).ceil();
    if n > u64::MAX as f64 {
        return Err(Error::Domain(format!("N_d = {n:e} overflows")));
    }
    Ok((rate.ceil() as usize, n as u64))
}

/// Smallest `N` with `2 exp(-N eta^2 / 2) <= delta / (2K + 1)`, i.e.
/// `ceil((2 / eta^2) ln(2 (2K+1) / delta))`.
pub fn hoeffding_shots(eta: f64, delta: f64, order: usize) -> Result<u64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("eta must be > 0, got {eta}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let dim = (2 * order + 1) as f64;
    Ok((2.0 / (eta * eta) * (2.0 * dim / delta).ln()).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> BoundInputs {
        BoundInputs {
            order: 1,
            w_bound: 1.0,
            f_inf: 1.0,
            n_data: 100,
            delta: 0.1,
            eps_k: 0.0,
            eta: 0.0,
        }
    }

    #[test]
    fn reference_evaluation() {
        let t = bound_terms(&base()).unwrap();
        assert!((t.complexity - 1.892_82).abs() < 1e-5);
        assert!((t.confidence - 2.740_54).abs() < 1e-4);
        assert!((theorem1_rhs(&base()).unwrap() - 4.6333).abs() < 1e-3);
    }

    #[test]
    fn sample_scaling() {
        let b = base();
        let big = BoundInputs {
            n_data: 100_000_000,
            ..b
        };
        let r = theorem1_rhs(&big).unwrap() / theorem1_rhs(&b).unwrap();
        assert!((r - 1e-3).abs() < 1e-12);
        let eps = BoundInputs {
            eps_k: 0.2,
            n_data: usize::MAX / 2,
            ..b
        };
        assert!((theorem1_rhs(&eps).unwrap() - 0.04).abs() < 1e-6);
    }

    #[test]
    fn noisy_bound() {
        assert_eq!(appendix_b_rhs(&base()).unwrap(), theorem1_rhs(&base()).unwrap());
        let noisy = BoundInputs { eta: 0.1, ..base() };
        assert!((appendix_b_rhs(&noisy).unwrap() - 6.5861).abs() < 1e-3);
        let noisier = BoundInputs { eta: 0.11, ..base() };
        assert!(appendix_b_rhs(&noisier).unwrap() > appendix_b_rhs(&noisy).unwrap());
    }

    #[test]
    fn invalid_delta() {
        for delta in [0.0, 1.0, -0.5, 2.0] {
            assert!(theorem1_rhs(&BoundInputs { delta, ..base() }).is_err());
        }
        assert!(hoeffding_shots(0.1, 1.0, 3).is_err());
        assert!(hoeffding_shots(0.0, 0.1, 3).is_err());
    }

    #[test]
    fn corollary_parameters() {
        assert_eq!(corollary2_params(0.1, 1.0, 1.0).unwrap(), (24, 281_102));
        let (k1, _) = corollary2_params(0.1, 1.0, 1.0).unwrap();
        let (k2, _) = corollary2_params(0.05, 1.0, 1.0).unwrap();
        assert!(k2 > 2 * k1);
        let (_, n1) = corollary2_params(0.2, 1.0, 1.0).unwrap();
        let (_, n2) = corollary2_params(0.2, 2.0, 1.0).unwrap();
        assert!((n2 as f64 / n1 as f64 - 16.0).abs() < 1e-2);
        assert!(corollary2_params(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn shot_counts() {
        assert_eq!(hoeffding_shots(0.05, 0.05, 11).unwrap(), 5460);
        assert_eq!(hoeffding_shots(0.1, 0.1, 5).unwrap(), 1079);
        assert_eq!(hoeffding_shots(0.1, 0.05, 5).unwrap(), 1218);
        let a = hoeffding_shots(0.1, 0.1, 5).unwrap() as f64;
        let b = hoeffding_shots(0.05, 0.1, 5).unwrap() as f64;
        assert!((b / a - 4.0).abs() < 0.01);
    }
}
