//! Hamiltonian Fourier features.
//!
//! For `t_l = l pi / C` the feature vector is
//! `(Re A(t_0), Im A(t_1), Re A(t_1), ..., Im A(t_K), Re A(t_K))` with
//! `A(t) = <psi| exp(-iHt) |psi>`: even index `k` holds the cosine part of
//! `l = k / 2`, odd index `k` the sine part of `l = (k + 1) / 2`.
//!
//! Three backends produce it: the exact spectral amplitude, a simulated
//! Hadamard test, and the reference-eigenstate overlap method, which
//! recovers `A(t)` from four transition probabilities.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{spectral_cache, trotter_evolve, TrotterSchedule};
use crate::hamiltonians::{spectral_bound, Spectrum};
use crate::rng::{substream, Role};
use crate::states::{inner, superpose, Phase, ReferenceEigenstate, StateVector, STATE_TOL};

/// Worst-case overshoot of `|x_k|` beyond 1 for the Hadamard estimator (a mean of +-1 outcomes).
pub const HADAMARD_SLACK: f64 = 0.0;

/// Worst-case overshoot of `|x_k|` beyond 1 for the overlap estimator: each
/// quadrature difference lies in `[-1, 1]` and the reference phase rotates
/// the pair, so `|x_k| <= sqrt(2)`.
pub const OVERLAP_SLACK: f64 = SQRT_2 - 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Exact,
    HadamardShots,
    OverlapShots,
}

impl Backend {
    pub fn slack(self) -> f64 {
        match self {
            Backend::Exact | Backend::HadamardShots => HADAMARD_SLACK,
            Backend::OverlapShots => OVERLAP_SLACK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapConfig {
    /// Truncation order `K`; the vector has `2K + 1` entries.
    pub order: usize,
    /// Spectral bound `C`.
    pub spectral_bound: f64,
    pub backend: Backend,
    /// Shots per estimated circuit; `None` uses the ideal probabilities.
    pub shots: Option<u64>,
    /// Product-formula steps per `l`; `None` evolves exactly.
    pub schedule: Option<TrotterSchedule>,
    pub seed: u64,
}

impl FeatureMapConfig {
    pub fn exact(order: usize, spectral_bound: f64) -> Self {
        Self {
            order,
            spectral_bound,
            backend: Backend::Exact,
            shots: None,
            schedule: None,
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        2 * self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, l: usize) -> f64 {
        l as f64 * PI / self.spectral_bound
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.order).map(|l| self.time(l)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spectral_bound.is_finite() && self.spectral_bound > 0.0) {
            return Err(Error::Config(format!(
                "spectral bound C must be positive, got {}",
                self.spectral_bound
            )));
        }
        if self.shots == Some(0) {
            return Err(Error::Config("shot count must be >= 1".into()));
        }
        if let Some(s) = &self.schedule {
            s.check_order(self.order)?;
            if self.backend == Backend::Exact {
                return Err(Error::Config(
                    "a Trotter schedule needs a shot backend (exact uses spectral evolution)".into(),
                ));
            }
        }
        Ok(())
    }

    /// Checks `C >= ||H||` for one Hamiltonian.
    pub fn check_spectrum(&self, spectrum: &Spectrum) -> Result<()> {
        let bound = spectral_bound(spectrum.spec());
        if self.spectral_bound < bound * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "C = {} is below the spectral bound {bound}",
                self.spectral_bound
            )));
        }
        Ok(())
    }
}

/// The `2K + 1` Fourier features of one `(H, psi)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Interleaves `A(t_0), ..., A(t_K)` into the feature ordering.
    pub fn from_amplitudes(amps: &[Complex64]) -> Self {
        let mut x = Vec::with_capacity(2 * amps.len() - 1);
        for (l, a) in amps.iter().enumerate() {
            if l > 0 {
                x.push(a.im);
            }
            x.push(a.re);
        }
        Self(x)
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(Error::InvalidDimension(format!(
                "feature vectors have odd length 2K+1, got {}",
                values.len()
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn order(&self) -> usize {
        self.0.len() / 2
    }

    pub fn cos(&self, l: usize) -> f64 {
        self.0[2 * l]
    }

    /// Sine part for `l >= 1`.
    pub fn sin(&self, l: usize) -> f64 {
        assert!(l >= 1, "the l = 0 sine term is not part of the vector");
        self.0[2 * l - 1]
    }
}

/// `|<psi_s| exp(-iHt) |psi_+>|^2` for `s` in `{+, -, +i, -i}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapProbabilities {
    pub w_plus: f64,
    pub w_minus: f64,
    pub w_plus_i: f64,
    pub w_minus_i: f64,
    pub t: f64,
    pub lambda_ref: f64,
}

impl OverlapProbabilities {
    /// Closed form from the amplitude: with `r = exp(-i lambda_ref t)`,
    /// `w_+- = |r +- A|^2 / 4`, `w_+i = |r - iA|^2 / 4`, `w_-i = |r + iA|^2 / 4`.
    pub fn from_amplitude(a: Complex64, lambda_ref: f64, t: f64) -> Self {
        let r = Complex64::from_polar(1.0, -lambda_ref * t);
        let ia = Complex64::i() * a;
        Self {
            w_plus: clamp_unit((r + a).norm_sqr() / 4.0),
            w_minus: clamp_unit((r - a).norm_sqr() / 4.0),
            w_plus_i: clamp_unit((r - ia).norm_sqr() / 4.0),
            w_minus_i: clamp_unit((r + ia).norm_sqr() / 4.0),
            t,
            lambda_ref,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w_plus, self.w_minus, self.w_plus_i, self.w_minus_i]
    }

    /// Same `t` and reference energy with replaced probabilities.
    pub fn with_values(&self, w: [f64; 4]) -> Self {
        Self {
            w_plus: w[0],
            w_minus: w[1],
            w_plus_i: w[2],
            w_minus_i: w[3],
            ..*self
        }
    }
}

fn clamp_unit(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

fn check_orthogonal(psi: &StateVector, reference: &ReferenceEigenstate) -> Result<()> {
    let ov = inner(&reference.state(), psi)?;
    if ov.norm() > STATE_TOL {
        return Err(Error::Precondition(format!(
            "state overlaps the reference eigenstate |{}> by {:e}",
            reference.bitstring(),
            ov.norm()
        )));
    }
    Ok(())
}

/// Ideal overlap probabilities under exact evolution.
pub fn exact_overlaps(
    spectrum: &Spectrum,
    psi: &StateVector,
    reference: &ReferenceEigenstate,
    t: f64,
) -> Result<OverlapProbabilities> {
    check_orthogonal(psi, reference)?;
    let a = spectral_cache(spectrum, psi)?.amplitude(t);
    Ok(OverlapProbabilities::from_amplitude(a, reference.eigenvalue(), t))
}

/// Ideal overlap probabilities under product-formula evolution, obtained by
/// evolving `psi_+` and projecting onto the four superpositions.
pub fn trotter_overlaps(
    spectrum: &Spectrum,
    psi: &StateVector,
    reference: &ReferenceEigenstate,
    t: f64,
    n_step: u32,
) -> Result<OverlapProbabilities> {
    check_orthogonal(psi, reference)?;
    let r = reference.state();
    let plus = superpose(&r, psi, Phase::Plus)?;
    let evolved = trotter_evolve(spectrum.spec(), &plus, t, n_step)?;
    let mut w = [0.0; 4];
    for (slot, phase) in w.iter_mut().zip(Phase::ALL) {
        let target = superpose(&r, psi, phase)?;
        *slot = clamp_unit(inner(&target, &evolved)?.norm_sqr());
    }
    Ok(OverlapProbabilities {
        w_plus: w[0],
        w_minus: w[1],
        w_plus_i: w[2],
        w_minus_i: w[3],
        t,
        lambda_ref: reference.eigenvalue(),
    })
}

/// `A(t) = [w_+ - w_- + i (w_+i - w_-i)] exp(-i lambda_ref t)`.
pub fn reconstruct_amplitude(w: &OverlapProbabilities) -> Complex64 {
    Complex64::new(w.w_plus - w.w_minus, w.w_plus_i - w.w_minus_i)
        * Complex64::from_polar(1.0, -w.lambda_ref * w.t)
}

/// Empirical frequency of `n_shot` Bernoulli(`p`) trials.
pub fn sample_probability<R: Rng + ?Sized>(p: f64, n_shot: u64, rng: &mut R) -> f64 {
    let dist = Binomial::new(n_shot, p.clamp(0.0, 1.0)).expect("p in [0, 1]");
    dist.sample(rng) as f64 / n_shot as f64
}

/// Four independent `n_shot`-shot estimates of the overlap probabilities.
pub fn sample_overlaps<R: Rng + ?Sized>(
    w: &OverlapProbabilities,
    n_shot: u64,
    rng: &mut R,
) -> Result<OverlapProbabilities> {
    if n_shot == 0 {
        return Err(Error::Config("shot count must be >= 1".into()));
    }
    Ok(w.with_values(w.as_array().map(|p| sample_probability(p, n_shot, rng))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Real,
    Imag,
}

/// Mean of `n_shot` simulated Hadamard-test outcomes `z = +-1` with
/// `P(+1) = (1 + v) / 2`, where `v` is the requested quadrature of `A`.
pub fn hadamard_estimate<R: Rng + ?Sized>(
    a: Complex64,
    part: Quadrature,
    n_shot: u64,
    rng: &mut R,
) -> Result<f64> {
    if a.norm() > 1.0 + 1e-9 {
        return Err(Error::InvalidAmplitude(a.norm()));
    }
    if n_shot == 0 {
        return Err(Error::Config("shot count must be >= 1".into()));
    }
    let v = match part {
        Quadrature::Real => a.re,
        Quadrature::Imag => a.im,
    };
    let plus = sample_probability((1.0 + v) / 2.0, n_shot, rng);
    Ok(2.0 * plus - 1.0)
}

/// Exact features from the spectral amplitude.
pub fn exact_features(
    spectrum: &Spectrum,
    psi: &StateVector,
    cfg: &FeatureMapConfig,
) -> Result<FeatureVector> {
    cfg.check_spectrum(spectrum)?;
    let cache = spectral_cache(spectrum, psi)?;
    let amps: Vec<Complex64> = cfg.times().iter().map(|&t| cache.amplitude(t)).collect();
    Ok(FeatureVector::from_amplitudes(&amps))
}

/// Overlap probabilities recorded while building overlap-backend features.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapRecord {
    pub l: usize,
    pub ideal: OverlapProbabilities,
    pub estimate: OverlapProbabilities,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureOutput {
    pub features: FeatureVector,
    /// Filled only by the overlap backend.
    pub overlaps: Vec<OverlapRecord>,
}

/// Features from a shot-based estimator.
///
/// `sample` keys the random substreams: circuit ids 0 and 1 are the real and
/// imaginary Hadamard tests, ids 0..4 the `+, -, +i, -i` overlap circuits.
pub fn noisy_features(
    spectrum: &Spectrum,
    psi: &StateVector,
    reference: Option<&ReferenceEigenstate>,
    cfg: &FeatureMapConfig,
    sample: u64,
) -> Result<FeatureOutput> {
    cfg.validate()?;
    cfg.check_spectrum(spectrum)?;
    let cache = spectral_cache(spectrum, psi)?;
    let mut amps = Vec::with_capacity(cfg.order + 1);
    let mut overlaps = Vec::new();
    match cfg.backend {
        Backend::Exact => {
            return Err(Error::Config("noisy_features needs a shot backend".into()));
        }
        Backend::HadamardShots => {
            for (l, &t) in cfg.times().iter().enumerate() {
                let a = match &cfg.schedule {
                    Some(s) => {
                        let evolved = trotter_evolve(spectrum.spec(), psi, t, s.steps()[l])?;
                        inner(psi, &evolved)?
                    }
                    None => cache.amplitude(t),
                };
                let a = match cfg.shots {
                    Some(n) => {
                        let mut re_rng = substream(cfg.seed, Role::Features, sample, l as u64, 0);
                        let mut im_rng = substream(cfg.seed, Role::Features, sample, l as u64, 1);
                        Complex64::new(
                            hadamard_estimate(a, Quadrature::Real, n, &mut re_rng)?,
                            hadamard_estimate(a, Quadrature::Imag, n, &mut im_rng)?,
                        )
                    }
                    None => a,
                };
                amps.push(a);
            }
        }
        Backend::OverlapShots => {
            let reference = reference.ok_or_else(|| {
                Error::Config("overlap backend needs a reference eigenstate".into())
            })?;
            check_orthogonal(psi, reference).map_err(|e| Error::Config(e.to_string()))?;
            for (l, &t) in cfg.times().iter().enumerate() {
                let ideal = match &cfg.schedule {
                    Some(s) => trotter_overlaps(spectrum, psi, reference, t, s.steps()[l])?,
                    None => OverlapProbabilities::from_amplitude(
                        cache.amplitude(t),
                        reference.eigenvalue(),
                        t,
                    ),
                };
                let estimate = match cfg.shots {
                    Some(n) => {
                        let mut w = ideal.as_array();
                        for (circuit, p) in w.iter_mut().enumerate() {
                            let mut rng =
                                substream(cfg.seed, Role::Features, sample, l as u64, circuit as u64);
                            *p = sample_probability(*p, n, &mut rng);
                        }
                        ideal.with_values(w)
                    }
                    None => ideal,
                };
                amps.push(reconstruct_amplitude(&estimate));
                overlaps.push(OverlapRecord { l, ideal, estimate });
            }
        }
    }
    Ok(FeatureOutput {
        features: FeatureVector::from_amplitudes(&amps),
        overlaps,
    })
}

/// Dispatches on the configured backend.
pub fn compute_features(
    spectrum: &Spectrum,
    psi: &StateVector,
    reference: Option<&ReferenceEigenstate>,
    cfg: &FeatureMapConfig,
    sample: u64,
) -> Result<FeatureOutput> {
    match cfg.backend {
        Backend::Exact => Ok(FeatureOutput {
            features: exact_features(spectrum, psi, cfg)?,
            overlaps: Vec::new(),
        }),
        _ => noisy_features(spectrum, psi, reference, cfg, sample),
    }
}
