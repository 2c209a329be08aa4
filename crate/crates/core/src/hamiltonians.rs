//! Random one-dimensional Heisenberg chains
//! `H = sum_m J_m (X_m X_{m+1} + Y_m Y_{m+1} + Z_m Z_{m+1})` with open
//! boundaries, their matrix-free action and magnetization-sector spectra.

use std::sync::{Arc, OnceLock};

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest sector dimension diagonalized densely (covers n = 16 at half filling).
pub const DEFAULT_SECTOR_CAP: usize = 20_000;

/// Largest chain stored as a dense state vector.
pub const MAX_DENSE_QUBITS: usize = 30;

/// Bit mask of qubit `q` in an `n`-qubit basis index. Qubit 0 is the most
/// significant bit.
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> u64 {
    1u64 << (n - 1 - q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    n: usize,
    couplings: Vec<f64>,
}

impl CouplingSpec {
    /// Wraps a coupling sequence as given, without normalizing it.
    pub fn new(n: usize, couplings: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!(
                "a chain needs at least 2 qubits, got {n}"
            )));
        }
        if n > 63 {
            return Err(Error::InvalidDimension(format!("{n} qubits do not fit a u64 basis index")));
        }
        if couplings.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                actual: couplings.len(),
            });
        }
        if let Some(j) = couplings.iter().find(|j| !j.is_finite()) {
            return Err(Error::Domain(format!("non-finite coupling {j}")));
        }
        Ok(Self { n, couplings })
    }

    /// Rescales `raw` so that `sum |J_m| = 1`.
    pub fn normalized(n: usize, raw: Vec<f64>) -> Result<Self> {
        let spec = Self::new(n, raw)?;
        let l1 = spec.l1_norm();
        if l1 == 0.0 {
            return Err(Error::Domain("all couplings are zero; cannot normalize".into()));
        }
        let couplings = spec.couplings.iter().map(|j| j / l1).collect();
        Ok(Self { n, couplings })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn l1_norm(&self) -> f64 {
        self.couplings.iter().map(|j| j.abs()).sum()
    }

    /// `sum_m J_m`, the energy of every fully polarized basis state.
    pub fn coupling_sum(&self) -> f64 {
        self.couplings.iter().sum()
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }
}

/// Draws `J_m` uniformly from `[-1, 1]` for every bond and normalizes to
/// `sum |J_m| = 1`. An all-zero draw is redrawn.
pub fn sample_couplings<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CouplingSpec> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "a chain needs at least 2 qubits, got {n}"
        )));
    }
    loop {
        let raw: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if raw.iter().any(|j| *j != 0.0) {
            return CouplingSpec::normalized(n, raw);
        }
    }
}

/// Triangle-inequality bound `||H|| <= 3 sum |J_m|`.
pub fn spectral_bound(spec: &CouplingSpec) -> f64 {
    3.0 * spec.l1_norm()
}

/// Computes `H v` bond by bond without building the matrix.
///
/// On a bond with bits `(a, b)`: if `a == b` the term acts as `+J`; otherwise
/// it maps `|ab> -> J(-|ab> + 2|ba>)`.
pub fn apply_hamiltonian(spec: &CouplingSpec, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = spec.n();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::InvalidDimension(format!("{n} qubits exceed the dense limit")));
    }
    if v.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            actual: v.len(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (m, &j) in spec.couplings().iter().enumerate() {
        if j == 0.0 {
            continue;
        }
        let pair = qubit_mask(n, m) | qubit_mask(n, m + 1);
        for (idx, &amp) in v.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let bits = idx as u64 & pair;
            if bits == 0 || bits == pair {
                out[idx] += amp * j;
            } else {
                out[idx] -= amp * j;
                out[(idx as u64 ^ pair) as usize] += amp * (2.0 * j);
            }
        }
    }
    Ok(out)
}

/// Ascending list of `n`-bit basis indices with a fixed number of 1-bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n: usize,
    magnetization: usize,
    states: Vec<u64>,
}

impl SectorBasis {
    pub fn new(n: usize, magnetization: usize) -> Result<Self> {
        if magnetization > n {
            return Err(Error::InvalidDimension(format!(
                "magnetization {magnetization} exceeds qubit count {n}"
            )));
        }
        if n > 63 {
            return Err(Error::InvalidDimension(format!("{n} qubits do not fit a u64 basis index")));
        }
        let mut states = Vec::with_capacity(binomial(n, magnetization));
        if magnetization == 0 {
            states.push(0);
        } else {
            // Gosper's hack enumerates fixed-popcount words in increasing order.
            let mut x: u64 = (1u64 << magnetization) - 1;
            let limit = 1u64 << n;
            while x < limit {
                states.push(x);
                let c = x & x.wrapping_neg();
                let r = x + c;
                x = (((r ^ x) >> 2) / c) | r;
            }
        }
        Ok(Self {
            n,
            magnetization,
            states,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn magnetization(&self) -> usize {
        self.magnetization
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    /// Position of `state` in the basis, if it belongs to the sector.
    pub fn position(&self, state: u64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dense real block of `H` restricted to one sector.
pub fn sector_hamiltonian(spec: &CouplingSpec, basis: &SectorBasis) -> Result<Mat<f64>> {
    if basis.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: basis.n(),
        });
    }
    let n = spec.n();
    let d = basis.len();
    let mut h = Mat::<f64>::zeros(d, d);
    for (col, &s) in basis.states().iter().enumerate() {
        for (m, &j) in spec.couplings().iter().enumerate() {
            let pair = qubit_mask(n, m) | qubit_mask(n, m + 1);
            let bits = s & pair;
            if bits == 0 || bits == pair {
                h[(col, col)] += j;
            } else {
                h[(col, col)] -= j;
                let row = basis
                    .position(s ^ pair)
                    .expect("bond flip preserves magnetization");
                h[(row, col)] += 2.0 * j;
            }
        }
    }
    Ok(h)
}

/// Eigendecomposition of one sector block, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SectorEigensystem {
    pub basis: SectorBasis,
    pub eigenvalues: Vec<f64>,
    /// Column `l` is the eigenvector of `eigenvalues[l]` in sector coordinates.
    pub eigenvectors: Mat<f64>,
}

impl SectorEigensystem {
    /// Spectral weights `p_l = |<lambda_l|psi>|^2` for sector amplitudes `psi`.
    pub fn spectral_cache(&self, psi: &[Complex64]) -> Result<SpectralCache> {
        if psi.len() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                actual: psi.len(),
            });
        }
        let weights = (0..self.basis.len())
            .map(|l| self.project(l, psi).norm_sqr())
            .collect();
        Ok(SpectralCache {
            magnetization: self.basis.magnetization(),
            eigenvalues: self.eigenvalues.clone(),
            weights,
        })
    }

    /// `<lambda_l|psi>`.
    fn project(&self, l: usize, psi: &[Complex64]) -> Complex64 {
        self.eigenvectors
            .col(l)
            .iter()
            .zip(psi)
            .fold(Complex64::new(0.0, 0.0), |acc, (qi, pi)| acc + pi * *qi)
    }

    /// `Q diag(g(lambda)) Q^T psi` for sector amplitudes `psi`.
    pub fn apply_function<F>(&self, psi: &[Complex64], g: F) -> Vec<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        let d = self.basis.len();
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for l in 0..d {
            let c = self.project(l, psi) * g(self.eigenvalues[l]);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, qi) in out.iter_mut().zip(self.eigenvectors.col(l).iter()) {
                *o += c * *qi;
            }
        }
        out
    }
}

pub fn sector_eigensystem(
    spec: &CouplingSpec,
    magnetization: usize,
    cap: usize,
) -> Result<SectorEigensystem> {
    if magnetization > spec.n() {
        return Err(Error::InvalidDimension(format!(
            "magnetization {magnetization} exceeds qubit count {}",
            spec.n()
        )));
    }
    let dim = binomial(spec.n(), magnetization);
    if dim > cap {
        return Err(Error::ResourceLimit { dim, limit: cap });
    }
    let basis = SectorBasis::new(spec.n(), magnetization)?;
    let h = sector_hamiltonian(spec, &basis)?;
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("sector eigendecomposition failed: {e:?}")))?;
    let values = eig.S().column_vector();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let vectors = eig.U();
    let eigenvectors = Mat::from_fn(dim, dim, |r, c| vectors[(r, order[c])]);
    Ok(SectorEigensystem {
        basis,
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues of one sector together with the spectral weights of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCache {
    pub magnetization: usize,
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralCache {
    /// `sum_l p_l exp(-i lambda_l t)`.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .fold(Complex64::new(0.0, 0.0), |acc, (lam, p)| {
                acc + Complex64::from_polar(*p, -lam * t)
            })
    }

    /// `sum_l p_l f(lambda_l)`.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(lam, p)| p * f(*lam))
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Lazily diagonalized sectors of one Hamiltonian.
///
/// Each sector is decomposed at most once and shared across evolution times
/// and label evaluation. Safe for concurrent readers; a race on first use
/// computes the same block twice and keeps the first.
#[derive(Debug)]
pub struct Spectrum {
    spec: CouplingSpec,
    cap: usize,
    sectors: Vec<OnceLock<Arc<SectorEigensystem>>>,
}

impl Spectrum {
    pub fn new(spec: CouplingSpec) -> Self {
        Self::with_cap(spec, DEFAULT_SECTOR_CAP)
    }

    pub fn with_cap(spec: CouplingSpec, cap: usize) -> Self {
        let sectors = (0..=spec.n()).map(|_| OnceLock::new()).collect();
        Self { spec, cap, sectors }
    }

    pub fn spec(&self) -> &CouplingSpec {
        &self.spec
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn sector(&self, magnetization: usize) -> Result<Arc<SectorEigensystem>> {
        let slot = self.sectors.get(magnetization).ok_or_else(|| {
            Error::InvalidDimension(format!(
                "magnetization {magnetization} exceeds qubit count {}",
                self.spec.n()
            ))
        })?;
        if let Some(sys) = slot.get() {
            return Ok(Arc::clone(sys));
        }
        let sys = Arc::new(sector_eigensystem(&self.spec, magnetization, self.cap)?);
        Ok(Arc::clone(slot.get_or_init(|| sys)))
    }
}
