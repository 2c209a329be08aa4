//! Exact (spectral) and second-order product-formula time evolution.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{qubit_mask, CouplingSpec, SpectralCache, Spectrum};
use crate::states::{SectorState, StateVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Number of product-formula steps used for each feature index `l = 0..=K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TrotterSchedule(Vec<u32>);

impl TrotterSchedule {
    pub fn new(steps: Vec<u32>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Config("empty Trotter schedule".into()));
        }
        if steps.contains(&0) {
            return Err(Error::Config("Trotter step counts must be >= 1".into()));
        }
        Ok(Self(steps))
    }

    /// Step counts used on hardware for the 12-qubit chain.
    pub fn twelve_qubit_default() -> Self {
        Self(vec![1, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3])
    }

    pub fn steps(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks that the schedule covers `l = 0..=order`.
    pub fn check_order(&self, order: usize) -> Result<()> {
        if self.0.len() != order + 1 {
            return Err(Error::Config(format!(
                "Trotter schedule has {} entries, K = {order} needs {}",
                self.0.len(),
                order + 1
            )));
        }
        Ok(())
    }
}

impl FromStr for TrotterSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let steps = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Config(format!("bad Trotter step {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(steps)
    }
}

impl fmt::Display for TrotterSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl TryFrom<String> for TrotterSchedule {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TrotterSchedule> for String {
    fn from(s: TrotterSchedule) -> String {
        s.to_string()
    }
}

/// A 4x4 unitary on the neighbouring qubits `(bond, bond + 1)`, indexed as
/// `2 * bit(bond) + bit(bond + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitGate {
    pub matrix: [[Complex64; 4]; 4],
    pub bond: usize,
}

impl TwoQubitGate {
    pub fn on_bond(mut self, bond: usize) -> Self {
        self.bond = bond;
        self
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let u = &self.matrix;
        let mut err: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = ZERO;
                for row in u {
                    s += row[i].conj() * row[j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((s - target).norm());
            }
        }
        err
    }

    pub fn apply(&self, amps: &mut [Complex64], n: usize) {
        let hi = qubit_mask(n, self.bond);
        let lo = qubit_mask(n, self.bond + 1);
        let u = &self.matrix;
        for base in 0..amps.len() {
            if base as u64 & (hi | lo) != 0 {
                continue;
            }
            let idx = [
                base,
                base | lo as usize,
                base | hi as usize,
                base | (hi | lo) as usize,
            ];
            let v = idx.map(|i| amps[i]);
            for (r, &i) in idx.iter().enumerate() {
                amps[i] = u[r][0] * v[0] + u[r][1] * v[1] + u[r][2] * v[2] + u[r][3] * v[3];
            }
        }
    }
}

/// `exp(-i J dt (XX + YY + ZZ))` in closed form, with `theta = J dt`:
/// phase `e^{-i theta}` on `|00>`, `|11>` and
/// `e^{i theta} (cos 2theta I - i sin 2theta SWAP)` on `span{|01>, |10>}`.
pub fn heisenberg_gate(j: f64, dt: f64) -> TwoQubitGate {
    let theta = j * dt;
    let outer = Complex64::from_polar(1.0, -theta);
    let inner = Complex64::from_polar(1.0, theta);
    let diag = inner * (2.0 * theta).cos();
    let off = inner * Complex64::new(0.0, -(2.0 * theta).sin());
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = outer;
    m[3][3] = outer;
    m[1][1] = diag;
    m[2][2] = diag;
    m[1][2] = off;
    m[2][1] = off;
    TwoQubitGate { matrix: m, bond: 0 }
}

/// Applies `n_step` symmetric steps
/// `exp(-i dt/2 H_odd) exp(-i dt H_even) exp(-i dt/2 H_odd)` with
/// `dt = t / n_step`. Odd and even refer to the 0-based bond index.
pub fn trotter_evolve(
    spec: &CouplingSpec,
    v: &StateVector,
    t: f64,
    n_step: u32,
) -> Result<StateVector> {
    if n_step < 1 {
        return Err(Error::Config("n_step must be >= 1".into()));
    }
    check_dims(spec, v)?;
    let n = spec.n();
    let dt = t / f64::from(n_step);
    let half: Vec<TwoQubitGate> = bonds(spec, 1)
        .map(|(m, j)| heisenberg_gate(j, dt / 2.0).on_bond(m))
        .collect();
    let full: Vec<TwoQubitGate> = bonds(spec, 0)
        .map(|(m, j)| heisenberg_gate(j, dt).on_bond(m))
        .collect();
    let mut amps = v.amplitudes().to_vec();
    for _ in 0..n_step {
        for g in half.iter().chain(&full).chain(&half) {
            g.apply(&mut amps, n);
        }
    }
    Ok(StateVector::from_unitary_image(n, amps))
}

fn bonds(spec: &CouplingSpec, parity: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    spec.couplings()
        .iter()
        .copied()
        .enumerate()
        .filter(move |(m, _)| m % 2 == parity)
}

fn check_dims(spec: &CouplingSpec, v: &StateVector) -> Result<()> {
    if v.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: v.n(),
        });
    }
    Ok(())
}

/// `exp(-iHt) v` through the cached sector eigendecompositions.
pub fn exact_evolve(spectrum: &Spectrum, v: &StateVector, t: f64) -> Result<StateVector> {
    check_dims(spectrum.spec(), v)?;
    let blocks = v
        .compress()
        .into_iter()
        .map(|block| {
            let sys = spectrum.sector(block.magnetization)?;
            let amplitudes =
                sys.apply_function(&block.amplitudes, |lam| Complex64::from_polar(1.0, -lam * t));
            Ok(SectorState {
                amplitudes,
                ..block
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut amps = vec![ZERO; v.dim()];
    for block in &blocks {
        let basis = spectrum.sector(block.magnetization)?;
        for (&s, &a) in basis.basis.states().iter().zip(&block.amplitudes) {
            amps[s as usize] = a;
        }
    }
    Ok(StateVector::from_unitary_image(v.n(), amps))
}

/// Spectral weights of a single-sector state.
pub fn spectral_cache(spectrum: &Spectrum, psi: &StateVector) -> Result<SpectralCache> {
    check_dims(spectrum.spec(), psi)?;
    let m = psi.single_sector().ok_or_else(|| {
        Error::Precondition("state spans several magnetization sectors".into())
    })?;
    let sys = spectrum.sector(m)?;
    sys.spectral_cache(&psi.sector_block(m).amplitudes)
}

/// `A(t) = <psi| exp(-iHt) |psi>`.
pub fn amplitude(spectrum: &Spectrum, psi: &StateVector, t: f64) -> Result<Complex64> {
    Ok(spectral_cache(spectrum, psi)?.amplitude(t))
}
