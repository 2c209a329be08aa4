//! State vectors over the computational basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{apply_hamiltonian, CouplingSpec, SectorBasis, MAX_DENSE_QUBITS};

/// Tolerance on the unit-norm and orthogonality preconditions.
pub const STATE_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Normalized amplitudes over the `2^n` computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        if amplitudes.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1usize << n,
                actual: amplitudes.len(),
            });
        }
        let state = Self { n, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Precondition(format!("state norm is {norm}, not 1")));
        }
        Ok(state)
    }

    /// Builds a state without the unit-norm check; callers guarantee unitarity.
    pub(crate) fn from_unitary_image(n: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1usize << n);
        Self { n, amplitudes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability mass in each magnetization sector, indexed by popcount.
    pub fn sector_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n + 1];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            w[idx.count_ones() as usize] += a.norm_sqr();
        }
        w
    }

    /// Sector-compressed form: one block per sector with nonzero amplitude.
    pub fn compress(&self) -> Vec<SectorState> {
        let mut occupied = vec![false; self.n + 1];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            if *a != ZERO {
                occupied[idx.count_ones() as usize] = true;
            }
        }
        occupied
            .iter()
            .enumerate()
            .filter(|(_, occ)| **occ)
            .map(|(m, _)| self.sector_block(m))
            .collect()
    }

    /// Amplitudes restricted to one sector, ordered as in [`SectorBasis`].
    pub fn sector_block(&self, magnetization: usize) -> SectorState {
        let basis = SectorBasis::new(self.n, magnetization).expect("magnetization <= n");
        let amplitudes = basis
            .states()
            .iter()
            .map(|&s| self.amplitudes[s as usize])
            .collect();
        SectorState {
            n: self.n,
            magnetization,
            amplitudes,
        }
    }

    /// The single occupied sector, or `None` when the state spans several.
    pub fn single_sector(&self) -> Option<usize> {
        let blocks: Vec<usize> = self
            .sector_weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(m, _)| m)
            .collect();
        match blocks.as_slice() {
            [m] => Some(*m),
            _ => None,
        }
    }
}

/// Amplitudes of a state on one magnetization sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub n: usize,
    pub magnetization: usize,
    pub amplitudes: Vec<Complex64>,
}

impl SectorState {
    /// Expands a set of sector blocks back into the dense form.
    pub fn expand(blocks: &[SectorState], n: usize) -> Result<StateVector> {
        check_qubits(n)?;
        let mut amps = vec![ZERO; 1usize << n];
        for block in blocks {
            if block.n != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: block.n,
                });
            }
            let basis = SectorBasis::new(n, block.magnetization)?;
            if basis.len() != block.amplitudes.len() {
                return Err(Error::DimensionMismatch {
                    expected: basis.len(),
                    actual: block.amplitudes.len(),
                });
            }
            for (&s, &a) in basis.states().iter().zip(&block.amplitudes) {
                amps[s as usize] = a;
            }
        }
        StateVector::from_amplitudes(n, amps)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::InvalidDimension(format!(
            "dense states need 1..={MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Parses a bitstring such as `"0110"` (qubit 0 first) into a basis index.
pub fn parse_bitstring(n: usize, bits: &str) -> Result<usize> {
    if bits.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bits.len(),
        });
    }
    bits.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::Domain(format!("invalid bit {other:?} in {bits:?}"))),
    })
}

pub fn format_bitstring(n: usize, index: usize) -> String {
    (0..n)
        .map(|q| if index >> (n - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn basis_state(n: usize, bits: &str) -> Result<StateVector> {
    check_qubits(n)?;
    let index = parse_bitstring(n, bits)?;
    Ok(basis_state_index(n, index))
}

pub(crate) fn basis_state_index(n: usize, index: usize) -> StateVector {
    let mut amps = vec![ZERO; 1usize << n];
    amps[index] = Complex64::new(1.0, 0.0);
    StateVector { n, amplitudes: amps }
}

/// Bitstring of `|0>^{n/4} |1>^{n/2} |0>^{n/4}`.
pub fn domain_wall_bits(n: usize) -> Result<String> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::InvalidDimension(format!(
            "domain-wall state needs n divisible by 4, got {n}"
        )));
    }
    let q = n / 4;
    Ok(format!("{}{}{}", "0".repeat(q), "1".repeat(2 * q), "0".repeat(q)))
}

pub fn domain_wall(n: usize) -> Result<StateVector> {
    basis_state(n, &domain_wall_bits(n)?)
}

/// A computational basis state that is an eigenvector of a given Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEigenstate {
    n: usize,
    index: usize,
    eigenvalue: f64,
}

impl ReferenceEigenstate {
    /// Validates that `bits` is an eigenstate of `spec` and records its energy.
    pub fn new(spec: &CouplingSpec, bits: &str) -> Result<Self> {
        let state = basis_state(spec.n(), bits)?;
        let index = parse_bitstring(spec.n(), bits)?;
        let hv = apply_hamiltonian(spec, state.amplitudes())?;
        let eigenvalue = hv[index].re;
        let residual = hv
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let target = if i == index { eigenvalue } else { 0.0 };
                (a - target).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        if residual > 1e-12 {
            return Err(Error::Precondition(format!(
                "|{bits}> is not an eigenstate (residual {residual:e})"
            )));
        }
        Ok(Self {
            n: spec.n(),
            index,
            eigenvalue,
        })
    }

    /// `|0...0>`, an eigenstate of every Heisenberg chain with energy `sum J_m`.
    pub fn all_zeros(spec: &CouplingSpec) -> Result<Self> {
        Self::new(spec, &"0".repeat(spec.n()))
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn bitstring(&self) -> String {
        format_bitstring(self.n, self.index)
    }

    pub fn state(&self) -> StateVector {
        basis_state_index(self.n, self.index)
    }
}

/// Relative phase of the second component in a reference superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Plus, Phase::Minus, Phase::PlusI, Phase::MinusI];

    pub fn factor(self) -> Complex64 {
        match self {
            Phase::Plus => Complex64::new(1.0, 0.0),
            Phase::Minus => Complex64::new(-1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

/// `(psi_ref + phase * psi) / sqrt(2)` for orthogonal inputs.
pub fn superpose(psi_ref: &StateVector, psi: &StateVector, phase: Phase) -> Result<StateVector> {
    let overlap = inner(psi_ref, psi)?;
    if overlap.norm() > STATE_TOL {
        return Err(Error::Precondition(format!(
            "reference and state overlap by {:e}",
            overlap.norm()
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let f = phase.factor();
    let amps = psi_ref
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(r, p)| (r + f * p) * s)
        .collect();
    StateVector::from_amplitudes(psi.n(), amps)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .fold(ZERO, |acc, (x, y)| acc + x.conj() * y))
}
