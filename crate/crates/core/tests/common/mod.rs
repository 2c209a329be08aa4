//! Dense reference implementations shared by the integration tests.
//!
//! Everything here is built from Pauli matrices and Kronecker products so it
//! shares no code path with the sector-based library routines.

#![allow(dead_code)]

use hamfeat::hamiltonians::{sample_couplings, CouplingSpec};
use hamfeat::states::StateVector;
use hamfeat::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Square complex matrix, row major.
#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub data: Vec<C>,
}

impl Dense {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[C]]) -> Self {
        let dim = rows.len();
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self { dim, data }
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let d = self.dim * other.dim;
        let mut out = Dense::zeros(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self[(i, j)];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        out[(i * other.dim + k, j * other.dim + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: C) -> Dense {
        Dense {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        let d = self.dim;
        let mut out = Dense::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C]) -> Vec<C> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `exp(self)` by scaling and squaring of a Taylor series.
    pub fn expm(&self) -> Dense {
        let norm: f64 = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let a = self.scale(c(0.5f64.powi(squarings as i32), 0.0));
        let mut term = Dense::identity(self.dim);
        let mut sum = Dense::identity(self.dim);
        for k in 1..=30 {
            term = term.matmul(&a).scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }
}

impl std::ops::Index<(usize, usize)> for Dense {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Dense {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.dim + j]
    }
}

pub fn pauli(which: char) -> Dense {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match which {
        'I' => Dense::identity(2),
        'X' => Dense::from_rows(&[&[o, one], &[one, o]]),
        'Y' => Dense::from_rows(&[&[o, -i], &[i, o]]),
        'Z' => Dense::from_rows(&[&[one, o], &[o, -one]]),
        _ => unreachable!(),
    }
}

/// Pauli string with `p` on qubits `a` and `a + 1`; qubit 0 is the leftmost
/// tensor factor (most significant bit).
fn bond_term(n: usize, a: usize, p: char) -> Dense {
    let mut m = Dense::identity(1);
    for q in 0..n {
        let f = if q == a || q == a + 1 { pauli(p) } else { pauli('I') };
        m = m.kron(&f);
    }
    m
}

/// `sum_m J_m (XX + YY + ZZ)` as a dense matrix.
pub fn dense_heisenberg(n: usize, couplings: &[f64]) -> Dense {
    let dim = 1 << n;
    let mut h = Dense::zeros(dim);
    for (m, &j) in couplings.iter().enumerate() {
        for p in ['X', 'Y', 'Z'] {
            h = h.add(&bond_term(n, m, p).scale(c(j, 0.0)));
        }
    }
    h
}

/// `exp(-iHt)` for the chain described by `spec`.
pub fn dense_propagator(spec: &CouplingSpec, t: f64) -> Dense {
    dense_heisenberg(spec.n(), spec.couplings())
        .scale(c(0.0, -t))
        .expm()
}

pub fn random_spec(n: usize, r: &mut impl Rng) -> CouplingSpec {
    sample_couplings(n, r).expect("valid n")
}

/// Haar-like random state spread over all sectors.
pub fn random_state(n: usize, r: &mut impl Rng) -> StateVector {
    let mut amps: Vec<C> = (0..1usize << n)
        .map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(n, amps).expect("normalized")
}

/// Random normalized state inside one magnetization sector.
pub fn random_sector_state(n: usize, popcount: usize, r: &mut impl Rng) -> StateVector {
    let mut amps: Vec<C> = (0..1usize << n)
        .map(|i| {
            if i.count_ones() as usize == popcount {
                c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
            } else {
                c(0.0, 0.0)
            }
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(n, amps).expect("normalized")
}

pub fn vec_dist(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
