mod common;

use common::*;
use hamfeat::evolution::{amplitude, exact_evolve, heisenberg_gate, trotter_evolve};
use hamfeat::hamiltonians::{apply_hamiltonian, spectral_bound, CouplingSpec, Spectrum};
use hamfeat::states::{basis_state, inner, StateVector};
use proptest::prelude::*;

fn spec_strategy(max_n: usize) -> impl Strategy<Value = (CouplingSpec, u64)> {
    (2..=max_n, any::<u64>()).prop_map(|(n, seed)| (random_spec(n, &mut rng(seed)), seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_free_action_matches_kronecker_matrix((spec, seed) in spec_strategy(6)) {
        let psi = random_state(spec.n(), &mut rng(seed ^ 1));
        let dense = dense_heisenberg(spec.n(), spec.couplings());
        let want = dense.matvec(psi.amplitudes());
        let got = apply_hamiltonian(&spec, psi.amplitudes()).unwrap();
        prop_assert!(vec_dist(&got, &want) <= 1e-12);
    }

    #[test]
    fn sector_spectra_reproduce_dense_traces((spec, _) in spec_strategy(6)) {
        let n = spec.n();
        let dense = dense_heisenberg(n, spec.couplings());
        let spectrum = Spectrum::new(spec.clone());
        let mut tr = 0.0;
        let mut tr2 = 0.0;
        for m in 0..=n {
            for &lam in &spectrum.sector(m).unwrap().eigenvalues {
                prop_assert!(lam.abs() <= spectral_bound(&spec) + 1e-12);
                prop_assert!(lam.abs() <= 3.0 + 1e-12);
                tr += lam;
                tr2 += lam * lam;
            }
        }
        prop_assert!((tr - dense.trace().re).abs() <= 1e-10);
        prop_assert!((tr2 - dense.matmul(&dense).trace().re).abs() <= 1e-10);
    }

    #[test]
    fn exact_evolution_matches_dense_exponential((spec, seed) in spec_strategy(5), t in 0.0..4.0f64) {
        let psi = random_state(spec.n(), &mut rng(seed ^ 2));
        let want = dense_propagator(&spec, t).matvec(psi.amplitudes());
        let got = exact_evolve(&Spectrum::new(spec), &psi, t).unwrap();
        prop_assert!(vec_dist(got.amplitudes(), &want) <= 1e-10);
    }

    #[test]
    fn trotter_is_unitary_and_keeps_sectors((spec, seed) in spec_strategy(7), t in 0.0..6.0f64, steps in 1u32..8) {
        let psi = random_state(spec.n(), &mut rng(seed ^ 3));
        let out = trotter_evolve(&spec, &psi, t, steps).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-10);
        for (a, b) in psi.sector_weights().iter().zip(out.sector_weights()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let ex = exact_evolve(&Spectrum::new(spec), &psi, t).unwrap();
        prop_assert!((ex.norm() - 1.0).abs() <= 1e-10);
        for (a, b) in psi.sector_weights().iter().zip(ex.sector_weights()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn basis_inputs_never_leak_out_of_their_sector((spec, seed) in spec_strategy(7), t in 0.0..6.0f64) {
        let n = spec.n();
        let idx = (seed as usize) % (1 << n);
        let bits: String = (0..n).map(|q| if idx >> (n - 1 - q) & 1 == 1 { '1' } else { '0' }).collect();
        let psi = basis_state(n, &bits).unwrap();
        let pop = idx.count_ones() as usize;
        let outs = [
            trotter_evolve(&spec, &psi, t, 3).unwrap(),
            exact_evolve(&Spectrum::new(spec.clone()), &psi, t).unwrap(),
        ];
        for out in outs {
            for (i, a) in out.amplitudes().iter().enumerate() {
                if i.count_ones() as usize != pop {
                    prop_assert_eq!(a.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn amplitude_is_overlap_with_evolved_state((spec, seed) in spec_strategy(8), t in -4.0..4.0f64) {
        let n = spec.n();
        let psi = random_sector_state(n, (seed as usize) % (n + 1), &mut rng(seed ^ 4));
        let spectrum = Spectrum::new(spec);
        let a = amplitude(&spectrum, &psi, t).unwrap();
        let b = inner(&psi, &exact_evolve(&spectrum, &psi, t).unwrap()).unwrap();
        prop_assert!((a - b).norm() <= 1e-10);
        prop_assert!(a.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn bond_gate_is_the_exponential_of_the_bond_term(j in -1.0..1.0f64, dt in -3.0..3.0f64) {
        let g = heisenberg_gate(j, dt);
        prop_assert!(g.unitarity_error() <= 1e-12);
        let want = dense_heisenberg(2, &[j]).scale(c(0.0, -dt)).expm();
        for r in 0..4 {
            for col in 0..4 {
                prop_assert!((g.matrix[r][col] - want[(r, col)]).norm() <= 1e-12);
            }
        }
    }
}

#[test]
fn trotter_approaches_exact_evolution() {
    let mut r = rng(11);
    for _ in 0..5 {
        let spec = random_spec(4, &mut r);
        let psi = random_state(4, &mut r);
        let want = dense_propagator(&spec, 1.0).matvec(psi.amplitudes());
        let got = trotter_evolve(&spec, &psi, 1.0, 64).unwrap();
        assert!(vec_dist(got.amplitudes(), &want) <= 1e-3);
    }
}

#[test]
fn trotter_error_quarters_when_steps_double() {
    let mut r = rng(12);
    let spec = random_spec(4, &mut r);
    let psi = random_state(4, &mut r);
    let want = dense_propagator(&spec, 2.0).matvec(psi.amplitudes());
    let err = |s: u32| vec_dist(trotter_evolve(&spec, &psi, 2.0, s).unwrap().amplitudes(), &want);
    for s in [8, 16, 32] {
        let ratio = err(s) / err(2 * s);
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio} at {s} steps");
    }
}

#[test]
fn energy_is_conserved_under_exact_evolution() {
    let mut r = rng(13);
    let spec = random_spec(6, &mut r);
    let psi = random_state(6, &mut r);
    let spectrum = Spectrum::new(spec.clone());
    let energy = |v: &StateVector| dot(v.amplitudes(), &apply_hamiltonian(&spec, v.amplitudes()).unwrap()).re;
    let e0 = energy(&psi);
    for t in [0.3, 1.7, 5.0, 20.0] {
        let e = energy(&exact_evolve(&spectrum, &psi, t).unwrap());
        assert!((e - e0).abs() <= 1e-10);
    }
}
