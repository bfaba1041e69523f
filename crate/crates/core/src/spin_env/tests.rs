use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng as _;

use super::*;
use crate::qcore::{
    dense_ground_state, fidelity, ground_state, partial_trace, pauli_string_operator, Pauli, QuantumState,
    C64,
};
use crate::seed::rng_from_seed;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn single(p: Pauli) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c(1.0)]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c(-1.0)]),
    }
}

/// Kronecker product with qubit 0 leftmost.
fn kron_chain(ops: &[DMatrix<C64>]) -> DMatrix<C64> {
    ops.iter().skip(1).fold(ops[0].clone(), |acc, m| acc.kronecker(m))
}

fn two_site(n: usize, a: usize, pa: Pauli, pb: Pauli) -> DMatrix<C64> {
    let ops: Vec<_> = (0..n)
        .map(|q| if q == a { single(pa) } else if q == a + 1 { single(pb) } else { single(Pauli::I) })
        .collect();
    kron_chain(&ops)
}

fn one_site(n: usize, a: usize, p: Pauli) -> DMatrix<C64> {
    let ops: Vec<_> = (0..n).map(|q| if q == a { single(p) } else { single(Pauli::I) }).collect();
    kron_chain(&ops)
}

fn dense_xxz(n: usize, j: f64, delta: f64) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for b in 0..n - 1 {
        let coupling = if b % 2 == 0 { j } else { 1.0 };
        h += (two_site(n, b, Pauli::X, Pauli::X)
            + two_site(n, b, Pauli::Y, Pauli::Y)
            + two_site(n, b, Pauli::Z, Pauli::Z) * c(delta))
            * c(coupling);
    }
    h
}

fn dense_ising(couplings: &[f64]) -> DMatrix<C64> {
    let n = couplings.len() + 1;
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for (i, &jv) in couplings.iter().enumerate() {
        h -= two_site(n, i, Pauli::Z, Pauli::Z) * c(jv);
    }
    for q in 0..n {
        h -= one_site(n, q, Pauli::X);
    }
    h
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn sorted_spectrum(m: DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn random_state(n: usize, seed: u64) -> QuantumState {
    QuantumState::random(1 << n, &mut rng_from_seed(seed)).unwrap()
}

#[test]
fn xxz_matches_kronecker_oracle() {
    for (j, d) in [(1.0, 1.0), (0.3, 2.2), (2.7, 0.0)] {
        let h = build_xxz_hamiltonian(&XxzParams { j_ratio: j, delta: d, chain_length: 4 }).unwrap();
        assert!(max_abs(&(h.to_dense() - dense_xxz(4, j, d))) < 1e-12);
    }
}

#[test]
fn heisenberg_ground_energy_matches_dense() {
    let h = build_xxz_hamiltonian(&XxzParams { j_ratio: 1.0, delta: 1.0, chain_length: 4 }).unwrap();
    let oracle = sorted_spectrum(dense_xxz(4, 1.0, 1.0))[0];
    let gs = ground_state(&h, 3).unwrap();
    assert!((gs.energy - oracle).abs() < 1e-10);
}

#[test]
fn xy_chain_conserves_magnetization() {
    for j in [0.0, 0.45, 1.8, 3.0] {
        let h = build_xxz_hamiltonian(&XxzParams { j_ratio: j, delta: 0.0, chain_length: 6 }).unwrap().to_dense();
        let mz = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            64,
            longitudinal_field(6, 1.0).into_iter().map(c),
        ));
        assert!(max_abs(&(&h * &mz - &mz * &h)) <= 1e-10);
    }
}

#[test]
fn uniform_chain_is_reflection_symmetric() {
    let n = 4;
    let h = build_xxz_hamiltonian(&XxzParams { j_ratio: 1.0, delta: 1.7, chain_length: n }).unwrap().to_dense();
    let dim = 1 << n;
    let mut perm = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let mut r = 0;
        for q in 0..n {
            r |= ((s >> q) & 1) << (n - 1 - q);
        }
        perm[(r, s)] = c(1.0);
    }
    let conj = &perm * &h * perm.transpose();
    assert!(max_abs(&(conj - h)) <= 1e-10);
}

#[test]
fn xxz_rejects_bad_lengths() {
    for l in [3, 5, 2, 22] {
        assert!(build_xxz_hamiltonian(&XxzParams { j_ratio: 1.0, delta: 1.0, chain_length: l }).is_err());
    }
}

#[test]
fn ising_matches_kronecker_oracle() {
    let js = [0.3, -0.8, 1.0, 0.0, -0.25];
    let h = build_ising_hamiltonian(&IsingParams { couplings: js.to_vec() }).unwrap();
    assert!(max_abs(&(h.to_dense() - dense_ising(&js))) < 1e-12);
}

#[test]
fn two_spin_ising_minimum() {
    let h = build_ising_hamiltonian(&IsingParams { couplings: vec![1.0] }).unwrap();
    let ev = sorted_spectrum(dense_ising(&[1.0]));
    let gs = dense_ground_state(&h).unwrap();
    assert!((gs.energy - ev[0]).abs() < 1e-10);
    assert!((gs.energy + 5f64.sqrt()).abs() < 1e-10);
}

#[test]
fn ising_sign_flip_preserves_spectrum() {
    let mut rng = rng_from_seed(11);
    for _ in 0..5 {
        let js: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let flipped: Vec<f64> = js.iter().map(|j| -j).collect();
        let a = sorted_spectrum(build_ising_hamiltonian(&IsingParams { couplings: js }).unwrap().to_dense());
        let b = sorted_spectrum(build_ising_hamiltonian(&IsingParams { couplings: flipped }).unwrap().to_dense());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn decoupled_ising_ground_state_is_plus_product() {
    let h = build_ising_hamiltonian(&IsingParams::zeros(6)).unwrap();
    let gs = ground_state(&h, 0).unwrap();
    let f = fidelity(&gs.state, &QuantumState::plus_product(6)).unwrap();
    assert!(f >= 1.0 - 1e-9, "fidelity {f}");
    assert!((gs.energy + 6.0).abs() < 1e-9);
}

#[test]
fn ising_couplings_are_clamped() {
    let h = build_ising_hamiltonian(&IsingParams { couplings: vec![1.7, -4.0] }).unwrap();
    let reference = build_ising_hamiltonian(&IsingParams { couplings: vec![1.0, -1.0] }).unwrap();
    assert!(max_abs(&(h.to_dense() - reference.to_dense())) == 0.0);
}

#[test]
fn grid_nodes_and_snapping() {
    let g = XxzGrid::default();
    assert_eq!(g.nodes().count(), 441);
    assert!((g.j_step() - 0.15).abs() < 1e-15);
    assert!((g.delta_step() - 0.2).abs() < 1e-15);
    assert_eq!(g.snap(-1.0, 9.0), (0, 20));
    assert_eq!(g.snap(1.5, 2.0), (10, 10));
    assert_eq!(g.node_index(3, 4), 67);
}

#[test]
fn xxz_action_examples() {
    let g = XxzGrid::default();
    let p = XxzParams { j_ratio: 1.5, delta: 2.0, chain_length: 8 };
    let q = apply_action_xxz(&p, 0, &g).unwrap();
    assert!((q.j_ratio - 1.65).abs() < 1e-12 && (q.delta - 2.0).abs() < 1e-12);
    let back = apply_action_xxz(&q, 1, &g).unwrap();
    assert!((back.j_ratio - 1.5).abs() < 1e-12 && (back.delta - 2.0).abs() < 1e-12);

    let edge = XxzParams { j_ratio: 0.05, delta: 2.0, chain_length: 8 };
    let clamped = apply_action_xxz(&edge, 1, &g).unwrap();
    assert_eq!(clamped.j_ratio, 0.0);
    assert!(apply_action_xxz(&p, 8, &g).is_err());
}

#[test]
fn xxz_moves_cover_stencil_once() {
    let mut seen = std::collections::BTreeSet::new();
    for m in XXZ_MOVES {
        assert_ne!(m, (0, 0));
        assert!(seen.insert(m));
    }
    assert_eq!(seen.len(), 8);
}

proptest! {
    #[test]
    fn xxz_inverse_moves_restore_interior_nodes(i in 1usize..20, k in 1usize..20, a in 0usize..8) {
        let g = XxzGrid::default();
        let p = g.params(i, k, 8);
        let (dj, dd) = XXZ_MOVES[a];
        let inverse = XXZ_MOVES.iter().position(|&m| m == (-dj, -dd)).unwrap();
        let q = apply_action_xxz(&apply_action_xxz(&p, a, &g).unwrap(), inverse, &g).unwrap();
        prop_assert_eq!(q, p);
    }

    #[test]
    fn ising_inverse_moves_restore_interior(seed in 0u64..500) {
        let mut rng = rng_from_seed(seed);
        let p = IsingParams { couplings: (0..5).map(|_| f64::from(rng.random_range(-8i32..=8)) * 0.1).collect() };
        let moves: Vec<i32> = (0..5).map(|_| rng.random_range(-1..=1)).collect();
        let undo: Vec<i32> = moves.iter().map(|m| -m).collect();
        let q = apply_action_ising(&apply_action_ising(&p, &moves, 0.1).unwrap(), &undo, 0.1).unwrap();
        for (a, b) in p.couplings.iter().zip(&q.couplings) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn ising_action_examples() {
    let p = IsingParams::zeros(6);
    assert_eq!(apply_action_ising(&p, &[0; 5], 0.1).unwrap(), p);
    let up = apply_action_ising(&p, &[1; 5], 0.1).unwrap();
    assert!(up.couplings.iter().all(|&j| (j - 0.1).abs() < 1e-15));
    let top = IsingParams { couplings: vec![0.95; 5] };
    assert!(apply_action_ising(&top, &[1; 5], 0.1).unwrap().couplings.iter().all(|&j| j == 1.0));
    assert!(apply_action_ising(&p, &[1; 4], 0.1).is_err());
    assert!(apply_action_ising(&p, &[2, 0, 0, 0, 0], 0.1).is_err());
}

#[test]
fn marginal_examples() {
    let zero = QuantumState::basis(1 << 6, 0).unwrap();
    let zzz = [Pauli::Z; 3];
    for pos in 0..4 {
        let d = pauli_marginal_statistics(&zero, &PauliMeasurementSpec::new(pos, zzz).unwrap()).unwrap();
        assert!((d.probs()[0] - 1.0).abs() < 1e-12);
    }
    let plus = QuantumState::plus_product(6);
    let d = pauli_marginal_statistics(&plus, &PauliMeasurementSpec::new(2, zzz).unwrap()).unwrap();
    assert!(d.probs().iter().all(|p| (p - 0.125).abs() < 1e-12));
    let xxx = pauli_marginal_statistics(&plus, &PauliMeasurementSpec::new(1, [Pauli::X; 3]).unwrap()).unwrap();
    assert!((xxx.probs()[0] - 1.0).abs() < 1e-12);
    assert!(pauli_marginal_statistics(&plus, &PauliMeasurementSpec::new(4, zzz).unwrap()).is_err());
    assert!(PauliMeasurementSpec::new(0, [Pauli::I, Pauli::X, Pauli::X]).is_err());
}

/// `⟨ψ| Π_k (I + s_k P_k)/2 |ψ⟩` summed out from Pauli-string expectations.
fn projector_probability(psi: &QuantumState, positions: &[usize], paulis: &[Pauli], outcome: usize, n: usize) -> f64 {
    let m = positions.len();
    let mut total = 0.0;
    for subset in 0..1usize << m {
        let mut ps = Vec::new();
        let mut qs = Vec::new();
        let mut sign = 1.0;
        for k in 0..m {
            if (subset >> k) & 1 == 1 {
                ps.push(paulis[k]);
                qs.push(positions[k]);
                if (outcome >> (m - 1 - k)) & 1 == 1 {
                    sign = -sign;
                }
            }
        }
        let ev = if ps.is_empty() {
            1.0
        } else {
            pauli_string_operator(&ps, &qs, n).unwrap().expectation(psi.amplitudes())
        };
        total += sign * ev;
    }
    total / f64::from(1u32 << m)
}

#[test]
fn marginals_match_projector_oracle() {
    let psi = random_state(5, 21);
    for (spec, dist) in all_window_statistics(&psi).unwrap() {
        let positions = [spec.position, spec.position + 1, spec.position + 2];
        for o in 0..8 {
            let oracle = projector_probability(&psi, &positions, &spec.paulis, o, 5);
            assert!((dist.probs()[o] - oracle).abs() <= 1e-10, "{} outcome {o}", spec.label());
        }
    }
}

#[test]
fn marginals_are_consistent_with_two_qubit_statistics() {
    let psi = random_state(6, 4);
    for spec in sample_pauli_measurement_set(6, 40, 9).unwrap() {
        let three = pauli_marginal_statistics(&psi, &spec).unwrap();
        let rho = partial_trace(&psi, &[spec.position, spec.position + 1], &[2; 6]).unwrap();
        let two = window_statistics(&rho, &spec.paulis[..2]).unwrap();
        for o in 0..4 {
            let summed = three.probs()[2 * o] + three.probs()[2 * o + 1];
            assert!((summed - two.probs()[o]).abs() <= 1e-10);
        }
        assert!((three.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn spec_index_round_trip() {
    for idx in 0..27 * 6 {
        let s = PauliMeasurementSpec::from_index(idx);
        assert_eq!(s.index(), idx);
    }
    assert_eq!(PauliMeasurementSpec::from_index(28).label(), "XXY@1");
}

#[test]
fn measurement_set_sampling() {
    let a = sample_pauli_measurement_set(12, 50, 7).unwrap();
    let b = sample_pauli_measurement_set(12, 50, 7).unwrap();
    assert_eq!(a, b);
    let distinct: std::collections::BTreeSet<_> = a.iter().collect();
    assert_eq!(distinct.len(), 50);
    assert_eq!(sample_pauli_measurement_set(12, 1, 3).unwrap().len(), 1);
    assert!(sample_pauli_measurement_set(4, 55, 0).is_err());
    assert_eq!(sample_pauli_measurement_set(4, 54, 0).unwrap().len(), 54);

    let differing = (0..20u64)
        .filter(|&s| sample_pauli_measurement_set(8, 50, s).unwrap() != sample_pauli_measurement_set(8, 50, s + 100).unwrap())
        .count();
    assert_eq!(differing, 20);
}

#[test]
fn full_basis_examples() {
    let zero = QuantumState::basis(64, 0).unwrap();
    let d = full_basis_statistics(&zero, &[Pauli::Z; 6]).unwrap();
    assert!((d.probs()[0] - 1.0).abs() < 1e-12);
    let plus = QuantumState::plus_product(2);
    let d = full_basis_statistics(&plus, &[Pauli::X; 2]).unwrap();
    assert!((d.probs()[0] - 1.0).abs() < 1e-12);
    assert!(full_basis_statistics(&plus, &[Pauli::X; 3]).is_err());
}

#[test]
fn full_basis_matches_projector_oracle() {
    let psi = random_state(4, 5);
    let positions = [0, 1, 2, 3];
    for basis in all_full_bases(4) {
        let d = full_basis_statistics(&psi, &basis).unwrap();
        for o in 0..16 {
            let oracle = projector_probability(&psi, &positions, &basis, o, 4);
            assert!((d.probs()[o] - oracle).abs() <= 1e-10);
        }
    }
}

#[test]
fn full_basis_sampling() {
    assert_eq!(all_full_bases(6).len(), 729);
    let a = sample_full_basis_set(6, 5, 1).unwrap();
    assert_eq!(a, sample_full_basis_set(6, 5, 1).unwrap());
    let distinct: std::collections::BTreeSet<_> = a.iter().collect();
    assert_eq!(distinct.len(), 5);
    assert!(sample_full_basis_set(2, 10, 0).is_err());
}

#[test]
fn grid_ground_states_are_finite_along_a_path() {
    let g = XxzGrid::default();
    let mut p = g.params(0, 0, 8);
    let mut last = None;
    for step in 0..20 {
        let h = build_xxz_hamiltonian(&p).unwrap();
        let h = h.with_diagonal(&longitudinal_field(8, SYMMETRY_BREAKING_FIELD)).unwrap();
        let gs = ground_state(&h, step).unwrap();
        assert!(gs.energy.is_finite());
        if let Some(prev) = last {
            let diff: f64 = gs.energy - prev;
            // Bond couplings move by ≤ 0.15 and δ by ≤ 0.2 per step.
            assert!(diff.abs() < 8.0);
        }
        last = Some(gs.energy);
        p = apply_action_xxz(&p, 4, &g).unwrap();
    }
}
