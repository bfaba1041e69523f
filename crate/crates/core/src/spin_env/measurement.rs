use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{partial_trace, DensityMatrix, OutcomeDistribution, Pauli, QuantumState};
use crate::seed::rng_from_seed;

/// Single-qubit Pauli measurements on the window `position..position+3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliMeasurementSpec {
    pub position: usize,
    pub paulis: [Pauli; 3],
}

impl PauliMeasurementSpec {
    pub fn new(position: usize, paulis: [Pauli; 3]) -> Result<Self> {
        if paulis.contains(&Pauli::I) {
            return Err(Error::validation("window measurements use X, Y or Z on every qubit"));
        }
        Ok(Self { position, paulis })
    }

    /// Dense index in `[0, 27·(L−2))`, position-major.
    pub fn index(&self) -> usize {
        let local = self
            .paulis
            .iter()
            .fold(0, |acc, p| acc * 3 + p.xyz_index().expect("validated non-identity"));
        self.position * 27 + local
    }

    pub fn from_index(index: usize) -> Self {
        let position = index / 27;
        let mut local = index % 27;
        let mut paulis = [Pauli::X; 3];
        for slot in (0..3).rev() {
            paulis[slot] = Pauli::XYZ[local % 3];
            local /= 3;
        }
        Self { position, paulis }
    }

    pub fn label(&self) -> String {
        let s: String = self.paulis.iter().map(|p| p.symbol()).collect();
        format!("{}@{}", s, self.position)
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        if n_qubits < 3 || self.position > n_qubits - 3 {
            return Err(Error::validation(format!(
                "window at {} does not fit in {n_qubits} qubits",
                self.position
            )));
        }
        Ok(())
    }
}

fn qubit_count(state: &QuantumState) -> Result<usize> {
    let dim = state.basis_size();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::validation(format!("dimension {dim} is not a qubit register")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Rows are `⟨e₊|`, `⟨e₋|` for the eigenbasis of `p`.
fn eigen_rows(p: Pauli) -> [[C64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    match p {
        Pauli::I | Pauli::Z => [[C64::new(1.0, 0.0), z], [z, C64::new(1.0, 0.0)]],
        Pauli::X => [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]],
        // |±i⟩ = (|0⟩ ± i|1⟩)/√2, so ⟨±i| = (⟨0| ∓ i⟨1|)/√2.
        Pauli::Y => [[C64::new(h, 0.0), C64::new(0.0, -h)], [C64::new(h, 0.0), C64::new(0.0, h)]],
    }
}

/// Outcome distribution of measuring `paulis` on the qubits of `rho`
/// (one Pauli per qubit). Outcome index bit `k` (most significant first) is 0
/// for eigenvalue +1 and 1 for −1.
pub fn window_statistics(rho: &DensityMatrix, paulis: &[Pauli]) -> Result<OutcomeDistribution> {
    let n = paulis.len();
    let dim = 1usize << n;
    if rho.dimension() != dim {
        return Err(Error::validation("window size does not match reduced state"));
    }
    let rows: Vec<[[C64; 2]; 2]> = paulis.iter().map(|&p| eigen_rows(p)).collect();
    let mut u = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for o in 0..dim {
        for b in 0..dim {
            let mut amp = C64::new(1.0, 0.0);
            for (k, r) in rows.iter().enumerate() {
                let shift = n - 1 - k;
                amp *= r[(o >> shift) & 1][(b >> shift) & 1];
            }
            u[(o, b)] = amp;
        }
    }
    let rotated = &u * rho.matrix() * u.adjoint();
    OutcomeDistribution::from_weights((0..dim).map(|o| rotated[(o, o)].re.max(0.0)).collect())
}

/// Joint statistics of three single-qubit Pauli measurements on a window.
pub fn pauli_marginal_statistics(state: &QuantumState, spec: &PauliMeasurementSpec) -> Result<OutcomeDistribution> {
    let n = qubit_count(state)?;
    spec.check(n)?;
    let keep = [spec.position, spec.position + 1, spec.position + 2];
    let rho = partial_trace(state, &keep, &vec![2; n])?;
    window_statistics(&rho, &spec.paulis)
}

/// Statistics of all `27·(L−2)` window measurements, ordered by
/// [`PauliMeasurementSpec::index`]. Each window's reduced state is formed once.
pub fn all_window_statistics(state: &QuantumState) -> Result<Vec<(PauliMeasurementSpec, OutcomeDistribution)>> {
    let n = qubit_count(state)?;
    if n < 3 {
        return Err(Error::validation("need at least 3 qubits for window measurements"));
    }
    let mut out = Vec::with_capacity(27 * (n - 2));
    for position in 0..n - 2 {
        let rho = partial_trace(state, &[position, position + 1, position + 2], &vec![2; n])?;
        for local in 0..27 {
            let spec = PauliMeasurementSpec::from_index(position * 27 + local);
            out.push((spec, window_statistics(&rho, &spec.paulis)?));
        }
    }
    Ok(out)
}

/// `count` distinct window measurements drawn without replacement.
pub fn sample_pauli_measurement_set(n_qubits: usize, count: usize, seed: u64) -> Result<Vec<PauliMeasurementSpec>> {
    if n_qubits < 3 {
        return Err(Error::validation("need at least 3 qubits for window measurements"));
    }
    let available = 27 * (n_qubits - 2);
    if count == 0 || count > available {
        return Err(Error::validation(format!(
            "requested {count} measurements, {available} distinct ones exist"
        )));
    }
    let mut all: Vec<usize> = (0..available).collect();
    all.shuffle(&mut rng_from_seed(seed));
    Ok(all[..count].iter().map(|&i| PauliMeasurementSpec::from_index(i)).collect())
}

/// Statistics of measuring every qubit in the given product Pauli basis.
/// Outcome bit ordering follows qubit order, 0 meaning eigenvalue +1.
pub fn full_basis_statistics(state: &QuantumState, basis: &[Pauli]) -> Result<OutcomeDistribution> {
    let n = qubit_count(state)?;
    if basis.len() != n {
        return Err(Error::validation(format!("basis has {} entries for {n} qubits", basis.len())));
    }
    let mut amps = state.amplitudes().to_vec();
    for (q, &p) in basis.iter().enumerate() {
        if matches!(p, Pauli::Z | Pauli::I) {
            continue;
        }
        let r = eigen_rows(p);
        let stride = 1usize << (n - 1 - q);
        for base in 0..amps.len() {
            if base & stride != 0 {
                continue;
            }
            let (a0, a1) = (amps[base], amps[base | stride]);
            amps[base] = r[0][0] * a0 + r[0][1] * a1;
            amps[base | stride] = r[1][0] * a0 + r[1][1] * a1;
        }
    }
    OutcomeDistribution::from_weights(amps.iter().map(|a| a.norm_sqr()).collect())
}

/// Every product basis over `{X, Y, Z}^n`, indexed base-3 with qubit 0 most
/// significant.
pub fn all_full_bases(n_qubits: usize) -> Vec<Vec<Pauli>> {
    let total = 3usize.pow(n_qubits as u32);
    (0..total).map(|i| full_basis_from_index(i, n_qubits)).collect()
}

pub(crate) fn full_basis_from_index(mut index: usize, n_qubits: usize) -> Vec<Pauli> {
    let mut out = vec![Pauli::X; n_qubits];
    for q in (0..n_qubits).rev() {
        out[q] = Pauli::XYZ[index % 3];
        index /= 3;
    }
    out
}

/// `count` distinct product bases drawn without replacement.
pub fn sample_full_basis_set(n_qubits: usize, count: usize, seed: u64) -> Result<Vec<Vec<Pauli>>> {
    let total = 3usize.pow(n_qubits as u32);
    if count == 0 || count > total {
        return Err(Error::validation(format!("requested {count} bases, {total} exist")));
    }
    let mut idx: Vec<usize> = (0..total).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    Ok(idx[..count].iter().map(|&i| full_basis_from_index(i, n_qubits)).collect())
}
