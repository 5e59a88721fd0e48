use rand::Rng;

use super::linalg::{
    self, bit, c, embed, hermiticity_defect, kron, kron_vec, min_eigenvalue, sub_index,
    unitarity_defect, Matrix, Vector, C64, TOL,
};
use super::register::{QubitLabel, Register};
use crate::error::{Error, Result};

/// A unitary on `k` qubits.
#[derive(Clone, Debug)]
pub struct Unitary {
    matrix: Matrix,
}

impl Unitary {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_power_of_two() || matrix.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "unitary must be square with power-of-two dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = unitarity_defect(&matrix);
        if defect > TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn qubits(&self) -> usize {
        self.matrix.nrows().trailing_zeros() as usize
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn then(&self, next: &Unitary) -> Result<Unitary> {
        Unitary::new(next.matrix() * &self.matrix)
    }

    pub fn tensor(&self, other: &Unitary) -> Unitary {
        Unitary {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }
}

/// Orthonormal single-qubit measurement basis.
///
/// Column `k` of the stored matrix is the basis vector reported as outcome `k`.
#[derive(Clone, Debug)]
pub struct MeasurementBasis {
    vectors: Matrix,
}

impl MeasurementBasis {
    pub fn new(vectors: Matrix) -> Result<Self> {
        if vectors.nrows() != 2 || vectors.ncols() != 2 {
            return Err(Error::InvalidArgument(
                "measurement basis must be 2x2".into(),
            ));
        }
        let defect = unitarity_defect(&vectors);
        if defect > TOL {
            return Err(Error::InvalidArgument(format!(
                "measurement basis not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self { vectors })
    }

    /// |0>, |1> (H/V for photons, down/up for atoms).
    pub fn computational() -> Self {
        Self {
            vectors: linalg::identity(2),
        }
    }

    /// |D> = (|H> + |V>)/sqrt2 as outcome 0, |A> = (|H> - |V>)/sqrt2 as outcome 1.
    pub fn diagonal() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            vectors: Matrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]),
        }
    }

    /// Eigenbasis of a Hermitian single-qubit observable with eigenvalues +1 and -1.
    /// Outcome 0 is the +1 eigenvector.
    pub fn eigenbasis_of(observable: &Matrix) -> Result<Self> {
        if observable.nrows() != 2 || hermiticity_defect(observable) > TOL {
            return Err(Error::InvalidArgument(
                "observable must be a 2x2 Hermitian matrix".into(),
            ));
        }
        let eig = observable.clone().symmetric_eigen();
        let (plus, minus) = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
            (0, 1)
        } else {
            (1, 0)
        };
        if (eig.eigenvalues[plus] - 1.0).abs() > 1e-9 || (eig.eigenvalues[minus] + 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidArgument(
                "observable eigenvalues must be +1 and -1".into(),
            ));
        }
        let mut vectors = Matrix::zeros(2, 2);
        vectors.set_column(0, &eig.eigenvectors.column(plus));
        vectors.set_column(1, &eig.eigenvectors.column(minus));
        Self::new(vectors)
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn projector(&self, outcome: usize) -> Matrix {
        let v = self.vectors.column(outcome).into_owned();
        &v * v.adjoint()
    }
}

/// Result of a sampled projective measurement.
#[derive(Clone, Debug)]
pub struct Measurement<S> {
    /// Outcome bits over the measured targets, first target most significant.
    pub outcome: usize,
    pub probability: f64,
    pub state: S,
}

/// Operations shared by pure and mixed register states.
pub trait QuantumState: Sized {
    fn register(&self) -> &Register;

    /// Kronecker product; `self`'s qubits come first.
    fn tensor(&self, other: &Self) -> Result<Self>;

    fn apply_unitary(&self, u: &Unitary, targets: &[QubitLabel]) -> Result<Self>;

    /// Probabilities of every outcome pattern over `targets`, indexed as in [`Measurement::outcome`].
    fn outcome_probabilities(
        &self,
        bases: &[MeasurementBasis],
        targets: &[QubitLabel],
    ) -> Result<Vec<f64>>;

    /// Deterministic projection onto one outcome; returns its probability and the renormalized state.
    fn project(
        &self,
        bases: &[MeasurementBasis],
        targets: &[QubitLabel],
        outcome: usize,
    ) -> Result<(f64, Self)>;

    fn measure_projective<R: Rng + ?Sized>(
        &self,
        bases: &[MeasurementBasis],
        targets: &[QubitLabel],
        rng: &mut R,
    ) -> Result<Measurement<Self>> {
        let probs = self.outcome_probabilities(bases, targets)?;
        let outcome = sample_index(&probs, rng.random::<f64>());
        let (probability, state) = self.project(bases, targets, outcome)?;
        Ok(Measurement {
            outcome,
            probability,
            state,
        })
    }
}

/// Inverse-CDF draw from a (possibly slightly unnormalized) discrete distribution.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if target < acc {
            return i;
        }
    }
    last_nonzero
}

fn check_bases(bases: &[MeasurementBasis], targets: &[QubitLabel]) -> Result<()> {
    if bases.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "{} bases supplied for {} targets",
            bases.len(),
            targets.len()
        )));
    }
    Ok(())
}

fn target_unitary(u: &Unitary, targets: &[QubitLabel], register: &Register) -> Result<Matrix> {
    if u.qubits() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "{}-qubit unitary applied to {} targets",
            u.qubits(),
            targets.len()
        )));
    }
    let pos = register.positions(targets)?;
    Ok(embed(u.matrix(), &pos, register.len()))
}

/// Full-register projector onto one outcome pattern.
fn outcome_projector(
    bases: &[MeasurementBasis],
    targets: &[QubitLabel],
    outcome: usize,
    register: &Register,
) -> Result<Matrix> {
    let k = targets.len();
    if outcome >= 1 << k {
        return Err(Error::OutOfRange {
            index: outcome,
            bound: 1 << k,
        });
    }
    let mut local = linalg::identity(1);
    for (i, basis) in bases.iter().enumerate() {
        let b = (outcome >> (k - 1 - i)) & 1;
        local = kron(&local, &basis.projector(b));
    }
    let pos = register.positions(targets)?;
    Ok(embed(&local, &pos, register.len()))
}

/// Matrix whose columns are the product measurement basis, embedded in the register.
fn basis_change(
    bases: &[MeasurementBasis],
    targets: &[QubitLabel],
    register: &Register,
) -> Result<Matrix> {
    let mut local = linalg::identity(1);
    for basis in bases {
        local = kron(&local, basis.vectors());
    }
    let pos = register.positions(targets)?;
    Ok(embed(&local, &pos, register.len()))
}

fn marginal(diag: impl Iterator<Item = f64>, targets: &[usize], n: usize) -> Vec<f64> {
    let mut probs = vec![0.0; 1 << targets.len()];
    for (i, p) in diag.enumerate() {
        probs[sub_index(i, targets, n)] += p;
    }
    probs
}

/// Pure state of an ordered register.
#[derive(Clone, Debug)]
pub struct StateVector {
    register: Register,
    amplitudes: Vector,
}

impl StateVector {
    pub fn new(register: Register, amplitudes: Vector) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for a {}-qubit register",
                amplitudes.len(),
                register.len()
            )));
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            register,
            amplitudes,
        })
    }

    /// Normalizes `amplitudes` before constructing.
    pub fn normalized(register: Register, amplitudes: Vector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(register, amplitudes / C64::new(norm, 0.0))
    }

    /// Computational basis state with the given bits (first label first).
    pub fn basis(register: Register, bits: &[usize]) -> Result<Self> {
        if bits.len() != register.len() {
            return Err(Error::InvalidState("bit pattern length mismatch".into()));
        }
        let index = bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1));
        let mut amps = Vector::zeros(register.dim());
        amps[index] = c(1.0, 0.0);
        Self::new(register, amps)
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            register: self.register.clone(),
            matrix: linalg::outer(&self.amplitudes),
        }
    }

    /// |<self|other>|^2 for states on the same register.
    pub fn overlap_squared(&self, other: &StateVector) -> Result<f64> {
        if self.register != other.register {
            return Err(Error::RegisterMismatch(
                "overlap requires identical registers".into(),
            ));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm_sqr())
    }
}

impl QuantumState for StateVector {
    fn register(&self) -> &Register {
        &self.register
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        let register = self.register.concat(&other.register)?;
        Ok(Self {
            register,
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
        })
    }

    fn apply_unitary(&self, u: &Unitary, targets: &[QubitLabel]) -> Result<Self> {
        let full = target_unitary(u, targets, &self.register)?;
        Ok(Self {
            register: self.register.clone(),
            amplitudes: full * &self.amplitudes,
        })
    }

    fn outcome_probabilities(
        &self,
        bases: &[MeasurementBasis],
        targets: &[QubitLabel],
    ) -> Result<Vec<f64>> {
        check_bases(bases, targets)?;
        let change = basis_change(bases, targets, &self.register)?;
        let rotated = change.adjoint() * &self.amplitudes;
        let pos = self.register.positions(targets)?;
        Ok(marginal(
            rotated.iter().map(|a| a.norm_sqr()),
            &pos,
            self.register.len(),
        ))
    }

    fn project(
        &self,
        bases: &[MeasurementBasis],
        targets: &[QubitLabel],
        outcome: usize,
    ) -> Result<(f64, Self)> {
        check_bases(bases, targets)?;
        let proj = outcome_projector(bases, targets, outcome, &self.register)?;
        let v = proj * &self.amplitudes;
        let p = v.norm_squared();
        if p <= 1e-15 {
            return Err(Error::ZeroProbability);
        }
        Ok((
            p,
            Self {
                register: self.register.clone(),
                amplitudes: v / C64::new(p.sqrt(), 0.0),
            },
        ))
    }
}

/// Mixed state of an ordered register.
///
/// Invariants: Hermitian, unit trace and positive semidefinite, each within `1e-9`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    register: Register,
    matrix: Matrix,
}

impl DensityMatrix {
    pub fn new(register: Register, matrix: Matrix) -> Result<Self> {
        let dm = Self::new_unchecked(register, matrix)?;
        dm.validate()?;
        Ok(dm)
    }

    /// Shape check only; used for intermediate results that are valid by construction.
    pub(crate) fn new_unchecked(register: Register, matrix: Matrix) -> Result<Self> {
        if matrix.nrows() != register.dim() || matrix.ncols() != register.dim() {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix for a {}-qubit register",
                matrix.nrows(),
                matrix.ncols(),
                register.len()
            )));
        }
        Ok(Self { register, matrix })
    }

    /// Divides a positive operator by its trace.
    pub fn from_unnormalized(register: Register, matrix: Matrix) -> Result<Self> {
        let tr = linalg::trace(&matrix).re;
        if tr <= 1e-300 {
            return Err(Error::ZeroProbability);
        }
        Self::new_unchecked(register, matrix / C64::new(tr, 0.0))
    }

    pub fn maximally_mixed(register: Register) -> Self {
        let dim = register.dim();
        Self {
            matrix: linalg::identity(dim) / C64::new(dim as f64, 0.0),
            register,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_defect(&self.matrix);
        if herm > TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = linalg::trace(&self.matrix);
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = min_eigenvalue(&self.matrix);
        if min_eig < -TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.matrix * &self.matrix)).re
    }

    /// `(1 - weight) rho + weight I/d`.
    pub fn depolarize(&self, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing weight {weight} outside [0, 1]"
            )));
        }
        let mixed = Self::maximally_mixed(self.register.clone());
        self.mix(&mixed, weight)
    }

    /// `(1 - weight) self + weight other`.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<Self> {
        if self.register != other.register {
            return Err(Error::RegisterMismatch("mixing states on different registers".into()));
        }
        Ok(Self {
            register: self.register.clone(),
            matrix: &self.matrix * C64::new(1.0 - weight, 0.0)
                + &other.matrix * C64::new(weight, 0.0),
        })
    }

    /// Multiplies coherences between the two basis states of `label` by `factor`.
    pub fn dephase(&self, label: &QubitLabel, factor: f64) -> Result<Self> {
        let pos = self.register.position(label)?;
        let n = self.register.len();
        let mut matrix = self.matrix.clone();
        for i in 0..matrix.nrows() {
            for j in 0..matrix.ncols() {
                if bit(i, pos, n) != bit(j, pos, n) {
                    matrix[(i, j)] *= factor;
                }
            }
        }
        Ok(Self {
            register: self.register.clone(),
            matrix,
        })
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[QubitLabel]) -> Result<Self> {
        let n = self.register.len();
        let keep_pos = self.register.positions(keep)?;
        let traced: Vec<usize> = (0..n).filter(|p| !keep_pos.contains(p)).collect();
        let k = keep_pos.len();
        let mut out = Matrix::zeros(1 << k, 1 << k);
        for i in 0..self.matrix.nrows() {
            let ti = sub_index(i, &traced, n);
            let ki = sub_index(i, &keep_pos, n);
            for j in 0..self.matrix.ncols() {
                if sub_index(j, &traced, n) != ti {
                    continue;
                }
                out[(ki, sub_index(j, &keep_pos, n))] += self.matrix[(i, j)];
            }
        }
        Ok(Self {
            register: Register::new(keep.to_vec())?,
            matrix: out,
        })
    }

    /// Reorders qubits to match `order`, which must be a permutation of the register.
    pub fn permute(&self, order: &Register) -> Result<Self> {
        if order.len() != self.register.len() {
            return Err(Error::RegisterMismatch("permutation changes qubit count".into()));
        }
        let n = order.len();
        // src_pos[k] = position in self of the qubit that lands at position k.
        let src_pos = self.register.positions(order.labels())?;
        let map = |idx: usize| -> usize {
            (0..n).fold(0, |acc, k| (acc << 1) | bit(idx, src_pos[k], n))
        };
        let dim = self.register.dim();
        let mut out = Matrix::zeros(dim, dim);
        for i in 0..dim {
            let ni = map(i);
            for j in 0..dim {
                out[(ni, map(j))] = self.matrix[(i, j)];
            }
        }
        Ok(Self {
            register: order.clone(),
            matrix: out,
        })
    }

    pub fn relabel(&self, from: &QubitLabel, to: QubitLabel) -> Result<Self> {
        Ok(Self {
            register: self.register.relabel(from, to)?,
            matrix: self.matrix.clone(),
        })
    }

    /// Applies an arbitrary operator `K rho K^dagger` without renormalizing.
    pub(crate) fn sandwich(&self, op: &Matrix, targets: &[QubitLabel]) -> Result<Matrix> {
        let pos = self.register.positions(targets)?;
        let full = embed(op, &pos, self.register.len());
        Ok(&full * &self.matrix * full.adjoint())
    }
}

impl QuantumState for DensityMatrix {
    fn register(&self) -> &Register {
        &self.register
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        let register = self.register.concat(&other.register)?;
        Ok(Self {
            register,
            matrix: kron(&self.matrix, &other.matrix),
        })
    }

    fn apply_unitary(&self, u: &Unitary, targets: &[QubitLabel]) -> Result<Self> {
        let full = target_unitary(u, targets, &self.register)?;
        Ok(Self {
            register: self.register.clone(),
            matrix: &full * &self.matrix * full.adjoint(),
        })
    }

    fn outcome_probabilities(
        &self,
        bases: &[MeasurementBasis],
        targets: &[QubitLabel],
    ) -> Result<Vec<f64>> {
        check_bases(bases, targets)?;
        let change = basis_change(bases, targets, &self.register)?;
        let rotated = change.adjoint() * &self.matrix * &change;
        let pos = self.register.positions(targets)?;
        Ok(marginal(
            rotated.diagonal().iter().map(|d| d.re),
            &pos,
            self.register.len(),
        ))
    }

    fn project(
        &self,
        bases: &[MeasurementBasis],
        targets: &[QubitLabel],
        outcome: usize,
    ) -> Result<(f64, Self)> {
        check_bases(bases, targets)?;
        let proj = outcome_projector(bases, targets, outcome, &self.register)?;
        let m = &proj * &self.matrix * &proj;
        let p = linalg::trace(&m).re;
        if p <= 1e-15 {
            return Err(Error::ZeroProbability);
        }
        Ok((
            p,
            Self {
                register: self.register.clone(),
                matrix: m / C64::new(p, 0.0),
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::register::NodeId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reg(n: usize) -> Register {
        Register::new(
            (0..n)
                .map(|i| QubitLabel::photon(NodeId::I, i as u32))
                .collect(),
        )
        .unwrap()
    }

    fn single(label: QubitLabel, amps: [C64; 2]) -> StateVector {
        StateVector::new(
            Register::new(vec![label]).unwrap(),
            Vector::from_row_slice(&amps),
        )
        .unwrap()
    }

    #[test]
    fn h_tensor_v_is_basis_hv() {
        let h = single(QubitLabel::photon(NodeId::I, 0), [c(1., 0.), c(0., 0.)]);
        let v = single(QubitLabel::photon(NodeId::II, 0), [c(0., 0.), c(1., 0.)]);
        let hv = h.tensor(&v).unwrap();
        let expected = [0.0, 1.0, 0.0, 0.0];
        for (a, e) in hv.amplitudes().iter().zip(expected) {
            assert!((a - c(e, 0.)).norm() < 1e-15);
        }
    }

    #[test]
    fn mixed_tensor_mixed_is_quarter_identity() {
        let a = DensityMatrix::maximally_mixed(Register::new(vec![QubitLabel::atom(NodeId::I)]).unwrap());
        let b = DensityMatrix::maximally_mixed(Register::new(vec![QubitLabel::atom(NodeId::II)]).unwrap());
        let ab = a.tensor(&b).unwrap();
        let expected = linalg::identity(4) / c(4.0, 0.0);
        assert!(linalg::max_abs_diff(ab.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn overlapping_tensor_fails() {
        let a = DensityMatrix::maximally_mixed(reg(1));
        assert!(matches!(a.tensor(&a), Err(Error::OverlappingLabels(_))));
    }

    #[test]
    fn sigma_x_flips_h() {
        let l = QubitLabel::photon(NodeId::I, 0);
        let h = single(l, [c(1., 0.), c(0., 0.)]);
        let x = Unitary::new(linalg::pauli_x()).unwrap();
        let v = h.apply_unitary(&x, &[l]).unwrap();
        assert!((v.amplitudes()[1] - c(1., 0.)).norm() < 1e-15);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Matrix::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]);
        assert!(matches!(Unitary::new(m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn diagonal_state_measured_hv_is_even() {
        let l = QubitLabel::photon(NodeId::I, 0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d = single(l, [c(s, 0.), c(s, 0.)]);
        let p = d
            .outcome_probabilities(&[MeasurementBasis::computational()], &[l])
            .unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let p = d
            .to_density()
            .outcome_probabilities(&[MeasurementBasis::diagonal()], &[l])
            .unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_projection_errors() {
        let l = QubitLabel::photon(NodeId::I, 0);
        let h = single(l, [c(1., 0.), c(0., 0.)]);
        assert!(matches!(
            h.project(&[MeasurementBasis::computational()], &[l], 1),
            Err(Error::ZeroProbability)
        ));
        assert!(matches!(
            h.to_density()
                .project(&[MeasurementBasis::computational()], &[l], 1),
            Err(Error::ZeroProbability)
        ));
    }

    #[test]
    fn partial_trace_of_bell_is_mixed() {
        let r = reg(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(
            r.clone(),
            Vector::from_row_slice(&[c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]),
        )
        .unwrap()
        .to_density();
        let reduced = bell.partial_trace(&r.labels()[1..]).unwrap();
        assert!(linalg::max_abs_diff(reduced.matrix(), &(linalg::identity(2) * c(0.5, 0.))) < 1e-15);
    }

    #[test]
    fn permute_swaps_qubits() {
        let r = reg(2);
        let hv = StateVector::basis(r.clone(), &[0, 1]).unwrap().to_density();
        let swapped = Register::new(vec![r.labels()[1], r.labels()[0]]).unwrap();
        let p = hv.permute(&swapped).unwrap();
        // qubit order (1, 0): basis |1 0> = index 2
        assert!((p.matrix()[(2, 2)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sampled_measurement_frequencies() {
        let l = QubitLabel::photon(NodeId::I, 0);
        let st = single(l, [c(0.6, 0.), c(0., 0.8)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut ones = 0;
        for _ in 0..n {
            let m = st
                .measure_projective(&[MeasurementBasis::computational()], &[l], &mut rng)
                .unwrap();
            ones += m.outcome;
        }
        let p = 0.64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(((ones as f64 / n as f64) - p).abs() < 5.0 * sigma);
    }

    #[test]
    fn sample_index_skips_zero_tail() {
        assert_eq!(sample_index(&[0.5, 0.5, 0.0], 0.999_999_999_999), 1);
        assert_eq!(sample_index(&[0.0, 1.0], 0.0), 1);
    }
}
