//! Dense complex matrix helpers shared by the state types.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &Vector, b: &Vector) -> Vector {
    let mut out = Vector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Bit of qubit `pos` (0 = most significant) in basis index `index` of an `n`-qubit register.
#[inline]
pub fn bit(index: usize, pos: usize, n: usize) -> usize {
    (index >> (n - 1 - pos)) & 1
}

/// Sub-index formed by the bits of `index` at `targets`, first target most significant.
#[inline]
pub fn sub_index(index: usize, targets: &[usize], n: usize) -> usize {
    targets
        .iter()
        .fold(0, |acc, &t| (acc << 1) | bit(index, t, n))
}

/// Lift a `2^k x 2^k` operator acting on `targets` to the full `n`-qubit space.
pub fn embed(op: &Matrix, targets: &[usize], n: usize) -> Matrix {
    let dim = 1 << n;
    let mut mask = 0usize;
    for &t in targets {
        mask |= 1 << (n - 1 - t);
    }
    let mut full = Matrix::zeros(dim, dim);
    for i in 0..dim {
        let si = sub_index(i, targets, n);
        for j in 0..dim {
            if (i & !mask) != (j & !mask) {
                continue;
            }
            full[(i, j)] = op[(si, sub_index(j, targets, n))];
        }
    }
    full
}

/// Maximum entrywise deviation of `m` from `m^dagger`.
pub fn hermiticity_defect(m: &Matrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Maximum entrywise deviation of `u^dagger u` from the identity.
pub fn unitarity_defect(u: &Matrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn trace(m: &Matrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn outer(v: &Vector) -> Matrix {
    v * v.adjoint()
}

pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Projector onto computational basis state `b` of one qubit.
pub fn basis_projector(b: usize) -> Matrix {
    let mut m = Matrix::zeros(2, 2);
    m[(b, b)] = c(1.0, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_matches_kron_for_leading_target() {
        let x = pauli_x();
        let full = embed(&x, &[0], 2);
        assert!(max_abs_diff(&full, &kron(&x, &identity(2))) < 1e-15);
        let full = embed(&x, &[1], 2);
        assert!(max_abs_diff(&full, &kron(&identity(2), &x)) < 1e-15);
    }

    #[test]
    fn embed_respects_target_order() {
        // CNOT with control on qubit 1 and target on qubit 0 of a 2-qubit register.
        let mut cnot = Matrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cnot[(i, j)] = c(1.0, 0.0);
        }
        let full = embed(&cnot, &[1, 0], 2);
        // |01> (qubit1 = 1) -> |11>
        assert_eq!(full[(3, 1)], c(1.0, 0.0));
        assert_eq!(full[(0, 0)], c(1.0, 0.0));
        assert_eq!(full[(2, 2)], c(1.0, 0.0));
        assert_eq!(full[(1, 3)], c(1.0, 0.0));
    }

    #[test]
    fn paulis_are_unitary_and_hermitian() {
        for p in [pauli_x(), pauli_y(), pauli_z()] {
            assert!(unitarity_defect(&p) < 1e-15);
            assert!(hermiticity_defect(&p) < 1e-15);
        }
    }
}
