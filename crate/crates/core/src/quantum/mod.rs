//! Dense linear algebra over small registers of labeled qubits.
//!
//! # Ordering convention
//!
//! A [`Register`] is an ordered list of labels. The basis index of a
//! computational state `|b_0 b_1 ... b_{n-1}>` is `sum_k b_k 2^(n-1-k)`, so the
//! first label is the most significant bit and tensor products follow the
//! standard Kronecker convention: `(A (x) B)[i*dim_b + j]`. Every module in the
//! crate builds registers with this rule.
//!
//! Bit 0 is `|H>` for a photon and `|down>` for an atomic memory; bit 1 is
//! `|V>` / `|up>`. Circular polarizations are expressed in the H/V basis as
//! `|sigma+> = (|H> + i|V>)/sqrt2` and `|sigma-> = (|H> - i|V>)/sqrt2`.
//!
//! Registers are limited to what fits comfortably in dense storage (the
//! largest used here has six qubits).

pub mod linalg;
mod observable;
mod register;
mod state;

pub use linalg::{Matrix, Vector, C64, TOL};
pub use observable::{equatorial, expectation, m_observable, pure_state_fidelity, Observable};
pub use register::{NodeId, QubitKind, QubitLabel, Register};
pub use state::{
    sample_index, DensityMatrix, Measurement, MeasurementBasis, QuantumState, StateVector, Unitary,
};

use linalg::c;

/// `|sigma+>` and `|sigma->` as H/V amplitudes.
pub fn circular_plus() -> Vector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Vector::from_row_slice(&[c(s, 0.0), c(0.0, s)])
}

pub fn circular_minus() -> Vector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Vector::from_row_slice(&[c(s, 0.0), c(0.0, -s)])
}

/// Basis with `|sigma+>` as outcome 0 and `|sigma->` as outcome 1.
pub fn circular_basis() -> MeasurementBasis {
    let mut m = Matrix::zeros(2, 2);
    m.set_column(0, &circular_plus());
    m.set_column(1, &circular_minus());
    MeasurementBasis::new(m).expect("circular basis is orthonormal")
}
