use std::f64::consts::PI;

use super::linalg::{self, embed, hermiticity_defect, kron, Matrix, C64, TOL};
use super::register::QubitLabel;
use super::state::{DensityMatrix, QuantumState, StateVector};
use crate::error::{Error, Result};

/// Product of single-qubit Hermitian factors over a subset of a register.
#[derive(Clone, Debug)]
pub struct Observable {
    factors: Vec<(QubitLabel, Matrix)>,
}

impl Observable {
    pub fn new(factors: Vec<(QubitLabel, Matrix)>) -> Result<Self> {
        for (i, (label, m)) in factors.iter().enumerate() {
            if m.nrows() != 2 || m.ncols() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "factor on {label} is not 2x2"
                )));
            }
            let defect = hermiticity_defect(m);
            if defect > TOL {
                return Err(Error::InvalidArgument(format!(
                    "factor on {label} is not Hermitian (defect {defect:.3e})"
                )));
            }
            if factors[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::OverlappingLabels(*label));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[(QubitLabel, Matrix)] {
        &self.factors
    }

    pub fn targets(&self) -> Vec<QubitLabel> {
        self.factors.iter().map(|(l, _)| *l).collect()
    }

    /// Tensor product of the factors in their listed order.
    pub fn local_matrix(&self) -> Matrix {
        self.factors
            .iter()
            .fold(linalg::identity(1), |acc, (_, m)| kron(&acc, m))
    }
}

/// `cos(n pi / N) sigma_x + sin(n pi / N) sigma_y`.
pub fn m_observable(n: usize, count: usize) -> Result<Matrix> {
    if n >= count {
        return Err(Error::OutOfRange {
            index: n,
            bound: count,
        });
    }
    Ok(equatorial(n as f64 * PI / count as f64))
}

/// `cos(theta) sigma_x + sin(theta) sigma_y`.
pub fn equatorial(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    linalg::pauli_x() * C64::new(c, 0.0) + linalg::pauli_y() * C64::new(s, 0.0)
}

/// `tr(rho O)`; the imaginary residue is discarded after checking it is negligible.
pub fn expectation(rho: &DensityMatrix, observable: &Observable) -> Result<f64> {
    let pos = rho.register().positions(&observable.targets())?;
    let full = embed(&observable.local_matrix(), &pos, rho.register().len());
    let value = linalg::trace(&(rho.matrix() * full));
    if value.im.abs() > 1e-9 * value.re.abs().max(1.0) {
        return Err(Error::InvalidState(format!(
            "expectation has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `<psi|rho|psi>`.
pub fn pure_state_fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.register() != psi.register() {
        return Err(Error::RegisterMismatch(
            "fidelity requires identical registers".into(),
        ));
    }
    let a = psi.amplitudes();
    let value = a.dotc(&(rho.matrix() * a));
    Ok(value.re.clamp(0.0, 1.0))
}
