//! Few-photon Fock states of indistinguishable photons in linear optics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::quantum::linalg::c;
use crate::quantum::{Matrix, Vector, C64};

/// Superposition of occupation-number patterns over a fixed set of modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    modes: usize,
    amplitudes: BTreeMap<Vec<u8>, C64>,
}

impl FockState {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> &BTreeMap<Vec<u8>, C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[u8]) -> C64 {
        self.amplitudes.get(occupation).copied().unwrap_or(c(0.0, 0.0))
    }

    pub fn probability(&self, occupation: &[u8]) -> f64 {
        self.amplitude(occupation).norm_sqr()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Keeps patterns with exactly one photon in each group of modes.
    pub fn post_select(&self, groups: &[Vec<usize>]) -> FockState {
        let amplitudes = self
            .amplitudes
            .iter()
            .filter(|(occ, _)| {
                groups
                    .iter()
                    .all(|g| g.iter().map(|&m| occ[m] as usize).sum::<usize>() == 1)
            })
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        FockState {
            modes: self.modes,
            amplitudes,
        }
    }
}

/// Sends single photons with input-mode amplitudes `inputs[k]` through the
/// mode transfer matrix (rows are output modes).
pub fn propagate(transfer: &Matrix, inputs: &[Vector]) -> Result<FockState> {
    let (out_modes, in_modes) = transfer.shape();
    let outputs: Vec<Vector> = inputs
        .iter()
        .map(|v| {
            if v.len() != in_modes {
                Err(Error::InvalidArgument(format!(
                    "photon has {} mode amplitudes, transfer expects {in_modes}",
                    v.len()
                )))
            } else {
                Ok(transfer * v)
            }
        })
        .collect::<Result<_>>()?;
    let mut amplitudes: BTreeMap<Vec<u8>, C64> = BTreeMap::new();
    let n = outputs.len();
    let mut choice = vec![0usize; n];
    loop {
        let mut amp = c(1.0, 0.0);
        let mut occ = vec![0u8; out_modes];
        for (k, &m) in choice.iter().enumerate() {
            amp *= outputs[k][m];
            occ[m] += 1;
        }
        if amp.norm_sqr() > 0.0 {
            let bosonic: f64 = occ.iter().map(|&o| factorial(o)).product();
            *amplitudes.entry(occ).or_insert(c(0.0, 0.0)) += amp * bosonic.sqrt();
        }
        // Advance the mixed-radix counter over output modes.
        let mut k = 0;
        loop {
            if k == n {
                let amplitudes = amplitudes
                    .into_iter()
                    .filter(|(_, a)| a.norm_sqr() > 1e-30)
                    .collect();
                return Ok(FockState {
                    modes: out_modes,
                    amplitudes,
                });
            }
            choice[k] += 1;
            if choice[k] < out_modes {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// Mode transfer of a PBS. Inputs `(a H, a V, b H, b V)`, outputs
/// `(1 H, 1 V, 2 H, 2 V)`: H is transmitted (`a -> 1`, `b -> 2`) and V is
/// reflected (`a -> 2`, `b -> 1`).
pub fn pbs_matrix() -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(3, 1)] = c(1.0, 0.0);
    m[(2, 2)] = c(1.0, 0.0);
    m[(1, 3)] = c(1.0, 0.0);
    m
}

/// Two photons with polarization amplitudes `a` and `b` (H/V) entering a PBS.
pub fn pbs_transform(a: &Vector, b: &Vector) -> Result<FockState> {
    if a.len() != 2 || b.len() != 2 {
        return Err(Error::InvalidArgument("polarization vectors must have 2 entries".into()));
    }
    let zero = c(0.0, 0.0);
    let in_a = Vector::from_row_slice(&[a[0], a[1], zero, zero]);
    let in_b = Vector::from_row_slice(&[zero, zero, b[0], b[1]]);
    propagate(&pbs_matrix(), &[in_a, in_b])
}

/// Mode groups of the two PBS output ports.
pub fn pbs_ports() -> Vec<Vec<usize>> {
    vec![vec![0, 1], vec![2, 3]]
}
