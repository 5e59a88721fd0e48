#![allow(dead_code)]

use memnet_core::quantum::{Matrix, Unitary, C64};
use memnet_core::{DensityMatrix, NodeId, QubitLabel, Register};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{Binomial, DiscreteCDF};

pub fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> Unitary {
    let qr = gaussian_matrix(rng, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            r[(i, i)] / C64::new(r[(i, i)].norm(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Unitary::new(q * phases).expect("QR factor is unitary")
}

/// Random full-rank density matrix `A A^dag / tr`.
pub fn random_density<R: Rng>(rng: &mut R, register: Register) -> DensityMatrix {
    let a = gaussian_matrix(rng, register.dim());
    let rho = &a * a.adjoint();
    DensityMatrix::from_unnormalized(register, rho).expect("positive matrix")
}

pub fn atoms(n: usize) -> Vec<QubitLabel> {
    (0..n)
        .map(|k| QubitLabel {
            mode: k as u32 / 3,
            ..QubitLabel::atom(NodeId::ALL[k % 3])
        })
        .collect()
}

pub fn register(n: usize) -> Register {
    Register::new(atoms(n)).unwrap()
}

/// One-sided tail probability of a standard normal beyond five sigma.
pub const FIVE_SIGMA_TAIL: f64 = 2.866_515_718_791_939e-7;

/// Binomial count consistent with `p` at five-sigma significance: neither
/// tail probability of the observed count falls below [`FIVE_SIGMA_TAIL`].
/// Exact tails keep sparse counts, where the normal approximation fails, at
/// the same significance as well-populated ones.
pub fn within_five_sigma(count: u64, trials: u64, p: f64) -> bool {
    let p = p.clamp(0.0, 1.0);
    let b = Binomial::new(p, trials).expect("valid binomial");
    let lower = b.cdf(count);
    let upper = if count == 0 { 1.0 } else { b.sf(count - 1) };
    lower >= FIVE_SIGMA_TAIL && upper >= FIVE_SIGMA_TAIL
}
