//! Monte Carlo simulation of a heralded three-node atomic-ensemble memory
//! network.
//!
//! Each node produces a write-out photon entangled with a collective spin
//! excitation. Photons from the three nodes interfere on polarizing beam
//! splitters; post-selecting one photon per output port heralds a six-qubit
//! GHZ state of three photons and three memories, and measuring those photons
//! in the diagonal basis (with a feed-forward phase flip) leaves a
//! three-memory GHZ state.
//!
//! Module map:
//!
//! * [`quantum`]: dense states, unitaries, projective measurement, expectations.
//! * [`witness`]: GHZ projector decomposition and fidelity estimation from counts.
//! * [`node`]: write process, atom-photon pair state, Raman rotations, retrieval.
//! * [`interference`]: polarization maps, PBS network, heralding, temporal-mode swapping.
//! * [`detection`]: click model, coincidence tables, accidental subtraction.
//! * [`harness`]: configuration, rate arithmetic, scenarios, reports.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod fit;
pub mod harness;
pub mod interference;
pub mod node;
pub mod quantum;
pub mod rng;
pub mod witness;

pub use error::{Error, Result};
pub use quantum::{DensityMatrix, NodeId, QubitLabel, Register, StateVector};
