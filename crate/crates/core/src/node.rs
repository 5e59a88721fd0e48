//! Single-node physics: write process, atom-photon pair, Raman rotations and retrieval.
//!
//! The pair state is `(|sigma+, down> + e^{i phi(t)} |sigma-, up>)/sqrt2` with
//! `phi(t) = phi0 + 2 pi t / T_z`. The write-out photon qubit is expressed in
//! H/V coordinates (see [`crate::quantum`]); the memory qubit uses
//! `down = 0`, `up = 1`. On retrieval `down` maps to `sigma-` and `up` to
//! `sigma+`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::linalg::{c, pauli_x, pauli_y};
use crate::quantum::{
    circular_minus, circular_plus, DensityMatrix, Matrix, NodeId, QuantumState, QubitLabel,
    Register, StateVector, Unitary, Vector, C64,
};

/// Visibility lifetime that makes `v0 exp(-t/tau)` cross `1/sqrt2` at `t_cross`.
pub fn calibrated_visibility_lifetime(v0: f64, t_cross_us: f64) -> f64 {
    t_cross_us / (v0 * std::f64::consts::SQRT_2).ln()
}

fn default_order() -> u8 {
    2
}

fn default_ratio() -> f64 {
    1.0
}

/// Parameters of one memory node. Times are in microseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub node: NodeId,
    /// Probability per trial of detecting a write-out photon from a single excitation.
    pub p_w: f64,
    /// Overall retrieval efficiency at zero storage time, detection included.
    pub eta_r0: f64,
    /// 1/e lifetime of the retrieval efficiency.
    pub tau_mem_us: f64,
    /// 1/e lifetime of the equatorial (superposition-basis) visibility.
    pub tau_vis_us: f64,
    /// Period of the Zeeman phase evolution.
    pub zeeman_period_us: f64,
    pub phi0: f64,
    /// Maximum number of excitations per trial (1 or 2).
    #[serde(default = "default_order")]
    pub excitation_order: u8,
    /// Weight of the white-noise admixture in the pair state.
    #[serde(default)]
    pub depolarizing_weight: f64,
    /// Probability per trial of an uncorrelated noise photon in the write-out channel.
    #[serde(default)]
    pub write_noise_prob: f64,
    /// Retrieval efficiency of `down` divided by that of `up`; the better state retrieves at `eta_r0`.
    #[serde(default = "default_ratio")]
    pub down_up_efficiency_ratio: f64,
}

impl NodeConfig {
    /// Single-pair operating point: `p = p_w eta_r = 0.006`, pair visibility 0.901,
    /// 75 us retrieval lifetime and 5.28 us Zeeman period.
    pub fn operating_point(node: NodeId) -> Self {
        Self {
            node,
            p_w: 0.015,
            eta_r0: 0.40,
            tau_mem_us: 75.0,
            tau_vis_us: calibrated_visibility_lifetime(0.901, 41.0),
            zeeman_period_us: 5.28,
            phi0: 0.0,
            excitation_order: 2,
            depolarizing_weight: 0.099,
            write_noise_prob: 0.0,
            down_up_efficiency_ratio: 1.0,
        }
    }

    /// Noise-free node with the same timing.
    pub fn ideal(node: NodeId) -> Self {
        Self {
            depolarizing_weight: 0.0,
            excitation_order: 1,
            ..Self::operating_point(node)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("p_w", self.p_w),
            ("eta_r0", self.eta_r0),
            ("depolarizing_weight", self.depolarizing_weight),
            ("write_noise_prob", self.write_noise_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "node {}: {name} = {p} outside [0, 1]",
                    self.node
                )));
            }
        }
        let positive = [
            ("tau_mem_us", self.tau_mem_us),
            ("tau_vis_us", self.tau_vis_us),
            ("zeeman_period_us", self.zeeman_period_us),
            ("down_up_efficiency_ratio", self.down_up_efficiency_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "node {}: {name} must be positive, got {v}",
                    self.node
                )));
            }
        }
        if !(1..=2).contains(&self.excitation_order) {
            return Err(Error::Config(format!(
                "node {}: excitation_order must be 1 or 2",
                self.node
            )));
        }
        if self.p_w + self.double_probability() > 1.0 {
            return Err(Error::Config(format!(
                "node {}: excitation probabilities exceed 1",
                self.node
            )));
        }
        Ok(())
    }

    /// Probability per trial of a double excitation (truncated thermal statistics).
    pub fn double_probability(&self) -> f64 {
        if self.excitation_order >= 2 {
            self.p_w * self.p_w
        } else {
            0.0
        }
    }

    /// Relative retrieval efficiencies `[down, up]`, the larger being 1.
    pub fn state_efficiency_factors(&self) -> [f64; 2] {
        let r = self.down_up_efficiency_ratio;
        if r <= 1.0 {
            [r, 1.0]
        } else {
            [1.0, 1.0 / r]
        }
    }

    /// Retrieval efficiency of `[down, up]` after storing for `dt_us`.
    pub fn state_efficiencies(&self, dt_us: f64) -> [f64; 2] {
        let base = self.retrieval_efficiency(dt_us);
        let f = self.state_efficiency_factors();
        [base * f[0], base * f[1]]
    }

    /// `eta_r0 exp(-dt / tau_mem)`.
    pub fn retrieval_efficiency(&self, dt_us: f64) -> f64 {
        self.eta_r0 * (-dt_us.max(0.0) / self.tau_mem_us).exp()
    }

    /// Coherence damping factor `exp(-dt / tau_vis)`.
    pub fn coherence_factor(&self, dt_us: f64) -> f64 {
        (-dt_us.max(0.0) / self.tau_vis_us).exp()
    }

    pub fn write_photon(&self) -> QubitLabel {
        QubitLabel::photon(self.node, 0)
    }

    pub fn read_photon(&self) -> QubitLabel {
        QubitLabel::photon(self.node, 1)
    }

    pub fn memory(&self) -> QubitLabel {
        QubitLabel::atom(self.node)
    }

    pub fn pair_register(&self) -> Register {
        Register::new(vec![self.write_photon(), self.memory()]).expect("distinct labels")
    }
}

/// `phi0 + 2 pi t / T_z`.
pub fn zeeman_phase(cfg: &NodeConfig, t_us: f64) -> f64 {
    cfg.phi0 + 2.0 * PI * t_us / cfg.zeeman_period_us
}

/// Pure pair state with relative phase `phase`, write photon first.
pub fn pair_state_vector(register: Register, phase: f64) -> Result<StateVector> {
    let down = Vector::from_row_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let up = Vector::from_row_slice(&[c(0.0, 0.0), c(1.0, 0.0)]);
    let kron = |a: &Vector, b: &Vector| crate::quantum::linalg::kron_vec(a, b);
    let amps = (kron(&circular_plus(), &down)
        + kron(&circular_minus(), &up) * C64::from_polar(1.0, phase))
        * C64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::new(register, amps)
}

/// Atom-photon pair at time `t_us` after the write pulse, with the node's depolarizing admixture.
pub fn entangled_pair_state(cfg: &NodeConfig, t_us: f64) -> Result<DensityMatrix> {
    let pure = pair_state_vector(cfg.pair_register(), zeeman_phase(cfg, t_us))?;
    pure.to_density().depolarize(cfg.depolarizing_weight)
}

/// Number of collective excitations created in one write trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Excitation {
    Vacuum,
    Single,
    Double,
}

/// A memory qubit inside some joint register.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryQubit {
    pub node: NodeId,
    pub label: QubitLabel,
    pub created_at_us: f64,
    /// Time up to which storage decoherence has already been applied.
    pub coherence_ref_us: f64,
}

impl MemoryQubit {
    pub fn new(label: QubitLabel, created_at_us: f64) -> Self {
        Self {
            node: label.node,
            label,
            created_at_us,
            coherence_ref_us: created_at_us,
        }
    }
}

/// Outcome of one write trial.
#[derive(Clone, Debug)]
pub struct WriteOutcome {
    pub excitation: Excitation,
    /// One pair state per excitation, each over (write photon, memory).
    pub pairs: Vec<DensityMatrix>,
    pub memories: Vec<MemoryQubit>,
}

impl WriteOutcome {
    pub fn heralded(&self) -> bool {
        self.excitation != Excitation::Vacuum
    }
}

/// Draws the excitation number for one trial.
pub fn sample_excitation<R: Rng + ?Sized>(cfg: &NodeConfig, rng: &mut R) -> Excitation {
    let u: f64 = rng.random();
    if u < cfg.p_w {
        Excitation::Single
    } else if u < cfg.p_w + cfg.double_probability() {
        Excitation::Double
    } else {
        Excitation::Vacuum
    }
}

/// Runs one write pulse at `t_us`.
///
/// A double excitation is represented as two independent pairs; the second
/// uses photon mode 2 and memory mode 1.
pub fn write_trial<R: Rng + ?Sized>(cfg: &NodeConfig, rng: &mut R, t_us: f64) -> Result<WriteOutcome> {
    let excitation = sample_excitation(cfg, rng);
    let count = match excitation {
        Excitation::Vacuum => 0,
        Excitation::Single => 1,
        Excitation::Double => 2,
    };
    let base = entangled_pair_state(cfg, 0.0)?;
    let mut pairs = Vec::with_capacity(count);
    let mut memories = Vec::with_capacity(count);
    for k in 0..count {
        let photon = QubitLabel::photon(cfg.node, 2 * k as u32);
        let memory = QubitLabel {
            mode: k as u32,
            ..cfg.memory()
        };
        let pair = base
            .relabel(&cfg.write_photon(), photon)?
            .relabel(&cfg.memory(), memory)?;
        pairs.push(pair);
        memories.push(MemoryQubit::new(memory, t_us));
    }
    Ok(WriteOutcome {
        excitation,
        pairs,
        memories,
    })
}

/// Rotation by `theta` about the equatorial axis `(-sin phi', cos phi')`.
///
/// With `theta = pi/2` this maps the basis `|down> +- e^{i phi'}|up>` onto
/// `|up>` / `|down>`, so a subsequent population measurement reads out the
/// superposition basis.
pub fn raman_rotation(theta: f64, phase: f64) -> Unitary {
    let (s, co) = (theta / 2.0).sin_cos();
    let axis = pauli_x() * C64::new(-phase.sin(), 0.0) + pauli_y() * C64::new(phase.cos(), 0.0);
    let m = Matrix::identity(2, 2) * C64::new(co, 0.0) - axis * C64::new(0.0, s);
    Unitary::new(m).expect("rotation is unitary")
}

/// Evolves a memory inside `state` from its current reference time to `t_us`:
/// the Zeeman phase advances and coherences decay with `tau_vis`.
pub fn evolve_memory(
    cfg: &NodeConfig,
    state: &DensityMatrix,
    memory: &mut MemoryQubit,
    t_us: f64,
) -> Result<DensityMatrix> {
    let dt = t_us - memory.coherence_ref_us;
    if dt < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cannot evolve memory backwards ({dt} us)"
        )));
    }
    let phase = 2.0 * PI * dt / cfg.zeeman_period_us;
    let mut u = Matrix::identity(2, 2);
    u[(1, 1)] = C64::from_polar(1.0, phase);
    let evolved = state
        .apply_unitary(&Unitary::new(u)?, &[memory.label])?
        .dephase(&memory.label, cfg.coherence_factor(dt))?;
    memory.coherence_ref_us = t_us;
    Ok(evolved)
}

/// Applies a Raman rotation to a memory after letting it evolve to `t_us`.
pub fn rotate_memory(
    cfg: &NodeConfig,
    state: &DensityMatrix,
    memory: &mut MemoryQubit,
    t_us: f64,
    rotation: &Unitary,
) -> Result<DensityMatrix> {
    let evolved = evolve_memory(cfg, state, memory, t_us)?;
    evolved.apply_unitary(rotation, &[memory.label])
}

/// Maps `down -> sigma-`, `up -> sigma+` in H/V coordinates.
pub fn readout_map() -> Unitary {
    let mut m = Matrix::zeros(2, 2);
    m.set_column(0, &circular_minus());
    m.set_column(1, &circular_plus());
    Unitary::new(m).expect("readout map is unitary")
}

/// Attempts to retrieve `memory` at `t_us`.
///
/// Success probability is the state-weighted retrieval efficiency; for a
/// balanced node it is `eta_r0 exp(-dt/tau_mem)`. On success the remaining
/// storage decoherence is applied and the memory qubit becomes the read-out
/// photon of its node.
pub fn retrieve<R: Rng + ?Sized>(
    cfg: &NodeConfig,
    state: &DensityMatrix,
    memory: &MemoryQubit,
    t_us: f64,
    rng: &mut R,
) -> Result<Option<DensityMatrix>> {
    let dt = t_us - memory.created_at_us;
    if dt < 0.0 {
        return Err(Error::InvalidArgument(
            "retrieval before memory creation".into(),
        ));
    }
    let eff = cfg.state_efficiencies(dt);
    let mut kraus = Matrix::zeros(2, 2);
    kraus[(0, 0)] = c(eff[0].sqrt(), 0.0);
    kraus[(1, 1)] = c(eff[1].sqrt(), 0.0);
    let filtered = state.sandwich(&kraus, &[memory.label])?;
    let p_success = crate::quantum::linalg::trace(&filtered).re;
    if rng.random::<f64>() >= p_success {
        return Ok(None);
    }
    let mut mem = *memory;
    let normalized = DensityMatrix::from_unnormalized(state.register().clone(), filtered)?;
    let t_end = t_us.max(mem.coherence_ref_us);
    let decayed = evolve_memory(cfg, &normalized, &mut mem, t_end)?;
    let read = QubitLabel::photon(memory.node, 1 + 2 * memory.label.mode);
    let mapped = decayed.apply_unitary(&readout_map(), &[memory.label])?;
    Ok(Some(mapped.relabel(&memory.label, read)?))
}

/// Probability that `retrieve` succeeds on a memory with population `p_up` in `up`.
pub fn retrieval_probability(cfg: &NodeConfig, dt_us: f64, p_up: f64) -> f64 {
    let eff = cfg.state_efficiencies(dt_us);
    eff[0] * (1.0 - p_up) + eff[1] * p_up
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{circular_basis, MeasurementBasis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> NodeConfig {
        NodeConfig::operating_point(NodeId::I)
    }

    #[test]
    fn zeeman_phase_examples() {
        let c = cfg();
        assert_eq!(zeeman_phase(&c, 0.0), 0.0);
        assert!((zeeman_phase(&c, 5.28) - 2.0 * PI).abs() < 1e-12);
        assert!((zeeman_phase(&c, 2.64) - PI).abs() < 1e-12);
        let shifted = NodeConfig { phi0: 0.3, ..c };
        assert_eq!(zeeman_phase(&shifted, 0.0), 0.3);
    }

    #[test]
    fn calibrated_tau_vis() {
        let tau = calibrated_visibility_lifetime(0.901, 41.0);
        assert!((tau - 169.19).abs() < 0.05, "{tau}");
        assert!((0.901 * (-41.0 / tau).exp() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn pair_state_is_valid_for_many_times() {
        let c = cfg();
        for k in 0..50 {
            let dm = entangled_pair_state(&c, k as f64 * 0.37).unwrap();
            dm.validate().unwrap();
        }
    }

    #[test]
    fn eigenbasis_visibility_matches_depolarizing_weight() {
        let c = cfg();
        let dm = entangled_pair_state(&c, 1.234).unwrap();
        let p = dm
            .outcome_probabilities(
                &[circular_basis(), MeasurementBasis::computational()],
                &[c.write_photon(), c.memory()],
            )
            .unwrap();
        // Correlated outcomes: (sigma+, down) = 00 and (sigma-, up) = 11.
        let v = (p[0] + p[3]) - (p[1] + p[2]);
        assert!((v - 0.901).abs() < 1e-12);
    }

    #[test]
    fn bell_overlap_is_cos_squared_of_half_phase() {
        // |<phi=0|phi>|^2 = cos^2(phi/2): 0.5 at phi = pi/2, 0 at phi = pi.
        let c = NodeConfig::ideal(NodeId::I);
        let reference = pair_state_vector(c.pair_register(), 0.0).unwrap();
        let dm = entangled_pair_state(&c, c.zeeman_period_us / 2.0).unwrap();
        let f = crate::quantum::pure_state_fidelity(&dm, &reference).unwrap();
        assert!(f.abs() < 1e-12);
        let dm = entangled_pair_state(&c, c.zeeman_period_us / 4.0).unwrap();
        let f = crate::quantum::pure_state_fidelity(&dm, &reference).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        let dm = entangled_pair_state(&c, 0.0).unwrap();
        assert!((crate::quantum::pure_state_fidelity(&dm, &reference).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_examples() {
        let id = raman_rotation(0.0, 0.7);
        assert!(crate::quantum::linalg::max_abs_diff(id.matrix(), &Matrix::identity(2, 2)) < 1e-15);
        let plus = StateVector::new(
            Register::new(vec![QubitLabel::atom(NodeId::I)]).unwrap(),
            Vector::from_row_slice(&[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)]),
        )
        .unwrap();
        let rotated = plus
            .apply_unitary(&raman_rotation(PI / 2.0, 0.0), &[QubitLabel::atom(NodeId::I)])
            .unwrap();
        let p = rotated
            .outcome_probabilities(&[MeasurementBasis::computational()], &[QubitLabel::atom(NodeId::I)])
            .unwrap();
        assert!((p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_reads_arbitrary_phase_basis() {
        let label = QubitLabel::atom(NodeId::II);
        for phase in [0.0, 0.4, 1.9, -2.5] {
            let v = StateVector::new(
                Register::new(vec![label]).unwrap(),
                Vector::from_row_slice(&[
                    c(FRAC_1_SQRT_2, 0.),
                    C64::from_polar(FRAC_1_SQRT_2, phase),
                ]),
            )
            .unwrap();
            let p = v
                .apply_unitary(&raman_rotation(PI / 2.0, phase), &[label])
                .unwrap()
                .outcome_probabilities(&[MeasurementBasis::computational()], &[label])
                .unwrap();
            assert!((p[1] - 1.0).abs() < 1e-12, "phase {phase}: {p:?}");
        }
    }

    #[test]
    fn zero_write_probability_is_always_vacuum() {
        let c = NodeConfig { p_w: 0.0, ..cfg() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(write_trial(&c, &mut rng, 0.0).unwrap().excitation, Excitation::Vacuum);
        }
    }

    #[test]
    fn double_excitation_carries_two_pairs() {
        let c = NodeConfig { p_w: 0.5, ..cfg() };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let outcome = (0..100)
            .map(|_| write_trial(&c, &mut rng, 0.0).unwrap())
            .find(|o| o.excitation == Excitation::Double)
            .unwrap();
        assert_eq!(outcome.pairs.len(), 2);
        assert_ne!(outcome.memories[0].label, outcome.memories[1].label);
    }

    #[test]
    fn retrieval_maps_spin_to_circular_polarization() {
        let c = NodeConfig {
            eta_r0: 1.0,
            ..NodeConfig::ideal(NodeId::I)
        };
        let pair = entangled_pair_state(&c, 0.0).unwrap();
        let mem = MemoryQubit::new(c.memory(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = retrieve(&c, &pair, &mem, 0.0, &mut rng).unwrap().unwrap();
        let p = out
            .outcome_probabilities(
                &[circular_basis(), circular_basis()],
                &[c.write_photon(), c.read_photon()],
            )
            .unwrap();
        // write sigma+ pairs with read sigma-, and vice versa.
        assert!((p[0b01] - 0.5).abs() < 1e-12 && (p[0b10] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn retrieval_before_creation_errors() {
        let c = cfg();
        let pair = entangled_pair_state(&c, 0.0).unwrap();
        let mem = MemoryQubit::new(c.memory(), 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(retrieve(&c, &pair, &mem, 5.0, &mut rng).is_err());
    }

    #[test]
    fn unbalanced_efficiencies_never_exceed_eta() {
        for ratio in [0.3, 1.0, 2.5] {
            let c = NodeConfig {
                down_up_efficiency_ratio: ratio,
                ..cfg()
            };
            let e = c.state_efficiencies(0.0);
            assert!(e[0] <= c.eta_r0 + 1e-15 && e[1] <= c.eta_r0 + 1e-15);
            assert!((e[0] / e[1] - ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(NodeConfig { p_w: 1.5, ..cfg() }.validate().is_err());
        assert!(NodeConfig { tau_mem_us: 0.0, ..cfg() }.validate().is_err());
        assert!(NodeConfig { zeeman_period_us: -1.0, ..cfg() }.validate().is_err());
        assert!(NodeConfig { excitation_order: 3, ..cfg() }.validate().is_err());
    }
}
