//! Linear-optics connection of three nodes and the two-node swap analysis.
//!
//! # Port convention
//!
//! Each PBS transmits H and reflects V. The write-out photons of nodes I and
//! II meet on the first PBS; its H-transmitted output of node I (and the
//! V-reflected output of node II) is port 1'. The other output meets node
//! III's photon on the second PBS, whose outputs are ports 2' and 3':
//!
//! | photon          | port |
//! |-----------------|------|
//! | I, H            | 1'   |
//! | I, V            | 3'   |
//! | II, H           | 2'   |
//! | II, V           | 1'   |
//! | III, H          | 3'   |
//! | III, V          | 2'   |
//!
//! Output port `k'` is labelled [`port_label`]`(k)`.

mod envelope;
mod fock;
mod swap;

pub use envelope::{Envelope, EnvelopeShape, TimeGrid, GRID_HALF_WIDTHS, GRID_POINTS};
pub use fock::{pbs_matrix, pbs_ports, pbs_transform, propagate, FockState};
pub use swap::{averaged_swap_fidelity, swap_two_node, SwapEnvelopes};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::linalg::{c, pauli_x, pauli_z};
use crate::quantum::{
    circular_minus, circular_plus, sample_index, DensityMatrix, Matrix, MeasurementBasis, NodeId,
    QuantumState, QubitLabel, Register, Unitary, C64,
};

/// Photon mode index used for output-port labels.
pub const PORT_MODE: u32 = 3;

/// Label of output port `k'` (`k` in 0..3).
pub fn port_label(port: usize) -> QubitLabel {
    QubitLabel::photon(NodeId::ALL[port], PORT_MODE)
}

/// Circular-to-linear map applied before interference.
///
/// Nodes I and II send `sigma+ -> H`, `sigma- -> V`; node III additionally
/// swaps H and V.
pub fn polarization_map(node: NodeId) -> Unitary {
    let mut m = Matrix::zeros(2, 2);
    m.set_row(0, &circular_plus().adjoint());
    m.set_row(1, &circular_minus().adjoint());
    if node == NodeId::III {
        m = pauli_x() * m;
    }
    Unitary::new(m).expect("polarization map is unitary")
}

/// Map for a node given by index 0..3.
pub fn polarization_map_for_index(index: usize) -> Result<Unitary> {
    Ok(polarization_map(NodeId::from_index(index)?))
}

/// Which Zeeman component emitted a photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyTag {
    Plus,
    Minus,
    None,
}

impl FrequencyTag {
    /// Angular frequency in the frame rotating at `omega+`.
    pub fn omega(self, delta_omega: f64) -> f64 {
        match self {
            FrequencyTag::Minus => delta_omega,
            _ => 0.0,
        }
    }
}

/// A single-photon mode: polarization qubit, frequency component and temporal envelope.
#[derive(Clone, Debug)]
pub struct PhotonMode {
    pub label: QubitLabel,
    pub frequency: FrequencyTag,
    pub envelope: Option<Envelope>,
}

impl PhotonMode {
    /// Overlap `<other|self>` of the temporal-spectral parts.
    pub fn overlap(&self, other: &PhotonMode, delta_omega: f64) -> Result<C64> {
        match (&self.envelope, &other.envelope) {
            (None, None) => Ok(if self.frequency == other.frequency || delta_omega == 0.0 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }),
            (Some(a), Some(b)) => {
                b.overlap(a, self.frequency.omega(delta_omega) - other.frequency.omega(delta_omega))
            }
            _ => Err(Error::InvalidArgument(
                "cannot overlap a mode with and without an envelope".into(),
            )),
        }
    }
}

/// Emission envelopes of one node: `plus` for `sigma+` photons, `minus` for `sigma-`.
#[derive(Clone, Debug)]
pub struct Emitter {
    pub plus: Envelope,
    pub minus: Envelope,
}

impl Emitter {
    pub fn symmetric(envelope: Envelope) -> Self {
        Self {
            plus: envelope.clone(),
            minus: envelope,
        }
    }
}

/// Output port and polarization of node `node`'s photon with polarization bit `pol`.
pub fn route(node: NodeId, pol: usize) -> usize {
    match (node, pol) {
        (NodeId::I, 0) | (NodeId::II, 1) => 0,
        (NodeId::II, 0) | (NodeId::III, 1) => 1,
        _ => 2,
    }
}

/// For each of the 8 input polarization patterns (node I most significant),
/// the source node per output port when exactly one photon reaches each port.
pub fn transfer_map() -> [Option<[NodeId; 3]>; 8] {
    let mut out = [None; 8];
    for (pattern, slot) in out.iter_mut().enumerate() {
        let mut sources: [Option<NodeId>; 3] = [None; 3];
        let mut ok = true;
        for node in NodeId::ALL {
            let pol = (pattern >> (2 - node.index())) & 1;
            let port = route(node, pol);
            ok &= sources[port].replace(node).is_none();
        }
        if ok {
            *slot = Some(sources.map(|s| s.expect("all ports filled")));
        }
    }
    out
}

/// Frequency component of node `node`'s photon after mapping to polarization bit `pol`.
pub fn frequency_tag(node: NodeId, pol: usize) -> FrequencyTag {
    let pre = polarization_map(node).adjoint();
    let amp = circular_plus().dotc(&pre.matrix().column(pol));
    if amp.norm_sqr() > 0.5 {
        FrequencyTag::Plus
    } else {
        FrequencyTag::Minus
    }
}

/// Post-selected output of [`connect_three`].
#[derive(Clone, Debug)]
pub struct Connection {
    /// State over `(1', 2', 3', memory I, memory II, memory III)`.
    pub state: DensityMatrix,
    pub success_probability: f64,
}

/// Interferes the write-out photons of three mapped pairs and post-selects one
/// photon per output port.
///
/// `pairs[k]` holds node `k`'s write-out photon (mode 0, already mapped) and
/// memory. Coherences between input branches are weighted by the overlap of
/// the temporal-spectral modes meeting at each port.
pub fn connect_three(pairs: &[DensityMatrix], emitters: &[Emitter], delta_omega: f64) -> Result<Connection> {
    if pairs.len() != 3 || emitters.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "connection needs three pairs and three emitters, got {} and {}",
            pairs.len(),
            emitters.len()
        )));
    }
    let photons: Vec<QubitLabel> = NodeId::ALL.iter().map(|&n| QubitLabel::photon(n, 0)).collect();
    let memories: Vec<QubitLabel> = NodeId::ALL.iter().map(|&n| QubitLabel::atom(n)).collect();
    let joint = pairs[0].tensor(&pairs[1])?.tensor(&pairs[2])?;
    let order = Register::new(photons.iter().chain(memories.iter()).copied().collect())?;
    let joint = joint.permute(&order)?;

    let map = transfer_map();
    let mode = |node: NodeId, pol: usize| -> PhotonMode {
        let tag = frequency_tag(node, pol);
        let e = &emitters[node.index()];
        PhotonMode {
            label: QubitLabel::photon(node, 0),
            frequency: tag,
            envelope: Some(if tag == FrequencyTag::Plus { e.plus.clone() } else { e.minus.clone() }),
        }
    };
    // Output polarization pattern and per-port mode for every surviving input.
    let mut branches: Vec<(usize, usize, [PhotonMode; 3])> = Vec::new();
    for (input, sources) in map.iter().enumerate() {
        if let Some(src) = sources {
            let pol_of = |n: NodeId| (input >> (2 - n.index())) & 1;
            let output = (0..3).fold(0, |acc, port| (acc << 1) | pol_of(src[port]));
            let modes = [0, 1, 2].map(|port| mode(src[port], pol_of(src[port])));
            branches.push((input, output, modes));
        }
    }
    let mut out = Matrix::zeros(64, 64);
    for (in_i, out_i, modes_i) in &branches {
        for (in_j, out_j, modes_j) in &branches {
            let mut factor = c(1.0, 0.0);
            if in_i != in_j {
                for port in 0..3 {
                    factor *= modes_i[port].overlap(&modes_j[port], delta_omega)?;
                }
            }
            for mi in 0..8 {
                for mj in 0..8 {
                    out[((out_i << 3) | mi, (out_j << 3) | mj)] =
                        joint.matrix()[((in_i << 3) | mi, (in_j << 3) | mj)] * factor;
                }
            }
        }
    }
    let success_probability = crate::quantum::linalg::trace(&out).re;
    let register = Register::new((0..3).map(port_label).chain(memories).collect())?;
    let state = DensityMatrix::from_unnormalized(register, out)?;
    Ok(Connection {
        state,
        success_probability,
    })
}

/// D/A outcomes of the three port photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeraldPattern(pub [bool; 3]);

impl HeraldPattern {
    /// Pattern from its index, port 1' most significant and `A = 1`.
    pub fn from_index(index: usize) -> Result<Self> {
        if index >= 8 {
            return Err(Error::OutOfRange { index, bound: 8 });
        }
        Ok(Self([index & 4 != 0, index & 2 != 0, index & 1 != 0]))
    }

    pub fn index(self) -> usize {
        self.0.iter().fold(0, |acc, &a| (acc << 1) | a as usize)
    }

    pub fn antidiagonal_count(self) -> usize {
        self.0.iter().filter(|&&a| a).count()
    }

    /// Whether the memories need the phase-flip correction.
    pub fn needs_correction(self) -> bool {
        self.antidiagonal_count() % 2 == 1
    }

    pub fn all() -> impl Iterator<Item = HeraldPattern> {
        (0..8).map(|i| Self::from_index(i).expect("index below 8"))
    }
}

impl fmt::Display for HeraldPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &a in &self.0 {
            f.write_str(if a { "A" } else { "D" })?;
        }
        Ok(())
    }
}

impl FromStr for HeraldPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .map(|ch| match ch {
                'D' | 'd' => Ok(false),
                'A' | 'a' => Ok(true),
                _ => Err(Error::InvalidArgument(format!("bad herald pattern {s:?}"))),
            })
            .collect::<Result<_>>()?;
        let arr: [bool; 3] = bits
            .try_into()
            .map_err(|_| Error::InvalidArgument(format!("herald pattern {s:?} needs 3 letters")))?;
        Ok(Self(arr))
    }
}

fn memory_labels() -> Vec<QubitLabel> {
    NodeId::ALL.iter().map(|&n| QubitLabel::atom(n)).collect()
}

fn port_labels() -> Vec<QubitLabel> {
    (0..3).map(port_label).collect()
}

/// Probability of each herald pattern, indexed by [`HeraldPattern::index`].
pub fn herald_probabilities(six: &DensityMatrix) -> Result<Vec<f64>> {
    six.outcome_probabilities(&vec![MeasurementBasis::diagonal(); 3], &port_labels())
}

/// Projects the port photons onto `pattern`, applies the feed-forward flip and
/// returns the pattern probability with the three-memory state.
pub fn project_pattern(six: &DensityMatrix, pattern: HeraldPattern) -> Result<(f64, DensityMatrix)> {
    let (p, projected) = six.project(&vec![MeasurementBasis::diagonal(); 3], &port_labels(), pattern.index())?;
    let memories = projected.partial_trace(&memory_labels())?;
    Ok((p, feed_forward(&memories, pattern)?))
}

/// Phase flip on node I's memory for odd numbers of `A` outcomes.
pub fn feed_forward(memories: &DensityMatrix, pattern: HeraldPattern) -> Result<DensityMatrix> {
    if pattern.needs_correction() {
        memories.apply_unitary(&Unitary::new(pauli_z())?, &[QubitLabel::atom(NodeId::I)])
    } else {
        Ok(memories.clone())
    }
}

/// Measures the port photons in the D/A basis and corrects the memories.
pub fn project_and_feedforward<R: Rng + ?Sized>(
    six: &DensityMatrix,
    rng: &mut R,
) -> Result<(HeraldPattern, DensityMatrix)> {
    let probs = herald_probabilities(six)?;
    let pattern = HeraldPattern::from_index(sample_index(&probs, rng.random::<f64>()))?;
    let (_, state) = project_pattern(six, pattern)?;
    Ok((pattern, state))
}

/// Applies each node's polarization map to its write-out photon (mode 0).
pub fn map_pair(pair: &DensityMatrix, node: NodeId) -> Result<DensityMatrix> {
    pair.apply_unitary(&polarization_map(node), &[QubitLabel::photon(node, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::linalg::max_abs_diff;
    use crate::quantum::Vector;

    #[test]
    fn mapping_rules() {
        let h = Vector::from_row_slice(&[c(1., 0.), c(0., 0.)]);
        let v = Vector::from_row_slice(&[c(0., 0.), c(1., 0.)]);
        for node in NodeId::ALL {
            let u = polarization_map(node);
            let image = u.matrix() * circular_plus();
            let expect = if node == NodeId::III { &v } else { &h };
            assert!((image - expect).norm() < 1e-12, "{node}");
            let uu = u.matrix().adjoint() * u.matrix();
            assert!(max_abs_diff(&uu, &Matrix::identity(2, 2)) < 1e-12);
        }
        assert!(polarization_map_for_index(3).is_err());
    }

    #[test]
    fn only_hhh_and_vvv_survive() {
        let map = transfer_map();
        let survivors: Vec<usize> = (0..8).filter(|&i| map[i].is_some()).collect();
        assert_eq!(survivors, vec![0, 7]);
        assert_eq!(map[0].unwrap(), [NodeId::I, NodeId::II, NodeId::III]);
        assert_eq!(map[7].unwrap(), [NodeId::II, NodeId::III, NodeId::I]);
    }

    #[test]
    fn frequency_tags_follow_mapping() {
        assert_eq!(frequency_tag(NodeId::I, 0), FrequencyTag::Plus);
        assert_eq!(frequency_tag(NodeId::I, 1), FrequencyTag::Minus);
        assert_eq!(frequency_tag(NodeId::III, 1), FrequencyTag::Plus);
    }

    #[test]
    fn herald_pattern_strings() {
        let p: HeraldPattern = "ADA".parse().unwrap();
        assert_eq!(p.index(), 0b101);
        assert_eq!(p.to_string(), "ADA");
        assert!(!p.needs_correction());
        assert!("AAAA".parse::<HeraldPattern>().is_err());
        assert!(HeraldPattern::from_index(0b111).unwrap().needs_correction());
    }
}
