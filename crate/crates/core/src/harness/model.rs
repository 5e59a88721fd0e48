//! Exact heralded-event model of the three-node connection.
//!
//! Each node contributes one of three herald sources when its write-out
//! channel fires: a single excitation (the entangled pair), a double
//! excitation or a false click from write-channel noise and dark counts. Double
//! excitations are represented by a maximally mixed photon-memory state with
//! the two-excitation retrieval efficiency; false clicks leave the memory empty.
//! The 27 source combinations are connected through [`connect_three`] and
//! weighted by their herald probability.
//!
//! Retrieval acts on each memory as the filter `K = diag(sqrt(eta_down),
//! sqrt(eta_up))` before polarization analysis, so a read-out channel clicks
//! with effect `E_k = (1 - d) K P_k K + d I`. Every clicked-channel
//! combination is tallied, which keeps expected tallies linear in the state.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::interference::{connect_three, herald_probabilities, map_pair, project_pattern, HeraldPattern};
use crate::node::{entangled_pair_state, NodeConfig};
use crate::quantum::linalg::{identity, kron};
use crate::quantum::{DensityMatrix, Matrix, MeasurementBasis, NodeId, QuantumState, QubitLabel, Register, C64};
use crate::witness::{GhzSpec, SettingId};
use crate::detection::DetectorConfig;

/// Origin of a node's write-out click.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Single,
    Double,
    False,
}

impl SourceKind {
    pub const ALL: [SourceKind; 3] = [SourceKind::Single, SourceKind::Double, SourceKind::False];
}

/// One herald source of one node.
#[derive(Clone, Debug)]
pub struct Source {
    pub kind: SourceKind,
    /// Probability per trial.
    pub weight: f64,
    /// Mapped photon-memory state.
    pub state: DensityMatrix,
    /// Read-out click efficiency of `[down, up]`.
    pub efficiency: [f64; 2],
}

/// Probability per trial that noise alone fires a write-out analyzer with two channels.
pub fn false_click_probability(node: &NodeConfig, detector: &DetectorConfig) -> f64 {
    let quiet = 1.0 - node.p_w - node.double_probability();
    let fire = 1.0 - (1.0 - node.write_noise_prob) * (1.0 - detector.dark_count_prob).powi(2);
    quiet * fire
}

/// The three herald sources of `node` for read-out after `readout_us`.
pub fn node_sources(node: &NodeConfig, detector: &DetectorConfig, readout_us: f64) -> Result<[Source; 3]> {
    let id = node.node;
    let register = Register::new(vec![QubitLabel::photon(id, 0), QubitLabel::atom(id)])?;
    let eta = node.state_efficiencies(readout_us).map(|e| e * detector.efficiency);
    let pair = map_pair(&entangled_pair_state(node, 0.0)?, id)?
        .dephase(&QubitLabel::atom(id), node.coherence_factor(readout_us))?;
    let mixed = DensityMatrix::maximally_mixed(register);
    Ok([
        Source {
            kind: SourceKind::Single,
            weight: node.p_w,
            state: pair,
            efficiency: eta,
        },
        Source {
            kind: SourceKind::Double,
            weight: node.double_probability(),
            state: mixed.clone(),
            efficiency: eta.map(|e| 1.0 - (1.0 - e) * (1.0 - e)),
        },
        Source {
            kind: SourceKind::False,
            weight: false_click_probability(node, detector),
            state: mixed,
            efficiency: [0.0, 0.0],
        },
    ])
}

/// One combination of sources after the connection.
#[derive(Clone, Debug)]
pub struct Combo {
    pub kinds: [SourceKind; 3],
    /// Probability per trial that every node fires with these sources.
    pub source_weight: f64,
    /// Probability that the photons leave one per output port.
    pub post_selection: f64,
    /// `source_weight * post_selection`.
    pub herald_weight: f64,
    /// Post-selected state over `(1', 2', 3', memory I, II, III)`.
    pub state: DensityMatrix,
    pub efficiency: [[f64; 2]; 3],
}

/// All 27 source combinations with their weights.
#[derive(Clone, Debug)]
pub struct HeraldModel {
    pub combos: Vec<Combo>,
    pub dark_count_prob: f64,
}

/// Retrieval filter `diag(sqrt(eta_down), sqrt(eta_up))`.
pub fn retrieval_filter(efficiency: [f64; 2]) -> Matrix {
    let mut k = Matrix::zeros(2, 2);
    k[(0, 0)] = C64::new(efficiency[0].sqrt(), 0.0);
    k[(1, 1)] = C64::new(efficiency[1].sqrt(), 0.0);
    k
}

/// Retrieval instrument of one memory analyzed in `basis`:
/// `[no photon, photon in channel 0, photon in channel 1]`.
pub fn retrieval_effects(basis: &MeasurementBasis, efficiency: [f64; 2]) -> Vec<Matrix> {
    let k = retrieval_filter(efficiency);
    vec![
        identity(2) - &k * &k,
        &k * basis.projector(0) * &k,
        &k * basis.projector(1) * &k,
    ]
}

/// Click effects `E_b = (1 - d) K P_b K + d I` of the two read-out channels.
/// They do not sum to the identity: both channels may fire.
pub fn click_effects(basis: &MeasurementBasis, efficiency: [f64; 2], dark: f64) -> Vec<Matrix> {
    let k = retrieval_filter(efficiency);
    (0..2)
        .map(|b| &k * basis.projector(b) * &k * C64::new(1.0 - dark, 0.0) + identity(2) * C64::new(dark, 0.0))
        .collect()
}

fn projector_effects(basis: &MeasurementBasis) -> Vec<Matrix> {
    vec![basis.projector(0), basis.projector(1)]
}

/// `tr(rho E^0_{b_0} (x) E^1_{b_1} (x) ...)` for every outcome tuple, indexed
/// mixed-radix with the first qubit most significant. Contracts one qubit at a time.
pub fn effect_probabilities(rho: &Matrix, effects: &[Vec<Matrix>]) -> Result<Vec<f64>> {
    let n = effects.len();
    if rho.nrows() != 1 << n || rho.ncols() != 1 << n {
        return Err(Error::InvalidArgument(format!(
            "{} effect lists for a {}-dimensional state",
            n,
            rho.nrows()
        )));
    }
    let dim = 1usize << n;
    let mut data: Vec<C64> = (0..dim * dim).map(|k| rho[(k / dim, k % dim)]).collect();
    let mut outcomes = 1usize;
    for (q, list) in effects.iter().enumerate() {
        let d = 1usize << (n - q);
        let h = d / 2;
        let mut next = vec![C64::new(0.0, 0.0); outcomes * list.len() * h * h];
        for o in 0..outcomes {
            let block = &data[o * d * d..(o + 1) * d * d];
            for (b, e) in list.iter().enumerate() {
                let dst = &mut next[(o * list.len() + b) * h * h..(o * list.len() + b + 1) * h * h];
                for a in 0..2 {
                    for c in 0..2 {
                        let w = e[(c, a)];
                        if w == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for i in 0..h {
                            let row = (a * h + i) * d + c * h;
                            for j in 0..h {
                                dst[i * h + j] += block[row + j] * w;
                            }
                        }
                    }
                }
            }
        }
        data = next;
        outcomes *= list.len();
    }
    Ok(data.into_iter().map(|z| z.re.max(0.0)).collect())
}

/// `K rho K` with the retrieval filter on the last three qubits.
fn filtered(state: &DensityMatrix, efficiency: &[[f64; 2]; 3]) -> Matrix {
    let photons = state.register().len() - 3;
    let k = efficiency
        .iter()
        .fold(identity(1 << photons), |acc, e| kron(&acc, &retrieval_filter(*e)));
    &k * state.matrix() * &k
}

fn memory_labels() -> Vec<QubitLabel> {
    NodeId::ALL.iter().map(|&n| QubitLabel::atom(n)).collect()
}

impl HeraldModel {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let emitters = cfg.interference.build_emitters()?;
        let sources = cfg
            .nodes
            .iter()
            .map(|n| node_sources(n, &cfg.detector, cfg.sweeps.ghz_readout_us))
            .collect::<Result<Vec<_>>>()?;
        let mut combos = Vec::with_capacity(27);
        for index in 0..27 {
            let pick = [index / 9, (index / 3) % 3, index % 3];
            let chosen: Vec<&Source> = (0..3).map(|k| &sources[k][pick[k]]).collect();
            let pairs: Vec<DensityMatrix> = chosen.iter().map(|s| s.state.clone()).collect();
            let conn = connect_three(&pairs, &emitters, cfg.interference.delta_omega_rad_per_us)?;
            let weight: f64 = chosen.iter().map(|s| s.weight).product();
            combos.push(Combo {
                kinds: [0, 1, 2].map(|k| chosen[k].kind),
                source_weight: weight,
                post_selection: conn.success_probability,
                herald_weight: weight * conn.success_probability,
                state: conn.state,
                efficiency: [0, 1, 2].map(|k| chosen[k].efficiency),
            });
        }
        Ok(Self {
            combos,
            dark_count_prob: cfg.detector.dark_count_prob,
        })
    }

    /// Three-port herald probability per trial.
    pub fn herald_probability(&self) -> f64 {
        self.combos.iter().map(|c| c.herald_weight).sum()
    }

    pub fn herald_weights(&self) -> Vec<f64> {
        self.combos.iter().map(|c| c.herald_weight).collect()
    }

    /// Index of the combination with every node holding a single excitation.
    pub fn all_single_index(&self) -> usize {
        0
    }

    /// Probability that a heralded event has all three memories singly excited.
    pub fn conditional_success(&self) -> Result<f64> {
        let total = self.herald_probability();
        if !(total > 0.0) {
            return Err(Error::ZeroProbability);
        }
        Ok(self.combos[self.all_single_index()].herald_weight / total)
    }

    /// Herald-weighted mixture of the post-selected six-qubit states.
    pub fn heralded_state(&self) -> Result<DensityMatrix> {
        let mut m = Matrix::zeros(64, 64);
        for c in &self.combos {
            m += c.state.matrix() * C64::new(c.herald_weight, 0.0);
        }
        DensityMatrix::from_unnormalized(self.combos[0].state.register().clone(), m)
    }

    /// Herald-weighted six-qubit state passed through the retrieval filters:
    /// the state the six-fold coincidences sample when dark counts vanish.
    pub fn detected_six_qubit_state(&self) -> Result<DensityMatrix> {
        let mut m = Matrix::zeros(64, 64);
        for c in &self.combos {
            m += filtered(&c.state, &c.efficiency) * C64::new(c.herald_weight, 0.0);
        }
        DensityMatrix::from_unnormalized(self.combos[0].state.register().clone(), m)
    }

    /// Three-memory counterpart of [`Self::detected_six_qubit_state`], after
    /// projection and feed-forward of every herald pattern.
    pub fn detected_memory_state(&self) -> Result<DensityMatrix> {
        let register = Register::new(memory_labels())?;
        let mut m = Matrix::zeros(8, 8);
        for c in &self.combos {
            if c.herald_weight == 0.0 {
                continue;
            }
            let heralds = herald_probabilities(&c.state)?;
            for pattern in HeraldPattern::all() {
                let p = heralds[pattern.index()];
                if p <= 1e-15 {
                    continue;
                }
                let (_, memories) = project_pattern(&c.state, pattern)?;
                let memories = memories.permute(&register)?;
                m += filtered(&memories, &c.efficiency) * C64::new(c.herald_weight * p, 0.0);
            }
        }
        DensityMatrix::from_unnormalized(register, m)
    }

    /// Expected six-fold tallies per trial for `setting`, indexed `combo * 64 + pattern`.
    pub fn ghz6_tallies(&self, spec: &GhzSpec, setting: SettingId) -> Result<Vec<f64>> {
        let bases = spec.setting_bases(setting)?;
        let mut out = Vec::with_capacity(self.combos.len() * 64);
        for c in &self.combos {
            let effects: Vec<Vec<Matrix>> = bases[..3]
                .iter()
                .map(projector_effects)
                .chain((0..3).map(|m| click_effects(&bases[3 + m], c.efficiency[m], self.dark_count_prob)))
                .collect();
            let tallies = effect_probabilities(c.state.matrix(), &effects)?;
            out.extend(tallies.into_iter().map(|t| t * c.herald_weight));
        }
        Ok(out)
    }

    /// Expected tallies per trial for the three-memory `setting`, indexed
    /// `(combo * 8 + herald) * 8 + memory pattern`.
    pub fn ghz3_tallies(&self, spec: &GhzSpec, setting: SettingId) -> Result<Vec<f64>> {
        let bases = spec.setting_bases(setting)?;
        let mut out = Vec::with_capacity(self.combos.len() * 64);
        for c in &self.combos {
            let effects: Vec<Vec<Matrix>> = (0..3)
                .map(|m| click_effects(&bases[m], c.efficiency[m], self.dark_count_prob))
                .collect();
            let heralds = herald_probabilities(&c.state)?;
            for pattern in HeraldPattern::all() {
                let p = heralds[pattern.index()];
                if p <= 1e-15 {
                    out.extend(std::iter::repeat_n(0.0, 8));
                    continue;
                }
                let (_, memories) = project_pattern(&c.state, pattern)?;
                let tallies = effect_probabilities(memories.matrix(), &effects)?;
                out.extend(tallies.into_iter().map(|t| t * c.herald_weight * p));
            }
        }
        Ok(out)
    }
}

/// Probability that a heralded three-node event holds exactly the intended
/// single excitation in every memory.
pub fn conditional_success_estimate(cfg: &ExperimentConfig) -> Result<f64> {
    if let Some(n) = cfg.nodes.iter().find(|n| n.excitation_order < 2) {
        return Err(Error::InvalidArgument(format!(
            "node {} truncates at one excitation; the estimate needs double excitations",
            n.node
        )));
    }
    HeraldModel::new(cfg)?.conditional_success()
}
