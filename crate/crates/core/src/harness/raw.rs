//! Trial-by-trial simulation of the three-node GHZ experiment.
//!
//! Every write trial is sampled explicitly, so six-fold events are rare.
//! This is the reference against which conditional sampling is checked.

use rand::Rng;
use rayon::ThreadPool;

use super::model::{effect_probabilities, retrieval_effects, HeraldModel};
use super::sampler::run_chunks;
use super::GhzKind;
use crate::error::Result;
use crate::interference::{herald_probabilities, project_pattern, HeraldPattern};
use crate::node::NodeConfig;
use crate::quantum::{sample_index, Matrix, NodeId, QubitLabel, Register};
use crate::rng::CHUNK;
use crate::witness::{GhzSpec, SettingCounts};

use super::config::ExperimentConfig;
use super::model::false_click_probability;

/// Tallies of a raw-trial run.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTally {
    pub trials: u64,
    /// Trials with one click per output port.
    pub heralds: u64,
    /// Six-fold (or herald-plus-three-memory) tallies per setting.
    pub settings: Vec<SettingCounts>,
    /// Herald-pattern tallies of the memory read-out events (three-memory runs only).
    pub herald_patterns: [u64; 8],
}

struct Tables {
    /// `[setting][combo]` -> distribution over photon outcomes and memory
    /// retrieval results (`3^3` per photon pattern).
    outcomes: Vec<Vec<Vec<f64>>>,
    /// `[combo]` -> herald pattern distribution (three-memory runs).
    heralds: Vec<Vec<f64>>,
    /// `[setting][combo][herald]` -> memory retrieval distribution.
    memories: Vec<Vec<Vec<Vec<f64>>>>,
}

fn build_tables(model: &HeraldModel, spec: &GhzSpec, kind: GhzKind) -> Result<Tables> {
    let settings = spec.settings();
    let mut t = Tables {
        outcomes: Vec::new(),
        heralds: Vec::new(),
        memories: Vec::new(),
    };
    match kind {
        GhzKind::Six => {
            for &s in &settings {
                let bases = spec.setting_bases(s)?;
                let per_combo = model
                    .combos
                    .iter()
                    .map(|c| {
                        let effects: Vec<Vec<Matrix>> = bases[..3]
                            .iter()
                            .map(|b| vec![b.projector(0), b.projector(1)])
                            .chain((0..3).map(|m| retrieval_effects(&bases[3 + m], c.efficiency[m])))
                            .collect();
                        effect_probabilities(c.state.matrix(), &effects)
                    })
                    .collect::<Result<_>>()?;
                t.outcomes.push(per_combo);
            }
        }
        GhzKind::Three => {
            let order = Register::new(NodeId::ALL.iter().map(|&n| QubitLabel::atom(n)).collect())?;
            for c in &model.combos {
                t.heralds.push(herald_probabilities(&c.state)?);
            }
            for &s in &settings {
                let bases = spec.setting_bases(s)?;
                let mut per_combo = Vec::new();
                for (ci, c) in model.combos.iter().enumerate() {
                    let effects: Vec<Vec<Matrix>> =
                        (0..3).map(|m| retrieval_effects(&bases[m], c.efficiency[m])).collect();
                    let mut per_herald = Vec::new();
                    for h in HeraldPattern::all() {
                        if t.heralds[ci][h.index()] <= 1e-15 {
                            per_herald.push(vec![0.0; 27]);
                            continue;
                        }
                        let (_, m) = project_pattern(&c.state, h)?;
                        let m = m.permute(&order)?;
                        per_herald.push(effect_probabilities(m.matrix(), &effects)?);
                    }
                    per_combo.push(per_herald);
                }
                t.memories.push(per_combo);
            }
        }
    }
    Ok(t)
}

fn node_source<R: Rng + ?Sized>(node: &NodeConfig, false_click: f64, rng: &mut R) -> Option<usize> {
    let u: f64 = rng.random();
    if u < node.p_w {
        Some(0)
    } else if u < node.p_w + node.double_probability() {
        Some(1)
    } else if rng.random::<f64>() < false_click / (1.0 - node.p_w - node.double_probability()) {
        Some(2)
    } else {
        None
    }
}

/// Simulates `trials` raw write trials, cycling through the measurement
/// settings trial by trial.
pub fn simulate_raw(
    cfg: &ExperimentConfig,
    kind: GhzKind,
    trials: u64,
    seed: u64,
    pool: &ThreadPool,
) -> Result<RawTally> {
    let model = HeraldModel::new(cfg)?;
    let spec = kind.spec()?;
    let settings = spec.settings();
    let tables = build_tables(&model, &spec, kind)?;
    let false_clicks: Vec<f64> = cfg
        .nodes
        .iter()
        .map(|n| false_click_probability(n, &cfg.detector))
        .collect();
    let dark = cfg.detector.dark_count_prob;
    let n_settings = settings.len() as u64;

    let parts = run_chunks(pool, seed, 0, trials, |rng, chunk, len| {
        let mut counts = vec![vec![0u64; 1 << spec.qubits()]; settings.len()];
        let mut heralds = 0u64;
        let mut patterns = [0u64; 8];
        for i in 0..len {
            let setting = ((chunk * CHUNK + i) % n_settings) as usize;
            let mut combo = 0;
            let mut fired = true;
            for (k, node) in cfg.nodes.iter().enumerate() {
                match node_source(node, false_clicks[k], rng) {
                    Some(s) => combo = combo * 3 + s,
                    None => {
                        fired = false;
                        break;
                    }
                }
            }
            if !fired || rng.random::<f64>() >= model.combos[combo].post_selection {
                continue;
            }
            heralds += 1;
            let (prefix, truth, herald) = match kind {
                GhzKind::Six => {
                    let idx = sample_index(&tables.outcomes[setting][combo], rng.random());
                    (idx / 27, idx % 27, 0)
                }
                GhzKind::Three => {
                    let h = sample_index(&tables.heralds[combo], rng.random());
                    let m = sample_index(&tables.memories[setting][combo][h], rng.random());
                    (0, m, h)
                }
            };
            // Retrieved photon (if any) per memory, then dark counts on both channels.
            let mut clicked: [[bool; 2]; 3] = [[false; 2]; 3];
            for (m, channels) in clicked.iter_mut().enumerate() {
                let r = (truth / 3usize.pow(2 - m as u32)) % 3;
                for (k, c) in channels.iter_mut().enumerate() {
                    *c = r == k + 1 || rng.random::<f64>() < dark;
                }
            }
            for pattern in 0..8usize {
                if (0..3).all(|m| clicked[m][(pattern >> (2 - m)) & 1]) {
                    counts[setting][(prefix << 3) | pattern] += 1;
                    if kind == GhzKind::Three {
                        patterns[herald] += 1;
                    }
                }
            }
        }
        Ok((counts, heralds, patterns))
    })?;

    let mut tally = RawTally {
        trials,
        heralds: 0,
        settings: settings
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let share = trials / n_settings + u64::from((k as u64) < trials % n_settings);
                SettingCounts::new(s, share)
            })
            .collect(),
        herald_patterns: [0; 8],
    };
    for (counts, heralds, patterns) in parts {
        tally.heralds += heralds;
        for (k, row) in counts.iter().enumerate() {
            for (pattern, &c) in row.iter().enumerate() {
                if c > 0 {
                    tally.settings[k].add(pattern, c);
                }
            }
        }
        for (t, p) in tally.herald_patterns.iter_mut().zip(patterns) {
            *t += p;
        }
    }
    Ok(tally)
}
