//! Expected event rates from the trial schedule.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::interference::{connect_three, map_pair, Emitter};
use crate::node::{entangled_pair_state, NodeConfig};

/// Per-node efficiencies and the resulting three-node rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `p_w eta_r0` per node.
    pub p_node: [f64; 3],
    /// Product of the per-node efficiencies.
    pub joint_probability: f64,
    /// Probability that three ideal photons leave one per output port.
    pub post_selection_probability: f64,
    /// Six-fold probability per trial: joint probability times post-selection.
    pub six_fold_probability: f64,
    pub trials_per_second: f64,
    pub six_fold_per_hour: f64,
}

/// Post-selection probability of the connection for ideal pairs.
pub fn ideal_post_selection(emitters: &[Emitter]) -> Result<f64> {
    let pairs = crate::quantum::NodeId::ALL
        .iter()
        .map(|&n| map_pair(&entangled_pair_state(&NodeConfig::ideal(n), 0.0)?, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(connect_three(&pairs, emitters, 0.0)?.success_probability)
}

pub fn rate_arithmetic(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    let p_node = [0, 1, 2].map(|k| cfg.nodes[k].p_w * cfg.nodes[k].eta_r0);
    let joint_probability: f64 = p_node.iter().product();
    let post_selection_probability = ideal_post_selection(&cfg.interference.build_emitters()?)?;
    let six_fold_probability = joint_probability * post_selection_probability;
    let trials_per_second = cfg.timing.trials_per_second();
    Ok(RateReport {
        p_node,
        joint_probability,
        post_selection_probability,
        six_fold_probability,
        trials_per_second,
        six_fold_per_hour: six_fold_probability * trials_per_second * 3600.0 * cfg.timing.duty_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_operating_point() {
        let r = rate_arithmetic(&ExperimentConfig::single_pair()).unwrap();
        assert!(r.p_node.iter().all(|&p| (p - 0.006).abs() < 1e-15));
        assert!((r.joint_probability - 2.16e-7).abs() < 1e-12);
        assert!((r.post_selection_probability - 0.25).abs() < 1e-12);
        assert!((r.six_fold_per_hour - 5.76).abs() < 0.01, "{}", r.six_fold_per_hour);
    }

    #[test]
    fn silent_node_gives_zero_rate() {
        let mut cfg = ExperimentConfig::single_pair();
        cfg.nodes[1].p_w = 0.0;
        assert_eq!(rate_arithmetic(&cfg).unwrap().six_fold_per_hour, 0.0);
    }
}
