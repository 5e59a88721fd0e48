//! Experiment configuration file and named presets.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detection::DetectorConfig;
use crate::error::{Error, Result};
use crate::interference::{Emitter, EnvelopeShape, TimeGrid, GRID_POINTS};
use crate::node::NodeConfig;
use crate::quantum::NodeId;

/// Version of the configuration and report schemas.
pub const SCHEMA_VERSION: u32 = 1;

/// Scenario identifiers accepted by [`super::run_scenario`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    PairTomography,
    RamanDelaySweep,
    LifetimeSweep,
    TwoNodeSwap,
    Ghz6,
    Ghz3,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::PairTomography,
        ScenarioId::RamanDelaySweep,
        ScenarioId::LifetimeSweep,
        ScenarioId::TwoNodeSwap,
        ScenarioId::Ghz6,
        ScenarioId::Ghz3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::PairTomography => "pair_tomography",
            ScenarioId::RamanDelaySweep => "raman_delay_sweep",
            ScenarioId::LifetimeSweep => "lifetime_sweep",
            ScenarioId::TwoNodeSwap => "two_node_swap",
            ScenarioId::Ghz6 => "ghz6",
            ScenarioId::Ghz3 => "ghz3",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Loading and trial schedule of one experimental cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingConfig {
    pub cycle_ms: f64,
    pub loading_ms: f64,
    pub memory_window_ms: f64,
    pub trial_us: f64,
    pub max_trials_per_load: u32,
    /// Fraction of wall-clock time spent on the measurement being counted.
    #[serde(default = "one")]
    pub duty_factor: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            cycle_ms: 21.0,
            loading_ms: 18.0,
            memory_window_ms: 3.0,
            trial_us: 4.7,
            max_trials_per_load: 622,
            duty_factor: 1.0,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cycle_ms", self.cycle_ms),
            ("loading_ms", self.loading_ms),
            ("memory_window_ms", self.memory_window_ms),
            ("trial_us", self.trial_us),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("timing {name} must be positive, got {v}")));
            }
        }
        if self.loading_ms + self.memory_window_ms > self.cycle_ms + 1e-9 {
            return Err(Error::Config(
                "loading and memory phases exceed the cycle".into(),
            ));
        }
        let fit = self.trials_fitting_window();
        if self.max_trials_per_load == 0 || u64::from(self.max_trials_per_load) > fit {
            return Err(Error::Config(format!(
                "max_trials_per_load = {} must lie in [1, {fit}] for a {} ms window of {} us trials",
                self.max_trials_per_load, self.memory_window_ms, self.trial_us
            )));
        }
        if !(self.duty_factor > 0.0 && self.duty_factor <= 1.0) {
            return Err(Error::Config("duty_factor must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// `floor(memory_window / trial_us)`.
    pub fn trials_fitting_window(&self) -> u64 {
        (self.memory_window_ms * 1000.0 / self.trial_us + 1e-9).floor() as u64
    }

    pub fn trials_per_second(&self) -> f64 {
        f64::from(self.max_trials_per_load) / (self.cycle_ms / 1000.0)
    }
}

/// Envelope shapes of one node's `sigma+` and `sigma-` emission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    pub plus: EnvelopeShape,
    pub minus: EnvelopeShape,
}

impl EmitterConfig {
    pub fn symmetric(shape: EnvelopeShape) -> Self {
        Self {
            plus: shape.clone(),
            minus: shape,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceConfig {
    /// One entry per node, in node order.
    pub emitters: Vec<EmitterConfig>,
    /// `omega- - omega+`, rad/us.
    pub delta_omega_rad_per_us: f64,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
}

fn default_grid() -> usize {
    GRID_POINTS
}

impl InterferenceConfig {
    pub fn gaussian(width_us: f64, delta_omega: f64) -> Self {
        Self {
            emitters: vec![EmitterConfig::symmetric(EnvelopeShape::gaussian(width_us)); 3],
            delta_omega_rad_per_us: delta_omega,
            grid_points: GRID_POINTS,
        }
    }

    pub fn shared_grid(&self) -> Result<TimeGrid> {
        let shapes: Vec<EnvelopeShape> = self
            .emitters
            .iter()
            .flat_map(|e| [e.plus.clone(), e.minus.clone()])
            .collect();
        TimeGrid::covering(&shapes, self.grid_points)
    }

    /// Samples every emitter on one shared grid.
    pub fn build_emitters(&self) -> Result<Vec<Emitter>> {
        let grid = self.shared_grid()?;
        self.emitters
            .iter()
            .map(|e| {
                Ok(Emitter {
                    plus: e.plus.sample(&grid)?,
                    minus: e.minus.sample(&grid)?,
                })
            })
            .collect()
    }
}

/// Parameters of the delay sweep with a Raman pi/2 pulse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanSweepConfig {
    pub max_delay_us: f64,
    pub step_us: f64,
    /// Retrieval time after the write pulse.
    pub readout_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeSweepConfig {
    pub max_delay_us: f64,
    pub step_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapSweepConfig {
    pub widths_us: Vec<f64>,
    pub delta_omegas_rad_per_us: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub raman: RamanSweepConfig,
    pub lifetime: LifetimeSweepConfig,
    pub swap: SwapSweepConfig,
    /// Storage time before read-out in the pair tomography.
    #[serde(default)]
    pub pair_readout_us: f64,
    /// Storage time before read-out in the GHZ scenarios.
    #[serde(default)]
    pub ghz_readout_us: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let zeeman = 2.0 * PI / 5.28;
        Self {
            raman: RamanSweepConfig {
                max_delay_us: 21.12,
                step_us: 0.33,
                readout_us: 25.0,
            },
            lifetime: LifetimeSweepConfig {
                max_delay_us: 200.0,
                step_us: 10.0,
            },
            swap: SwapSweepConfig {
                widths_us: vec![0.02, 0.035, 0.05, 0.075, 0.1],
                delta_omegas_rad_per_us: vec![0.5, 1.0, zeeman, 2.0, 4.0],
            },
            pair_readout_us: 0.0,
            ghz_readout_us: 0.0,
        }
    }
}

/// Provenance of a preset's noise parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    /// True when the noise parameters were fitted to measured results rather than set independently.
    #[serde(default)]
    pub fitted: bool,
    #[serde(default)]
    pub note: String,
    /// Optional per-memory `[w_down, w_up]` count weights for the GHZ estimators.
    #[serde(default)]
    pub outcome_weights: Option<Vec<[f64; 2]>>,
}

/// Complete description of a simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub nodes: Vec<NodeConfig>,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub timing: TimingConfig,
    pub interference: InterferenceConfig,
    #[serde(default)]
    pub sweeps: SweepConfig,
    #[serde(default)]
    pub calibration: Calibration,
    #[serde(default)]
    pub scenario: Option<ScenarioId>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_samples() -> u64 {
    10_000
}

/// Names accepted by [`ExperimentConfig::preset`].
pub const PRESETS: [&str; 3] = ["ideal", "single_pair", "three_node_fit"];

impl ExperimentConfig {
    fn base(name: &str, nodes: Vec<NodeConfig>, interference: InterferenceConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            nodes,
            detector: DetectorConfig::default(),
            timing: TimingConfig::default(),
            interference,
            sweeps: SweepConfig::default(),
            calibration: Calibration::default(),
            scenario: None,
            seed: 0,
            samples: default_samples(),
            output_dir: None,
        }
    }

    /// Noise-free nodes, perfect detectors and identical photons.
    pub fn ideal() -> Self {
        let nodes = NodeId::ALL.iter().map(|&n| NodeConfig::ideal(n)).collect();
        Self::base("ideal", nodes, InterferenceConfig::gaussian(0.05, 0.0))
    }

    /// Single-pair operating point: `p = 0.006` per node and pair visibility
    /// 0.901, with every pair imperfection folded into the depolarizing weight.
    pub fn single_pair() -> Self {
        let nodes = NodeId::ALL
            .iter()
            .map(|&n| NodeConfig {
                excitation_order: 1,
                ..NodeConfig::operating_point(n)
            })
            .collect();
        Self::base(
            "single_pair",
            nodes,
            InterferenceConfig::gaussian(0.05, 2.0 * PI / 5.28),
        )
    }

    /// Noise parameters fitted to the measured three-node fidelities and populations.
    pub fn three_node_fit() -> Self {
        let nodes = NodeId::ALL
            .iter()
            .map(|&n| NodeConfig {
                write_noise_prob: 0.01,
                down_up_efficiency_ratio: 0.645,
                ..NodeConfig::operating_point(n)
            })
            .collect();
        let mut cfg = Self::base(
            "three_node_fit",
            nodes,
            InterferenceConfig::gaussian(0.05, 2.0 * PI / 5.28),
        );
        cfg.detector.dark_count_prob = 0.002;
        cfg.calibration = Calibration {
            fitted: true,
            note: "noise parameters fitted to reproduce the measured three-node fidelities and \
                   populations; the split between noise sources is not independently measured"
                .into(),
            outcome_weights: None,
        };
        cfg
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "ideal" => Ok(Self::ideal()),
            "single_pair" => Ok(Self::single_pair()),
            "three_node_fit" => Ok(Self::three_node_fit()),
            _ => Err(Error::Config(format!(
                "unknown preset `{name}` (expected one of {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.nodes.len() != 3 {
            return Err(Error::Config(format!(
                "expected 3 nodes, got {}",
                self.nodes.len()
            )));
        }
        for (k, node) in self.nodes.iter().enumerate() {
            if node.node.index() != k {
                return Err(Error::Config(format!(
                    "node entry {k} is labelled {}",
                    node.node
                )));
            }
            node.validate()?;
        }
        if self.interference.emitters.len() != 3 {
            return Err(Error::Config("expected 3 emitters".into()));
        }
        if !self.interference.delta_omega_rad_per_us.is_finite() {
            return Err(Error::Config("delta_omega must be finite".into()));
        }
        self.interference.shared_grid()?;
        self.detector.validate()?;
        self.timing.validate()?;
        let s = &self.sweeps;
        for (name, v) in [
            ("raman.step_us", s.raman.step_us),
            ("raman.max_delay_us", s.raman.max_delay_us),
            ("lifetime.step_us", s.lifetime.step_us),
            ("lifetime.max_delay_us", s.lifetime.max_delay_us),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("sweeps.{name} must be positive")));
            }
        }
        if s.raman.readout_us < s.raman.max_delay_us {
            return Err(Error::Config(
                "raman read-out must not precede the last rotation".into(),
            ));
        }
        if s.pair_readout_us < 0.0 || s.ghz_readout_us < 0.0 {
            return Err(Error::Config("read-out times must be non-negative".into()));
        }
        if let Some(w) = &self.calibration.outcome_weights {
            if w.len() != 3 || w.iter().flatten().any(|&x| !(x > 0.0)) {
                return Err(Error::Config(
                    "outcome_weights needs 3 positive [down, up] pairs".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESETS {
            let cfg = ExperimentConfig::preset(name).unwrap();
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(ExperimentConfig::preset("nope").is_err());
    }

    #[test]
    fn schedule_bounds() {
        let t = TimingConfig::default();
        assert_eq!(t.trials_fitting_window(), 638);
        assert!((t.trials_per_second() - 29_619.05).abs() < 0.01);
        let too_many = TimingConfig {
            max_trials_per_load: 700,
            ..t.clone()
        };
        assert!(too_many.validate().is_err());
        let negative = TimingConfig { trial_us: -1.0, ..t };
        assert!(negative.validate().is_err());
    }

    #[test]
    fn scenario_ids_parse() {
        for id in ScenarioId::ALL {
            assert_eq!(id.as_str().parse::<ScenarioId>().unwrap(), id);
        }
        assert!(matches!(
            "ghz7".parse::<ScenarioId>(),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&ExperimentConfig::ideal().to_json().unwrap()).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }
}
