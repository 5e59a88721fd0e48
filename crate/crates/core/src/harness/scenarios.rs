//! Scenario runners.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rayon::ThreadPool;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::model::{false_click_probability, HeraldModel};
use super::report::{CountsTable, SweepTable};
use super::sampler::{draw_counts, run_chunks, Categorical};
use super::GhzKind;
use crate::detection::{
    detect, subtract_accidentals, visibility_raw, visibility_sigma, CoincidenceTable, DetectorConfig,
};
use crate::error::{Error, Result};
use crate::fit::{fit_exponential, fit_sinusoid};
use crate::interference::{
    averaged_swap_fidelity, swap_two_node, EnvelopeShape,
    HeraldPattern, SwapEnvelopes, TimeGrid,
};
use crate::node::{
    entangled_pair_state, evolve_memory, raman_rotation, rotate_memory, sample_excitation,
    zeeman_phase, Excitation, MemoryQubit, NodeConfig,
};
use crate::quantum::{
    circular_basis, circular_minus, circular_plus, pure_state_fidelity, sample_index,
    Matrix, MeasurementBasis, QuantumState, C64,
};
use crate::witness::{
    bell_fidelity_from_visibilities, fidelity_from_counts, fidelity_from_expectations, parity,
    FidelityEstimate, GhzSpec, OutcomeWeights, SettingCounts, SettingId,
};

/// Tables and numbers produced by one scenario.
#[derive(Default)]
pub struct ScenarioOutput {
    pub coincidence_tables: BTreeMap<String, CoincidenceTable>,
    pub setting_counts: BTreeMap<String, CountsTable>,
    pub derived: BTreeMap<String, Value>,
    pub sweeps: BTreeMap<String, SweepTable>,
}

impl ScenarioOutput {
    fn set(&mut self, key: &str, value: Value) {
        self.derived.insert(key.to_string(), value);
    }
}

/// Outcome distribution of one measured pair.
#[derive(Clone, Debug)]
pub struct PairSetting {
    /// Indexed `write_channel * 2 + spin`, spin read after any rotation.
    pub probs: [f64; 4],
    /// Read-out click efficiency of `[down, up]`.
    pub efficiency: [f64; 2],
}

/// Analyzer basis whose channel 0 pairs with `L` read-out in the superposition setting.
pub fn superposition_photon_basis() -> MeasurementBasis {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut m = Matrix::zeros(2, 2);
    m.set_column(0, &((circular_plus() - circular_minus()) * s));
    m.set_column(1, &((circular_plus() + circular_minus()) * s));
    MeasurementBasis::new(m).expect("orthonormal")
}

/// Builds the outcome distribution of a pair whose photon is analyzed in
/// `photon` and whose memory is optionally rotated at `rotation.0`, then
/// retrieved at `readout_us`.
pub fn pair_setting(
    node: &NodeConfig,
    detector: &DetectorConfig,
    photon: &MeasurementBasis,
    rotation: Option<(f64, crate::quantum::Unitary)>,
    readout_us: f64,
) -> Result<PairSetting> {
    let mut state = entangled_pair_state(node, 0.0)?;
    let mut mem = MemoryQubit::new(node.memory(), 0.0);
    if let Some((t, u)) = rotation {
        state = rotate_memory(node, &state, &mut mem, t, &u)?;
    }
    let state = evolve_memory(node, &state, &mut mem, readout_us)?;
    let p = state.outcome_probabilities(
        &[photon.clone(), MeasurementBasis::computational()],
        &[node.write_photon(), node.memory()],
    )?;
    Ok(PairSetting {
        probs: [p[0], p[1], p[2], p[3]],
        efficiency: node.state_efficiencies(readout_us).map(|e| e * detector.efficiency),
    })
}

/// One write/read trial of a single node. Spin `down` is read out in
/// channel 1 (`L`) and `up` in channel 0 (`R`).
fn pair_trial<R: Rng + ?Sized>(
    rng: &mut R,
    dark: &DetectorConfig,
    setting: &PairSetting,
    excitation: Excitation,
    noise: bool,
) -> ([bool; 2], [bool; 2]) {
    let pairs = match excitation {
        Excitation::Vacuum => 0,
        Excitation::Single => 1,
        Excitation::Double => 2,
    };
    let mut write = [0u32; 2];
    let mut read = [0u32; 2];
    for _ in 0..pairs {
        let idx = sample_index(&setting.probs, rng.random());
        let (w, s) = (idx >> 1, idx & 1);
        write[w] += 1;
        if rng.random::<f64>() < setting.efficiency[s] {
            read[1 - s] += 1;
        }
    }
    if noise {
        write[rng.random_range(0..2)] += 1;
    }
    (detect(write, dark, rng), detect(read, dark, rng))
}

/// Detector with unit efficiency; losses are already in the click probabilities.
fn dark_only(det: &DetectorConfig) -> DetectorConfig {
    DetectorConfig {
        efficiency: 1.0,
        ..det.clone()
    }
}

/// Raw trials of one node in one setting.
fn raw_pair_table(
    pool: &ThreadPool,
    cfg: &ExperimentConfig,
    setting: &PairSetting,
    trials: u64,
    seed: u64,
    task: u64,
) -> Result<CoincidenceTable> {
    let node = &cfg.nodes[0];
    let det = dark_only(&cfg.detector);
    let parts = run_chunks(pool, seed, task, trials, |rng, _, len| {
        let mut t = CoincidenceTable::default();
        for _ in 0..len {
            let exc = sample_excitation(node, rng);
            let noise = rng.random::<f64>() < node.write_noise_prob;
            let (w, r) = pair_trial(rng, &det, setting, exc, noise);
            t.record(w, r);
        }
        Ok(t)
    })?;
    let mut total = CoincidenceTable::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// Write-heralded trials of one node: the excitation is drawn from its
/// distribution conditioned on a write-out click.
fn heralded_pair_table(
    pool: &ThreadPool,
    cfg: &ExperimentConfig,
    setting: &PairSetting,
    events: u64,
    seed: u64,
    task: u64,
) -> Result<CoincidenceTable> {
    let node = &cfg.nodes[0];
    let det = dark_only(&cfg.detector);
    let sources = Categorical::new(&[
        node.p_w,
        node.double_probability(),
        false_click_probability(node, &cfg.detector),
    ])?;
    let parts = run_chunks(pool, seed, task, events, |rng, _, len| {
        let mut t = CoincidenceTable::default();
        for _ in 0..len {
            let (w, r) = match sources.sample(rng) {
                0 => pair_trial(rng, &det, setting, Excitation::Single, false),
                1 => pair_trial(rng, &det, setting, Excitation::Double, false),
                _ => {
                    let mut w = [false; 2];
                    w[rng.random_range(0..2)] = true;
                    (w, detect([0, 0], &det, rng))
                }
            };
            t.record(w, r);
        }
        Ok(t)
    })?;
    let mut total = CoincidenceTable::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Eigen- and superposition-basis tables of node I with accidental subtraction.
pub fn pair_tomography(cfg: &ExperimentConfig, pool: &ThreadPool, seed: u64, samples: u64) -> Result<ScenarioOutput> {
    let node = &cfg.nodes[0];
    let t = cfg.sweeps.pair_readout_us;
    let eigen = pair_setting(node, &cfg.detector, &circular_basis(), None, t)?;
    let rot = raman_rotation(PI / 2.0, zeeman_phase(node, t));
    let sup = pair_setting(node, &cfg.detector, &superposition_photon_basis(), Some((t, rot)), t)?;
    let mut out = ScenarioOutput::default();
    let mut vis = BTreeMap::new();
    for (task, (name, setting)) in [("eigen", &eigen), ("superposition", &sup)].into_iter().enumerate() {
        let table = raw_pair_table(pool, cfg, setting, samples, seed, task as u64)?;
        let corrected = subtract_accidentals(&table)?;
        let raw_v = visibility_raw(&table)?;
        let cor_v = visibility_raw(&corrected)?;
        out.set(&format!("visibility_{name}_raw"), num(raw_v));
        out.set(&format!("visibility_{name}_raw_sigma"), num(visibility_sigma(&table)?));
        out.set(&format!("visibility_{name}_corrected"), num(cor_v));
        out.set(&format!("accidentals_clamped_{name}"), json!(corrected.clamped));
        vis.insert(name, (raw_v, cor_v));
        out.coincidence_tables.insert(format!("pair_{name}"), table);
    }
    out.set(
        "bell_fidelity_raw",
        num(bell_fidelity_from_visibilities(vis["eigen"].0, vis["superposition"].0)),
    );
    out.set(
        "bell_fidelity_corrected",
        num(bell_fidelity_from_visibilities(vis["eigen"].1, vis["superposition"].1)),
    );
    Ok(out)
}

fn sweep_points(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

/// Photon in H/V, memory rotated by a pi/2 pulse after `delta_t`, retrieved later.
pub fn raman_delay_sweep(cfg: &ExperimentConfig, pool: &ThreadPool, seed: u64, samples: u64) -> Result<ScenarioOutput> {
    let node = &cfg.nodes[0];
    let sweep = &cfg.sweeps.raman;
    let delays = sweep_points(sweep.step_us, sweep.max_delay_us);
    let mut table = SweepTable::new(&[
        "delay_us",
        "ncop_parallel",
        "ncop_cross",
        "coincidences",
        "ncop_parallel_model",
    ]);
    let mut out = ScenarioOutput::default();
    let (mut ys, mut ws) = (Vec::new(), Vec::new());
    for (k, &dt) in delays.iter().enumerate() {
        let setting = pair_setting(
            node,
            &cfg.detector,
            &MeasurementBasis::computational(),
            Some((dt, raman_rotation(PI / 2.0, 0.0))),
            sweep.readout_us,
        )?;
        let t = raw_pair_table(pool, cfg, &setting, samples, seed, k as u64)?;
        // Parallel: H with R (spin up) and V with L.
        let parallel = (t.n_rr + t.n_ll) as f64;
        let cross = (t.n_rl + t.n_lr) as f64;
        let total = parallel + cross;
        let ncop = if total > 0.0 { parallel / total } else { 0.5 };
        let v0 = 1.0 - node.depolarizing_weight;
        let model = 0.5 * (1.0 + v0 * node.coherence_factor(dt) * zeeman_phase(node, dt).cos());
        table.push(vec![dt, ncop, 1.0 - ncop, total, model]);
        ys.push(ncop);
        ws.push(total / (ncop * (1.0 - ncop)).max(0.01));
    }
    let fit = fit_sinusoid(&delays, &ys, &ws, 2.0, 12.0)?;
    out.set("fitted_period_us", num(fit.period));
    out.set("fit_offset", num(fit.offset));
    out.set("fit_amplitude_at_zero", num(fit.cos[0].hypot(fit.sin[0])));
    out.sweeps.insert("raman_delay".into(), table);
    Ok(out)
}

/// Retrieval efficiency and superposition visibility versus storage time.
pub fn lifetime_sweep(cfg: &ExperimentConfig, pool: &ThreadPool, seed: u64, samples: u64) -> Result<ScenarioOutput> {
    let node = &cfg.nodes[0];
    let delays = sweep_points(cfg.sweeps.lifetime.step_us, cfg.sweeps.lifetime.max_delay_us);
    let mut table = SweepTable::new(&[
        "delay_us",
        "retrieval",
        "retrieval_sigma",
        "visibility",
        "visibility_sigma",
    ]);
    let (mut eta, mut eta_sigma, mut vis, mut vis_sigma) = (vec![], vec![], vec![], vec![]);
    for (k, &dt) in delays.iter().enumerate() {
        let eigen = pair_setting(node, &cfg.detector, &circular_basis(), None, dt)?;
        let t = heralded_pair_table(pool, cfg, &eigen, samples, seed, 2 * k as u64)?;
        let retrieved = (t.n_ro_r + t.n_ro_l) as f64 / t.n as f64;
        let r_sigma = (retrieved * (1.0 - retrieved) / t.n as f64).sqrt().max(1.0 / t.n as f64);
        let rot = raman_rotation(PI / 2.0, zeeman_phase(node, dt));
        let sup = pair_setting(node, &cfg.detector, &superposition_photon_basis(), Some((dt, rot)), dt)?;
        let ts = heralded_pair_table(pool, cfg, &sup, samples, seed, 2 * k as u64 + 1)?;
        let v = visibility_raw(&ts)?;
        let v_sigma = visibility_sigma(&ts)?;
        table.push(vec![dt, retrieved, r_sigma, v, v_sigma]);
        eta.push(retrieved);
        eta_sigma.push(r_sigma);
        vis.push(v);
        vis_sigma.push(v_sigma);
    }
    let mut out = ScenarioOutput::default();
    let efit = fit_exponential(&delays, &eta, &eta_sigma)?;
    out.set("retrieval_eta0", num(efit.amplitude));
    out.set("retrieval_lifetime_us", num(efit.tau));
    out.set("retrieval_lifetime_sigma_us", num(efit.tau_sigma));
    let vfit = fit_exponential(&delays, &vis, &vis_sigma)?;
    out.set("visibility_v0", num(vfit.amplitude));
    out.set("visibility_lifetime_us", num(vfit.tau));
    out.set("visibility_crossing_us", num(vfit.crossing(FRAC_1_SQRT_2)));
    out.sweeps.insert("lifetime".into(), table);
    Ok(out)
}

/// Averaged swap fidelities with and without the polarization flip.
pub fn two_node_swap(cfg: &ExperimentConfig) -> Result<ScenarioOutput> {
    let mut out = ScenarioOutput::default();
    let em = &cfg.interference.emitters[0];
    let grid = TimeGrid::covering(&[em.plus.clone(), em.minus.clone()], cfg.interference.grid_points)?;
    let env = SwapEnvelopes::new(em.plus.sample(&grid)?, em.minus.sample(&grid)?)?;
    let dw = cfg.interference.delta_omega_rad_per_us;
    out.set("fidelity_flip", num(averaged_swap_fidelity(true, &env, dw)?));
    out.set("fidelity_no_flip", num(averaged_swap_fidelity(false, &env, dw)?));

    // Largest change of the flip-case state across detection times.
    let reference = swap_two_node(true, grid.time(grid.len / 2), grid.time(grid.len / 2), &env, dw)?;
    let mut deviation: f64 = 0.0;
    for k3 in (0..grid.len).step_by(8) {
        for k4 in (0..grid.len).step_by(8) {
            match swap_two_node(true, grid.time(k3), grid.time(k4), &env, dw) {
                Ok(s) => {
                    deviation = deviation.max((s.amplitudes() - reference.amplitudes()).camax());
                }
                Err(Error::UndefinedConditionalState) => {}
                Err(e) => return Err(e),
            }
        }
    }
    out.set("flip_state_max_deviation", num(deviation));

    let mut table = SweepTable::new(&["delta_omega_rad_per_us", "width_us", "fidelity_flip", "fidelity_no_flip"]);
    for &w in &cfg.sweeps.swap.widths_us {
        let shape = EnvelopeShape::gaussian(w);
        let g = TimeGrid::covering(std::slice::from_ref(&shape), cfg.interference.grid_points)?;
        let e = shape.sample(&g)?;
        let env = SwapEnvelopes::new(e.clone(), e)?;
        for &d in &cfg.sweeps.swap.delta_omegas_rad_per_us {
            table.push(vec![
                d,
                w,
                averaged_swap_fidelity(true, &env, d)?,
                averaged_swap_fidelity(false, &env, d)?,
            ]);
        }
    }
    out.sweeps.insert("two_node_swap".into(), table);
    Ok(out)
}

/// Wilson score interval at 95 % confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn split(total: u64, parts: usize, k: usize) -> u64 {
    total / parts as u64 + u64::from((k as u64) < total % parts as u64)
}

/// Estimator value for infinite statistics, from normalized tallies.
fn expected_from_tallies(
    spec: &GhzSpec,
    tallies: &[(SettingId, Vec<f64>)],
    weights: &OutcomeWeights,
) -> Result<FidelityEstimate> {
    let patterns = 1usize << spec.qubits();
    let collapse = |t: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; patterns];
        for (i, x) in t.iter().enumerate() {
            v[i % patterns] += x;
        }
        v.iter().enumerate().map(|(p, x)| x * weights.pattern_weight(p)).collect()
    };
    let mut p = (0.0, 0.0);
    let mut m = vec![0.0; spec.qubits()];
    for (setting, t) in tallies {
        let v = collapse(t);
        let total: f64 = v.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptySetting(setting.to_string()));
        }
        match setting {
            SettingId::Population => p = (v[spec.index0()] / total, v[spec.index1()] / total),
            SettingId::Coherence(n) => {
                m[*n] = v.iter().enumerate().map(|(q, x)| parity(q) * x).sum::<f64>() / total
            }
        }
    }
    Ok(FidelityEstimate {
        fidelity: fidelity_from_expectations(spec, p.0, p.1, &m)?,
        sigma: 0.0,
        p0: p.0,
        p1: p.1,
        coherences_sigma: vec![0.0; m.len()],
        coherences: m,
    })
}

fn model_tallies(model: &HeraldModel, spec: &GhzSpec, kind: GhzKind, setting: SettingId) -> Result<Vec<f64>> {
    match kind {
        GhzKind::Six => model.ghz6_tallies(spec, setting),
        GhzKind::Three => model.ghz3_tallies(spec, setting),
    }
}

/// Fidelity, populations and coherences the sampled estimator converges to.
pub fn expected_estimate(cfg: &ExperimentConfig, kind: GhzKind) -> Result<FidelityEstimate> {
    let model = HeraldModel::new(cfg)?;
    let spec = kind.spec()?;
    let tallies = spec
        .settings()
        .into_iter()
        .map(|s| Ok((s, model_tallies(&model, &spec, kind, s)?)))
        .collect::<Result<Vec<_>>>()?;
    expected_from_tallies(&spec, &tallies, &outcome_weights(cfg, kind))
}

fn outcome_weights(cfg: &ExperimentConfig, kind: GhzKind) -> OutcomeWeights {
    let memories = cfg
        .calibration
        .outcome_weights
        .clone()
        .unwrap_or_else(|| vec![[1.0, 1.0]; 3]);
    match kind {
        GhzKind::Six => OutcomeWeights([vec![[1.0, 1.0]; 3], memories].concat()),
        GhzKind::Three => OutcomeWeights(memories),
    }
}

/// Conditional sampling of heralded GHZ events.
pub fn ghz(cfg: &ExperimentConfig, kind: GhzKind, pool: &ThreadPool, seed: u64, samples: u64) -> Result<ScenarioOutput> {
    let model = HeraldModel::new(cfg)?;
    let spec = kind.spec()?;
    let settings = spec.settings();
    let weights = outcome_weights(cfg, kind);
    let patterns = 1usize << spec.qubits();
    let mut tallies = Vec::new();
    let mut counts = Vec::new();
    let mut herald_counts = [0u64; 8];
    for (k, &s) in settings.iter().enumerate() {
        let t = model_tallies(&model, &spec, kind, s)?;
        let dist = Categorical::new(&t)?;
        let n = split(samples, settings.len(), k);
        let drawn = draw_counts(pool, &dist, n, seed, k as u64)?;
        let trials = (n as f64 / dist.total()).round() as u64;
        let mut sc = SettingCounts::new(s, trials.max(n));
        for (idx, &c) in drawn.iter().enumerate() {
            if c == 0 {
                continue;
            }
            sc.add(idx % patterns, c);
            if kind == GhzKind::Three {
                herald_counts[(idx / 8) % 8] += c;
            }
        }
        counts.push(sc);
        tallies.push((s, t));
    }
    let estimate = fidelity_from_counts(&spec, &counts, Some(&weights))?;
    let mut out = ScenarioOutput::default();
    out.set("fidelity", num(estimate.fidelity));
    out.set("fidelity_sigma", num(estimate.sigma));
    out.set("population_0", num(estimate.p0));
    out.set("population_1", num(estimate.p1));
    out.set("population_other", num(1.0 - estimate.p0 - estimate.p1));
    out.set("coherences", json!(estimate.coherences.iter().map(|&x| num(x)).collect::<Vec<_>>()));
    out.set(
        "coherences_sigma",
        json!(estimate.coherences_sigma.iter().map(|&x| num(x)).collect::<Vec<_>>()),
    );
    let expected = expected_from_tallies(&spec, &tallies, &weights)?;
    out.set("expected_fidelity", num(expected.fidelity));
    out.set("expected_population_0", num(expected.p0));
    out.set("expected_population_1", num(expected.p1));
    let tracked = match kind {
        GhzKind::Six => model.detected_six_qubit_state()?,
        GhzKind::Three => model.detected_memory_state()?,
    };
    let target = spec.state(tracked.register().clone())?;
    out.set("tracked_state_fidelity", num(pure_state_fidelity(&tracked, &target)?));
    out.set("herald_probability", num(model.herald_probability()));

    if cfg.nodes.iter().all(|n| n.excitation_order >= 2) {
        out.set("conditional_success", num(model.conditional_success()?));
    }
    let heralds = Categorical::new(&model.herald_weights())?;
    let drawn = draw_counts(pool, &heralds, samples, seed, settings.len() as u64)?;
    let success = drawn[model.all_single_index()];
    let (lo, hi) = wilson_interval(success, samples);
    out.set("conditional_success_sampled", num(success as f64 / samples.max(1) as f64));
    out.set("conditional_success_ci95", json!([num(lo), num(hi)]));

    if kind == GhzKind::Three {
        let mut by_name = serde_json::Map::new();
        for h in HeraldPattern::all() {
            by_name.insert(h.to_string(), json!(herald_counts[h.index()]));
        }
        out.set("herald_pattern_counts", Value::Object(by_name));
    }
    out.setting_counts.insert(
        kind.name().into(),
        CountsTable {
            qubits: spec.qubits(),
            settings: counts,
        },
    );
    Ok(out)
}
