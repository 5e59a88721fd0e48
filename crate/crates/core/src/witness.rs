//! GHZ fidelity from local measurements.
//!
//! For an `N`-qubit GHZ state `(|b> + s|~b>)/sqrt2` the projector splits into
//! two population projectors and `N` product observables built from
//! `M_n = cos(n pi/N) sigma_x + sin(n pi/N) sigma_y`:
//!
//! ```text
//! |GHZ><GHZ| = 1/2 (|b><b| + |~b><~b|) + s/(2N) sum_n (-1)^n (X^b M_n^{(x)N} X^b)
//! ```
//!
//! where `X^b` applies `sigma_x` on every qubit whose bit in `b` is 1. The
//! population setting measures every qubit in the computational basis; the
//! coherence setting `n` measures each qubit in the eigenbasis of its factor,
//! reporting bit 0 for eigenvalue +1.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::linalg::{self, basis_projector, kron, pauli_x};
use crate::quantum::{m_observable, Matrix, MeasurementBasis, Register, StateVector, Vector, C64};

/// Two-branch GHZ state `(|pattern0> + phase |pattern1>)/sqrt2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhzSpec {
    pattern0: Vec<u8>,
    pattern1: Vec<u8>,
    phase: i8,
}

impl GhzSpec {
    pub fn new(pattern0: Vec<u8>, pattern1: Vec<u8>, phase: i8) -> Result<Self> {
        if pattern0.len() < 2 {
            return Err(Error::InvalidArgument(
                "GHZ states need at least two qubits".into(),
            ));
        }
        if phase != 1 && phase != -1 {
            return Err(Error::InvalidArgument(format!(
                "relative phase must be +1 or -1, got {phase}"
            )));
        }
        if pattern0.iter().chain(&pattern1).any(|&b| b > 1) {
            return Err(Error::InvalidArgument("patterns must be bits".into()));
        }
        if pattern0.len() != pattern1.len()
            || pattern0.iter().zip(&pattern1).any(|(a, b)| a == b)
        {
            return Err(Error::NonComplementary);
        }
        Ok(Self {
            pattern0,
            pattern1,
            phase,
        })
    }

    /// `(|0...0> + |1...1>)/sqrt2`.
    pub fn canonical(qubits: usize) -> Result<Self> {
        Self::new(vec![0; qubits], vec![1; qubits], 1)
    }

    /// Complementary branch pair from `pattern0`.
    pub fn from_pattern(pattern0: &[u8], phase: i8) -> Result<Self> {
        let pattern1 = pattern0.iter().map(|b| 1 - (b & 1)).collect();
        Self::new(pattern0.to_vec(), pattern1, phase)
    }

    /// Photons 1',2',3' in H,H,H with memories I,II,III in down,down,up, plus the flipped branch.
    pub fn six_qubit_hybrid() -> Self {
        Self::from_pattern(&[0, 0, 0, 0, 0, 1], 1).expect("valid pattern")
    }

    /// Memories I,II,III in down,down,up plus up,up,down with relative sign `phase`.
    pub fn three_memory(phase: i8) -> Result<Self> {
        Self::from_pattern(&[0, 0, 1], phase)
    }

    pub fn qubits(&self) -> usize {
        self.pattern0.len()
    }

    pub fn pattern0(&self) -> &[u8] {
        &self.pattern0
    }

    pub fn pattern1(&self) -> &[u8] {
        &self.pattern1
    }

    pub fn phase(&self) -> i8 {
        self.phase
    }

    pub fn pattern_index(pattern: &[u8]) -> usize {
        pattern.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn index0(&self) -> usize {
        Self::pattern_index(&self.pattern0)
    }

    pub fn index1(&self) -> usize {
        Self::pattern_index(&self.pattern1)
    }

    pub fn state(&self, register: Register) -> Result<StateVector> {
        if register.len() != self.qubits() {
            return Err(Error::RegisterMismatch(format!(
                "{}-qubit GHZ on a {}-qubit register",
                self.qubits(),
                register.len()
            )));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = Vector::zeros(register.dim());
        amps[self.index0()] = C64::new(s, 0.0);
        amps[self.index1()] = C64::new(self.phase as f64 * s, 0.0);
        StateVector::new(register, amps)
    }

    pub fn projector(&self) -> Matrix {
        let dim = 1 << self.qubits();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = Vector::zeros(dim);
        v[self.index0()] = C64::new(s, 0.0);
        v[self.index1()] = C64::new(self.phase as f64 * s, 0.0);
        linalg::outer(&v)
    }

    /// Per-qubit factors of coherence setting `n`.
    pub fn coherence_factors(&self, n: usize) -> Result<Vec<Matrix>> {
        let m = m_observable(n, self.qubits())?;
        let x = pauli_x();
        let flipped = &x * &m * &x;
        Ok(self
            .pattern0
            .iter()
            .map(|&b| if b == 0 { m.clone() } else { flipped.clone() })
            .collect())
    }

    /// Per-qubit measurement bases for a setting.
    pub fn setting_bases(&self, setting: SettingId) -> Result<Vec<MeasurementBasis>> {
        match setting {
            SettingId::Population => Ok(vec![MeasurementBasis::computational(); self.qubits()]),
            SettingId::Coherence(n) => self
                .coherence_factors(n)?
                .iter()
                .map(MeasurementBasis::eigenbasis_of)
                .collect(),
        }
    }

    /// The population setting followed by every coherence setting.
    pub fn settings(&self) -> Vec<SettingId> {
        std::iter::once(SettingId::Population)
            .chain((0..self.qubits()).map(SettingId::Coherence))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermKind {
    Population(usize),
    Coherence(usize),
}

/// `coefficient * (factor_0 (x) factor_1 (x) ...)`.
#[derive(Clone, Debug)]
pub struct DecompositionTerm {
    pub kind: TermKind,
    pub coefficient: f64,
    pub factors: Vec<Matrix>,
}

impl DecompositionTerm {
    pub fn matrix(&self) -> Matrix {
        let product = self
            .factors
            .iter()
            .fold(linalg::identity(1), |acc, f| kron(&acc, f));
        product * C64::new(self.coefficient, 0.0)
    }
}

/// Population projectors and coherence observables summing to the GHZ projector.
pub fn decompose(spec: &GhzSpec) -> Vec<DecompositionTerm> {
    let n_qubits = spec.qubits();
    let population = |pattern: &[u8], index| DecompositionTerm {
        kind: TermKind::Population(index),
        coefficient: 0.5,
        factors: pattern.iter().map(|&b| basis_projector(b as usize)).collect(),
    };
    let mut terms = vec![
        population(spec.pattern0(), spec.index0()),
        population(spec.pattern1(), spec.index1()),
    ];
    for n in 0..n_qubits {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(DecompositionTerm {
            kind: TermKind::Coherence(n),
            coefficient: spec.phase() as f64 * sign / (2 * n_qubits) as f64,
            factors: spec.coherence_factors(n).expect("n < N"),
        });
    }
    terms
}

/// Sum of all terms as a dense matrix.
pub fn reconstruct(terms: &[DecompositionTerm]) -> Matrix {
    let mut iter = terms.iter().map(DecompositionTerm::matrix);
    let first = iter.next().unwrap_or_else(|| linalg::identity(1) * C64::new(0.0, 0.0));
    iter.fold(first, |acc, m| acc + m)
}

/// `1/2 (p0 + p1) + phase/(2N) sum_n (-1)^n m_n`.
pub fn fidelity_from_expectations(spec: &GhzSpec, p0: f64, p1: f64, m: &[f64]) -> Result<f64> {
    let n_qubits = spec.qubits();
    if m.len() != n_qubits {
        return Err(Error::InvalidArgument(format!(
            "expected {n_qubits} coherence expectations, got {}",
            m.len()
        )));
    }
    const SLACK: f64 = 1e-9;
    for (name, p) in [("p0", p0), ("p1", p1)] {
        if !(-SLACK..=1.0 + SLACK).contains(&p) {
            return Err(Error::InvalidArgument(format!("{name} = {p} outside [0, 1]")));
        }
    }
    if let Some(bad) = m.iter().find(|v| !(-1.0 - SLACK..=1.0 + SLACK).contains(*v)) {
        return Err(Error::InvalidArgument(format!(
            "coherence expectation {bad} outside [-1, 1]"
        )));
    }
    Ok(0.5 * (p0 + p1) + spec.phase() as f64 * coherence_sum(m) / (2 * n_qubits) as f64)
}

/// `sum_n (-1)^n m_n`.
pub fn coherence_sum(m: &[f64]) -> f64 {
    m.iter()
        .enumerate()
        .map(|(n, v)| if n % 2 == 0 { *v } else { -*v })
        .sum()
}

/// Two-qubit fidelity `(1 + V_eigen + 2 V_super)/4`; the superposition-basis
/// visibility stands in for both equatorial correlators.
pub fn bell_fidelity_from_visibilities(v_eigen: f64, v_super: f64) -> f64 {
    (1.0 + v_eigen + 2.0 * v_super) / 4.0
}

/// Measurement setting of a GHZ fidelity experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SettingId {
    Population,
    Coherence(usize),
}

impl fmt::Display for SettingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SettingId::Population => f.write_str("population"),
            SettingId::Coherence(n) => write!(f, "m{n}"),
        }
    }
}

impl FromStr for SettingId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "population" {
            return Ok(SettingId::Population);
        }
        s.strip_prefix('m')
            .and_then(|n| n.parse().ok())
            .map(SettingId::Coherence)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown setting id `{s}`")))
    }
}

/// Outcome counts of one measurement setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingCounts {
    pub setting: SettingId,
    /// Outcome pattern (bit `k` of the register at position `N-1-k`) to count.
    pub counts: BTreeMap<usize, u64>,
    pub total_trials: u64,
}

impl SettingCounts {
    pub fn new(setting: SettingId, total_trials: u64) -> Self {
        Self {
            setting,
            counts: BTreeMap::new(),
            total_trials,
        }
    }

    pub fn add(&mut self, pattern: usize, count: u64) {
        *self.counts.entry(pattern).or_default() += count;
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn merge(&mut self, other: &SettingCounts) {
        for (&k, &v) in &other.counts {
            self.add(k, v);
        }
        self.total_trials += other.total_trials;
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_counts() > self.total_trials {
            return Err(Error::InvalidArgument(format!(
                "setting {} has more counts than trials",
                self.setting
            )));
        }
        Ok(())
    }
}

/// Per-qubit multiplicative weights `[w(bit 0), w(bit 1)]` applied to counts.
///
/// A pattern's weight is the product over qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeWeights(pub Vec<[f64; 2]>);

impl OutcomeWeights {
    pub fn uniform(qubits: usize) -> Self {
        Self(vec![[1.0, 1.0]; qubits])
    }

    pub fn pattern_weight(&self, pattern: usize) -> f64 {
        let n = self.0.len();
        self.0
            .iter()
            .enumerate()
            .map(|(k, w)| w[(pattern >> (n - 1 - k)) & 1])
            .product()
    }
}

/// Fidelity estimate with its propagated standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub fidelity: f64,
    pub sigma: f64,
    pub p0: f64,
    pub p1: f64,
    pub coherences: Vec<f64>,
    pub coherences_sigma: Vec<f64>,
}

struct WeightedSetting {
    weights: Vec<(usize, f64, f64)>, // (pattern, count, weight)
    total: f64,
}

impl WeightedSetting {
    fn new(counts: &SettingCounts, weights: Option<&OutcomeWeights>) -> Result<Self> {
        let weights: Vec<_> = counts
            .counts
            .iter()
            .map(|(&p, &c)| {
                let w = weights.map_or(1.0, |w| w.pattern_weight(p));
                (p, c as f64, w)
            })
            .collect();
        let total: f64 = weights.iter().map(|(_, c, w)| c * w).sum();
        if total <= 0.0 {
            return Err(Error::EmptySetting(counts.setting.to_string()));
        }
        Ok(Self { weights, total })
    }

    /// Weighted mean of `f(pattern)` and its first-order Poisson variance.
    fn mean_and_variance(&self, f: impl Fn(usize) -> f64) -> (f64, f64) {
        let mean = self
            .weights
            .iter()
            .map(|&(p, c, w)| f(p) * c * w)
            .sum::<f64>()
            / self.total;
        let var = self
            .weights
            .iter()
            .map(|&(p, c, w)| c * (w * (f(p) - mean) / self.total).powi(2))
            .sum();
        (mean, var)
    }
}

/// Fidelity from raw count tables, with optional calibration weights.
///
/// Every raw count is treated as an independent Poisson variable and the
/// variance is propagated to first order.
pub fn fidelity_from_counts(
    spec: &GhzSpec,
    settings: &[SettingCounts],
    weights: Option<&OutcomeWeights>,
) -> Result<FidelityEstimate> {
    if let Some(w) = weights {
        if w.0.len() != spec.qubits() {
            return Err(Error::InvalidArgument(format!(
                "{} calibration weights for {} qubits",
                w.0.len(),
                spec.qubits()
            )));
        }
    }
    let find = |id: SettingId| {
        settings
            .iter()
            .find(|s| s.setting == id)
            .ok_or_else(|| Error::MissingSetting(id.to_string()))
    };
    let n_qubits = spec.qubits();
    let pop = WeightedSetting::new(find(SettingId::Population)?, weights)?;
    let (i0, i1) = (spec.index0(), spec.index1());
    let (p0, _) = pop.mean_and_variance(|p| (p == i0) as u8 as f64);
    let (p1, _) = pop.mean_and_variance(|p| (p == i1) as u8 as f64);
    let (_, var_pop) = pop.mean_and_variance(|p| (p == i0 || p == i1) as u8 as f64);

    let mut coherences = Vec::with_capacity(n_qubits);
    let mut coherences_sigma = Vec::with_capacity(n_qubits);
    let mut var_coh = 0.0;
    for n in 0..n_qubits {
        let table = WeightedSetting::new(find(SettingId::Coherence(n))?, weights)?;
        let (m, var) = table.mean_and_variance(parity);
        coherences.push(m);
        coherences_sigma.push(var.sqrt());
        var_coh += var;
    }
    let fidelity = fidelity_from_expectations(spec, p0, p1, &coherences)?;
    let sigma = (0.25 * var_pop + var_coh / (4 * n_qubits * n_qubits) as f64).sqrt();
    Ok(FidelityEstimate {
        fidelity,
        sigma,
        p0,
        p1,
        coherences,
        coherences_sigma,
    })
}

/// +1 for an even number of 1-bits, -1 otherwise.
pub fn parity(pattern: usize) -> f64 {
    if pattern.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn pattern_string(pattern: usize, qubits: usize) -> String {
    (0..qubits)
        .map(|k| if (pattern >> (qubits - 1 - k)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn parse_pattern(s: &str) -> Result<usize> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("empty outcome pattern".into()));
    }
    s.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::InvalidArgument(format!(
            "invalid character `{other}` in outcome pattern"
        ))),
    })
}

#[derive(Serialize, Deserialize)]
struct CountRow {
    setting_id: String,
    outcome_pattern: String,
    count: u64,
}

/// Writes `setting_id,outcome_pattern,count` rows; patterns are `qubits`-long bit strings.
pub fn write_counts_csv<W: Write>(writer: W, qubits: usize, settings: &[SettingCounts]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in settings {
        for (&pattern, &count) in &s.counts {
            w.serialize(CountRow {
                setting_id: s.setting.to_string(),
                outcome_pattern: pattern_string(pattern, qubits),
                count,
            })?;
        }
        if s.counts.is_empty() {
            w.write_record([s.setting.to_string().as_str(), &pattern_string(0, qubits), "0"])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a count table; `total_trials` of each setting is set to its count sum.
pub fn read_counts_csv<R: Read>(reader: R) -> Result<Vec<SettingCounts>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = r.headers()?.clone();
    let expected = ["setting_id", "outcome_pattern", "count"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::InvalidArgument(format!(
            "count table header must be {}, got {}",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut by_setting: BTreeMap<SettingId, SettingCounts> = BTreeMap::new();
    for row in r.deserialize::<CountRow>() {
        let row = row?;
        let setting: SettingId = row.setting_id.parse()?;
        let pattern = parse_pattern(&row.outcome_pattern)?;
        let entry = by_setting
            .entry(setting)
            .or_insert_with(|| SettingCounts::new(setting, 0));
        if row.count > 0 {
            entry.add(pattern, row.count);
        }
        entry.total_trials += row.count;
    }
    Ok(by_setting.into_values().collect())
}
