//! Click model, coincidence tables and accidental-coincidence subtraction.
//!
//! Tables are indexed write-out first: `n_RL` counts write-out `R` with
//! read-out `L`. Channel 0 is `R` (`sigma+`) and channel 1 is `L` (`sigma-`).

use std::io::{Read, Write};

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detector parameters shared by all channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// Extra detection efficiency on read-out channels. Write-out and
    /// read-out losses are already folded into `p_w` and `eta_r0`.
    #[serde(default = "one")]
    pub efficiency: f64,
    /// Probability that a channel fires with no photon during one gate.
    #[serde(default)]
    pub dark_count_prob: f64,
    #[serde(default = "default_window")]
    pub window_us: f64,
}

fn one() -> f64 {
    1.0
}

fn default_window() -> f64 {
    0.1
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            dark_count_prob: 0.0,
            window_us: default_window(),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("efficiency", self.efficiency), ("dark_count_prob", self.dark_count_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("detector {name} = {p} outside [0, 1]")));
            }
        }
        if !(self.window_us > 0.0) {
            return Err(Error::Config("detector window must be positive".into()));
        }
        Ok(())
    }

    /// Probability that a channel fires given `photons` incident photons.
    pub fn click_probability(&self, photons: u32) -> f64 {
        let miss = (1.0 - self.efficiency).powi(photons as i32) * (1.0 - self.dark_count_prob);
        1.0 - miss
    }
}

/// Click pattern of a two-channel polarization analyzer.
pub type Clicks = [bool; 2];

/// Detects `photons[k]` photons incident on channel `k`.
pub fn detect<R: Rng + ?Sized>(photons: [u32; 2], cfg: &DetectorConfig, rng: &mut R) -> Clicks {
    let mut clicks = [false; 2];
    for (k, &n) in photons.iter().enumerate() {
        let mut fired = false;
        for _ in 0..n {
            fired |= rng.random::<f64>() < cfg.efficiency;
        }
        fired |= rng.random::<f64>() < cfg.dark_count_prob;
        clicks[k] = fired;
    }
    clicks
}

/// Anything carrying the four coincidence counts `[RL, LR, LL, RR]`.
pub trait Coincidences {
    fn coincidences(&self) -> [f64; 4];
}

/// Raw coincidence and singles counts for one basis setting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceTable {
    #[serde(rename = "n_RL")]
    pub n_rl: u64,
    #[serde(rename = "n_LR")]
    pub n_lr: u64,
    #[serde(rename = "n_LL")]
    pub n_ll: u64,
    #[serde(rename = "n_RR")]
    pub n_rr: u64,
    #[serde(rename = "n_woR")]
    pub n_wo_r: u64,
    #[serde(rename = "n_woL")]
    pub n_wo_l: u64,
    #[serde(rename = "n_roR")]
    pub n_ro_r: u64,
    #[serde(rename = "n_roL")]
    pub n_ro_l: u64,
    #[serde(rename = "N")]
    pub n: u64,
}

impl CoincidenceTable {
    /// Tallies one trial given the write-out and read-out click patterns.
    /// Every clicked channel contributes to singles; each clicked pair to coincidences.
    pub fn record(&mut self, write: Clicks, read: Clicks) {
        self.n += 1;
        self.n_wo_r += write[0] as u64;
        self.n_wo_l += write[1] as u64;
        self.n_ro_r += read[0] as u64;
        self.n_ro_l += read[1] as u64;
        self.n_rl += (write[0] && read[1]) as u64;
        self.n_lr += (write[1] && read[0]) as u64;
        self.n_ll += (write[1] && read[1]) as u64;
        self.n_rr += (write[0] && read[0]) as u64;
    }

    pub fn merge(&mut self, other: &CoincidenceTable) {
        self.n_rl += other.n_rl;
        self.n_lr += other.n_lr;
        self.n_ll += other.n_ll;
        self.n_rr += other.n_rr;
        self.n_wo_r += other.n_wo_r;
        self.n_wo_l += other.n_wo_l;
        self.n_ro_r += other.n_ro_r;
        self.n_ro_l += other.n_ro_l;
        self.n += other.n;
    }

    /// Checks that every coincidence is bounded by both singles it involves.
    /// A single may take part in two coincidences when both opposite channels fire.
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("n_RL", self.n_rl, self.n_wo_r, self.n_ro_l),
            ("n_LR", self.n_lr, self.n_wo_l, self.n_ro_r),
            ("n_LL", self.n_ll, self.n_wo_l, self.n_ro_l),
            ("n_RR", self.n_rr, self.n_wo_r, self.n_ro_r),
        ];
        for (name, coinc, write, read) in checks {
            if coinc > write.min(read) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {coinc} exceeds its singles ({write}, {read})"
                )));
            }
        }
        if self.n_wo_r.max(self.n_wo_l).max(self.n_ro_r).max(self.n_ro_l) > self.n {
            return Err(Error::InvalidArgument("singles exceed the trial count".into()));
        }
        Ok(())
    }
}

impl Coincidences for CoincidenceTable {
    fn coincidences(&self) -> [f64; 4] {
        [self.n_rl as f64, self.n_lr as f64, self.n_ll as f64, self.n_rr as f64]
    }
}

/// Coincidences after accidental subtraction, kept as reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectedTable {
    #[serde(rename = "n_RL")]
    pub n_rl: f64,
    #[serde(rename = "n_LR")]
    pub n_lr: f64,
    #[serde(rename = "n_LL")]
    pub n_ll: f64,
    #[serde(rename = "n_RR")]
    pub n_rr: f64,
    #[serde(rename = "n_woR")]
    pub n_wo_r: u64,
    #[serde(rename = "n_woL")]
    pub n_wo_l: u64,
    #[serde(rename = "n_roR")]
    pub n_ro_r: u64,
    #[serde(rename = "n_roL")]
    pub n_ro_l: u64,
    #[serde(rename = "N")]
    pub n: u64,
    /// Set when any corrected count was negative and clamped to zero.
    pub clamped: bool,
}

impl Coincidences for CorrectedTable {
    fn coincidences(&self) -> [f64; 4] {
        [self.n_rl, self.n_lr, self.n_ll, self.n_rr]
    }
}

/// `(n_RL + n_LR - n_LL - n_RR) / (n_RL + n_LR + n_LL + n_RR)`.
pub fn visibility_raw<T: Coincidences + ?Sized>(table: &T) -> Result<f64> {
    let [rl, lr, ll, rr] = table.coincidences();
    let total = rl + lr + ll + rr;
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "visibility undefined without coincidences".into(),
        ));
    }
    Ok((rl + lr - ll - rr) / total)
}

/// Binomial standard error of [`visibility_raw`] treating the total as fixed.
pub fn visibility_sigma<T: Coincidences + ?Sized>(table: &T) -> Result<f64> {
    let v = visibility_raw(table)?;
    let total: f64 = table.coincidences().iter().sum();
    Ok(((1.0 - v * v) / total).sqrt())
}

/// Subtracts `singles_i singles_j / N` from each coincidence.
pub fn subtract_accidentals(table: &CoincidenceTable) -> Result<CorrectedTable> {
    if table.n == 0 {
        return Err(Error::InvalidArgument(
            "accidental subtraction needs N > 0".into(),
        ));
    }
    let n = table.n as f64;
    let acc = |a: u64, b: u64| a as f64 * b as f64 / n;
    let raw = [
        table.n_rl as f64 - acc(table.n_wo_r, table.n_ro_l),
        table.n_lr as f64 - acc(table.n_wo_l, table.n_ro_r),
        table.n_ll as f64 - acc(table.n_wo_l, table.n_ro_l),
        table.n_rr as f64 - acc(table.n_wo_r, table.n_ro_r),
    ];
    let clamped = raw.iter().any(|&x| x < 0.0);
    if clamped {
        warn!("negative corrected coincidences clamped to zero: {raw:?}");
    }
    let c = raw.map(|x| x.max(0.0));
    Ok(CorrectedTable {
        n_rl: c[0],
        n_lr: c[1],
        n_ll: c[2],
        n_rr: c[3],
        n_wo_r: table.n_wo_r,
        n_wo_l: table.n_wo_l,
        n_ro_r: table.n_ro_r,
        n_ro_l: table.n_ro_l,
        n: table.n,
        clamped,
    })
}

/// Writes tables under the fixed header, one row per table.
pub fn write_tables_csv<W: Write>(writer: W, tables: &[CoincidenceTable]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for t in tables {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tables_csv<R: Read>(reader: R) -> Result<Vec<CoincidenceTable>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let t: CoincidenceTable = row?;
        t.validate()?;
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(c: [u64; 4], s: [u64; 4], n: u64) -> CoincidenceTable {
        CoincidenceTable {
            n_rl: c[0],
            n_lr: c[1],
            n_ll: c[2],
            n_rr: c[3],
            n_wo_r: s[0],
            n_wo_l: s[1],
            n_ro_r: s[2],
            n_ro_l: s[3],
            n,
        }
    }

    #[test]
    fn ideal_detector_follows_photon() {
        let cfg = DetectorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(detect([1, 0], &cfg, &mut rng), [true, false]);
        }
        let blind = DetectorConfig { efficiency: 0.0, ..cfg };
        for _ in 0..100 {
            assert_eq!(detect([1, 1], &blind, &mut rng), [false, false]);
        }
    }

    #[test]
    fn visibility_examples() {
        assert_eq!(visibility_raw(&table([50, 50, 0, 0], [50, 50, 50, 50], 100)).unwrap(), 1.0);
        assert_eq!(visibility_raw(&table([5, 5, 5, 5], [10, 10, 10, 10], 100)).unwrap(), 0.0);
        assert!(visibility_raw(&table([0; 4], [0; 4], 10)).is_err());
    }

    #[test]
    fn zero_singles_leave_table_unchanged() {
        let t = table([7, 9, 1, 2], [0; 4], 100);
        let c = subtract_accidentals(&t).unwrap();
        assert_eq!(c.coincidences(), t.coincidences());
        assert!(!c.clamped);
    }

    #[test]
    fn zero_trials_error() {
        assert!(subtract_accidentals(&table([0; 4], [0; 4], 0)).is_err());
    }

    #[test]
    fn purely_accidental_table_vanishes() {
        // singles 100 each over N = 1000 give 10 accidentals per cell.
        let t = table([10; 4], [100; 4], 1000);
        let c = subtract_accidentals(&t).unwrap();
        assert!(c.coincidences().iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn negative_results_clamp_with_flag() {
        let t = table([0, 10, 0, 0], [100, 100, 100, 100], 1000);
        let c = subtract_accidentals(&t).unwrap();
        assert!(c.clamped);
        assert_eq!(c.n_rl, 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let t = table([1, 2, 3, 4], [10, 20, 30, 40], 1000);
        let mut buf = Vec::new();
        write_tables_csv(&mut buf, &[t]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n_RL,n_LR,n_LL,n_RR,n_woR,n_woL,n_roR,n_roL,N\n"));
        assert_eq!(read_tables_csv(&buf[..]).unwrap(), vec![t]);
    }

    #[test]
    fn record_and_merge() {
        let mut a = CoincidenceTable::default();
        a.record([true, false], [false, true]);
        a.record([false, false], [true, false]);
        let mut b = a;
        b.merge(&a);
        assert_eq!(b.n_rl, 2);
        assert_eq!(b.n_ro_r, 2);
        assert_eq!(b.n, 4);
        b.validate().unwrap();
    }
}
