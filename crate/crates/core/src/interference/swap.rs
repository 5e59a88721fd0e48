//! Two-node entanglement swapping with Zeeman-split write-out photons.
//!
//! Photons of the `sigma+` component carry envelope `f` at `omega+` and
//! those of the `sigma-` component envelope `g` at `omega-`; frequencies are
//! measured in the frame rotating at `omega+`, so only
//! `delta_omega = omega- - omega+` enters.

use std::f64::consts::FRAC_1_SQRT_2;

use super::envelope::Envelope;
use crate::error::{Error, Result};
use crate::quantum::linalg::c;
use crate::quantum::{NodeId, QubitLabel, Register, StateVector, Vector, C64};

/// Envelopes of the two frequency components, on a shared grid.
#[derive(Clone, Debug)]
pub struct SwapEnvelopes {
    pub f: Envelope,
    pub g: Envelope,
}

impl SwapEnvelopes {
    pub fn new(f: Envelope, g: Envelope) -> Result<Self> {
        if f.grid() != g.grid() {
            return Err(Error::InvalidArgument(
                "f and g must share a time grid".into(),
            ));
        }
        Ok(Self { f, g })
    }
}

fn value_at(e: &Envelope, t: f64) -> Result<C64> {
    let grid = e.grid();
    let x = (t - grid.start_us) / grid.step_us;
    if x < -1e-9 || x > (grid.len - 1) as f64 + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "detection time {t} us outside the envelope grid"
        )));
    }
    let k = (x.max(0.0).floor() as usize).min(grid.len - 2);
    let frac = (x - k as f64).clamp(0.0, 1.0);
    Ok(e.values()[k] * (1.0 - frac) + e.values()[k + 1] * frac)
}

fn memories() -> Register {
    Register::new(vec![QubitLabel::atom(NodeId::I), QubitLabel::atom(NodeId::II)])
        .expect("distinct labels")
}

/// Unnormalized memory amplitudes over `(|dd>, |du>, |ud>, |uu>)` for
/// detections at `(t3, t4)`, given `[f(t3), f(t4), g(t3), g(t4)]`.
fn amplitudes(flip: bool, [f3, f4, g3, g4]: [C64; 4], t3: f64, t4: f64, dw: f64) -> [C64; 4] {
    let zero = c(0.0, 0.0);
    if flip {
        // Port 3 always receives the omega- photon and port 4 the omega+ photon.
        let a = f4 * g3 * C64::from_polar(FRAC_1_SQRT_2, -dw * t3);
        [zero, a, a, zero]
    } else {
        let dd = f3 * f4 * FRAC_1_SQRT_2;
        let uu = g3 * g4 * C64::from_polar(FRAC_1_SQRT_2, -dw * (t3 + t4));
        [dd, zero, zero, uu]
    }
}

/// Memory state conditioned on detections at `t3` (port 3) and `t4` (port 4).
///
/// Without the flip the state is `|dd> + r |uu>` with
/// `r = exp(-i dw (t3 + t4)) g(t3) g(t4) / (f(t3) f(t4))`. With the flip it is
/// `(|du> + |ud>)/sqrt2` for every detection time. The global phase is fixed
/// so that the first nonzero amplitude is real and positive.
pub fn swap_two_node(flip: bool, t3: f64, t4: f64, env: &SwapEnvelopes, delta_omega: f64) -> Result<StateVector> {
    let (f3, f4) = (value_at(&env.f, t3)?, value_at(&env.f, t4)?);
    let (g3, g4) = (value_at(&env.g, t3)?, value_at(&env.g, t4)?);
    let amps = if flip {
        if (f4 * g3).norm() == 0.0 {
            return Err(Error::UndefinedConditionalState);
        }
        amplitudes(true, [f3, f4, g3, g4], t3, t4, delta_omega)
    } else {
        let denom = f3 * f4;
        if denom.norm() == 0.0 {
            return Err(Error::UndefinedConditionalState);
        }
        let r = C64::from_polar(1.0, -delta_omega * (t3 + t4)) * g3 * g4 / denom;
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), r]
    };
    let lead = amps.iter().find(|a| a.norm() > 0.0).copied().expect("nonzero amplitude");
    let phase = lead.conj() / lead.norm();
    let v = Vector::from_iterator(4, amps.iter().map(|a| a * phase));
    StateVector::normalized(memories(), v)
}

/// Fidelity of the detection-time-averaged memory state to the target Bell
/// state (`|dd> + |uu>` without flip, `|du> + |ud>` with flip).
pub fn averaged_swap_fidelity(flip: bool, env: &SwapEnvelopes, delta_omega: f64) -> Result<f64> {
    let grid = *env.f.grid();
    let (f, g) = (env.f.values(), env.g.values());
    let mut rho = [[c(0.0, 0.0); 4]; 4];
    for k3 in 0..grid.len {
        let t3 = grid.time(k3);
        for k4 in 0..grid.len {
            let t4 = grid.time(k4);
            let w = grid.weight(k3) * grid.weight(k4);
            let a = amplitudes(flip, [f[k3], f[k4], g[k3], g[k4]], t3, t4, delta_omega);
            for i in 0..4 {
                if a[i].norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..4 {
                    rho[i][j] += a[i] * a[j].conj() * w;
                }
            }
        }
    }
    let trace: f64 = (0..4).map(|i| rho[i][i].re).sum();
    if !(trace > 0.0) {
        return Err(Error::ZeroProbability);
    }
    let (i, j) = if flip { (1, 2) } else { (0, 3) };
    let overlap = rho[i][i] + rho[j][j] + rho[i][j] + rho[j][i];
    Ok((overlap.re / 2.0 / trace).clamp(0.0, 1.0))
}
