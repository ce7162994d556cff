//! Link budget pieces: thermal noise, uplink power control, SINR assembly
//! with on/off interference states, URLLC failure probability and MCS
//! choice, and the eMBB rate map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::NodeId;
use crate::mcs::McsEntry;
use crate::tdd::InterferenceMode;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("victim link has no signal (non-finite received power)")]
    EmptyVictimLink,
    #[error("alpha out of [0,1]: {0}")]
    AlphaOutOfRange(f64),
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// How the open-loop target maps onto transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcLaw {
    /// `alpha * (target + noise + pathloss)`
    ScaledTarget,
    /// `noise + target + alpha * pathloss`
    NoiseOffset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerControlConfig {
    pub alpha: f64,
    pub target_snr_db: f64,
    pub max_ue_power_dbm: f64,
    pub law: PcLaw,
}

impl Default for PowerControlConfig {
    fn default() -> Self {
        Self { alpha: 0.8, target_snr_db: 10.0, max_ue_power_dbm: 23.0, law: PcLaw::ScaledTarget }
    }
}

impl PowerControlConfig {
    pub fn validate(&self) -> Result<(), RadioError> {
        if (0.0..=1.0).contains(&self.alpha) {
            Ok(())
        } else {
            Err(RadioError::AlphaOutOfRange(self.alpha))
        }
    }
}

/// Open-loop fractional uplink power. `pathloss_db` is the coupling loss to
/// the serving base station.
pub fn ul_tx_power(pathloss_db: f64, pc: &PowerControlConfig, rx_noise_dbm: f64) -> f64 {
    let p = match pc.law {
        PcLaw::ScaledTarget => pc.alpha * (pc.target_snr_db + rx_noise_dbm + pathloss_db),
        PcLaw::NoiseOffset => rx_noise_dbm + pc.target_snr_db + pc.alpha * pathloss_db,
    };
    p.min(pc.max_ue_power_dbm)
}

/// One interferer as seen by a victim receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterferenceTerm {
    pub aggressor: NodeId,
    pub mode: InterferenceMode,
    pub overlap: f64,
    pub attenuation_db: f64,
    /// Received power when transmitting, before channel attenuation.
    pub power_dbm: f64,
    /// Probability of transmitting on the victim's resources.
    pub activity: f64,
}

impl InterferenceTerm {
    /// Received power in mW while active, after attenuation.
    pub fn on_power_mw(&self) -> f64 {
        db_to_lin(self.power_dbm - self.attenuation_db)
    }

    pub fn mean_power_mw(&self) -> f64 {
        self.activity * self.on_power_mw()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrBreakdown {
    pub signal_dbm: f64,
    pub noise_dbm: f64,
    pub interference_terms: Vec<InterferenceTerm>,
    /// Weight applied to each term: 0/1 for explicit state members, mean
    /// activity otherwise.
    pub weights: Vec<f64>,
    pub sinr_db: f64,
}

impl SinrBreakdown {
    pub fn recompute_db(&self) -> f64 {
        let i: f64 = self.interference_terms.iter().zip(&self.weights).map(|(t, w)| w * t.on_power_mw()).sum();
        self.signal_dbm - lin_to_db(db_to_lin(self.noise_dbm) + i)
    }
}

/// Which aggressors are explicitly on. `explicit[i]` refers to term index
/// `i` of the victim's list; terms not listed contribute their mean.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InterferenceState {
    pub explicit: Vec<(usize, bool)>,
}

pub fn victim_sinr(
    signal_dbm: f64,
    noise_dbm: f64,
    terms: &[InterferenceTerm],
    state: &InterferenceState,
) -> Result<SinrBreakdown, RadioError> {
    if !signal_dbm.is_finite() {
        return Err(RadioError::EmptyVictimLink);
    }
    let mut weights: Vec<f64> = terms.iter().map(|t| t.activity).collect();
    for &(i, on) in &state.explicit {
        weights[i] = if on { 1.0 } else { 0.0 };
    }
    let mut b = SinrBreakdown { signal_dbm, noise_dbm, interference_terms: terms.to_vec(), weights, sinr_db: 0.0 };
    b.sinr_db = b.recompute_db();
    Ok(b)
}

/// Probability-weighted SINR samples over the on/off states of the `k`
/// strongest aggressors (by mean received power); the rest enter as their
/// mean.
pub fn interference_states(signal_dbm: f64, noise_dbm: f64, terms: &[InterferenceTerm], k: usize) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..terms.len()).filter(|&i| terms[i].activity > 0.0).collect();
    order.sort_by(|&a, &b| terms[b].mean_power_mw().total_cmp(&terms[a].mean_power_mw()).then(a.cmp(&b)));
    order.truncate(k);
    let mut background = db_to_lin(noise_dbm);
    for (i, t) in terms.iter().enumerate() {
        if !order.contains(&i) {
            background += t.mean_power_mw();
        }
    }
    let top: Vec<(f64, f64)> = order.iter().map(|&i| (terms[i].activity.min(1.0), terms[i].on_power_mw())).collect();
    let signal = db_to_lin(signal_dbm);
    (0..1usize << top.len())
        .filter_map(|mask| {
            let mut p = 1.0;
            let mut i = background;
            for (bit, &(a, pw)) in top.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    p *= a;
                    i += pw;
                } else {
                    p *= 1.0 - a;
                }
            }
            (p > 0.0).then(|| (p, lin_to_db(signal / i)))
        })
        .collect()
}

/// Failure probability of one packet at `mcs` over the state mixture.
pub fn urllc_reliability(states: &[(f64, f64)], mcs: &McsEntry) -> f64 {
    states.iter().map(|&(p, sinr)| p * mcs.bler(sinr)).sum::<f64>().min(1.0)
}

/// Highest-rate MCS meeting `max_fail`, else the one with the lowest
/// failure probability. Returns (table index, failure probability).
pub fn select_mcs(states: &[(f64, f64)], table: &[McsEntry], max_fail: f64) -> (usize, f64) {
    let fails: Vec<f64> = table.iter().map(|m| urllc_reliability(states, m)).collect();
    if let Some(i) = (0..table.len()).rev().find(|&i| fails[i] <= max_fail) {
        return (i, fails[i]);
    }
    let best = (0..table.len()).min_by(|&a, &b| fails[a].total_cmp(&fails[b]).then(b.cmp(&a))).unwrap_or(0);
    (best, fails.get(best).copied().unwrap_or(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbbLinkMap {
    pub efficiency: f64,
    pub max_spectral_efficiency: f64,
}

impl Default for EmbbLinkMap {
    fn default() -> Self {
        Self { efficiency: 0.75, max_spectral_efficiency: 7.4 }
    }
}

/// Attenuated, capped Shannon rate in bit/s.
pub fn embb_rate(sinr_db: f64, bandwidth_hz: f64, map: &EmbbLinkMap) -> f64 {
    let se = map.efficiency * (1.0 + db_to_lin(sinr_db)).log2();
    bandwidth_hz * se.min(map.max_spectral_efficiency)
}
