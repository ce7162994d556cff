//! Short-packet link curves and the URLLC MCS table.
//!
//! Block error probability is the finite-blocklength normal approximation
//! evaluated with the capacity and dispersion of the PAM constellation that
//! each modulation uses per real dimension.

use std::io::Write;
use std::sync::OnceLock;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

const GRID_MIN_DB: f64 = -30.0;
const GRID_MAX_DB: f64 = 50.0;
const GRID_STEP_DB: f64 = 0.05;
/// Standard-normal integration range and step for the tabulation.
const U_RANGE: f64 = 9.0;
const U_STEP: f64 = 0.02;

#[derive(Debug, Error, PartialEq)]
pub enum McsError {
    #[error("payload must be positive")]
    EmptyPayload,
    #[error("target BLER {0} outside (0, 1)")]
    InvalidTarget(f64),
    #[error("no MCS carries {payload} bits in {tti} symbols over {subcarriers} subcarriers")]
    NothingFits { payload: u32, tti: usize, subcarriers: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub const ALL: [Modulation; 3] = [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64];

    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    /// Points of the PAM constellation on each of the I and Q axes.
    pub fn pam_levels(self) -> usize {
        1 << (self.bits_per_symbol() / 2)
    }

    pub fn label(self) -> &'static str {
        match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
        }
    }

    fn index(self) -> usize {
        match self {
            Modulation::Qpsk => 0,
            Modulation::Qam16 => 1,
            Modulation::Qam64 => 2,
        }
    }
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Unit-energy, equally spaced PAM points.
pub fn pam_points(levels: usize) -> Vec<f64> {
    let m = levels as f64;
    let scale = (3.0 / (m * m - 1.0)).sqrt();
    (0..levels).map(|i| (2.0 * i as f64 - (m - 1.0)) * scale).collect()
}

/// Capacity (bits) and dispersion (bits^2) per real dimension of
/// equiprobable PAM at signal-to-noise ratio `snr` (linear, per dimension).
pub fn pam_capacity_dispersion(levels: usize, snr: f64) -> (f64, f64) {
    let x = pam_points(levels);
    let sigma = snr.recip().sqrt();
    let log2m = (levels as f64).log2();
    let steps = (2.0 * U_RANGE / U_STEP).round() as usize;
    let norm = (2.0 * std::f64::consts::PI).sqrt().recip();
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut exps = vec![0.0; levels];
    // the constellation is symmetric, so the upper half of the points suffices
    let half = levels / 2;
    for &xi in &x[half..] {
        for k in 0..=steps {
            let u = -U_RANGE + k as f64 * U_STEP;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 } * U_STEP * norm * (-0.5 * u * u).exp();
            let z = sigma * u;
            // log of sum_j exp(-((xi-xj+z)^2 - z^2) / (2 sigma^2))
            let mut mx = f64::NEG_INFINITY;
            for (e, &xj) in exps.iter_mut().zip(&x) {
                let d = xi - xj;
                *e = -(d * d + 2.0 * d * z) / (2.0 * sigma * sigma);
                mx = mx.max(*e);
            }
            let s: f64 = exps.iter().map(|e| (e - mx).exp()).sum();
            let info = log2m - (mx + s.ln()) / std::f64::consts::LN_2;
            m1 += w * info;
            m2 += w * info * info;
        }
    }
    let m1 = m1 / half as f64;
    let m2 = m2 / half as f64;
    (m1, (m2 - m1 * m1).max(0.0))
}

/// Tabulated capacity and dispersion over an SNR grid in dB.
struct CurveTable {
    cap: Vec<f64>,
    disp: Vec<f64>,
}

fn tables() -> &'static [CurveTable; 3] {
    static TABLES: OnceLock<[CurveTable; 3]> = OnceLock::new();
    TABLES.get_or_init(|| {
        let n = ((GRID_MAX_DB - GRID_MIN_DB) / GRID_STEP_DB).round() as usize + 1;
        Modulation::ALL.map(|m| {
            let (cap, disp) = (0..n)
                .map(|i| {
                    let db = GRID_MIN_DB + i as f64 * GRID_STEP_DB;
                    pam_capacity_dispersion(m.pam_levels(), 10f64.powf(db / 10.0))
                })
                .unzip();
            CurveTable { cap, disp }
        })
    })
}

/// Interpolated (capacity, dispersion) per real dimension at `sinr_db`.
pub fn capacity_dispersion(modulation: Modulation, sinr_db: f64) -> (f64, f64) {
    let t = &tables()[modulation.index()];
    if !(sinr_db > GRID_MIN_DB) {
        return (0.0, 0.0);
    }
    let pos = (sinr_db - GRID_MIN_DB) / GRID_STEP_DB;
    let last = t.cap.len() - 1;
    if pos >= last as f64 {
        return (t.cap[last], t.disp[last]);
    }
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    (t.cap[i] + f * (t.cap[i + 1] - t.cap[i]), t.disp[i] + f * (t.disp[i + 1] - t.disp[i]))
}

/// Normal-approximation block error rate of `payload_bits` sent over
/// `n_real` real channel uses.
pub fn bler(modulation: Modulation, payload_bits: u32, n_real: usize, sinr_db: f64) -> f64 {
    let n = n_real as f64;
    let rate = f64::from(payload_bits) / n;
    let (c, v) = capacity_dispersion(modulation, sinr_db);
    if v <= 1e-300 {
        return if c > rate { 0.0 } else { 1.0 };
    }
    q_function((c - rate) * (n / v).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McsTableConfig {
    pub payload_bits: u32,
    pub tti_symbols: usize,
    pub subcarriers: usize,
    pub target_bler: f64,
}

impl Default for McsTableConfig {
    fn default() -> Self {
        Self {
            payload_bits: 256,
            tti_symbols: 4,
            // 133 PRBs of 12 subcarriers in 50 MHz at 30 kHz
            subcarriers: 1596,
            target_bler: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McsEntry {
    pub modulation: Modulation,
    #[serde(serialize_with = "ser_ratio")]
    pub code_rate: Ratio<u32>,
    /// Information bits per resource element.
    pub spectral_efficiency: f64,
    /// Resource elements per packet (subcarriers x TTI symbols).
    pub n_re: usize,
    pub payload_bits: u32,
    pub sinr_threshold_db: f64,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u32>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

impl McsEntry {
    pub fn n_real(&self) -> usize {
        2 * self.n_re
    }

    pub fn bler(&self, sinr_db: f64) -> f64 {
        bler(self.modulation, self.payload_bits, self.n_real(), sinr_db)
    }
}

/// Modulation and code-rate pairs in increasing spectral efficiency.
pub fn mcs_set() -> [(Modulation, Ratio<u32>); 9] {
    use Modulation::*;
    [
        (Qpsk, Ratio::new(1, 20)),
        (Qpsk, Ratio::new(1, 10)),
        (Qpsk, Ratio::new(1, 5)),
        (Qpsk, Ratio::new(1, 3)),
        (Qam16, Ratio::new(1, 3)),
        (Qam16, Ratio::new(1, 2)),
        (Qam16, Ratio::new(2, 3)),
        (Qam64, Ratio::new(2, 3)),
        (Qam64, Ratio::new(3, 4)),
    ]
}

/// Resource elements needed for the payload: whole subcarriers, each
/// spanning the TTI.
pub fn allocation_re(payload_bits: u32, tti_symbols: usize, spectral_efficiency: f64) -> usize {
    let per_subcarrier = tti_symbols as f64 * spectral_efficiency;
    let subcarriers = (f64::from(payload_bits) / per_subcarrier - 1e-9).ceil() as usize;
    subcarriers * tti_symbols
}

/// Lowest SINR (dB) at which `bler_at` drops to `target`, by bisection.
pub fn threshold_db(target: f64, bler_at: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (GRID_MIN_DB, GRID_MAX_DB);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if bler_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub fn build_mcs_table(cfg: &McsTableConfig) -> Result<Vec<McsEntry>, McsError> {
    if cfg.payload_bits == 0 {
        return Err(McsError::EmptyPayload);
    }
    if !(cfg.target_bler > 0.0 && cfg.target_bler < 1.0) {
        return Err(McsError::InvalidTarget(cfg.target_bler));
    }
    let capacity_re = cfg.subcarriers * cfg.tti_symbols;
    let table: Vec<McsEntry> = mcs_set()
        .into_iter()
        .filter_map(|(modulation, code_rate)| {
            let se =
                f64::from(modulation.bits_per_symbol()) * f64::from(*code_rate.numer()) / f64::from(*code_rate.denom());
            let n_re = allocation_re(cfg.payload_bits, cfg.tti_symbols, se);
            (n_re <= capacity_re).then(|| {
                let mut e = McsEntry {
                    modulation,
                    code_rate,
                    spectral_efficiency: se,
                    n_re,
                    payload_bits: cfg.payload_bits,
                    sinr_threshold_db: 0.0,
                };
                e.sinr_threshold_db = threshold_db(cfg.target_bler, |s| e.bler(s));
                e
            })
        })
        .collect();
    if table.is_empty() {
        return Err(McsError::NothingFits {
            payload: cfg.payload_bits,
            tti: cfg.tti_symbols,
            subcarriers: cfg.subcarriers,
        });
    }
    Ok(table)
}

/// Writes `modulation,code_rate,spectral_efficiency,n_re,threshold_db` rows.
pub fn write_mcs_csv<W: Write>(mut w: W, table: &[McsEntry]) -> std::io::Result<()> {
    writeln!(w, "modulation,code_rate,spectral_efficiency,n_re,threshold_db")?;
    for e in table {
        writeln!(
            w,
            "{},{}/{},{:.4},{},{:.3}",
            e.modulation.label(),
            e.code_rate.numer(),
            e.code_rate.denom(),
            e.spectral_efficiency,
            e.n_re,
            e.sinr_threshold_db
        )?;
    }
    Ok(())
}
