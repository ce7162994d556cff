//! Symbol-level TDD patterns, aggressor/victim time overlap, interference
//! modes and adjacent-channel attenuation.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// OFDM symbols per slot.
pub const SYMBOLS_PER_SLOT: usize = 14;

#[derive(Debug, Error, PartialEq)]
pub enum TddError {
    #[error("pattern is empty")]
    Empty,
    #[error("invalid symbol '{0}' in pattern (expected D or U)")]
    InvalidSymbol(char),
    #[error("pattern length {0} is not a whole number of {SYMBOLS_PER_SLOT}-symbol slots")]
    NotSlotAligned(usize),
    #[error("patterns use different symbol grids ({0} vs {1} kHz)")]
    MisalignedGrid(u32, u32),
    #[error("no {tti}-symbol window in direction {direction} exists in pattern '{pattern}'")]
    NoTransmissionWindow { pattern: String, direction: Direction, tti: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Downlink,
    Uplink,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Downlink, Direction::Uplink];

    fn index(self) -> usize {
        match self {
            Direction::Downlink => 0,
            Direction::Uplink => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Downlink => "dl",
            Direction::Uplink => "ul",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Downlink => "D",
            Direction::Uplink => "U",
        })
    }
}

/// Periodic per-symbol direction sequence on a common numerology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TddPattern {
    symbols: Vec<Direction>,
    scs_khz: u32,
}

impl TddPattern {
    pub fn new(symbols: Vec<Direction>, scs_khz: u32) -> Result<Self, TddError> {
        if symbols.is_empty() {
            return Err(TddError::Empty);
        }
        if symbols.len() % SYMBOLS_PER_SLOT != 0 {
            return Err(TddError::NotSlotAligned(symbols.len()));
        }
        Ok(Self { symbols, scs_khz })
    }

    /// Slot-based DDDU: three downlink slots followed by one uplink slot.
    pub fn dddu() -> Self {
        let mut s = vec![Direction::Downlink; 3 * SYMBOLS_PER_SLOT];
        s.extend([Direction::Uplink; SYMBOLS_PER_SLOT]);
        Self { symbols: s, scs_khz: 30 }
    }

    /// Sub-slot DUDU: symbols 0-6 downlink, 7-13 uplink, every slot.
    pub fn dudu() -> Self {
        let mut s = vec![Direction::Downlink; 7];
        s.extend([Direction::Uplink; 7]);
        Self { symbols: s, scs_khz: 30 }
    }

    pub fn uniform(direction: Direction, slots: usize) -> Self {
        Self { symbols: vec![direction; slots.max(1) * SYMBOLS_PER_SLOT], scs_khz: 30 }
    }

    pub fn symbols(&self) -> &[Direction] {
        &self.symbols
    }

    pub fn period_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn scs_khz(&self) -> u32 {
        self.scs_khz
    }

    pub fn symbol_duration_ms(&self) -> f64 {
        slot_duration_ms(self.scs_khz) / SYMBOLS_PER_SLOT as f64
    }

    fn at(&self, i: usize) -> Direction {
        self.symbols[i % self.symbols.len()]
    }

    /// Fraction of symbols in `direction`.
    pub fn time_fraction(&self, direction: Direction) -> Ratio<u32> {
        let n = self.symbols.iter().filter(|&&d| d == direction).count();
        Ratio::new(n as u32, self.symbols.len() as u32)
    }

    /// Symbols per second available in `direction`.
    pub fn symbols_per_second(&self, direction: Direction) -> f64 {
        let frac = self.time_fraction(direction);
        *frac.numer() as f64 / *frac.denom() as f64 / (self.symbol_duration_ms() * 1e-3)
    }

    /// Worst-case wait, in symbols, from a packet arriving at a symbol
    /// boundary until the next start of `tti` consecutive `direction` symbols.
    pub fn worst_case_wait_symbols(&self, direction: Direction, tti: usize) -> Result<usize, TddError> {
        let n = self.symbols.len();
        let starts: Vec<usize> = (0..n).filter(|&s| (0..tti).all(|k| self.at(s + k) == direction)).collect();
        if starts.is_empty() {
            return Err(TddError::NoTransmissionWindow { pattern: self.to_string(), direction, tti });
        }
        Ok((0..n)
            .map(|arrival| {
                starts.iter().map(|&s| if s >= arrival { s - arrival } else { s + n - arrival }).min().unwrap_or(0)
            })
            .max()
            .unwrap_or(0))
    }
}

impl fmt::Display for TddPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, slot) in self.symbols.chunks(SYMBOLS_PER_SLOT).enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for d in slot {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for TddPattern {
    type Err = TddError;

    /// Accepts per-symbol strings (`DDDDDDDUUUUUUU`, optional `|` slot
    /// separators and whitespace) or the shorthands `DDDU` and `DUDU`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "DDDU" => return Ok(Self::dddu()),
            "DUDU" => return Ok(Self::dudu()),
            _ => {}
        }
        let symbols = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '|')
            .map(|c| match c {
                'D' | 'd' => Ok(Direction::Downlink),
                'U' | 'u' => Ok(Direction::Uplink),
                other => Err(TddError::InvalidSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(symbols, 30)
    }
}

impl TryFrom<String> for TddPattern {
    type Error = TddError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TddPattern> for String {
    fn from(p: TddPattern) -> Self {
        p.to_string()
    }
}

pub fn slot_duration_ms(scs_khz: u32) -> f64 {
    15.0 / f64::from(scs_khz)
}

/// TTI length in microseconds.
pub fn tti_duration_us(tti_symbols: usize, scs_khz: u32) -> f64 {
    tti_symbols as f64 * slot_duration_ms(scs_khz) * 1e3 / SYMBOLS_PER_SLOT as f64
}

/// Interference scenario named by aggressor transmitter and victim receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InterferenceMode {
    /// Downlink on downlink.
    BsToUe,
    /// Downlink on uplink (cross-link).
    BsToBs,
    /// Uplink on downlink (cross-link).
    UeToUe,
    /// Uplink on uplink.
    UeToBs,
}

impl InterferenceMode {
    pub fn from_directions(aggressor: Direction, victim: Direction) -> Self {
        match (aggressor, victim) {
            (Direction::Downlink, Direction::Downlink) => InterferenceMode::BsToUe,
            (Direction::Downlink, Direction::Uplink) => InterferenceMode::BsToBs,
            (Direction::Uplink, Direction::Downlink) => InterferenceMode::UeToUe,
            (Direction::Uplink, Direction::Uplink) => InterferenceMode::UeToBs,
        }
    }

    pub fn is_cross_link(self) -> bool {
        matches!(self, InterferenceMode::BsToBs | InterferenceMode::UeToUe)
    }
}

/// For each (aggressor direction, victim direction): the fraction of the
/// victim's receive symbols in which the aggressor transmits that way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapProfile {
    fractions: [[Ratio<u32>; 2]; 2],
}

impl OverlapProfile {
    pub fn fraction(&self, aggressor: Direction, victim: Direction) -> Ratio<u32> {
        self.fractions[aggressor.index()][victim.index()]
    }

    pub fn fraction_f64(&self, aggressor: Direction, victim: Direction) -> f64 {
        let r = self.fraction(aggressor, victim);
        f64::from(*r.numer()) / f64::from(*r.denom())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact overlap fractions by enumerating the least common period.
pub fn overlap_profile(aggressor: &TddPattern, victim: &TddPattern) -> Result<OverlapProfile, TddError> {
    if aggressor.scs_khz != victim.scs_khz {
        return Err(TddError::MisalignedGrid(aggressor.scs_khz, victim.scs_khz));
    }
    let (a, v) = (aggressor.period_symbols(), victim.period_symbols());
    let period = a / gcd(a, v) * v;
    let mut counts = [[0u32; 2]; 2];
    let mut victim_totals = [0u32; 2];
    for i in 0..period {
        let vd = victim.at(i);
        victim_totals[vd.index()] += 1;
        counts[aggressor.at(i).index()][vd.index()] += 1;
    }
    let frac = |c: u32, t: u32| if t == 0 { Ratio::from_integer(0) } else { Ratio::new(c, t) };
    let mut fractions = [[Ratio::from_integer(0); 2]; 2];
    for ad in 0..2 {
        for vd in 0..2 {
            fractions[ad][vd] = frac(counts[ad][vd], victim_totals[vd]);
        }
    }
    Ok(OverlapProfile { fractions })
}

/// Interference modes present between two patterns, with their fractions.
pub fn interference_modes(
    aggressor: &TddPattern,
    victim: &TddPattern,
) -> Result<Vec<(InterferenceMode, Ratio<u32>)>, TddError> {
    let profile = overlap_profile(aggressor, victim)?;
    let mut out = Vec::new();
    for vd in Direction::BOTH {
        for ad in Direction::BOTH {
            let f = profile.fraction(ad, vd);
            if f != Ratio::from_integer(0) {
                out.push((InterferenceMode::from_directions(ad, vd), f));
            }
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    CoChannel,
    Adjacent,
}

impl SpectrumMode {
    pub fn label(self) -> &'static str {
        match self {
            SpectrumMode::CoChannel => "co_channel",
            SpectrumMode::Adjacent => "adjacent",
        }
    }
}

/// Adjacent channel interference ratio per mode, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcirTable {
    pub bs_to_ue_db: f64,
    pub bs_to_bs_db: f64,
    pub ue_to_bs_db: f64,
    pub ue_to_ue_db: f64,
}

impl Default for AcirTable {
    fn default() -> Self {
        Self { bs_to_ue_db: 32.7, bs_to_bs_db: 38.8, ue_to_bs_db: 29.6, ue_to_ue_db: 28.2 }
    }
}

impl AcirTable {
    pub fn get(&self, mode: InterferenceMode) -> f64 {
        match mode {
            InterferenceMode::BsToUe => self.bs_to_ue_db,
            InterferenceMode::BsToBs => self.bs_to_bs_db,
            InterferenceMode::UeToBs => self.ue_to_bs_db,
            InterferenceMode::UeToUe => self.ue_to_ue_db,
        }
    }

    /// Entries that are not strictly positive and finite.
    pub fn invalid_entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("bs_to_ue_db", self.bs_to_ue_db),
            ("bs_to_bs_db", self.bs_to_bs_db),
            ("ue_to_bs_db", self.ue_to_bs_db),
            ("ue_to_ue_db", self.ue_to_ue_db),
        ]
        .into_iter()
        .filter(|(_, v)| !(*v > 0.0 && v.is_finite()))
        .collect()
    }
}

/// Attenuation (dB) applied to an inter-network interference term.
pub fn channel_attenuation(spectrum: SpectrumMode, mode: InterferenceMode, acir: &AcirTable) -> f64 {
    match spectrum {
        SpectrumMode::CoChannel => 0.0,
        SpectrumMode::Adjacent => acir.get(mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::{Downlink as D, Uplink as U};

    fn r(n: u32, d: u32) -> Ratio<u32> {
        Ratio::new(n, d)
    }

    #[test]
    fn builtin_patterns() {
        let dddu = TddPattern::dddu();
        assert_eq!(dddu.period_symbols(), 56);
        assert_eq!(dddu.time_fraction(D), r(3, 4));
        let dudu = TddPattern::dudu();
        assert_eq!(dudu.period_symbols(), 14);
        assert_eq!(dudu.time_fraction(U), r(1, 2));
        assert_eq!(dudu.to_string(), "DDDDDDDUUUUUUU");
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let p: TddPattern = "DDDDDDDDDDDDDD|DDDDDDDDDDDDDD|DDDDDDDDDDDDDD|UUUUUUUUUUUUUU".parse().unwrap();
        assert_eq!(p, TddPattern::dddu());
        assert_eq!(p.to_string().parse::<TddPattern>().unwrap(), p);
        assert_eq!("DDX".parse::<TddPattern>(), Err(TddError::InvalidSymbol('X')));
        assert_eq!("DDDUUU".parse::<TddPattern>(), Err(TddError::NotSlotAligned(6)));
        assert_eq!("".parse::<TddPattern>(), Err(TddError::Empty));
    }

    #[test]
    fn synchronized_has_no_cross_direction_overlap() {
        let p = overlap_profile(&TddPattern::dudu(), &TddPattern::dudu()).unwrap();
        assert_eq!(p.fraction(D, U), r(0, 1));
        assert_eq!(p.fraction(U, D), r(0, 1));
        assert_eq!(p.fraction(U, U), r(1, 1));
        assert_eq!(p.fraction(D, D), r(1, 1));
    }

    #[test]
    fn unsynchronized_fractions() {
        let p = overlap_profile(&TddPattern::dddu(), &TddPattern::dudu()).unwrap();
        assert_eq!(p.fraction(D, U), r(3, 4));
        assert_eq!(p.fraction(U, U), r(1, 4));
        assert_eq!(p.fraction(D, D), r(3, 4));
        assert_eq!(p.fraction(U, D), r(1, 4));
        // reverse roles: macro victim
        let q = overlap_profile(&TddPattern::dudu(), &TddPattern::dddu()).unwrap();
        assert_eq!(q.fraction(D, D), r(1, 2));
        assert_eq!(q.fraction(U, U), r(1, 2));
    }

    #[test]
    fn mode_sets() {
        let s = interference_modes(&TddPattern::dudu(), &TddPattern::dudu()).unwrap();
        assert_eq!(s, vec![(InterferenceMode::BsToUe, r(1, 1)), (InterferenceMode::UeToBs, r(1, 1))]);
        let u = interference_modes(&TddPattern::dddu(), &TddPattern::dudu()).unwrap();
        assert_eq!(u.len(), 4);
        let all_d = TddPattern::uniform(D, 1);
        let all_u = TddPattern::uniform(U, 1);
        assert_eq!(interference_modes(&all_d, &all_u).unwrap(), vec![(InterferenceMode::BsToBs, r(1, 1))]);
    }

    #[test]
    fn misaligned_grid_is_rejected() {
        let mut other = TddPattern::dudu();
        other.scs_khz = 15;
        assert_eq!(overlap_profile(&TddPattern::dudu(), &other), Err(TddError::MisalignedGrid(30, 15)));
    }

    #[test]
    fn acir_entries() {
        let t = AcirTable::default();
        assert_eq!(channel_attenuation(SpectrumMode::Adjacent, InterferenceMode::UeToUe, &t), 28.2);
        assert_eq!(channel_attenuation(SpectrumMode::Adjacent, InterferenceMode::BsToBs, &t), 38.8);
        for m in
            [InterferenceMode::BsToUe, InterferenceMode::BsToBs, InterferenceMode::UeToBs, InterferenceMode::UeToUe]
        {
            assert_eq!(channel_attenuation(SpectrumMode::CoChannel, m, &t), 0.0);
        }
        assert!(t.invalid_entries().is_empty());
        let bad = AcirTable { ue_to_ue_db: -3.0, ..t };
        assert_eq!(bad.invalid_entries(), vec![("ue_to_ue_db", -3.0)]);
    }

    #[test]
    fn tti_and_alignment_wait() {
        assert!((tti_duration_us(4, 30) - 142.857_142_857).abs() < 1e-6);
        assert_eq!(tti_duration_us(4, 30).round(), 143.0);
        let dudu = TddPattern::dudu();
        assert_eq!(dudu.worst_case_wait_symbols(D, 4).unwrap(), 10);
        assert_eq!(dudu.worst_case_wait_symbols(U, 4).unwrap(), 10);
        // DDDU uplink: arriving just after the last valid start waits ~3 slots
        assert_eq!(TddPattern::dddu().worst_case_wait_symbols(U, 4).unwrap(), 45);
        let all_d = TddPattern::uniform(D, 1);
        assert!(all_d.worst_case_wait_symbols(U, 4).is_err());
    }
}
