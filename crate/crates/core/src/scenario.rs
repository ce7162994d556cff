//! Scenario description, TOML configuration, experiment matrices and the
//! figure presets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{FactoryPlacement, NodeDefaults};
use crate::mcs::McsTableConfig;
use crate::propagation::WallSpec;
use crate::radio_link::{EmbbLinkMap, PowerControlConfig};
use crate::tdd::{AcirTable, SpectrumMode, TddPattern};
use crate::urllc::UrllcRequirement;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("no scenarios")]
    NoScenarios,
    #[error("unknown figure '{0}' (expected 4a, 4b, 5a, 5b, 6 or 7)")]
    UnknownFigure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyncMode {
    #[serde(rename = "utdd")]
    Unsynchronized,
    #[serde(rename = "stdd")]
    Synchronized,
}

impl SyncMode {
    pub fn label(self) -> &'static str {
        match self {
            SyncMode::Unsynchronized => "utdd",
            SyncMode::Synchronized => "stdd",
        }
    }
}

/// Offered traffic in Mbit/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub embb_dl_impact_mbps: f64,
    pub embb_dl_elsewhere_mbps: f64,
    pub embb_ul_impact_mbps: f64,
    pub embb_ul_elsewhere_mbps: f64,
    pub urllc_dl_mbps: f64,
    pub urllc_ul_mbps: f64,
    /// eMBB downlink:uplink ratio inside the factory.
    pub factory_embb_dl_ul_ratio: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            embb_dl_impact_mbps: 150.0,
            embb_dl_elsewhere_mbps: 200.0,
            embb_ul_impact_mbps: 50.0,
            embb_ul_elsewhere_mbps: 67.0,
            urllc_dl_mbps: 40.0,
            urllc_ul_mbps: 40.0,
            factory_embb_dl_ul_ratio: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    pub n_urllc_ue: usize,
    pub n_embb_outdoor_ue: usize,
    /// In-factory eMBB UEs per Mbit/s of factory eMBB downlink traffic.
    pub factory_embb_ue_per_mbps: f64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self { n_urllc_ue: 50, n_embb_outdoor_ue: 210, factory_embb_ue_per_mbps: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub isd_m: f64,
    pub tiers: u32,
    pub system_side_m: f64,
    pub impact_side_m: f64,
    pub factory: FactoryPlacement,
    pub nodes: NodeDefaults,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            isd_m: 500.0,
            tiers: 1,
            system_side_m: 1500.0,
            impact_side_m: 500.0,
            factory: FactoryPlacement::default(),
            nodes: NodeDefaults::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub macro_pc: PowerControlConfig,
    pub factory_pc: PowerControlConfig,
    pub embb_link: EmbbLinkMap,
    /// Aggressors enumerated explicitly in the URLLC state mixture.
    pub top_k: usize,
    pub acir: AcirTable,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_ghz: 4.0,
            bandwidth_hz: 50e6,
            macro_pc: PowerControlConfig::default(),
            factory_pc: PowerControlConfig::default(),
            embb_link: EmbbLinkMap::default(),
            top_k: 5,
            acir: AcirTable::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TddConfig {
    pub macro_unsynchronized: TddPattern,
    pub macro_synchronized: TddPattern,
    pub factory: TddPattern,
    pub tti_symbols: usize,
    pub processing_ms: f64,
}

impl Default for TddConfig {
    fn default() -> Self {
        Self {
            macro_unsynchronized: TddPattern::dddu(),
            macro_synchronized: TddPattern::dudu(),
            factory: TddPattern::dudu(),
            tti_symbols: 4,
            processing_ms: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub spectrum: SpectrumMode,
    pub sync: SyncMode,
    pub factory_embb_mbps: f64,
    pub wall: WallSpec,
    pub traffic: TrafficConfig,
    pub population: PopulationConfig,
    pub layout: LayoutConfig,
    pub radio: RadioConfig,
    pub tdd: TddConfig,
    pub requirement: UrllcRequirement,
    pub solver: SolverConfig,
    /// Drop every coupling between the two networks.
    pub isolated: bool,
    /// Let eMBB UEs attach to factory base stations.
    pub open_access: bool,
    pub drops: usize,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            spectrum: SpectrumMode::CoChannel,
            sync: SyncMode::Unsynchronized,
            factory_embb_mbps: 0.0,
            wall: WallSpec::default(),
            traffic: TrafficConfig::default(),
            population: PopulationConfig::default(),
            layout: LayoutConfig::default(),
            radio: RadioConfig::default(),
            tdd: TddConfig::default(),
            requirement: UrllcRequirement::default(),
            solver: SolverConfig::default(),
            isolated: false,
            open_access: false,
            drops: 20,
            seed: 1,
        }
    }
}

impl Scenario {
    pub fn macro_pattern(&self) -> &TddPattern {
        match self.sync {
            SyncMode::Unsynchronized => &self.tdd.macro_unsynchronized,
            SyncMode::Synchronized => &self.tdd.macro_synchronized,
        }
    }

    pub fn factory_pattern(&self) -> &TddPattern {
        &self.tdd.factory
    }

    pub fn n_factory_embb_ue(&self) -> usize {
        (self.factory_embb_mbps * self.population.factory_embb_ue_per_mbps).round() as usize
    }

    pub fn n_factory_bs(&self) -> usize {
        self.layout.factory.n_bs
    }

    pub fn target_snr_db(&self) -> f64 {
        self.radio.factory_pc.target_snr_db
    }

    pub fn mcs_config(&self) -> McsTableConfig {
        McsTableConfig {
            payload_bits: self.requirement.payload_bits,
            tti_symbols: self.tdd.tti_symbols,
            ..McsTableConfig::default()
        }
    }

    /// Short, file-name-safe label of the matrix coordinates.
    pub fn cell_name(&self) -> String {
        format!(
            "{}_{}_f{}_w{}_t{}_bs{}",
            self.spectrum.label(),
            self.sync.label(),
            fmt_num(self.factory_embb_mbps),
            fmt_num(self.wall.perpendicular_loss_db),
            fmt_num(self.target_snr_db()),
            self.n_factory_bs()
        )
    }

    /// All invariant violations, each prefixed by its key path.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (path, pc) in [("radio.macro_pc", &self.radio.macro_pc), ("radio.factory_pc", &self.radio.factory_pc)] {
            if pc.validate().is_err() {
                v.push(format!("{path}.alpha: alpha out of [0,1] (got {})", pc.alpha));
            }
        }
        for (key, val) in self.radio.acir.invalid_entries() {
            v.push(format!("radio.acir.{key}: ACIR must be positive (got {val})"));
        }
        if self.wall.perpendicular_loss_db < 0.0 {
            v.push(format!("wall.perpendicular_loss_db: must be >= 0 (got {})", self.wall.perpendicular_loss_db));
        }
        if !(self.factory_embb_mbps >= 0.0) {
            v.push("factory_embb_mbps: must be >= 0".into());
        }
        let t = &self.traffic;
        if self.factory_embb_mbps > t.embb_dl_impact_mbps {
            v.push("factory_embb_mbps: exceeds the impact-area downlink traffic it is taken from".into());
        }
        for (k, x) in [
            ("embb_dl_impact_mbps", t.embb_dl_impact_mbps),
            ("embb_dl_elsewhere_mbps", t.embb_dl_elsewhere_mbps),
            ("embb_ul_impact_mbps", t.embb_ul_impact_mbps),
            ("embb_ul_elsewhere_mbps", t.embb_ul_elsewhere_mbps),
            ("urllc_dl_mbps", t.urllc_dl_mbps),
            ("urllc_ul_mbps", t.urllc_ul_mbps),
        ] {
            if !(x >= 0.0) {
                v.push(format!("traffic.{k}: must be >= 0"));
            }
        }
        if !(t.factory_embb_dl_ul_ratio > 0.0) {
            v.push("traffic.factory_embb_dl_ul_ratio: must be positive".into());
        }
        if let Some(r) = self.requirement.invalid_reason() {
            v.push(format!("requirement: {r}"));
        }
        if self.radio.top_k > 16 {
            v.push("radio.top_k: at most 16".into());
        }
        if !(self.radio.bandwidth_hz > 0.0) {
            v.push("radio.bandwidth_hz: must be positive".into());
        }
        if self.tdd.tti_symbols == 0 {
            v.push("tdd.tti_symbols: must be positive".into());
        }
        if ![3, 12].contains(&self.layout.factory.n_bs) {
            v.push(format!("layout.factory.n_bs: must be 3 or 12 (got {})", self.layout.factory.n_bs));
        }
        if self.layout.tiers > 1 {
            v.push("layout.tiers: must be 0 or 1".into());
        }
        if self.solver.max_iter == 0 || !(self.solver.tol > 0.0) {
            v.push("solver: max_iter and tol must be positive".into());
        }
        let pats = [
            ("tdd.macro_unsynchronized", &self.tdd.macro_unsynchronized),
            ("tdd.macro_synchronized", &self.tdd.macro_synchronized),
        ];
        for (k, p) in pats {
            if p.scs_khz() != self.tdd.factory.scs_khz() {
                v.push(format!("{k}: symbol grid differs from the factory pattern"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x}").replace('.', "p")
    }
}

/// Axes of an experiment matrix. A missing axis keeps the base scenario's
/// value; an empty one yields no scenarios.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatrixSpec {
    pub spectrum: Option<Vec<SpectrumMode>>,
    pub sync: Option<Vec<SyncMode>>,
    pub factory_embb_mbps: Option<Vec<f64>>,
    pub wall_loss_db: Option<Vec<f64>>,
    pub target_snr_db: Option<Vec<f64>>,
    pub n_factory_bs: Option<Vec<usize>>,
}

impl MatrixSpec {
    pub fn expand(&self, base: &Scenario) -> Vec<Scenario> {
        let spectrum = self.spectrum.clone().unwrap_or_else(|| vec![base.spectrum]);
        let sync = self.sync.clone().unwrap_or_else(|| vec![base.sync]);
        let traffic = self.factory_embb_mbps.clone().unwrap_or_else(|| vec![base.factory_embb_mbps]);
        let walls = self.wall_loss_db.clone().unwrap_or_else(|| vec![base.wall.perpendicular_loss_db]);
        let targets = self.target_snr_db.clone().unwrap_or_else(|| vec![base.target_snr_db()]);
        let nbs = self.n_factory_bs.clone().unwrap_or_else(|| vec![base.n_factory_bs()]);
        let mut out = Vec::new();
        for &sp in &spectrum {
            for &sy in &sync {
                for &f in &traffic {
                    for &w in &walls {
                        for &t in &targets {
                            for &n in &nbs {
                                let mut s = base.clone();
                                s.spectrum = sp;
                                s.sync = sy;
                                s.factory_embb_mbps = f;
                                s.wall.perpendicular_loss_db = w;
                                s.radio.factory_pc.target_snr_db = t;
                                s.layout.factory.n_bs = n;
                                out.push(s);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    F4a,
    F4b,
    F5a,
    F5b,
    F6,
    F7,
}

impl FromStr for Figure {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "4a" => Figure::F4a,
            "4b" => Figure::F4b,
            "5a" => Figure::F5a,
            "5b" => Figure::F5b,
            "6" => Figure::F6,
            "7" => Figure::F7,
            other => return Err(ConfigError::UnknownFigure(other.to_string())),
        })
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::F4a => "4a",
            Figure::F4b => "4b",
            Figure::F5a => "5a",
            Figure::F5b => "5b",
            Figure::F6 => "6",
            Figure::F7 => "7",
        })
    }
}

/// Wall losses of the wall-loss sweep: 14 to 40 dB in 3 dB steps.
pub fn wall_sweep_db() -> Vec<f64> {
    (0..).map(|i| 14.0 + 3.0 * f64::from(i)).take_while(|&w| w <= 40.0).collect()
}

impl Figure {
    pub fn matrix(self) -> MatrixSpec {
        let both_sync = Some(vec![SyncMode::Unsynchronized, SyncMode::Synchronized]);
        let traffic = Some(vec![0.0, 1.0, 10.0]);
        match self {
            Figure::F4a | Figure::F4b => MatrixSpec {
                spectrum: Some(vec![SpectrumMode::CoChannel]),
                sync: both_sync,
                factory_embb_mbps: traffic,
                ..Default::default()
            },
            Figure::F5a | Figure::F5b => MatrixSpec {
                spectrum: Some(vec![SpectrumMode::Adjacent]),
                sync: both_sync,
                factory_embb_mbps: traffic,
                ..Default::default()
            },
            Figure::F6 => MatrixSpec {
                spectrum: Some(vec![SpectrumMode::CoChannel]),
                sync: Some(vec![SyncMode::Unsynchronized]),
                factory_embb_mbps: Some(vec![0.0]),
                wall_loss_db: Some(wall_sweep_db()),
                target_snr_db: Some(vec![10.0, 20.0]),
                ..Default::default()
            },
            Figure::F7 => MatrixSpec {
                spectrum: Some(vec![SpectrumMode::CoChannel]),
                sync: Some(vec![SyncMode::Unsynchronized]),
                factory_embb_mbps: Some(vec![0.0]),
                n_factory_bs: Some(vec![3, 12]),
                ..Default::default()
            },
        }
    }
}

/// Contents of a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Scenario,
    pub matrix: Option<MatrixSpec>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ConfigFile = toml::from_str(text)?;
        cfg.scenario.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Scenarios to run: the figure preset if given, else the file's matrix,
    /// else the base scenario alone.
    pub fn scenarios(&self, figure: Option<Figure>) -> Result<Vec<Scenario>, ConfigError> {
        let list = match (figure, &self.matrix) {
            (Some(f), _) => f.matrix().expand(&self.scenario),
            (None, Some(m)) => m.expand(&self.scenario),
            (None, None) => vec![self.scenario.clone()],
        };
        if list.is_empty() {
            return Err(ConfigError::NoScenarios);
        }
        let problems: Vec<String> = list
            .iter()
            .flat_map(|s| s.violations().into_iter().map(move |v| format!("{}: {v}", s.cell_name())))
            .collect();
        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems));
        }
        Ok(list)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ConfigFile::parse("").unwrap();
        assert_eq!(c.scenario, Scenario::default());
        assert_eq!(c.scenario.macro_pattern(), &TddPattern::dddu());
        assert_eq!(c.scenario.factory_pattern(), &TddPattern::dudu());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ConfigFile::parse("[scenario]\nwal = 3\n").unwrap_err();
        assert!(e.to_string().contains("wal"), "{e}");
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn alpha_and_acir_checks() {
        let e = ConfigFile::parse("[scenario.radio.factory_pc]\nalpha = 1.5\n").unwrap_err();
        assert!(e.to_string().contains("alpha out of [0,1]"));
        let e = ConfigFile::parse("[scenario.radio.acir]\nbs_to_bs_db = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("bs_to_bs_db"));
    }

    #[test]
    fn pattern_strings_parse() {
        let c = ConfigFile::parse("[scenario.tdd]\nfactory = \"DDDDDDDUUUUUUU\"\n").unwrap();
        assert_eq!(c.scenario.tdd.factory, TddPattern::dudu());
        assert!(ConfigFile::parse("[scenario.tdd]\nfactory = \"DXU\"\n").is_err());
    }

    #[test]
    fn matrix_expansion() {
        let c = ConfigFile::parse("[matrix]\nsync = [\"utdd\", \"stdd\"]\nfactory_embb_mbps = [0, 1, 10]\n").unwrap();
        assert_eq!(c.scenarios(None).unwrap().len(), 6);
        let c = ConfigFile::parse("[matrix]\nwall_loss_db = []\n").unwrap();
        assert!(matches!(c.scenarios(None), Err(ConfigError::NoScenarios)));
    }

    #[test]
    fn figure_presets() {
        let base = Scenario::default();
        assert_eq!(Figure::F6.matrix().expand(&base).len(), 18);
        assert_eq!(wall_sweep_db(), vec![14.0, 17.0, 20.0, 23.0, 26.0, 29.0, 32.0, 35.0, 38.0]);
        let f7 = Figure::F7.matrix().expand(&base);
        assert_eq!(f7.iter().map(|s| s.n_factory_bs()).collect::<Vec<_>>(), vec![3, 12]);
        assert_eq!(Figure::F5a.matrix().expand(&base).len(), 6);
        assert!("8".parse::<Figure>().is_err());
    }
}
