//! Deployment geometry: the seven-site hexagonal macro grid, the factory hall
//! with its ceiling-mounted base stations, and randomized UE drops.
//!
//! Node identifiers are stable across scenario variants so that paired
//! comparisons (co- vs adjacent channel, 3 vs 12 factory BSs, ...) see the
//! same UE positions and the same per-link shadowing for the shared nodes.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::AntennaRef;
use crate::rng::mix;

pub const MACRO_BS_HEIGHT_M: f64 = 25.0;
pub const FACTORY_LENGTH_M: f64 = 120.0;
pub const FACTORY_WIDTH_M: f64 = 50.0;
pub const FACTORY_HEIGHT_M: f64 = 10.0;
pub const SECTORS_PER_SITE: usize = 3;

const FACTORY_BS_ID_BASE: u32 = 100;
const URLLC_UE_ID_BASE: u32 = 1_000;
const OUTDOOR_EMBB_ID_BASE: u32 = 10_000;
const FACTORY_EMBB_ID_BASE: u32 = 20_000;

const STREAM_URLLC: u64 = 0x55;
const STREAM_OUTDOOR: u64 = 0xAA;
const STREAM_FACTORY_EMBB: u64 = 0xF0;

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("inter-site distance must be positive, got {0}")]
    InvalidIsd(f64),
    #[error("only 0 or 1 tiers of macro sites are supported, got {0}")]
    UnsupportedTiers(u32),
    #[error("factory distance must be positive, got {0}")]
    InvalidFactoryDistance(f64),
    #[error("factory networks with {0} base stations are not defined (use 3 or 12)")]
    UnsupportedFactoryBsCount(usize),
    #[error("factory footprint corner ({x:.1}, {y:.1}) lies outside the system area")]
    FactoryOutsideSystemArea { x: f64, y: f64 },
    #[error("site {site} is closer to the factory than the requested {requested} m")]
    CloserSiteExists { site: usize, requested: f64 },
    #[error("region '{0}' has zero area")]
    ZeroArea(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }

    pub fn distance_2d(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rotation about the vertical axis through `center`.
    pub fn rotated_about(&self, center: &Self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let (dx, dy) = (self.x - center.x, self.y - center.y);
        Self::new(center.x + c * dx - s * dy, center.y + s * dx + c * dy, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    MacroBs,
    FactoryBs,
    EmbbUe,
    UrllcUe,
}

impl Role {
    pub fn is_bs(self) -> bool {
        matches!(self, Role::MacroBs | Role::FactoryBs)
    }

    pub fn label(self) -> &'static str {
        match self {
            Role::MacroBs => "macro_bs",
            Role::FactoryBs => "factory_bs",
            Role::EmbbUe => "embb_ue",
            Role::UrllcUe => "urllc_ue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Network {
    Macro,
    Factory,
}

impl Network {
    pub fn label(self) -> &'static str {
        match self {
            Network::Macro => "macro",
            Network::Factory => "factory",
        }
    }
}

/// Where a node sits; eMBB throughput is reported per region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    ImpactArea,
    Elsewhere,
    InFactory,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::ImpactArea => "impact_area",
            Region::Elsewhere => "elsewhere",
            Region::InFactory => "in_factory",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub pos: Position3D,
    pub role: Role,
    pub network: Network,
    pub max_tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub antenna: AntennaRef,
    pub indoor: bool,
    pub region: Region,
}

/// Per-class radio defaults (transmit power and noise figure).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeDefaults {
    pub macro_bs_power_dbm: f64,
    pub factory_bs_power_dbm: f64,
    pub ue_power_dbm: f64,
    pub bs_noise_figure_db: f64,
    pub ue_noise_figure_db: f64,
    pub macro_downtilt_deg: f64,
    pub ue_height_m: f64,
}

impl Default for NodeDefaults {
    fn default() -> Self {
        Self {
            macro_bs_power_dbm: 50.0,
            factory_bs_power_dbm: 30.0,
            ue_power_dbm: 23.0,
            bs_noise_figure_db: 5.0,
            ue_noise_figure_db: 9.0,
            macro_downtilt_deg: 6.0,
            ue_height_m: 1.5,
        }
    }
}

/// One tri-sector macro site.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub index: usize,
    pub pos: Position3D,
    pub sectors: Vec<Node>,
}

/// Hexagonal grid: the center site plus, for `tiers == 1`, six sites at
/// distance `isd` and polar angles 0, 60, ..., 300 degrees.
pub fn build_macro_grid(isd: f64, tiers: u32, defaults: &NodeDefaults) -> Result<Vec<Site>, LayoutError> {
    if !(isd > 0.0 && isd.is_finite()) {
        return Err(LayoutError::InvalidIsd(isd));
    }
    if tiers > 1 {
        return Err(LayoutError::UnsupportedTiers(tiers));
    }
    let mut centers = vec![(0.0, 0.0)];
    if tiers == 1 {
        centers.extend((0..6).map(|k| {
            let a = (60.0 * k as f64).to_radians();
            (isd * a.cos(), isd * a.sin())
        }));
    }
    Ok(centers
        .into_iter()
        .enumerate()
        .map(|(index, (x, y))| {
            let pos = Position3D::new(x, y, MACRO_BS_HEIGHT_M);
            let sectors = (0..SECTORS_PER_SITE)
                .map(|s| Node {
                    id: NodeId((index * SECTORS_PER_SITE + s) as u32),
                    pos,
                    role: Role::MacroBs,
                    network: Network::Macro,
                    max_tx_power_dbm: defaults.macro_bs_power_dbm,
                    noise_figure_db: defaults.bs_noise_figure_db,
                    antenna: AntennaRef::macro_array(120.0 * s as f64, defaults.macro_downtilt_deg),
                    indoor: false,
                    region: Region::Elsewhere,
                })
                .collect();
            Site { index, pos, sectors }
        })
        .collect())
}

/// The 120 x 50 x 10 m hall: a rectangle in its own local frame
/// (origin at one corner, x along the long axis) placed in the global frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactoryModel {
    pub center: Position3D,
    pub orientation_rad: f64,
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl FactoryModel {
    pub fn new(center_x: f64, center_y: f64, orientation_rad: f64) -> Self {
        Self {
            center: Position3D::new(center_x, center_y, 0.0),
            orientation_rad,
            length: FACTORY_LENGTH_M,
            width: FACTORY_WIDTH_M,
            height: FACTORY_HEIGHT_M,
        }
    }

    /// Global (x, y) to local (x, y) with the origin at the hall corner.
    pub fn to_local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.orientation_rad.sin_cos();
        let (dx, dy) = (x - self.center.x, y - self.center.y);
        (c * dx + s * dy + 0.5 * self.length, -s * dx + c * dy + 0.5 * self.width)
    }

    pub fn to_global(&self, lx: f64, ly: f64, z: f64) -> Position3D {
        let (s, c) = self.orientation_rad.sin_cos();
        let (dx, dy) = (lx - 0.5 * self.length, ly - 0.5 * self.width);
        Position3D::new(self.center.x + c * dx - s * dy, self.center.y + s * dx + c * dy, z)
    }

    /// Outward unit normal (global, horizontal) of the wall hit when leaving
    /// through the local axis `axis` (0 = x, 1 = y) in direction `sign`.
    pub fn wall_normal(&self, axis: usize, sign: f64) -> (f64, f64) {
        let (s, c) = self.orientation_rad.sin_cos();
        match axis {
            0 => (sign * c, sign * s),
            _ => (-sign * s, sign * c),
        }
    }

    pub fn contains_2d(&self, x: f64, y: f64) -> bool {
        let (lx, ly) = self.to_local(x, y);
        (0.0..=self.length).contains(&lx) && (0.0..=self.width).contains(&ly)
    }

    pub fn contains(&self, p: &Position3D) -> bool {
        self.contains_2d(p.x, p.y) && (0.0..=self.height).contains(&p.z)
    }

    pub fn corners(&self) -> [Position3D; 4] {
        [
            self.to_global(0.0, 0.0, 0.0),
            self.to_global(self.length, 0.0, 0.0),
            self.to_global(self.length, self.width, 0.0),
            self.to_global(0.0, self.width, 0.0),
        ]
    }

    pub fn area(&self) -> f64 {
        self.length * self.width
    }
}

/// Where the factory goes relative to the central macro site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactoryPlacement {
    /// Distance from the closest macro site to the hall center.
    pub distance_m: f64,
    /// Polar angle of the hall center as seen from the central site.
    pub bearing_deg: f64,
    /// Rotation of the hall's long axis from global x.
    pub orientation_deg: f64,
    pub n_bs: usize,
}

impl Default for FactoryPlacement {
    fn default() -> Self {
        Self { distance_m: 200.0, bearing_deg: 30.0, orientation_deg: 0.0, n_bs: 3 }
    }
}

/// Local (x, y) of ceiling-mounted factory BSs.
pub fn factory_bs_lattice(n: usize) -> Result<Vec<(f64, f64)>, LayoutError> {
    match n {
        3 => Ok(vec![(20.0, 25.0), (60.0, 25.0), (100.0, 25.0)]),
        12 => Ok([12.5, 25.0, 37.5]
            .iter()
            .flat_map(|&y| [15.0, 45.0, 75.0, 105.0].into_iter().map(move |x| (x, y)))
            .collect()),
        other => Err(LayoutError::UnsupportedFactoryBsCount(other)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub sites: Vec<Site>,
    pub factory: FactoryModel,
    pub factory_bss: Vec<Node>,
    /// Half side of the square system area centered on the grid center.
    pub system_half_side: f64,
    /// Side of the square impact area centered on the factory.
    pub impact_side: f64,
}

impl Deployment {
    pub fn macro_bss(&self) -> impl Iterator<Item = &Node> {
        self.sites.iter().flat_map(|s| s.sectors.iter())
    }

    /// All base stations, macro sectors first.
    pub fn base_stations(&self) -> Vec<Node> {
        self.macro_bss().chain(self.factory_bss.iter()).cloned().collect()
    }

    pub fn in_impact_area(&self, x: f64, y: f64) -> bool {
        let h = 0.5 * self.impact_side;
        (x - self.factory.center.x).abs() <= h && (y - self.factory.center.y).abs() <= h
    }

    pub fn in_system_area(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.system_half_side && y.abs() <= self.system_half_side
    }

    pub fn region_of(&self, x: f64, y: f64) -> Region {
        if self.factory.contains_2d(x, y) {
            Region::InFactory
        } else if self.in_impact_area(x, y) {
            Region::ImpactArea
        } else {
            Region::Elsewhere
        }
    }
}

/// Places the hall at `distance_m` from the central site along
/// `bearing_deg` and installs its base stations.
pub fn place_factory(
    sites: Vec<Site>,
    placement: &FactoryPlacement,
    system_half_side: f64,
    impact_side: f64,
    defaults: &NodeDefaults,
) -> Result<Deployment, LayoutError> {
    let d = placement.distance_m;
    if !(d > 0.0 && d.is_finite()) {
        return Err(LayoutError::InvalidFactoryDistance(d));
    }
    let lattice = factory_bs_lattice(placement.n_bs)?;
    let b = placement.bearing_deg.to_radians();
    let factory = FactoryModel::new(d * b.cos(), d * b.sin(), placement.orientation_deg.to_radians());
    for c in factory.corners() {
        if c.x.abs() > system_half_side || c.y.abs() > system_half_side {
            return Err(LayoutError::FactoryOutsideSystemArea { x: c.x, y: c.y });
        }
    }
    for site in &sites {
        if site.pos.distance_2d(&factory.center) < d - 1e-9 {
            return Err(LayoutError::CloserSiteExists { site: site.index, requested: d });
        }
    }
    let factory_bss = lattice
        .into_iter()
        .enumerate()
        .map(|(i, (lx, ly))| Node {
            id: NodeId(FACTORY_BS_ID_BASE + i as u32),
            pos: factory.to_global(lx, ly, factory.height),
            role: Role::FactoryBs,
            network: Network::Factory,
            max_tx_power_dbm: defaults.factory_bs_power_dbm,
            noise_figure_db: defaults.bs_noise_figure_db,
            antenna: AntennaRef::factory_omni(),
            indoor: true,
            region: Region::InFactory,
        })
        .collect();
    Ok(Deployment { sites, factory, factory_bss, system_half_side, impact_side })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropConfig {
    pub n_urllc_ue: usize,
    pub n_embb_outdoor_ue: usize,
    pub n_embb_factory_ue: usize,
    /// Share of outdoor eMBB UEs placed in the impact area.
    pub impact_share: f64,
    pub seed: u64,
    pub ue_height_m: f64,
}

/// Randomly drops URLLC UEs on the factory floor, outdoor eMBB UEs in the
/// impact area and elsewhere, and (optionally) eMBB UEs inside the hall.
/// Each population draws from its own stream of `seed`.
pub fn drop_ues(deployment: &Deployment, cfg: &DropConfig, defaults: &NodeDefaults) -> Result<Vec<Node>, LayoutError> {
    let f = &deployment.factory;
    if f.area() <= 0.0 && (cfg.n_urllc_ue > 0 || cfg.n_embb_factory_ue > 0) {
        return Err(LayoutError::ZeroArea("factory"));
    }
    let n_impact = (cfg.n_embb_outdoor_ue as f64 * cfg.impact_share.clamp(0.0, 1.0)).round() as usize;
    let n_elsewhere = cfg.n_embb_outdoor_ue - n_impact;
    let impact_area = deployment.impact_side.powi(2) - f.area();
    if n_impact > 0 && impact_area <= 0.0 {
        return Err(LayoutError::ZeroArea("impact area"));
    }
    let elsewhere_area = (2.0 * deployment.system_half_side).powi(2) - deployment.impact_side.powi(2);
    if n_elsewhere > 0 && elsewhere_area <= 0.0 {
        return Err(LayoutError::ZeroArea("system area outside the impact area"));
    }

    let ue = |id: u32, pos: Position3D, role: Role, network: Network, indoor: bool, region| Node {
        id: NodeId(id),
        pos,
        role,
        network,
        max_tx_power_dbm: defaults.ue_power_dbm,
        noise_figure_db: defaults.ue_noise_figure_db,
        antenna: AntennaRef::ue_isotropic(),
        indoor,
        region,
    };
    let h = cfg.ue_height_m;
    let mut out = Vec::with_capacity(cfg.n_urllc_ue + cfg.n_embb_outdoor_ue + cfg.n_embb_factory_ue);

    let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, STREAM_URLLC));
    for i in 0..cfg.n_urllc_ue {
        let pos = f.to_global(rng.random_range(0.0..f.length), rng.random_range(0.0..f.width), h);
        out.push(ue(URLLC_UE_ID_BASE + i as u32, pos, Role::UrllcUe, Network::Factory, true, Region::InFactory));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, STREAM_OUTDOOR));
    let half_impact = 0.5 * deployment.impact_side;
    let (cx, cy) = (f.center.x, f.center.y);
    for i in 0..cfg.n_embb_outdoor_ue {
        let (x, y, region) = if i < n_impact {
            loop {
                let x = cx + rng.random_range(-half_impact..half_impact);
                let y = cy + rng.random_range(-half_impact..half_impact);
                if !f.contains_2d(x, y) && deployment.in_system_area(x, y) {
                    break (x, y, Region::ImpactArea);
                }
            }
        } else {
            let s = deployment.system_half_side;
            loop {
                let x = rng.random_range(-s..s);
                let y = rng.random_range(-s..s);
                if !deployment.in_impact_area(x, y) {
                    break (x, y, Region::Elsewhere);
                }
            }
        };
        out.push(ue(
            OUTDOOR_EMBB_ID_BASE + i as u32,
            Position3D::new(x, y, h),
            Role::EmbbUe,
            Network::Macro,
            false,
            region,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, STREAM_FACTORY_EMBB));
    for i in 0..cfg.n_embb_factory_ue {
        let pos = f.to_global(rng.random_range(0.0..f.length), rng.random_range(0.0..f.width), h);
        out.push(ue(FACTORY_EMBB_ID_BASE + i as u32, pos, Role::EmbbUe, Network::Macro, true, Region::InFactory));
    }
    Ok(out)
}

/// Writes `node_id,role,network,x,y,z,indoor` rows.
pub fn write_deployment_csv<'a, W: Write>(mut w: W, nodes: impl IntoIterator<Item = &'a Node>) -> std::io::Result<()> {
    writeln!(w, "node_id,role,network,x,y,z,indoor")?;
    for n in nodes {
        writeln!(
            w,
            "{},{},{},{:.3},{:.3},{:.3},{}",
            n.id,
            n.role.label(),
            n.network.label(),
            n.pos.x,
            n.pos.y,
            n.pos.z,
            n.indoor
        )?;
    }
    Ok(())
}
