//! One Monte Carlo drop: node placement, link realization, association,
//! interference bookkeeping and the load-coupled evaluation.

use serde::Serialize;

use super::load::{damped_fixed_point, water_level, FixedPoint};
use super::{CampaignContext, EngineError};
use crate::antenna::{beam_gain, element_gain_towards, UnitVector};
use crate::layout::{drop_ues, DropConfig, Network, Node, NodeId, Region, Role, SECTORS_PER_SITE};
use crate::propagation::{realize_link, CouplingGain, LinkLoss};
use crate::radio_link::{
    db_to_lin, embb_rate, interference_states, lin_to_db, noise_power_dbm, select_mcs, ul_tx_power, InterferenceTerm,
};
use crate::rng::{drop_seed, link_rng};
use crate::tdd::{channel_attenuation, Direction, InterferenceMode, SpectrumMode};
use crate::urllc::{satisfied, UeEval};

const DIRS: [Direction; 2] = [Direction::Downlink, Direction::Uplink];

fn di(d: Direction) -> usize {
    match d {
        Direction::Downlink => 0,
        Direction::Uplink => 1,
    }
}

/// All transmissions of one aggressor cell in one direction as seen by a
/// victim receiver. At most one member occupies a given resource, so the
/// cell acts as a single on/off interferer.
#[derive(Debug, Clone)]
struct Term {
    cell: usize,
    dir: Direction,
    aggressor: NodeId,
    mode: InterferenceMode,
    overlap: f64,
    attenuation_db: f64,
    /// Received power (after attenuation, mW) per member UE; an omni base
    /// station has a single member `None`.
    members: Vec<(Option<usize>, f64)>,
}

#[derive(Debug, Clone)]
struct VictimLink {
    ue: usize,
    dir: Direction,
    signal_dbm: f64,
    noise_dbm: f64,
    terms: Vec<Term>,
}

/// Stream key for LOS state and shadowing. The sectors of a macro site share
/// one draw per far end, as large-scale parameters belong to the site.
fn large_scale_key(n: &Node) -> u32 {
    match n.role {
        Role::MacroBs => n.id.0 / SECTORS_PER_SITE as u32 * SECTORS_PER_SITE as u32,
        _ => n.id.0,
    }
}

/// Static part of a drop.
pub struct DropModel<'a> {
    ctx: &'a CampaignContext,
    pub index: usize,
    pub seed: u64,
    /// Base stations first, then UEs.
    pub nodes: Vec<Node>,
    n_bs: usize,
    losses: Vec<Option<LinkLoss>>,
    /// Serving BS (node index) of each UE (UE index).
    pub serving: Vec<usize>,
    ue_tx_power: Vec<f64>,
    /// Offered load per UE and direction in bit/s.
    demand_bps: Vec<[f64; 2]>,
    victims: Vec<VictimLink>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UrllcUeResult {
    pub id: NodeId,
    pub serving: NodeId,
    pub p_fail: [f64; 2],
    pub mcs_index: [Option<usize>; 2],
    pub feasible: [bool; 2],
    pub satisfied: [bool; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbbUeResult {
    pub id: NodeId,
    pub serving: NodeId,
    pub region: Region,
    pub sinr_db: [f64; 2],
    pub demand_bps: [f64; 2],
    /// Throughput while active with the resources the cell leaves free.
    pub user_throughput_bps: [f64; 2],
    /// Part of the offered traffic that is carried.
    pub served_bps: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub id: NodeId,
    pub network: Network,
    /// Unconstrained resource demand per direction (may exceed 1).
    pub demand: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkBreakdown {
    pub ue: NodeId,
    pub serving: NodeId,
    pub direction: Direction,
    pub signal_dbm: f64,
    pub noise_dbm: f64,
    pub terms: Vec<InterferenceTerm>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DropResult {
    pub index: usize,
    pub seed: u64,
    pub urllc: Vec<UrllcUeResult>,
    pub embb: Vec<EmbbUeResult>,
    pub cells: Vec<CellResult>,
    pub iterations: usize,
    pub converged: bool,
}

impl DropResult {
    pub fn availability_pct(&self, dir: Direction) -> Option<f64> {
        if self.urllc.is_empty() {
            return None;
        }
        let ok = self.urllc.iter().filter(|u| u.satisfied[di(dir)]).count();
        Some(100.0 * ok as f64 / self.urllc.len() as f64)
    }
}

impl<'a> DropModel<'a> {
    pub fn build(ctx: &'a CampaignContext, index: usize) -> Result<Self, EngineError> {
        let s = &ctx.scenario;
        let seed = drop_seed(s.seed, index);
        let n_out = s.population.n_embb_outdoor_ue;
        let t = &s.traffic;
        let impact_share = if n_out == 0 {
            0.0
        } else {
            let total = t.embb_dl_impact_mbps + t.embb_dl_elsewhere_mbps;
            if total > 0.0 {
                t.embb_dl_impact_mbps / total
            } else {
                0.0
            }
        };
        let cfg = DropConfig {
            n_urllc_ue: s.population.n_urllc_ue,
            n_embb_outdoor_ue: n_out,
            n_embb_factory_ue: s.n_factory_embb_ue(),
            impact_share,
            seed,
            ue_height_m: s.layout.nodes.ue_height_m,
        };
        let ues = drop_ues(&ctx.deployment, &cfg, &s.layout.nodes)?;
        let mut nodes = ctx.deployment.base_stations();
        let n_bs = nodes.len();
        nodes.extend(ues);
        let mut m = Self {
            ctx,
            index,
            seed,
            nodes,
            n_bs,
            losses: Vec::new(),
            serving: Vec::new(),
            ue_tx_power: Vec::new(),
            demand_bps: Vec::new(),
            victims: Vec::new(),
        };
        m.realize_links()?;
        m.associate()?;
        m.assign_demand();
        m.set_ue_power();
        m.build_victims();
        Ok(m)
    }

    fn n(&self) -> usize {
        self.nodes.len()
    }

    fn n_ue(&self) -> usize {
        self.nodes.len() - self.n_bs
    }

    fn ue_node(&self, u: usize) -> usize {
        self.n_bs + u
    }

    fn loss(&self, a: usize, b: usize) -> f64 {
        self.losses[a * self.n() + b]
            .as_ref()
            .map(LinkLoss::total_db)
            .expect("link realized for every interacting pair")
    }

    fn needs_link(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        if na.role.is_bs() || nb.role.is_bs() {
            return true;
        }
        self.ctx.scenario.open_access || na.network != nb.network
    }

    fn realize_links(&mut self) -> Result<(), EngineError> {
        let s = &self.ctx.scenario;
        let n = self.n();
        let mut losses = vec![None; n * n];
        for a in 0..n {
            for b in a + 1..n {
                if !self.needs_link(a, b) {
                    continue;
                }
                let (na, nb) = (&self.nodes[a], &self.nodes[b]);
                let (lo, hi) = if na.id <= nb.id { (na, nb) } else { (nb, na) };
                let mut rng = link_rng(self.seed, large_scale_key(lo), large_scale_key(hi));
                let l = realize_link(lo, hi, &self.ctx.deployment.factory, &s.wall, s.radio.carrier_ghz, &mut rng)?;
                losses[a * n + b] = Some(l);
                losses[b * n + a] = Some(l);
            }
        }
        self.losses = losses;
        Ok(())
    }

    fn direction(&self, from: usize, to: usize) -> UnitVector {
        UnitVector::between(&self.nodes[from].pos, &self.nodes[to].pos).unwrap_or(UnitVector { x: 1.0, y: 0.0, z: 0.0 })
    }

    /// Antenna gain of node `x` towards node `y`, with an optional beam
    /// steered at node `beam`.
    fn gain(&self, x: usize, y: usize, beam: Option<usize>) -> f64 {
        let ant = &self.nodes[x].antenna;
        if !ant.is_array() {
            return ant.element_gain_max_dbi;
        }
        let d = self.direction(x, y);
        match beam {
            Some(t) => beam_gain(ant, self.direction(x, t), d).unwrap_or_else(|_| element_gain_towards(ant, d)),
            None => element_gain_towards(ant, d),
        }
    }

    /// Coupling gain without beam steering, as in `coupling_gain`.
    pub fn element_coupling(&self, a: usize, b: usize) -> Option<CouplingGain> {
        let l = self.losses[a * self.n() + b]?;
        Some(CouplingGain::from_parts(&l, self.gain(a, b, None), self.gain(b, a, None)))
    }

    pub fn coupling_rows(&self) -> Vec<(NodeId, NodeId, CouplingGain)> {
        let n = self.n();
        let mut rows = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if let Some(g) = self.element_coupling(a, b) {
                    rows.push((self.nodes[a].id, self.nodes[b].id, g));
                }
            }
        }
        rows
    }

    fn associate(&mut self) -> Result<(), EngineError> {
        let open = self.ctx.scenario.open_access;
        let mut serving = Vec::with_capacity(self.n_ue());
        for u in 0..self.n_ue() {
            let un = self.ue_node(u);
            let ue = &self.nodes[un];
            let mut best: Option<(usize, f64)> = None;
            for b in 0..self.n_bs {
                let bs = &self.nodes[b];
                let allowed = bs.network == ue.network || (open && ue.role == Role::EmbbUe);
                if !allowed {
                    continue;
                }
                let g = -self.loss(b, un) + self.gain(b, un, None) + self.gain(un, b, None);
                // strict comparison keeps the lowest id on ties
                if best.is_none_or(|(_, bg)| g > bg) {
                    best = Some((b, g));
                }
            }
            let (b, _) = best.ok_or(EngineError::NoCandidate(ue.id))?;
            serving.push(b);
        }
        self.serving = serving;
        Ok(())
    }

    fn assign_demand(&mut self) {
        let s = &self.ctx.scenario;
        let t = &s.traffic;
        let f = s.factory_embb_mbps;
        let count =
            |pred: &dyn Fn(&Node) -> bool| self.nodes[self.n_bs..].iter().filter(|n| pred(n)).count().max(1) as f64;
        let n_urllc = count(&|n| n.role == Role::UrllcUe);
        let n_impact = count(&|n| n.role == Role::EmbbUe && n.region == Region::ImpactArea);
        let n_else = count(&|n| n.role == Role::EmbbUe && n.region == Region::Elsewhere);
        let n_fact = count(&|n| n.role == Role::EmbbUe && n.region == Region::InFactory);
        let ul_f = f / t.factory_embb_dl_ul_ratio;
        let mbps = 1e6;
        self.demand_bps = self.nodes[self.n_bs..]
            .iter()
            .map(|n| match (n.role, n.region) {
                (Role::UrllcUe, _) => [t.urllc_dl_mbps / n_urllc * mbps, t.urllc_ul_mbps / n_urllc * mbps],
                (_, Region::ImpactArea) => [
                    (t.embb_dl_impact_mbps - f).max(0.0) / n_impact * mbps,
                    (t.embb_ul_impact_mbps - ul_f).max(0.0) / n_impact * mbps,
                ],
                (_, Region::Elsewhere) => {
                    [t.embb_dl_elsewhere_mbps / n_else * mbps, t.embb_ul_elsewhere_mbps / n_else * mbps]
                }
                (_, Region::InFactory) => [f / n_fact * mbps, ul_f / n_fact * mbps],
            })
            .collect();
    }

    fn noise_dbm(&self, node: usize) -> f64 {
        noise_power_dbm(self.ctx.scenario.radio.bandwidth_hz, self.nodes[node].noise_figure_db)
    }

    fn set_ue_power(&mut self) {
        let r = &self.ctx.scenario.radio;
        self.ue_tx_power = (0..self.n_ue())
            .map(|u| {
                let un = self.ue_node(u);
                let b = self.serving[u];
                let pc = match self.nodes[b].network {
                    Network::Macro => &r.macro_pc,
                    Network::Factory => &r.factory_pc,
                };
                let coupling_loss = self.loss(un, b) - self.gain(b, un, Some(un)) - self.gain(un, b, None);
                ul_tx_power(coupling_loss, pc, self.noise_dbm(b)).min(self.nodes[un].max_tx_power_dbm)
            })
            .collect();
    }

    fn build_victims(&mut self) {
        let mut victims = Vec::new();
        for u in 0..self.n_ue() {
            for dir in DIRS {
                if self.demand_bps[u][di(dir)] > 0.0 {
                    victims.push(self.victim_link(u, dir));
                }
            }
        }
        self.victims = victims;
    }

    fn victim_link(&self, u: usize, dv: Direction) -> VictimLink {
        let ctx = self.ctx;
        let s = &ctx.scenario;
        let un = self.ue_node(u);
        let sv = self.serving[u];
        let vnet = self.nodes[sv].network;
        let (rx, rx_beam) = match dv {
            Direction::Downlink => (un, None),
            Direction::Uplink => (sv, Some(un)),
        };
        let signal_dbm = match dv {
            Direction::Downlink => {
                self.nodes[sv].max_tx_power_dbm + self.gain(sv, un, Some(un)) + self.gain(un, sv, None)
                    - self.loss(sv, un)
            }
            Direction::Uplink => {
                self.ue_tx_power[u] + self.gain(un, sv, None) + self.gain(sv, un, Some(un)) - self.loss(un, sv)
            }
        };
        let mut terms: Vec<Term> = Vec::new();
        let mut index: Vec<[Option<usize>; 2]> = vec![[None; 2]; self.n_bs];
        let mut push = |cell: usize, adir: Direction, member: Option<usize>, power_dbm: f64| {
            let slot = &mut index[cell][di(adir)];
            let k = match *slot {
                Some(k) => k,
                None => {
                    let anet = self.nodes[cell].network;
                    let mode = InterferenceMode::from_directions(adir, dv);
                    let spectrum = if anet == vnet { SpectrumMode::CoChannel } else { s.spectrum };
                    terms.push(Term {
                        cell,
                        dir: adir,
                        aggressor: self.nodes[cell].id,
                        mode,
                        overlap: ctx.overlap(anet, vnet, adir, dv),
                        attenuation_db: channel_attenuation(spectrum, mode, &s.radio.acir),
                        members: Vec::new(),
                    });
                    *slot = Some(terms.len() - 1);
                    terms.len() - 1
                }
            };
            let t = &mut terms[k];
            t.members.push((member, db_to_lin(power_dbm - t.attenuation_db)));
        };
        let skip =
            |anet: Network, adir: Direction| (s.isolated && anet != vnet) || ctx.overlap(anet, vnet, adir, dv) == 0.0;

        for b in 0..self.n_bs {
            let bs = &self.nodes[b];
            if b == sv || skip(bs.network, Direction::Downlink) {
                continue;
            }
            let rx_side = self.gain(rx, b, rx_beam) - self.loss(b, rx);
            if bs.antenna.is_array() {
                for v in 0..self.n_ue() {
                    if self.serving[v] == b && self.demand_bps[v][0] > 0.0 {
                        let p = bs.max_tx_power_dbm + self.gain(b, rx, Some(self.ue_node(v))) + rx_side;
                        push(b, Direction::Downlink, Some(v), p);
                    }
                }
            } else if self.serving.contains(&b) {
                let p = bs.max_tx_power_dbm + self.gain(b, rx, None) + rx_side;
                push(b, Direction::Downlink, None, p);
            }
        }
        for x in 0..self.n_ue() {
            let xn = self.ue_node(x);
            let cx = self.serving[x];
            if x == u || cx == sv || self.demand_bps[x][1] <= 0.0 || skip(self.nodes[cx].network, Direction::Uplink) {
                continue;
            }
            let p = self.ue_tx_power[x] + self.gain(xn, rx, None) + self.gain(rx, xn, rx_beam) - self.loss(xn, rx);
            push(cx, Direction::Uplink, Some(x), p);
        }
        VictimLink { ue: u, dir: dv, signal_dbm, noise_dbm: self.noise_dbm(rx), terms }
    }

    /// Seconds of one resource unit per direction, as time fraction of the
    /// serving pattern.
    fn time_fraction(&self, bs: usize, dir: Direction) -> f64 {
        self.ctx.time_fraction(self.nodes[bs].network, dir)
    }

    /// Activity shares given per-UE resource fractions `r` (indexed
    /// `2 * ue + dir`).
    fn shares(&self, r: &[f64]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let mut cell = vec![[0.0; 2]; self.n_bs];
        for u in 0..self.n_ue() {
            for d in 0..2 {
                cell[self.serving[u]][d] += r[2 * u + d];
            }
        }
        let ue: Vec<f64> = (0..2 * self.n_ue())
            .map(|k| {
                let rho = cell[self.serving[k / 2]][k % 2];
                if rho > 1.0 {
                    r[k] / rho
                } else {
                    r[k]
                }
            })
            .collect();
        (ue, cell)
    }

    /// Activity probability and on-power (mW) of an aggressor cell.
    fn activity(&self, t: &Term, ue_share: &[f64], cell: &[[f64; 2]]) -> (f64, f64) {
        let d = di(t.dir);
        let mut weight = 0.0;
        let mut power = 0.0;
        for &(m, p) in &t.members {
            let w = m.map_or(1.0, |x| ue_share[2 * x + d]);
            weight += w;
            power += w * p;
        }
        if weight <= 0.0 {
            return (0.0, 0.0);
        }
        (cell[t.cell][d].min(1.0) * t.overlap, power / weight)
    }

    fn terms_with_activity(&self, v: &VictimLink, ue_share: &[f64], cell: &[[f64; 2]]) -> Vec<InterferenceTerm> {
        v.terms
            .iter()
            .map(|t| {
                let (activity, on_mw) = self.activity(t, ue_share, cell);
                InterferenceTerm {
                    aggressor: t.aggressor,
                    mode: t.mode,
                    overlap: t.overlap,
                    attenuation_db: t.attenuation_db,
                    power_dbm: if on_mw > 0.0 { lin_to_db(on_mw) + t.attenuation_db } else { f64::NEG_INFINITY },
                    activity,
                }
            })
            .collect()
    }

    fn mean_sinr_db(&self, v: &VictimLink, ue_share: &[f64], cell: &[[f64; 2]]) -> f64 {
        let i: f64 = v
            .terms
            .iter()
            .map(|t| {
                let (a, p) = self.activity(t, ue_share, cell);
                a * p
            })
            .sum();
        v.signal_dbm - lin_to_db(db_to_lin(v.noise_dbm) + i)
    }

    /// URLLC resource fraction per packet rate for `n_re` resource elements.
    fn urllc_fraction(&self, u: usize, dir: Direction, n_re: usize) -> f64 {
        let s = &self.ctx.scenario;
        let pkt_rate = self.demand_bps[u][di(dir)] / f64::from(s.requirement.payload_bits);
        let b = self.serving[u];
        let re_per_s = self.ctx.mcs_subcarriers as f64 * self.ctx.symbols_per_second(self.nodes[b].network, dir);
        pkt_rate * n_re as f64 / re_per_s
    }

    /// Resource fraction demanded by the victim link, plus the MCS choice
    /// and failure probability for URLLC links.
    fn link_demand(&self, v: &VictimLink, ue_share: &[f64], cell: &[[f64; 2]]) -> (f64, Option<(usize, f64)>) {
        let s = &self.ctx.scenario;
        let un = self.ue_node(v.ue);
        if self.nodes[un].role == Role::UrllcUe {
            let terms = self.terms_with_activity(v, ue_share, cell);
            let states = interference_states(v.signal_dbm, v.noise_dbm, &terms, s.radio.top_k);
            let (idx, p_fail) = select_mcs(&states, &self.ctx.mcs_table, s.requirement.max_failure());
            let r = self.urllc_fraction(v.ue, v.dir, self.ctx.mcs_table[idx].n_re);
            (r.min(1.0), Some((idx, p_fail)))
        } else {
            let sinr = self.mean_sinr_db(v, ue_share, cell);
            let cap = embb_rate(sinr, s.radio.bandwidth_hz, &s.radio.embb_link)
                * self.time_fraction(self.serving[v.ue], v.dir);
            let demand = self.demand_bps[v.ue][di(v.dir)];
            let r = if cap > 0.0 { demand / cap } else { f64::INFINITY };
            (r.min(1.0), None)
        }
    }

    fn solve(&self) -> FixedPoint {
        let s = &self.ctx.scenario;
        let n_ue = self.n_ue();
        damped_fixed_point(
            vec![0.0; 2 * n_ue],
            |r| {
                let (ue_share, cell) = self.shares(r);
                let mut next = vec![0.0; 2 * n_ue];
                for v in &self.victims {
                    next[2 * v.ue + di(v.dir)] = self.link_demand(v, &ue_share, &cell).0;
                }
                next
            },
            s.solver.max_iter,
            s.solver.tol,
        )
    }

    /// Signal, noise and aggressor terms of every victim link at the solved
    /// loads.
    pub fn breakdowns(&self) -> Vec<LinkBreakdown> {
        let fp = self.solve();
        let (ue_share, cell) = self.shares(&fp.values);
        self.victims
            .iter()
            .map(|v| LinkBreakdown {
                ue: self.nodes[self.ue_node(v.ue)].id,
                serving: self.nodes[self.serving[v.ue]].id,
                direction: v.dir,
                signal_dbm: v.signal_dbm,
                noise_dbm: v.noise_dbm,
                terms: self.terms_with_activity(v, &ue_share, &cell),
            })
            .collect()
    }

    pub fn evaluate(&self) -> DropResult {
        let s = &self.ctx.scenario;
        let n_ue = self.n_ue();
        let fp = self.solve();
        let r = &fp.values;
        let (ue_share, cell) = self.shares(r);

        let mut urllc: Vec<Option<UrllcUeResult>> = vec![None; n_ue];
        let mut embb: Vec<Option<EmbbUeResult>> = vec![None; n_ue];
        for u in 0..n_ue {
            let node = &self.nodes[self.ue_node(u)];
            let serving = self.nodes[self.serving[u]].id;
            match node.role {
                Role::UrllcUe => {
                    urllc[u] = Some(UrllcUeResult {
                        id: node.id,
                        serving,
                        p_fail: [0.0; 2],
                        mcs_index: [None; 2],
                        feasible: [true; 2],
                        satisfied: [true; 2],
                    })
                }
                _ => {
                    embb[u] = Some(EmbbUeResult {
                        id: node.id,
                        serving,
                        region: node.region,
                        sinr_db: [f64::NAN; 2],
                        demand_bps: self.demand_bps[u],
                        user_throughput_bps: [0.0; 2],
                        served_bps: [0.0; 2],
                    })
                }
            }
        }

        // cells' unconstrained demand, from uncapped per-UE needs
        let mut raw = vec![0.0; 2 * n_ue];
        let mut caps = vec![0.0; 2 * n_ue];
        let mut mcs_pick = vec![None; 2 * n_ue];
        for v in &self.victims {
            let k = 2 * v.ue + di(v.dir);
            if let Some(e) = embb[v.ue].as_mut() {
                let sinr = self.mean_sinr_db(v, &ue_share, &cell);
                e.sinr_db[di(v.dir)] = sinr;
                caps[k] = embb_rate(sinr, s.radio.bandwidth_hz, &s.radio.embb_link)
                    * self.time_fraction(self.serving[v.ue], v.dir);
                raw[k] = if caps[k] > 0.0 { self.demand_bps[v.ue][di(v.dir)] / caps[k] } else { f64::INFINITY };
            } else {
                let (_, pick) = self.link_demand(v, &ue_share, &cell);
                let (idx, _) = pick.expect("URLLC link yields an MCS");
                raw[k] = self.urllc_fraction(v.ue, v.dir, self.ctx.mcs_table[idx].n_re);
                mcs_pick[k] = pick;
            }
        }
        let mut cell_raw = vec![[0.0; 2]; self.n_bs];
        let mut members: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; self.n_bs];
        for u in 0..n_ue {
            for d in 0..2 {
                if self.demand_bps[u][d] > 0.0 {
                    cell_raw[self.serving[u]][d] += raw[2 * u + d];
                    members[self.serving[u]][d].push(u);
                }
            }
        }

        for v in &self.victims {
            let d = di(v.dir);
            let k = 2 * v.ue + d;
            let b = self.serving[v.ue];
            if let Some(e) = embb[v.ue].as_mut() {
                let own = raw[k].min(1.0);
                let load: f64 = members[b][d].iter().map(|&x| raw[2 * x + d].min(1.0)).sum();
                if load <= 1.0 {
                    e.user_throughput_bps[d] = caps[k] * (1.0 - load + own);
                    e.served_bps[d] = caps[k] * own;
                } else {
                    let demands: Vec<f64> = members[b][d].iter().map(|&x| raw[2 * x + d].min(1.0)).collect();
                    let level = water_level(&demands, 1.0);
                    e.user_throughput_bps[d] = caps[k] * own.min(level);
                    e.served_bps[d] = e.user_throughput_bps[d];
                }
            } else if let Some(x) = urllc[v.ue].as_mut() {
                let (idx, p_fail) = mcs_pick[k].expect("URLLC link yields an MCS");
                let feasible = cell_raw[b][d] <= 1.0 + 1e-12;
                let latency_ms = self.ctx.latency_ms(self.nodes[b].network, v.dir);
                x.p_fail[d] = p_fail;
                x.mcs_index[d] = Some(idx);
                x.feasible[d] = feasible;
                x.satisfied[d] = satisfied(&s.requirement, &UeEval { p_fail, latency_ms, cell_feasible: feasible });
            }
        }
        // UEs without traffic in a direction are trivially satisfied there

        let cells = (0..self.n_bs)
            .map(|b| CellResult { id: self.nodes[b].id, network: self.nodes[b].network, demand: cell_raw[b] })
            .collect();
        DropResult {
            index: self.index,
            seed: self.seed,
            urllc: urllc.into_iter().flatten().collect(),
            embb: embb.into_iter().flatten().collect(),
            cells,
            iterations: fp.iterations,
            converged: fp.converged,
        }
    }
}
