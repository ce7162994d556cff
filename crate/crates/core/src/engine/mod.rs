//! Campaign orchestration: per-scenario precomputation, parallel drops and
//! aggregation of the two headline metrics.

pub mod drop;
pub mod load;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::layout::{build_macro_grid, place_factory, Deployment, LayoutError, Network, NodeId, Region};
use crate::mcs::{build_mcs_table, McsEntry, McsError};
use crate::propagation::PropagationError;
use crate::scenario::{ConfigError, Scenario};
use crate::tdd::{overlap_profile, Direction, OverlapProfile, TddError, TddPattern};
use crate::urllc::one_shot_latency_ms;

pub use drop::{DropModel, DropResult, EmbbUeResult, LinkBreakdown, UrllcUeResult};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("empty campaign")]
    EmptyCampaign,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Tdd(#[from] TddError),
    #[error(transparent)]
    Mcs(#[from] McsError),
    #[error("UE {0} has no candidate base station")]
    NoCandidate(NodeId),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

fn ni(n: Network) -> usize {
    match n {
        Network::Macro => 0,
        Network::Factory => 1,
    }
}

fn frac(r: num_rational::Ratio<u32>) -> f64 {
    f64::from(*r.numer()) / f64::from(*r.denom())
}

/// Everything shared by the drops of one scenario.
pub struct CampaignContext {
    pub scenario: Scenario,
    pub deployment: Deployment,
    pub mcs_table: Vec<McsEntry>,
    pub mcs_subcarriers: usize,
    /// `profiles[aggressor][victim]`
    profiles: [[OverlapProfile; 2]; 2],
    patterns: [TddPattern; 2],
    /// Worst-case one-shot latency per network and direction; infinite when
    /// the pattern has no window.
    latency: [[f64; 2]; 2],
}

impl CampaignContext {
    pub fn new(scenario: &Scenario) -> Result<Self, EngineError> {
        scenario.validate()?;
        let s = scenario.clone();
        let sites = build_macro_grid(s.layout.isd_m, s.layout.tiers, &s.layout.nodes)?;
        let deployment = place_factory(
            sites,
            &s.layout.factory,
            0.5 * s.layout.system_side_m,
            s.layout.impact_side_m,
            &s.layout.nodes,
        )?;
        let mcs_cfg = s.mcs_config();
        let mcs_table = build_mcs_table(&mcs_cfg)?;
        let patterns = [s.macro_pattern().clone(), s.factory_pattern().clone()];
        let p = |a: usize, v: usize| overlap_profile(&patterns[a], &patterns[v]);
        let profiles = [[p(0, 0)?, p(0, 1)?], [p(1, 0)?, p(1, 1)?]];
        let mut latency = [[f64::INFINITY; 2]; 2];
        for (n, pat) in patterns.iter().enumerate() {
            for (d, dir) in [Direction::Downlink, Direction::Uplink].into_iter().enumerate() {
                if let Ok(l) = one_shot_latency_ms(pat, dir, s.tdd.tti_symbols, s.tdd.processing_ms) {
                    latency[n][d] = l;
                }
            }
        }
        Ok(Self {
            scenario: s,
            deployment,
            mcs_table,
            mcs_subcarriers: mcs_cfg.subcarriers,
            profiles,
            patterns,
            latency,
        })
    }

    pub fn overlap(&self, aggressor: Network, victim: Network, adir: Direction, vdir: Direction) -> f64 {
        frac(self.profiles[ni(aggressor)][ni(victim)].fraction(adir, vdir))
    }

    pub fn time_fraction(&self, network: Network, dir: Direction) -> f64 {
        frac(self.patterns[ni(network)].time_fraction(dir))
    }

    pub fn symbols_per_second(&self, network: Network, dir: Direction) -> f64 {
        self.patterns[ni(network)].symbols_per_second(dir)
    }

    pub fn latency_ms(&self, network: Network, dir: Direction) -> f64 {
        self.latency[ni(network)][match dir {
            Direction::Downlink => 0,
            Direction::Uplink => 1,
        }]
    }

    pub fn drop_model(&self, index: usize) -> Result<DropModel<'_>, EngineError> {
        DropModel::build(self, index)
    }

    pub fn run_drop(&self, index: usize) -> Result<DropResult, EngineError> {
        Ok(self.drop_model(index)?.evaluate())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// 95 % confidence half-width over per-drop values.
    pub ci95: f64,
}

fn estimate(pooled_mean: f64, per_drop: &[f64]) -> Estimate {
    let n = per_drop.len();
    if n < 2 {
        return Estimate { mean: pooled_mean, ci95: 0.0 };
    }
    let m = per_drop.iter().sum::<f64>() / n as f64;
    let var = per_drop.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    Estimate { mean: pooled_mean, ci95: 1.96 * (var / n as f64).sqrt() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionThroughput {
    pub region: Region,
    pub direction: Direction,
    pub users: usize,
    pub user_throughput_mbps: Estimate,
    pub served_mbps: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanLoads {
    pub macro_dl: f64,
    pub macro_ul: f64,
    pub factory_dl: f64,
    pub factory_ul: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub scenario: Scenario,
    pub drops: usize,
    pub urllc_evaluations: usize,
    pub availability_dl_pct: Estimate,
    pub availability_ul_pct: Estimate,
    /// Mean of per-drop availabilities, reported next to the pooled value.
    pub per_drop_mean_availability_dl_pct: f64,
    pub per_drop_mean_availability_ul_pct: f64,
    pub throughput: Vec<RegionThroughput>,
    /// eMBB region the headline throughput refers to.
    pub headline_region: Region,
    pub throughput_dl_mbps: Estimate,
    pub throughput_ul_mbps: Estimate,
    pub mean_loads: MeanLoads,
    pub converged: bool,
    pub non_converged_drops: Vec<usize>,
    pub max_iterations: usize,
}

/// One line of the per-drop summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropSummary {
    pub index: usize,
    pub seed: u64,
    pub availability_dl_pct: f64,
    pub availability_ul_pct: f64,
    pub throughput_dl_mbps: f64,
    pub throughput_ul_mbps: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct CampaignOutput {
    pub aggregate: AggregateResult,
    pub drops: Vec<DropSummary>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Runs all drops of a scenario on `parallelism` threads (0 = all cores).
/// Results do not depend on the thread count.
pub fn run_campaign(scenario: &Scenario, parallelism: usize) -> Result<CampaignOutput, EngineError> {
    if scenario.drops == 0 {
        return Err(EngineError::EmptyCampaign);
    }
    let ctx = CampaignContext::new(scenario)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
    let results: Vec<DropResult> =
        pool.install(|| (0..scenario.drops).into_par_iter().map(|i| ctx.run_drop(i)).collect::<Result<Vec<_>, _>>())?;
    Ok(aggregate(&ctx.scenario, &results))
}

pub fn headline_region(s: &Scenario) -> Region {
    if s.n_factory_embb_ue() > 0 {
        Region::InFactory
    } else {
        Region::ImpactArea
    }
}

pub fn aggregate(scenario: &Scenario, results: &[DropResult]) -> CampaignOutput {
    let dirs = [Direction::Downlink, Direction::Uplink];
    let urllc_evaluations: usize = results.iter().map(|r| r.urllc.len()).sum();
    let mut avail = [Estimate { mean: 100.0, ci95: 0.0 }; 2];
    let mut per_drop_mean = [100.0; 2];
    for d in 0..2 {
        let ok: usize = results.iter().map(|r| r.urllc.iter().filter(|u| u.satisfied[d]).count()).sum();
        let pooled = if urllc_evaluations > 0 { 100.0 * ok as f64 / urllc_evaluations as f64 } else { 100.0 };
        let per_drop: Vec<f64> = results.iter().filter_map(|r| r.availability_pct(dirs[d])).collect();
        per_drop_mean[d] = mean(per_drop.iter().copied()).unwrap_or(100.0);
        avail[d] = estimate(pooled, &per_drop);
    }

    let mut throughput = Vec::new();
    for region in [Region::ImpactArea, Region::Elsewhere, Region::InFactory] {
        for (d, &dir) in dirs.iter().enumerate() {
            let users: Vec<&EmbbUeResult> = results
                .iter()
                .flat_map(|r| r.embb.iter())
                .filter(|e| e.region == region && e.demand_bps[d] > 0.0)
                .collect();
            if users.is_empty() {
                continue;
            }
            let per_drop = |f: &dyn Fn(&EmbbUeResult) -> f64| -> Vec<f64> {
                results
                    .iter()
                    .filter_map(|r| mean(r.embb.iter().filter(|e| e.region == region && e.demand_bps[d] > 0.0).map(f)))
                    .collect()
            };
            let thr = |e: &EmbbUeResult| e.user_throughput_bps[d] / 1e6;
            let srv = |e: &EmbbUeResult| e.served_bps[d] / 1e6;
            throughput.push(RegionThroughput {
                region,
                direction: dir,
                users: users.len(),
                user_throughput_mbps: estimate(mean(users.iter().map(|e| thr(e))).unwrap_or(0.0), &per_drop(&thr)),
                served_mbps: estimate(mean(users.iter().map(|e| srv(e))).unwrap_or(0.0), &per_drop(&srv)),
            });
        }
    }
    let headline = headline_region(scenario);
    let pick = |dir: Direction| {
        throughput
            .iter()
            .find(|t| t.region == headline && t.direction == dir)
            .map(|t| t.user_throughput_mbps)
            .unwrap_or(Estimate { mean: 0.0, ci95: 0.0 })
    };

    let load = |net: Network, d: usize| {
        mean(results.iter().flat_map(|r| r.cells.iter()).filter(|c| c.network == net).map(|c| c.demand[d].min(1.0)))
            .unwrap_or(0.0)
    };
    let mean_loads = MeanLoads {
        macro_dl: load(Network::Macro, 0),
        macro_ul: load(Network::Macro, 1),
        factory_dl: load(Network::Factory, 0),
        factory_ul: load(Network::Factory, 1),
    };

    let drops: Vec<DropSummary> = results
        .iter()
        .map(|r| {
            let thr = |d: usize| {
                mean(
                    r.embb
                        .iter()
                        .filter(|e| e.region == headline && e.demand_bps[d] > 0.0)
                        .map(|e| e.user_throughput_bps[d] / 1e6),
                )
                .unwrap_or(0.0)
            };
            DropSummary {
                index: r.index,
                seed: r.seed,
                availability_dl_pct: r.availability_pct(Direction::Downlink).unwrap_or(100.0),
                availability_ul_pct: r.availability_pct(Direction::Uplink).unwrap_or(100.0),
                throughput_dl_mbps: thr(0),
                throughput_ul_mbps: thr(1),
                iterations: r.iterations,
                converged: r.converged,
            }
        })
        .collect();

    let non_converged_drops: Vec<usize> = results.iter().filter(|r| !r.converged).map(|r| r.index).collect();
    let aggregate = AggregateResult {
        scenario: scenario.clone(),
        drops: results.len(),
        urllc_evaluations,
        availability_dl_pct: avail[0],
        availability_ul_pct: avail[1],
        per_drop_mean_availability_dl_pct: per_drop_mean[0],
        per_drop_mean_availability_ul_pct: per_drop_mean[1],
        throughput_dl_mbps: pick(Direction::Downlink),
        throughput_ul_mbps: pick(Direction::Uplink),
        headline_region: headline,
        throughput,
        mean_loads,
        converged: non_converged_drops.is_empty(),
        non_converged_drops,
        max_iterations: results.iter().map(|r| r.iterations).max().unwrap_or(0),
    };
    CampaignOutput { aggregate, drops }
}

/// Writes the per-drop summary CSV.
pub fn write_drop_csv<W: Write>(mut w: W, drops: &[DropSummary]) -> std::io::Result<()> {
    writeln!(w, "drop,seed,availDl_pct,availUl_pct,thrDl_Mbps,thrUl_Mbps,iterations,converged")?;
    for d in drops {
        writeln!(
            w,
            "{},{},{:.4},{:.4},{:.4},{:.4},{},{}",
            d.index,
            d.seed,
            d.availability_dl_pct,
            d.availability_ul_pct,
            d.throughput_dl_mbps,
            d.throughput_ul_mbps,
            d.iterations,
            d.converged
        )?;
    }
    Ok(())
}
