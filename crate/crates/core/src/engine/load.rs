//! Damped fixed-point iteration for load-coupled utilizations.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest absolute change in the last iteration.
    pub residual: f64,
}

/// Iterations with the plain half step before the step starts shrinking.
pub const WARMUP_ITERATIONS: usize = 30;
const STEP_DECAY: f64 = 0.8;

/// Iterates `x <- x + w * (map(x) - x)` from `init` until the largest change
/// falls below `tol`, or `max_iter` is reached. `w` is 1/2 for the first
/// `WARMUP_ITERATIONS` steps and then decays geometrically, which settles
/// maps with discrete jumps (MCS switching) at the jump instead of cycling.
pub fn damped_fixed_point<F>(init: Vec<f64>, mut map: F, max_iter: usize, tol: f64) -> FixedPoint
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut x = init;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let next = map(&x);
        debug_assert_eq!(next.len(), x.len());
        let w = 0.5 * STEP_DECAY.powi(it.saturating_sub(WARMUP_ITERATIONS) as i32);
        residual = 0.0;
        for (xi, ni) in x.iter_mut().zip(next) {
            let updated = *xi + w * (ni - *xi);
            residual = residual.max((updated - *xi).abs());
            *xi = updated;
        }
        if residual < tol {
            return FixedPoint { values: x, iterations: it, converged: true, residual };
        }
    }
    FixedPoint { values: x, iterations: max_iter, converged: false, residual }
}

/// Utilization and served share of one cell in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellLoad {
    pub utilization: f64,
    pub served_fraction: f64,
}

impl CellLoad {
    /// From the unconstrained resource demand (may exceed 1).
    pub fn from_demand(raw: f64) -> Self {
        if raw <= 1.0 {
            Self { utilization: raw.max(0.0), served_fraction: 1.0 }
        } else {
            Self { utilization: 1.0, served_fraction: 1.0 / raw }
        }
    }
}

/// Per-cell utilizations `rho_c = min(1, demand_c / capacity_c(rho))`,
/// starting from idle cells.
pub fn load_fixed_point<C>(demand: &[f64], capacity: C, max_iter: usize, tol: f64) -> (Vec<CellLoad>, FixedPoint)
where
    C: Fn(usize, &[f64]) -> f64,
{
    let fp = damped_fixed_point(
        vec![0.0; demand.len()],
        |rho| (0..demand.len()).map(|c| (demand[c] / capacity(c, rho)).min(1.0)).collect(),
        max_iter,
        tol,
    );
    let loads = (0..demand.len()).map(|c| CellLoad::from_demand(demand[c] / capacity(c, &fp.values))).collect();
    (loads, fp)
}

/// Water-filling level `l` with `sum_i min(r_i, l) = budget`; infinite when
/// the total demand fits.
pub fn water_level(demands: &[f64], budget: f64) -> f64 {
    let total: f64 = demands.iter().sum();
    if total <= budget {
        return f64::INFINITY;
    }
    let mut sorted: Vec<f64> = demands.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut remaining = budget;
    let mut left = sorted.len();
    for &d in &sorted {
        let level = remaining / left as f64;
        if d >= level {
            return level;
        }
        remaining -= d;
        left -= 1;
    }
    f64::INFINITY
}
