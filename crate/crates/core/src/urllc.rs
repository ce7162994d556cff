//! URLLC service requirement and the per-direction satisfaction predicate.

use serde::{Deserialize, Serialize};

use crate::tdd::{tti_duration_us, Direction, TddError, TddPattern};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UrllcRequirement {
    pub payload_bits: u32,
    pub reliability: f64,
    pub latency_bound_ms: f64,
}

impl Default for UrllcRequirement {
    fn default() -> Self {
        Self { payload_bits: 256, reliability: 0.99999, latency_bound_ms: 1.0 }
    }
}

impl UrllcRequirement {
    pub fn max_failure(&self) -> f64 {
        1.0 - self.reliability
    }

    pub fn invalid_reason(&self) -> Option<&'static str> {
        if !(self.reliability > 0.0 && self.reliability < 1.0) {
            Some("reliability out of (0,1)")
        } else if !(self.latency_bound_ms > 0.0) {
            Some("latency bound must be positive")
        } else if self.payload_bits == 0 {
            Some("payload must be positive")
        } else {
            None
        }
    }
}

/// One-way evaluation of a UE in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UeEval {
    pub p_fail: f64,
    pub latency_ms: f64,
    pub cell_feasible: bool,
}

/// Both thresholds are inclusive.
pub fn satisfied(req: &UrllcRequirement, eval: &UeEval) -> bool {
    eval.p_fail <= req.max_failure() && eval.latency_ms <= req.latency_bound_ms && eval.cell_feasible
}

/// Worst-case one-shot latency: alignment wait for the next TTI window,
/// the TTI itself and a fixed processing budget.
pub fn one_shot_latency_ms(
    pattern: &TddPattern,
    direction: Direction,
    tti_symbols: usize,
    processing_ms: f64,
) -> Result<f64, TddError> {
    let wait = pattern.worst_case_wait_symbols(direction, tti_symbols)?;
    Ok(wait as f64 * pattern.symbol_duration_ms()
        + tti_duration_us(tti_symbols, pattern.scs_khz()) * 1e-3
        + processing_ms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(p_fail: f64, latency_ms: f64) -> UeEval {
        UeEval { p_fail, latency_ms, cell_feasible: true }
    }

    #[test]
    fn predicate() {
        let r = UrllcRequirement::default();
        assert!(satisfied(&r, &eval(1e-6, 0.9)));
        assert!(satisfied(&r, &eval(r.max_failure(), 0.9)));
        assert!(!satisfied(&r, &eval(0.0, 1.2)));
        assert!(!satisfied(&r, &eval(1e-4, 0.5)));
        assert!(!satisfied(&r, &UeEval { cell_feasible: false, ..eval(0.0, 0.5) }));
    }

    #[test]
    fn dudu_meets_the_budget() {
        let l = one_shot_latency_ms(&TddPattern::dudu(), Direction::Uplink, 4, 0.4).unwrap();
        assert!((l - (10.0 / 28.0 + 4.0 / 28.0 + 0.4)).abs() < 1e-12);
        assert!(l <= 1.0);
        let l = one_shot_latency_ms(&TddPattern::dddu(), Direction::Uplink, 4, 0.4).unwrap();
        assert!(l > 1.0);
    }

    #[test]
    fn invalid_requirements() {
        let r = UrllcRequirement { reliability: 1.0, ..Default::default() };
        assert!(r.invalid_reason().is_some());
        assert!(UrllcRequirement::default().invalid_reason().is_none());
    }
}
