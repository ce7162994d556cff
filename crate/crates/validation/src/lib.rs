//! Reference oracles and campaign helpers shared by the acceptance suite.

pub mod pathloss;
pub mod toy;

use std::collections::HashMap;

use coexsim::engine::{run_campaign, AggregateResult};
use coexsim::scenario::{ConfigFile, Figure, Scenario};

/// Result of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }

    /// Both outcomes must pass; details are joined.
    pub fn and(self, other: Outcome) -> Outcome {
        Outcome::new(self.pass && other.pass, format!("{}; {}", self.detail, other.detail))
    }
}

/// Runs default-sized campaigns at a fixed top-K and remembers each cell.
pub struct Campaigns {
    pub top_k: usize,
    parallelism: usize,
    cache: HashMap<String, AggregateResult>,
}

impl Campaigns {
    pub fn new(top_k: usize, parallelism: usize) -> Self {
        Self { top_k, parallelism, cache: HashMap::new() }
    }

    pub fn scenario(&self, mut s: Scenario) -> Scenario {
        s.radio.top_k = self.top_k;
        s
    }

    pub fn run(&mut self, s: &Scenario) -> AggregateResult {
        let s = self.scenario(s.clone());
        let key = format!("{}_iso{}", s.cell_name(), s.isolated);
        if let Some(r) = self.cache.get(&key) {
            return r.clone();
        }
        let out = run_campaign(&s, self.parallelism).expect("campaign failed");
        self.cache.insert(key, out.aggregate.clone());
        out.aggregate
    }

    /// All cells of a figure preset on top of the default scenario.
    pub fn figure(&mut self, figure: Figure) -> Vec<AggregateResult> {
        let cells = ConfigFile::default().scenarios(Some(figure)).expect("figure preset");
        cells.iter().map(|s| self.run(s)).collect()
    }
}
