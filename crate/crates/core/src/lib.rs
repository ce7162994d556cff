//! Snapshot Monte Carlo simulator for the co-existence of a public eMBB
//! macro network and a non-public URLLC factory network sharing a TDD band.

pub mod antenna;
pub mod engine;
pub mod layout;
pub mod mcs;
pub mod propagation;
pub mod radio_link;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod tdd;
pub mod urllc;
