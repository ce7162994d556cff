//! Pathloss formulas written out by hand, independent of the library code.

use coexsim::propagation::{LinkClass, LinkGeometry, LosState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C: f64 = 299_792_458.0;

fn lg(x: f64) -> f64 {
    x.ln() / std::f64::consts::LN_10
}

pub fn breakpoint(h_bs: f64, h_ut: f64, fc_ghz: f64) -> f64 {
    4.0 * (h_bs - 1.0) * (h_ut - 1.0) * fc_ghz * 1.0e9 / C
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub d2d: f64,
    pub h_bs: f64,
    pub h_ut: f64,
    pub fc: f64,
    pub los: bool,
}

impl Sample {
    pub fn d3d(&self) -> f64 {
        (self.d2d.powi(2) + (self.h_bs - self.h_ut).powi(2)).sqrt()
    }

    pub fn geometry(&self, class: LinkClass) -> LinkGeometry {
        let los = if self.los { LosState::Los } else { LosState::Nlos };
        LinkGeometry::outdoor(class, self.d2d, self.h_bs, self.h_ut, los)
    }
}

pub fn uma(s: &Sample) -> f64 {
    let d3 = s.d3d();
    let bp = breakpoint(s.h_bs, s.h_ut, s.fc);
    let pl1 = 28.0 + 22.0 * lg(d3) + 20.0 * lg(s.fc);
    let pl2 = 28.0 + 40.0 * lg(d3) + 20.0 * lg(s.fc) - 9.0 * lg(bp * bp + (s.h_bs - s.h_ut).powi(2));
    let los = if s.d2d <= bp { pl1 } else { pl2 };
    if s.los {
        return los;
    }
    let nlos = 13.54 + 39.08 * lg(d3) + 20.0 * lg(s.fc) - 0.6 * (s.h_ut - 1.5);
    nlos.max(los)
}

pub fn umi(s: &Sample) -> f64 {
    let d3 = s.d3d();
    let bp = breakpoint(s.h_bs, s.h_ut, s.fc);
    let pl1 = 32.4 + 21.0 * lg(d3) + 20.0 * lg(s.fc);
    let pl2 = 32.4 + 40.0 * lg(d3) + 20.0 * lg(s.fc) - 9.5 * lg(bp * bp + (s.h_bs - s.h_ut).powi(2));
    let los = if s.d2d <= bp { pl1 } else { pl2 };
    if s.los {
        return los;
    }
    let nlos = 35.3 * lg(d3) + 22.4 + 21.3 * lg(s.fc) - 0.3 * (s.h_ut - 1.5);
    nlos.max(los)
}

pub fn inh(d3: f64, fc: f64, los: bool) -> f64 {
    let l = 32.4 + 17.3 * lg(d3) + 20.0 * lg(fc);
    if los {
        return l;
    }
    (38.3 * lg(d3) + 17.3 + 24.9 * lg(fc)).max(l)
}

/// Random outdoor geometries: log-uniform distance, UT heights skewed
/// towards street level (short breakpoints), random carrier and LOS state.
pub fn outdoor_samples(seed: u64, n: usize, h_bs: f64, d_max: f64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Sample {
            d2d: 10f64.powf(rng.random_range(1.0..d_max.log10())),
            h_bs,
            h_ut: (1.5 + 21.0 * rng.random_range(0.0..1.0f64).powi(3)).min(h_bs - 0.5),
            fc: rng.random_range(0.5..6.0),
            los: rng.random_bool(0.5),
        })
        .collect()
}

/// Random indoor hotspot geometries with a 1.5 m receiver.
pub fn indoor_samples(seed: u64, n: usize) -> Vec<(LinkGeometry, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let d2d = rng.random_range(1.0..150.0);
            let fc = rng.random_range(0.5..6.0);
            let los = if rng.random_bool(0.5) { LosState::Los } else { LosState::Nlos };
            let g = LinkGeometry::outdoor(LinkClass::FactoryInternal, d2d, rng.random_range(3.0..10.0), 1.5, los);
            (g, fc)
        })
        .collect()
}
