// shared with the acceptance suite
#[path = "../../validation/src/pathloss.rs"]
mod oracle;

use coexsim::propagation::{inh_pathloss, pathloss, uma_pathloss, umi_pathloss, LinkClass, LinkGeometry, LosState};
use oracle::{breakpoint, indoor_samples, outdoor_samples, Sample};

const TOL_DB: f64 = 0.01;
const CASES: usize = 100;

#[test]
fn uma_matches_hand_formula() {
    let mut beyond_bp = 0;
    for s in &outdoor_samples(1, CASES, 25.0, 5000.0) {
        let got = uma_pathloss(&s.geometry(LinkClass::MacroToOutdoor), s.fc).unwrap();
        let want = oracle::uma(s);
        assert!((got - want).abs() <= TOL_DB, "{s:?}: {got} vs {want}");
        beyond_bp += usize::from(s.d2d > breakpoint(s.h_bs, s.h_ut, s.fc));
    }
    assert!(beyond_bp > 5 && beyond_bp < CASES - 5, "{beyond_bp}");
}

#[test]
fn umi_matches_hand_formula() {
    for s in &outdoor_samples(2, CASES, 10.0, 5000.0) {
        let got = umi_pathloss(&s.geometry(LinkClass::OutdoorUeToUe), s.fc).unwrap();
        let want = oracle::umi(s);
        assert!((got - want).abs() <= TOL_DB, "{s:?}: {got} vs {want}");
    }
}

#[test]
fn inh_matches_hand_formula() {
    for (g, fc) in indoor_samples(3, CASES) {
        let got = inh_pathloss(&g, fc).unwrap();
        let want = oracle::inh(g.d3d, fc, g.los == LosState::Los);
        assert!((got - want).abs() <= TOL_DB, "d3d {} fc {fc}: {got} vs {want}", g.d3d);
    }
}

#[test]
fn dispatch_follows_link_class() {
    let s = Sample { d2d: 300.0, h_bs: 25.0, h_ut: 1.5, fc: 4.0, los: false };
    let uma = pathloss(&s.geometry(LinkClass::MacroToFactoryIndoor), 4.0).unwrap();
    assert!((uma - oracle::uma(&s)).abs() <= TOL_DB);
    let umi = pathloss(&s.geometry(LinkClass::FactoryToOutdoor), 4.0).unwrap();
    assert!((umi - oracle::umi(&s)).abs() <= TOL_DB);
    let g = s.geometry(LinkClass::FactoryInternal);
    let inh = pathloss(&g, 4.0).unwrap();
    assert!((inh - oracle::inh(g.d3d, 4.0, false)).abs() <= TOL_DB);
}

#[test]
fn worked_points() {
    let s = Sample { d2d: 200.0, h_bs: 25.0, h_ut: 1.5, fc: 4.0, los: true };
    let pl = uma_pathloss(&s.geometry(LinkClass::MacroToOutdoor), 4.0).unwrap();
    assert!((pl - 90.7).abs() < 0.05, "{pl}");
    let g =
        LinkGeometry { d3d: 10.0, ..LinkGeometry::outdoor(LinkClass::FactoryInternal, 10.0, 1.5, 1.5, LosState::Los) };
    assert!((inh_pathloss(&g, 4.0).unwrap() - 61.7).abs() < 0.05);
    let g = LinkGeometry { d3d: 1.0, ..g };
    assert!((inh_pathloss(&g, 4.0).unwrap() - 44.4).abs() < 0.05);
}

#[test]
fn short_distances_clamp() {
    let near = LinkGeometry::outdoor(LinkClass::MacroToOutdoor, 2.0, 25.0, 1.5, LosState::Los);
    let at10 = LinkGeometry { d2d: 10.0, ..near };
    // d3d is already above 10 m here, so only the d2d clamp matters
    assert_eq!(uma_pathloss(&near, 4.0).unwrap(), uma_pathloss(&at10, 4.0).unwrap());
}
