use coexsim::antenna::{beam_gain, element_gain_towards, AntennaRef, UnitVector};
use coexsim::layout::NodeId;
use coexsim::mcs::{build_mcs_table, McsTableConfig};
use coexsim::propagation::{wall_loss, WallSpec};
use coexsim::radio_link::{
    interference_states, select_mcs, ul_tx_power, urllc_reliability, victim_sinr, InterferenceState, InterferenceTerm,
    PcLaw, PowerControlConfig,
};
use coexsim::tdd::{overlap_profile, Direction, InterferenceMode, TddPattern};
use num_rational::Ratio;
use proptest::prelude::*;

fn term(power_dbm: f64, activity: f64) -> InterferenceTerm {
    InterferenceTerm {
        aggressor: NodeId(7),
        mode: InterferenceMode::UeToBs,
        overlap: 1.0,
        attenuation_db: 0.0,
        power_dbm,
        activity,
    }
}

fn arb_terms(max: usize) -> impl Strategy<Value = Vec<InterferenceTerm>> {
    prop::collection::vec((-130.0..-60.0f64, 0.0..1.0f64), 0..max)
        .prop_map(|v| v.into_iter().map(|(p, a)| term(p, a)).collect())
}

fn arb_pattern() -> impl Strategy<Value = TddPattern> {
    (1usize..5).prop_flat_map(|slots| prop::collection::vec(any::<bool>(), slots * 14)).prop_map(|bits| {
        let s = bits.into_iter().map(|b| if b { Direction::Downlink } else { Direction::Uplink }).collect();
        TddPattern::new(s, 30).unwrap()
    })
}

fn arb_direction() -> impl Strategy<Value = UnitVector> {
    (-3.1..3.1f64, -1.2..0.3f64).prop_map(|(az, el)| UnitVector::from_angles(az, el))
}

proptest! {
    #[test]
    fn array_factor_peaks_at_the_served_direction(
        bore in 0.0..360.0f64,
        tilt in 0.0..15.0f64,
        served in arb_direction(),
        other in arb_direction(),
    ) {
        let a = AntennaRef::macro_array(bore, tilt);
        let at = |e: UnitVector| beam_gain(&a, served, e).unwrap() - element_gain_towards(&a, e);
        let peak = at(served);
        prop_assert!((peak - 10.0 * 64f64.log10()).abs() < 1e-9);
        prop_assert!(at(other) <= peak + 1e-9);
    }

    #[test]
    fn power_control_monotone_and_capped(
        alpha in 0.0..=1.0f64,
        target in -5.0..25.0f64,
        pl in 60.0..160.0f64,
        dpl in 0.0..20.0f64,
        scaled in any::<bool>(),
    ) {
        let pc = PowerControlConfig {
            alpha,
            target_snr_db: target,
            max_ue_power_dbm: 23.0,
            law: if scaled { PcLaw::ScaledTarget } else { PcLaw::NoiseOffset },
        };
        let p0 = ul_tx_power(pl, &pc, -92.0);
        let p1 = ul_tx_power(pl + dpl, &pc, -92.0);
        prop_assert!(p0 <= 23.0 && p1 <= 23.0);
        prop_assert!(p1 >= p0);
        // Lipschitz with constant alpha, so no jump at the cap
        prop_assert!(p1 - p0 <= alpha * dpl + 1e-9);
    }

    #[test]
    fn removing_an_interferer_never_lowers_sinr(terms in arb_terms(8), drop_at in 0usize..8, on in any::<bool>()) {
        prop_assume!(!terms.is_empty());
        let idx = drop_at % terms.len();
        let state = InterferenceState { explicit: vec![(idx, on)] };
        let full = victim_sinr(-75.0, -92.0, &terms, &state).unwrap();
        let mut fewer = terms.clone();
        fewer.remove(idx);
        let less = victim_sinr(-75.0, -92.0, &fewer, &InterferenceState::default()).unwrap();
        prop_assert!(less.sinr_db >= full.sinr_db - 1e-9);
        prop_assert!((full.recompute_db() - full.sinr_db).abs() < 1e-9);
    }

    #[test]
    fn state_mixture_is_a_distribution(terms in arb_terms(9), k in 0usize..6) {
        let s = interference_states(-80.0, -92.0, &terms, k);
        let total: f64 = s.iter().map(|x| x.0).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(s.iter().all(|&(p, sinr)| p > 0.0 && sinr.is_finite()));
    }

    #[test]
    fn adding_an_aggressor_never_improves_reliability(
        terms in arb_terms(4),
        extra_power in -120.0..-70.0f64,
        extra_activity in 0.0..=1.0f64,
        signal in -95.0..-60.0f64,
    ) {
        let table = mcs_table();
        let mut more = terms.clone();
        more.push(term(extra_power, extra_activity));
        // exhaustive enumeration, so every state is matched by a pair of
        // states with at least as much interference
        let base = interference_states(signal, -92.0, &terms, 8);
        let worse = interference_states(signal, -92.0, &more, 8);
        for m in table {
            prop_assert!(urllc_reliability(&worse, m) >= urllc_reliability(&base, m) - 1e-12);
        }
        let (_, f_base) = select_mcs(&base, table, 1e-5);
        let (_, f_worse) = select_mcs(&worse, table, 1e-5);
        if f_base > 1e-5 {
            prop_assert!(f_worse > 1e-5);
        }
    }

    #[test]
    fn reliability_improves_with_signal(terms in arb_terms(4), signal in -100.0..-60.0f64, gain in 0.0..10.0f64) {
        let table = mcs_table();
        let lo = interference_states(signal, -92.0, &terms, 8);
        let hi = interference_states(signal + gain, -92.0, &terms, 8);
        for m in table {
            prop_assert!(urllc_reliability(&hi, m) <= urllc_reliability(&lo, m) + 1e-12);
        }
    }

    #[test]
    fn overlap_fractions_partition_the_victim(a in arb_pattern(), v in arb_pattern()) {
        let p = overlap_profile(&a, &v).unwrap();
        let zero = Ratio::from_integer(0);
        let one = Ratio::from_integer(1);
        for vd in Direction::BOTH {
            let sum = p.fraction(Direction::Downlink, vd) + p.fraction(Direction::Uplink, vd);
            let has = v.symbols().contains(&vd);
            prop_assert_eq!(sum, if has { one } else { zero });
            for ad in Direction::BOTH {
                prop_assert!(p.fraction(ad, vd) >= zero && p.fraction(ad, vd) <= one);
            }
        }
        let own = overlap_profile(&v, &v).unwrap();
        prop_assert_eq!(own.fraction(Direction::Uplink, Direction::Downlink), zero);
        prop_assert_eq!(own.fraction(Direction::Downlink, Direction::Uplink), zero);
    }

    #[test]
    fn wall_loss_is_monotone(l in 0.0..60.0f64, dl in 0.0..20.0f64, a in 0.0..1.5707f64, da in 0.0..1.0f64) {
        let w = WallSpec { perpendicular_loss_db: l, ..Default::default() };
        let thicker = WallSpec { perpendicular_loss_db: l + dl, ..w };
        prop_assert!(wall_loss(&thicker, a) >= wall_loss(&w, a));
        let steeper = (a + da).min(std::f64::consts::FRAC_PI_2);
        prop_assert!(wall_loss(&w, steeper) <= wall_loss(&w, a) + 1e-12);
        prop_assert!(wall_loss(&w, a) <= l + w.grazing_coefficient_db + 1e-12);
        prop_assert!((wall_loss(&w, std::f64::consts::FRAC_PI_2) - l).abs() < 1e-12);
    }
}

fn mcs_table() -> &'static [coexsim::mcs::McsEntry] {
    static T: std::sync::OnceLock<Vec<coexsim::mcs::McsEntry>> = std::sync::OnceLock::new();
    T.get_or_init(|| build_mcs_table(&McsTableConfig::default()).unwrap())
}
