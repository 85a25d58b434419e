use proptest::prelude::*;

use pfdc_sim::association::{
    associate_bigu, associate_uigo, AssociationMap, AssociationParams, Connectivity,
};
use pfdc_sim::channel::{RsrpMatrix, StaticRates};
use pfdc_sim::engine::simulate;
use pfdc_sim::scheduling::{
    select_mt_gpf, select_mt_pfdc, select_mt_standard, update_avg, Candidate, Procedure, Scheduler,
    SchedulerParams,
};
use pfdc_sim::topology::Tier;

fn candidates() -> impl Strategy<Value = Vec<Candidate>> {
    prop::collection::vec((1.0f64..1e4, 0.1f64..1e4, 0.1f64..1e4), 1..12).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(mt, (rate, local_avg, partner_avg))| Candidate { mt, rate, local_avg, partner_avg })
            .collect()
    })
}

/// Random RSRP matrix with `macros` macro BSs first, then picos.
fn rsrp_matrix() -> impl Strategy<Value = RsrpMatrix> {
    (1usize..3, 1usize..5, 1usize..9).prop_flat_map(|(macros, picos, m)| {
        let n = macros + picos;
        prop::collection::vec(prop::collection::vec(-120.0f64..-50.0, m), n).prop_map(move |rows| {
            let tiers = (0..n).map(|b| if b < macros { Tier::Macro } else { Tier::Pico }).collect();
            RsrpMatrix::from_rows(rows, tiers)
        })
    })
}

fn assert_two_distinct(map: &AssociationMap) -> Result<(), TestCaseError> {
    for u in 0..map.num_mts() {
        let s = map.serving(u);
        prop_assert_eq!(s.len(), 2);
        prop_assert_ne!(s[0], s[1]);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // scaling every rate by the same factor leaves every decision unchanged
    #[test]
    fn argmax_is_scale_invariant(cands in candidates(), k in 0.01f64..100.0) {
        let scaled: Vec<Candidate> = cands.iter().map(|c| Candidate { rate: c.rate * k, ..*c }).collect();
        let mut n = 0;
        prop_assert_eq!(select_mt_standard(&cands, &mut n), select_mt_standard(&scaled, &mut n));
        prop_assert_eq!(select_mt_pfdc(&cands, &mut n), select_mt_pfdc(&scaled, &mut n));
        prop_assert_eq!(select_mt_gpf(&cands, &mut n), select_mt_gpf(&scaled, &mut n));
        prop_assert_eq!(n as usize, 6 * (cands.len() - 1));
    }

    #[test]
    fn average_stays_between_old_value_and_rate(
        avg in 0.0f64..1e5, rate in 0.0f64..1e5, gamma in 0.0f64..=1.0, scheduled: bool,
    ) {
        let next = update_avg(avg, rate, scheduled, gamma);
        let target = if scheduled { rate } else { 0.0 };
        let (lo, hi) = if avg < target { (avg, target) } else { (target, avg) };
        prop_assert!(next >= lo * (1.0 - 1e-12) && next <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn uigo_and_bigu_give_two_distinct_bss(rsrp in rsrp_matrix()) {
        let params = AssociationParams::default();
        match associate_uigo(&rsrp, &params) {
            Ok(map) => assert_two_distinct(&map)?,
            Err(_) => prop_assert!(rsrp.num_bs() < 2),
        }
        assert_two_distinct(&associate_bigu(&rsrp, &params).unwrap())?;
    }

    // a macro secondary means no spare pico was within H1 of it
    #[test]
    fn uigo_prefers_a_pico_within_h1(rsrp in rsrp_matrix()) {
        let params = AssociationParams::default();
        let map = associate_uigo(&rsrp, &params).unwrap();
        for u in 0..map.num_mts() {
            let (a1, a2) = (map.serving(u)[0], map.serving(u)[1]);
            if rsrp.tier(a2) == Tier::Macro {
                let pico_in_range = (0..rsrp.num_bs())
                    .filter(|&b| b != a1 && rsrp.tier(b) == Tier::Pico)
                    .any(|b| rsrp.get(a2, u) - rsrp.get(b, u) < params.h1);
                prop_assert!(!pico_in_range, "MT {} took macro {} over a pico in range", u, a2);
            }
        }
    }

    // with static rates the per-link average tracks the delivered share
    #[test]
    fn average_matches_empirical_throughput(rates in prop::collection::vec(500.0f64..5000.0, 1..5)) {
        let m = rates.len();
        let assoc = AssociationMap::new(Connectivity::Single, 1, vec![vec![0]; m]);
        let params = SchedulerParams::default();
        let mut sched = Scheduler::new(&assoc, Procedure::Scp, &params).unwrap();
        let mut delivered = vec![0.0; m];
        let mut chosen = vec![None; 1];
        let slots = 20_000;
        for _ in 0..slots {
            sched.step(&rates, &mut chosen);
            if let Some(i) = chosen[0] {
                delivered[sched.links()[i].mt] += rates[i];
            }
        }
        for (i, link) in sched.links().iter().enumerate() {
            let empirical = delivered[link.mt] / slots as f64;
            let rel = (sched.avg()[i] - empirical).abs() / empirical;
            prop_assert!(rel < 0.05, "MT {}: avg {} vs empirical {}", link.mt, sched.avg()[i], empirical);
        }
    }
}

#[test]
fn dcp_without_sync_behaves_like_dcsp() {
    let (n, m) = (4usize, 10usize);
    let rates: Vec<Vec<f64>> = (0..n)
        .map(|b| (0..m).map(|u| 800.0 + ((b * 37 + u * 11) % 23) as f64 * 150.0).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..m).map(|u| (u % n, (u + 1) % n)).collect();
    let assoc = AssociationMap::dual(n, &pairs);
    let off = SchedulerParams { sync_period: 0, ..SchedulerParams::default() };
    let slots = 5000;
    let dcp = simulate(&assoc, Procedure::Dcp, &off, &mut StaticRates::new(rates.clone()), slots).unwrap();
    let dcsp = simulate(&assoc, Procedure::Dcsp, &off, &mut StaticRates::new(rates), slots).unwrap();
    assert_eq!(dcp.counters.sync_events, 0);
    assert_eq!(dcp.counters.messages, 0);
    for u in 0..m {
        let (a, b) = (dcp.delivered_bits[u], dcsp.delivered_bits[u]);
        assert!((a - b).abs() / b < 0.02, "MT {u}: {a} vs {b}");
    }
}
