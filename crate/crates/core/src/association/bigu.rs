use super::{argmax_by, AssociationMap, AssociationParams, AssociationStats, Connectivity};
use crate::channel::RsrpMatrix;
use crate::error::{Error, Result};

/// BS-initiated greedy association with user feedback.
///
/// BSs take turns in id order. Each proposes to the unsaturated MT it hears
/// best; the MT accepts when the proposer is within `h2` dB of the best BS it
/// can still take. An accepted link is struck from the working matrix so the
/// same pair cannot form twice. Runs until every MT holds two BSs or the
/// round cap is hit, after which leftovers get their strongest remaining BSs
/// and are listed in `stats.fallback_mts`.
pub fn associate_bigu(rsrp: &RsrpMatrix, params: &AssociationParams) -> Result<AssociationMap> {
    let n = rsrp.num_bs();
    let m = rsrp.num_mts();
    if n < 2 {
        return Err(Error::DualInfeasible { num_bs: n });
    }
    let max_rounds = params.bigu_max_rounds.unwrap_or(10 * m);
    let mut work = rsrp.clone();
    let mut remaining = vec![2u8; m];
    let mut serving: Vec<Vec<usize>> = vec![Vec::with_capacity(2); m];
    let mut stats = AssociationStats::default();
    let mut unsaturated = m;

    while unsaturated > 0 && stats.rounds < max_rounds {
        stats.rounds += 1;
        for b in 0..n {
            let eligible = (0..m).filter(|&u| remaining[u] > 0 && work.get(b, u).is_finite());
            let Some(u) = argmax_by(eligible, |u| work.get(b, u), &mut stats.comparisons) else {
                continue;
            };
            let c = argmax_by(0..n, |c| work.get(c, u), &mut stats.comparisons)
                .expect("n >= 2");
            if work.get(c, u) - work.get(b, u) < params.h2 {
                remaining[u] -= 1;
                serving[u].push(b);
                work.set(b, u, f64::NEG_INFINITY);
                if remaining[u] == 0 {
                    unsaturated -= 1;
                }
            }
        }
    }

    for u in 0..m {
        while serving[u].len() < 2 {
            if !stats.fallback_mts.contains(&u) {
                stats.fallback_mts.push(u);
            }
            let b = argmax_by(
                (0..n).filter(|b| !serving[u].contains(b)),
                |b| rsrp.get(b, u),
                &mut stats.comparisons,
            )
            .expect("n >= 2");
            serving[u].push(b);
        }
    }

    let mut map = AssociationMap::new(Connectivity::Dual, n, serving);
    map.stats = stats;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::super::test_util::matrix;
    use super::*;

    #[test]
    fn two_by_two_trace() {
        // b1 = (u1 -70, u2 -80), b2 = (u1 -72, u2 -75), H2 = 5
        let m = matrix(&[&[-70.0, -80.0], &[-72.0, -75.0]], 2);
        let p = AssociationParams {
            h2: 5.0,
            ..AssociationParams::default()
        };
        let map = associate_bigu(&m, &p).unwrap();
        assert_eq!(map.serving(0), &[0, 1]);
        assert_eq!(map.serving(1), &[1, 0]);
        assert_eq!(map.stats.rounds, 3);
        assert!(map.stats.fallback_mts.is_empty());
    }

    #[test]
    fn infinite_threshold_accepts_in_proposal_order() {
        // every BS hears u0 best, so u0 takes BSs 0 and 1, then u1 takes 2 and 0
        let m = matrix(&[&[-60.0, -70.0], &[-61.0, -90.0], &[-62.0, -65.0]], 1);
        let p = AssociationParams {
            h2: f64::INFINITY,
            ..AssociationParams::default()
        };
        let map = associate_bigu(&m, &p).unwrap();
        assert_eq!(map.serving(0), &[0, 1]);
        assert_eq!(map.serving(1), &[2, 0]);
        assert_eq!(map.stats.rounds, 2);
    }

    #[test]
    fn single_bs_infeasible() {
        let m = matrix(&[&[-70.0]], 1);
        assert!(matches!(
            associate_bigu(&m, &AssociationParams::default()),
            Err(Error::DualInfeasible { num_bs: 1 })
        ));
    }

    #[test]
    fn round_cap_falls_back_to_distinct_bss() {
        let m = matrix(&[&[-70.0, -80.0], &[-72.0, -75.0], &[-100.0, -101.0]], 2);
        let p = AssociationParams {
            h2: 0.0,
            bigu_max_rounds: Some(1),
            ..AssociationParams::default()
        };
        let map = associate_bigu(&m, &p).unwrap();
        assert!(map.validate().is_ok());
        assert!(!map.stats.fallback_mts.is_empty());
    }
}
