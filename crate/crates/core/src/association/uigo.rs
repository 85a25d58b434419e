use super::{argmax_by, AssociationMap, AssociationParams, AssociationStats, Connectivity};
use crate::channel::RsrpMatrix;
use crate::error::{Error, Result};
use crate::topology::Tier;

/// User-initiated greedy association with offloading to picos.
///
/// Each MT takes its strongest BS as A1. The runner-up becomes A2 unless it
/// is a macro and the strongest remaining pico is within `h1` dB of it, in
/// which case that pico is taken instead.
pub fn associate_uigo(rsrp: &RsrpMatrix, params: &AssociationParams) -> Result<AssociationMap> {
    let n = rsrp.num_bs();
    if n < 2 {
        return Err(Error::DualInfeasible { num_bs: n });
    }
    let mut stats = AssociationStats::default();
    let cmp = &mut stats.comparisons;

    let first: Vec<usize> = (0..rsrp.num_mts())
        .map(|u| argmax_by(0..n, |b| rsrp.get(b, u), cmp).expect("n >= 2"))
        .collect();

    let mut serving = Vec::with_capacity(first.len());
    for (u, &a1) in first.iter().enumerate() {
        let c = argmax_by((0..n).filter(|&b| b != a1), |b| rsrp.get(b, u), cmp)
            .expect("n >= 2");
        let mut a2 = c;
        if rsrp.tier(c) == Tier::Macro {
            let picos = (0..n).filter(|&b| b != a1 && rsrp.tier(b) == Tier::Pico);
            if let Some(d) = argmax_by(picos, |b| rsrp.get(b, u), cmp) {
                *cmp += 1;
                if rsrp.get(c, u) - rsrp.get(d, u) < params.h1 {
                    a2 = d;
                }
            }
        }
        serving.push(vec![a1, a2]);
    }

    let mut map = AssociationMap::new(Connectivity::Dual, n, serving);
    map.stats = stats;
    Ok(map)
}
