use std::collections::VecDeque;

use super::{argmax_by, AssociationMap, AssociationParams, AssociationStats, Connectivity};
use crate::channel::RsrpMatrix;
use crate::error::{Error, Result};

/// Proposer-optimal stable matching (Gale-Shapley, proposers in id order).
///
/// `proposer_prefs[p]` lists acceptable receivers, most preferred first.
/// `receiver_rank[r][p]` is receiver `r`'s rank of proposer `p`, lower is
/// better, and must be a strict order. Returns each proposer's receiver, or
/// `None` if it exhausted its list.
pub fn gale_shapley(proposer_prefs: &[Vec<usize>], receiver_rank: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut next = vec![0usize; proposer_prefs.len()];
    let mut holder: Vec<Option<usize>> = vec![None; receiver_rank.len()];
    let mut matched: Vec<Option<usize>> = vec![None; proposer_prefs.len()];
    let mut free: VecDeque<usize> = (0..proposer_prefs.len()).collect();

    while let Some(p) = free.pop_front() {
        let Some(&r) = proposer_prefs[p].get(next[p]) else {
            continue;
        };
        next[p] += 1;
        match holder[r] {
            None => {
                holder[r] = Some(p);
                matched[p] = Some(r);
            }
            Some(q) if receiver_rank[r][p] < receiver_rank[r][q] => {
                holder[r] = Some(p);
                matched[p] = Some(r);
                matched[q] = None;
                free.push_back(q);
            }
            Some(_) => free.push_back(p),
        }
    }
    matched
}

/// Seats per BS: ceil(M / N) + c.
pub fn seats_per_bs(num_mts: usize, num_bs: usize, c: usize) -> usize {
    num_mts.div_ceil(num_bs) + c
}

fn bs_order_for_mt(rsrp: &RsrpMatrix, u: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rsrp.num_bs()).collect();
    order.sort_by(|&a, &b| rsrp.get(b, u).total_cmp(&rsrp.get(a, u)).then(a.cmp(&b)));
    order
}

fn mt_order_for_bs(rsrp: &RsrpMatrix, b: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rsrp.num_mts()).collect();
    order.sort_by(|&x, &y| rsrp.get(b, y).total_cmp(&rsrp.get(b, x)).then(x.cmp(&y)));
    order
}

fn rank_of(order: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; order.len()];
    for (i, &x) in order.iter().enumerate() {
        rank[x] = i;
    }
    rank
}

/// Seat-level preferences for one Gale-Shapley round.
pub(crate) struct SeatInstance {
    pub seats: usize,
    pub mt_prefs: Vec<Vec<usize>>,
    pub seat_rank: Vec<Vec<usize>>,
}

impl SeatInstance {
    pub fn bs_of(&self, seat: usize) -> usize {
        seat / self.seats
    }
}

/// Replicates each BS into `q` seats. `bs_prefs[u]` is MT `u`'s BS list and
/// `mt_orders[b]` is BS `b`'s MT list, both most preferred first.
fn seat_instance(q: usize, bs_prefs: &[Vec<usize>], mt_orders: &[Vec<usize>]) -> SeatInstance {
    let mt_prefs = bs_prefs
        .iter()
        .map(|bss| bss.iter().flat_map(|&b| b * q..(b + 1) * q).collect())
        .collect();
    let bs_rank: Vec<Vec<usize>> = mt_orders.iter().map(|o| rank_of(o)).collect();
    let seat_rank = (0..mt_orders.len() * q).map(|s| bs_rank[s / q].clone()).collect();
    SeatInstance {
        seats: q,
        mt_prefs,
        seat_rank,
    }
}

pub(crate) fn first_round(rsrp: &RsrpMatrix, q: usize) -> SeatInstance {
    let bs_prefs: Vec<Vec<usize>> = (0..rsrp.num_mts()).map(|u| bs_order_for_mt(rsrp, u)).collect();
    let mt_orders: Vec<Vec<usize>> = (0..rsrp.num_bs()).map(|b| mt_order_for_bs(rsrp, b)).collect();
    seat_instance(q, &bs_prefs, &mt_orders)
}

pub(crate) fn second_round(rsrp: &RsrpMatrix, q: usize, first: &[usize]) -> SeatInstance {
    // A1 drops out of each MT's list entirely, which keeps A1 != A2.
    let bs_prefs: Vec<Vec<usize>> = (0..rsrp.num_mts())
        .map(|u| {
            bs_order_for_mt(rsrp, u)
                .into_iter()
                .filter(|&b| b != first[u])
                .collect()
        })
        .collect();
    // MTs already attached to a BS move to the back of its list.
    let mt_orders: Vec<Vec<usize>> = (0..rsrp.num_bs())
        .map(|b| {
            let (back, front): (Vec<usize>, Vec<usize>) =
                mt_order_for_bs(rsrp, b).into_iter().partition(|&u| first[u] == b);
            front.into_iter().chain(back).collect()
        })
        .collect();
    seat_instance(q, &bs_prefs, &mt_orders)
}

/// Dual association by two rounds of MT-proposing stable matching against
/// BSs replicated into `ceil(M/N) + sm_c` seats.
pub fn associate_sm(rsrp: &RsrpMatrix, params: &AssociationParams) -> Result<AssociationMap> {
    let n = rsrp.num_bs();
    let m = rsrp.num_mts();
    if n < 2 {
        return Err(Error::DualInfeasible { num_bs: n });
    }
    let q = seats_per_bs(m, n, params.sm_c);
    let mut stats = AssociationStats::default();

    let round1 = first_round(rsrp, q);
    let first: Vec<usize> = gale_shapley(&round1.mt_prefs, &round1.seat_rank)
        .into_iter()
        .map(|s| round1.bs_of(s.expect("q * N >= M seats for complete lists")))
        .collect();

    let round2 = second_round(rsrp, q, &first);
    let second = gale_shapley(&round2.mt_prefs, &round2.seat_rank);

    let mut serving = Vec::with_capacity(m);
    for u in 0..m {
        let a2 = match second[u] {
            Some(s) => round2.bs_of(s),
            None => {
                // every seat except A1's is taken by MTs the BSs prefer
                stats.fallback_mts.push(u);
                argmax_by(
                    (0..n).filter(|&b| b != first[u]),
                    |b| rsrp.get(b, u),
                    &mut stats.comparisons,
                )
                .expect("n >= 2")
            }
        };
        serving.push(vec![first[u], a2]);
    }
    let mut map = AssociationMap::new(Connectivity::Dual, n, serving);
    map.stats = stats;
    Ok(map)
}
