//! Per-BS proportional-fair scheduling.
//!
//! Four procedures share one scheduler:
//!
//! | procedure | association | metric denominator                         |
//! |-----------|-------------|--------------------------------------------|
//! | SCP       | best RSRP   | local average                              |
//! | DCSP      | dual        | local average                              |
//! | DCP       | dual        | local average + partner snapshot (SRC)     |
//! | ACP       | all         | local average + sum over every other BS    |
//!
//! The partner snapshot is refreshed every `sync_period` slots for DCP and
//! every `gpf_sync_period` slots (default 1, i.e. exact sums) for ACP.
//!
//! Operation counting follows the complexity accounting used to compare DCP
//! against GPF:
//! - one comparison per candidate beyond the first in each per-BS argmax;
//! - one addition per candidate for `local + partner` (partner-sum metrics
//!   only), plus `|A(u)| - 1` additions per MT at each sync to form its total;
//! - three multiplications per tracked link per slot: the metric division
//!   and the two products `(1 - gamma) * avg` and `gamma * rate`;
//! - messages per sync: `2 |A(u)|` per MT through the central controller
//!   (reports in, totals out) for DCP, `|A(u)| (|A(u)| - 1)` per MT for the
//!   pairwise BS exchange of GPF.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::association::{AssociationMap, Connectivity, Link};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Procedure {
    Scp,
    Dcsp,
    Dcp,
    Acp,
}

impl Procedure {
    pub const ALL: [Procedure; 4] = [Procedure::Scp, Procedure::Dcsp, Procedure::Dcp, Procedure::Acp];

    pub fn name(self) -> &'static str {
        match self {
            Procedure::Scp => "scp",
            Procedure::Dcsp => "dcsp",
            Procedure::Dcp => "dcp",
            Procedure::Acp => "acp",
        }
    }

    pub fn connectivity(self) -> Connectivity {
        match self {
            Procedure::Scp => Connectivity::Single,
            Procedure::Dcsp | Procedure::Dcp => Connectivity::Dual,
            Procedure::Acp => Connectivity::All,
        }
    }

    /// Whether the metric denominator includes the other serving BSs.
    pub fn uses_partner_sum(self) -> bool {
        matches!(self, Procedure::Dcp | Procedure::Acp)
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scp" => Ok(Procedure::Scp),
            "dcsp" => Ok(Procedure::Dcsp),
            "dcp" => Ok(Procedure::Dcp),
            "acp" => Ok(Procedure::Acp),
            other => Err(Error::Config(format!(
                "unknown procedure '{other}' (expected scp, dcsp, dcp, acp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerParams {
    /// Moving-average weight, in (0, 1).
    pub gamma: f64,
    /// DCP controller exchange period in slots; 0 disables the exchange.
    pub sync_period: u64,
    /// ACP exchange period in slots; 1 gives exact global sums.
    pub gpf_sync_period: u64,
    /// Initial average throughput for every tracked link, bits/slot.
    pub epsilon_init: f64,
}

impl Default for SchedulerParams {
    fn default() -> Self {
        Self {
            gamma: 0.01,
            sync_period: 25,
            gpf_sync_period: 1,
            epsilon_init: 1.0,
        }
    }
}

impl SchedulerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma must be in (0, 1), got {}", self.gamma)));
        }
        if !(self.epsilon_init > 0.0) {
            return Err(Error::Config("epsilon_init must be positive".into()));
        }
        if self.gpf_sync_period == 0 {
            return Err(Error::Config("gpf_sync_period must be at least 1".into()));
        }
        Ok(())
    }
}

/// One MT competing for a BS in the current slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub mt: usize,
    pub rate: f64,
    /// This BS's moving average for the MT.
    pub local_avg: f64,
    /// Averages of the MT's other serving BSs as last known here.
    pub partner_avg: f64,
}

pub fn pf_metric_standard(rate: f64, avg: f64) -> f64 {
    debug_assert!(avg > 0.0, "average throughput must stay positive");
    rate / avg
}

fn argmax<F: Fn(&Candidate) -> f64>(cands: &[Candidate], metric: F, comparisons: &mut u64) -> Option<usize> {
    let (first, rest) = cands.split_first()?;
    let mut best = (first.mt, metric(first));
    for c in rest {
        *comparisons += 1;
        let v = metric(c);
        if v > best.1 || (v == best.1 && c.mt < best.0) {
            best = (c.mt, v);
        }
    }
    Some(best.0)
}

/// Standard PF: maximizes rate over the local average.
pub fn select_mt_standard(cands: &[Candidate], comparisons: &mut u64) -> Option<usize> {
    argmax(cands, |c| pf_metric_standard(c.rate, c.local_avg), comparisons)
}

/// PF-DC: rate over the MT's total average across its two serving BSs.
pub fn select_mt_pfdc(cands: &[Candidate], comparisons: &mut u64) -> Option<usize> {
    argmax(cands, |c| c.rate / (c.local_avg + c.partner_avg), comparisons)
}

/// Global PF: rate over the MT's average summed over every BS. With all
/// other BSs folded into `partner_avg` this is the same ratio as PF-DC.
pub fn select_mt_gpf(cands: &[Candidate], comparisons: &mut u64) -> Option<usize> {
    argmax(cands, |c| c.rate / (c.local_avg + c.partner_avg), comparisons)
}

/// Exponentially weighted update of one link's average.
pub fn update_avg(avg: f64, rate: f64, scheduled: bool, gamma: f64) -> f64 {
    if scheduled {
        (1.0 - gamma) * avg + gamma * rate
    } else {
        (1.0 - gamma) * avg
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ComplexityCounters {
    pub comparisons: u64,
    pub additions: u64,
    pub multiplications: u64,
    pub messages: u64,
    pub slots: u64,
    pub sync_events: u64,
}

impl ComplexityCounters {
    fn per_slot(&self, total: u64) -> Ratio<u64> {
        Ratio::new(total, self.slots.max(1))
    }

    pub fn comparisons_per_slot(&self) -> Ratio<u64> {
        self.per_slot(self.comparisons)
    }

    pub fn additions_per_slot(&self) -> Ratio<u64> {
        self.per_slot(self.additions)
    }

    pub fn multiplications_per_slot(&self) -> Ratio<u64> {
        self.per_slot(self.multiplications)
    }

    pub fn messages_per_slot(&self) -> Ratio<u64> {
        self.per_slot(self.messages)
    }

    pub fn per_slot_counts(&self) -> OperationCounts {
        OperationCounts {
            comparisons: self.comparisons_per_slot(),
            additions: self.additions_per_slot(),
            multiplications: self.multiplications_per_slot(),
            messages: self.messages_per_slot(),
        }
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// Per-slot operation counts as exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperationCounts {
    pub comparisons: Ratio<u64>,
    pub additions: Ratio<u64>,
    pub multiplications: Ratio<u64>,
    pub messages: Ratio<u64>,
}

/// Closed-form per-slot counts for `m` MTs, `n` BSs and exchange period `t`,
/// assuming every BS serves at least one MT. `t` is the DCP period for DCP
/// and the GPF exchange period for ACP; it is ignored otherwise.
///
/// - DCP: `2M - N` comparisons, `2M + M/T` additions, `6M` multiplications, `4M/T` messages.
/// - ACP: `N(M - 1)` comparisons, `NM + (N - 1)M/T` additions, `3NM` multiplications, `MN(N - 1)/T` messages.
pub fn count_operations(procedure: Procedure, m: u64, n: u64, t: u64) -> OperationCounts {
    let zero = Ratio::from_integer(0);
    let int = Ratio::from_integer;
    match procedure {
        Procedure::Scp => OperationCounts {
            comparisons: int(m - n),
            additions: zero,
            multiplications: int(3 * m),
            messages: zero,
        },
        Procedure::Dcsp => OperationCounts {
            comparisons: int(2 * m - n),
            additions: zero,
            multiplications: int(6 * m),
            messages: zero,
        },
        Procedure::Dcp => OperationCounts {
            comparisons: int(2 * m - n),
            additions: int(2 * m) + Ratio::new(m, t),
            multiplications: int(6 * m),
            messages: Ratio::new(4 * m, t),
        },
        Procedure::Acp => OperationCounts {
            comparisons: int(n * (m - 1)),
            additions: int(n * m) + Ratio::new((n - 1) * m, t),
            multiplications: int(3 * n * m),
            messages: Ratio::new(m * n * (n - 1), t),
        },
    }
}

/// How per-MT totals are exchanged at a sync.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exchange {
    None,
    /// Serving BSs report to the controller, which returns totals.
    Controller,
    /// Every serving BS sends its average to every other serving BS.
    Pairwise,
}

/// Scheduler state for one run: per-link averages and partner snapshots.
#[derive(Debug, Clone)]
pub struct Scheduler {
    procedure: Procedure,
    gamma: f64,
    period: u64,
    exchange: Exchange,
    num_bs: usize,
    links: Vec<Link>,
    bs_links: Vec<Range<usize>>,
    mt_links: Vec<Vec<usize>>,
    avg: Vec<f64>,
    partner: Vec<f64>,
    counters: ComplexityCounters,
    slot: u64,
    cands: Vec<Candidate>,
}

impl Scheduler {
    pub fn new(assoc: &AssociationMap, procedure: Procedure, params: &SchedulerParams) -> Result<Self> {
        params.validate()?;
        let links = assoc.links();
        let num_bs = assoc.num_bs;
        let mut bs_links = vec![0..0; num_bs];
        let mut start = 0;
        for (b, range) in bs_links.iter_mut().enumerate() {
            let end = start + links[start..].iter().take_while(|l| l.bs == b).count();
            *range = start..end;
            start = end;
        }
        let mut mt_links = vec![Vec::new(); assoc.num_mts()];
        for (i, l) in links.iter().enumerate() {
            mt_links[l.mt].push(i);
        }
        let (exchange, period) = match procedure {
            Procedure::Dcp if params.sync_period > 0 => (Exchange::Controller, params.sync_period),
            Procedure::Acp => (Exchange::Pairwise, params.gpf_sync_period),
            _ => (Exchange::None, 0),
        };
        let mut s = Self {
            procedure,
            gamma: params.gamma,
            period,
            exchange,
            num_bs,
            avg: vec![params.epsilon_init; links.len()],
            partner: vec![0.0; links.len()],
            links,
            bs_links,
            mt_links,
            counters: ComplexityCounters::default(),
            slot: 0,
            cands: Vec::new(),
        };
        if procedure.uses_partner_sum() {
            s.refresh_partners();
        }
        Ok(s)
    }

    pub fn procedure(&self) -> Procedure {
        self.procedure
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn num_bs(&self) -> usize {
        self.num_bs
    }

    pub fn avg(&self) -> &[f64] {
        &self.avg
    }

    pub fn partner_avg(&self) -> &[f64] {
        &self.partner
    }

    pub fn counters(&self) -> &ComplexityCounters {
        &self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters.reset();
    }

    /// Slots completed so far.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// Picks at most one link per BS for this slot; `rates` is aligned with
    /// [`Scheduler::links`]. `chosen[b]` is the selected link index.
    pub fn select(&mut self, rates: &[f64], chosen: &mut [Option<usize>]) {
        let partner_sum = self.procedure.uses_partner_sum();
        for b in 0..self.num_bs {
            let range = self.bs_links[b].clone();
            self.cands.clear();
            self.cands.extend(range.clone().map(|i| Candidate {
                mt: self.links[i].mt,
                rate: rates[i],
                local_avg: self.avg[i],
                partner_avg: self.partner[i],
            }));
            let n = self.cands.len() as u64;
            self.counters.multiplications += n;
            let cmp = &mut self.counters.comparisons;
            let mt = match self.procedure {
                Procedure::Scp | Procedure::Dcsp => select_mt_standard(&self.cands, cmp),
                Procedure::Dcp => select_mt_pfdc(&self.cands, cmp),
                Procedure::Acp => select_mt_gpf(&self.cands, cmp),
            };
            if partner_sum {
                self.counters.additions += n;
            }
            chosen[b] = mt.map(|mt| {
                range
                    .clone()
                    .find(|&i| self.links[i].mt == mt)
                    .expect("selected MT is a candidate")
            });
        }
    }

    /// Applies the moving-average update to every tracked link, then runs the
    /// exchange if this slot closes a period.
    pub fn update(&mut self, rates: &[f64], chosen: &[Option<usize>]) {
        for (i, avg) in self.avg.iter_mut().enumerate() {
            let scheduled = chosen[self.links[i].bs] == Some(i);
            *avg = update_avg(*avg, rates[i], scheduled, self.gamma);
        }
        self.counters.multiplications += 2 * self.links.len() as u64;
        self.slot += 1;
        self.counters.slots += 1;
        if self.exchange != Exchange::None && self.slot % self.period == 0 {
            self.sync();
        }
    }

    /// One full slot: selection followed by the update.
    pub fn step(&mut self, rates: &[f64], chosen: &mut [Option<usize>]) {
        self.select(rates, chosen);
        self.update(rates, chosen);
    }

    /// Exchanges per-MT averages and refreshes every partner snapshot.
    pub fn sync(&mut self) {
        self.counters.sync_events += 1;
        for links in &self.mt_links {
            let k = links.len() as u64;
            if k < 2 {
                continue;
            }
            self.counters.additions += k - 1;
            self.counters.messages += match self.exchange {
                Exchange::Controller | Exchange::None => 2 * k,
                Exchange::Pairwise => k * (k - 1),
            };
        }
        self.refresh_partners();
    }

    fn refresh_partners(&mut self) {
        for links in &self.mt_links {
            let total: f64 = links.iter().map(|&i| self.avg[i]).sum();
            for &i in links {
                // sum of the others, computed directly to avoid cancellation
                self.partner[i] = if links.len() == 2 {
                    links.iter().filter(|&&j| j != i).map(|&j| self.avg[j]).sum()
                } else {
                    (total - self.avg[i]).max(0.0)
                };
            }
        }
    }
}
