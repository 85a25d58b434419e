//! Experiment orchestration: grid enumeration, seeding, the slot loop, and
//! reporting.

mod config;
mod report;

use rayon::prelude::*;

use crate::association::{associate, AssociationAlgorithm, AssociationMap};
use crate::channel::{FadingChannel, RateSource, RsrpMatrix};
use crate::error::Result;
use crate::metrics::{aggregate, RunLog, RunMetrics};
use crate::scheduling::{Procedure, Scheduler, SchedulerParams};
use crate::topology::{generate_topology, Scenario};

pub use config::{ExperimentConfig, ExperimentSection, TopologySection, UtilityUnit};
pub use report::{
    summarize, write_mt_csv, write_outputs, write_runs_csv, SummaryRow, MT_CSV, MT_CSV_HEADER,
    RUNS_CSV, RUNS_CSV_HEADER,
};

const TOPOLOGY_TAG: u64 = 0x746f_706f;
const FADING_TAG: u64 = 0x6661_6465;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds grid coordinates into `base` with the SplitMix64 finalizer.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |h, &p| splitmix64(h ^ p))
}

/// Runs the slot loop for one association and procedure.
pub fn simulate<R: RateSource>(
    assoc: &AssociationMap,
    procedure: Procedure,
    params: &SchedulerParams,
    rates: &mut R,
    slots: u64,
) -> Result<RunLog> {
    let mut sched = Scheduler::new(assoc, procedure, params)?;
    let links = sched.links().to_vec();
    let m = assoc.num_mts();
    let mut slot_rates = vec![0.0; links.len()];
    let mut chosen = vec![None; assoc.num_bs];
    let mut delivered_bits = vec![0.0; m];
    let mut scheduled_slots = vec![0u64; m];
    let mut decision_bits = 0.0;
    let mut decisions = 0u64;

    for _ in 0..slots {
        rates.slot_rates(&links, &mut slot_rates);
        sched.step(&slot_rates, &mut chosen);
        for &i in chosen.iter().flatten() {
            let mt = links[i].mt;
            delivered_bits[mt] += slot_rates[i];
            scheduled_slots[mt] += 1;
            decision_bits += slot_rates[i];
            decisions += 1;
        }
    }

    Ok(RunLog {
        slots,
        delivered_bits,
        scheduled_slots,
        decision_bits,
        decisions,
        counters: *sched.counters(),
    })
}

/// One point of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub scenario: Scenario,
    pub num_mts: usize,
    pub procedure: Procedure,
    pub association: AssociationAlgorithm,
    pub replication: u32,
}

impl GridPoint {
    /// Seeds depend on (scenario, M, replication) only, so every procedure
    /// and association at a grid cell sees the same drop and fading.
    pub fn seeds(&self, cfg: &ExperimentConfig) -> (u64, u64) {
        let base = cfg.experiment.base_seed;
        let s = self.scenario.id() as u64;
        let m = self.num_mts as u64;
        let r = self.replication as u64;
        let topo_rep = if cfg.experiment.redraw_topology { r } else { 0 };
        (
            derive_seed(base, &[TOPOLOGY_TAG, s, m, topo_rep]),
            derive_seed(base, &[FADING_TAG, s, m, r]),
        )
    }
}

/// Expands the config into grid points in output order.
pub fn grid(cfg: &ExperimentConfig) -> Result<Vec<GridPoint>> {
    let e = &cfg.experiment;
    let mut points = Vec::new();
    for &sid in &e.scenarios {
        let scenario = Scenario::from_id(sid)?;
        for &num_mts in &e.mt_counts {
            for &procedure in &e.procedures {
                let algorithms = match procedure {
                    Procedure::Scp => vec![AssociationAlgorithm::Best],
                    Procedure::Acp => vec![AssociationAlgorithm::All],
                    Procedure::Dcsp | Procedure::Dcp => e.associations.clone(),
                };
                for association in algorithms {
                    for replication in 0..e.replications {
                        points.push(GridPoint {
                            scenario,
                            num_mts,
                            procedure,
                            association,
                            replication,
                        });
                    }
                }
            }
        }
    }
    Ok(points)
}

/// Result of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub point: GridPoint,
    pub num_bs: usize,
    pub topology_seed: u64,
    pub fading_seed: u64,
    pub slots: u64,
    pub metrics: RunMetrics,
    /// `(A1, A2)` per MT; both `None` under all-connectivity.
    pub serving: Vec<(Option<usize>, Option<usize>)>,
    pub association_fallbacks: usize,
    /// Conservation check: bits summed over scheduling decisions.
    pub decision_bits: f64,
}

pub fn run_point(cfg: &ExperimentConfig, run_id: usize, point: GridPoint) -> Result<RunRecord> {
    let (topology_seed, fading_seed) = point.seeds(cfg);
    let spec = cfg.scenario_spec(point.scenario, point.num_mts, topology_seed);
    let topo = generate_topology(&spec)?;
    let rsrp = RsrpMatrix::from_topology(&topo);
    let assoc = associate(point.association, &rsrp, &cfg.association)?;
    assoc.validate()?;

    let mut channel = FadingChannel::new(&topo, &cfg.radio, fading_seed);
    let log = simulate(
        &assoc,
        point.procedure,
        &cfg.scheduler,
        &mut channel,
        cfg.experiment.slots,
    )?;
    let metrics = aggregate(&log, cfg.utility_scale())?;

    let serving = (0..assoc.num_mts())
        .map(|u| match point.procedure {
            Procedure::Acp => (None, None),
            _ => (assoc.primary(u), assoc.secondary(u)),
        })
        .collect();

    Ok(RunRecord {
        run_id,
        point,
        num_bs: topo.num_bs(),
        topology_seed,
        fading_seed,
        slots: log.slots,
        metrics,
        serving,
        association_fallbacks: assoc.stats.fallback_mts.len(),
        decision_bits: log.decision_bits,
    })
}

/// Runs every grid point. Points are independent and run in parallel; the
/// result keeps grid order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let points = grid(cfg)?;
    points
        .par_iter()
        .enumerate()
        .map(|(id, &p)| run_point(cfg, id, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::associate_all;
    use crate::channel::StaticRates;

    #[test]
    fn seeds_ignore_procedure_and_grid_order() {
        let cfg = ExperimentConfig::default();
        let a = GridPoint {
            scenario: Scenario::RandomHotspot,
            num_mts: 30,
            procedure: Procedure::Scp,
            association: AssociationAlgorithm::Best,
            replication: 2,
        };
        let b = GridPoint {
            procedure: Procedure::Acp,
            association: AssociationAlgorithm::All,
            ..a
        };
        assert_eq!(a.seeds(&cfg), b.seeds(&cfg));
        let c = GridPoint { replication: 3, ..a };
        assert_ne!(a.seeds(&cfg).0, c.seeds(&cfg).0);
        assert_ne!(a.seeds(&cfg).1, c.seeds(&cfg).1);
    }

    #[test]
    fn grid_expands_associations_for_dual_only() {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.scenarios = vec![3];
        cfg.experiment.mt_counts = vec![30];
        cfg.experiment.procedures = vec![Procedure::Scp, Procedure::Dcp, Procedure::Acp];
        cfg.experiment.associations = vec![AssociationAlgorithm::Uigo];
        assert_eq!(grid(&cfg).unwrap().len(), 30);
    }

    #[test]
    fn slot_loop_counts_and_conservation() {
        let assoc = AssociationMap::dual(2, &[(0, 1), (1, 0), (0, 1)]);
        let mut rates = StaticRates::new(vec![vec![100.0, 200.0, 300.0], vec![50.0, 60.0, 70.0]]);
        let log = simulate(&assoc, Procedure::Dcp, &SchedulerParams::default(), &mut rates, 1001).unwrap();
        assert_eq!(log.counters.slots, 1001);
        assert_eq!(log.counters.sync_events, 1001 / 25);
        assert_eq!(log.decisions, 2 * 1001);
        let delivered: f64 = log.delivered_bits.iter().sum();
        assert!((delivered - log.decision_bits).abs() <= 1e-9 * delivered);
    }

    #[test]
    fn acp_single_bs_matches_scp() {
        let rates = vec![vec![10.0, 20.0, 30.0]];
        let all = associate_all(1, 3);
        let single = AssociationMap::new(
            crate::association::Connectivity::Single,
            1,
            vec![vec![0], vec![0], vec![0]],
        );
        let p = SchedulerParams::default();
        let a = simulate(&all, Procedure::Acp, &p, &mut StaticRates::new(rates.clone()), 500).unwrap();
        let b = simulate(&single, Procedure::Scp, &p, &mut StaticRates::new(rates), 500).unwrap();
        assert_eq!(a.delivered_bits, b.delivered_bits);
    }
}
