//! PF utility, Jain's fairness index, and per-run aggregation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scheduling::ComplexityCounters;

/// Sum of natural logs of the throughputs. Fails if any MT is starved.
pub fn pf_utility(throughputs: &[f64]) -> Result<f64> {
    let starved: Vec<usize> = throughputs
        .iter()
        .enumerate()
        .filter(|(_, &x)| !(x > 0.0))
        .map(|(i, _)| i)
        .collect();
    if !starved.is_empty() {
        return Err(Error::StarvedMts(starved));
    }
    Ok(throughputs.iter().map(|x| x.ln()).sum())
}

/// (Σx)² / (M·Σx²).
pub fn jain_index(throughputs: &[f64]) -> Result<f64> {
    let sum: f64 = throughputs.iter().sum();
    let sq: f64 = throughputs.iter().map(|x| x * x).sum();
    if !(sq > 0.0) {
        return Err(Error::AllZeroThroughput);
    }
    Ok(sum * sum / (throughputs.len() as f64 * sq))
}

/// Raw outcome of one slot loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub slots: u64,
    /// Bits delivered to each MT, summed over its serving BSs.
    pub delivered_bits: Vec<f64>,
    /// Slots in which each MT was scheduled by at least one BS, counted per BS.
    pub scheduled_slots: Vec<u64>,
    /// Sum of the rates of every scheduling decision.
    pub decision_bits: f64,
    pub decisions: u64,
    pub counters: ComplexityCounters,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    /// Long-run throughput per MT, bits/slot.
    pub throughputs: Vec<f64>,
    /// PF utility evaluated on throughputs in `utility_scale` units.
    pub pf_utility: f64,
    pub jfi: f64,
    /// Σ x_u, bits/slot.
    pub system_throughput: f64,
    pub counters: ComplexityCounters,
}

/// Turns a run log into metrics. PF utility is taken over `x_u * utility_scale`
/// (1.0 keeps bits/slot).
pub fn aggregate(log: &RunLog, utility_scale: f64) -> Result<RunMetrics> {
    let slots = log.slots.max(1) as f64;
    let throughputs: Vec<f64> = log.delivered_bits.iter().map(|b| b / slots).collect();
    let scaled: Vec<f64> = throughputs.iter().map(|x| x * utility_scale).collect();
    Ok(RunMetrics {
        pf_utility: pf_utility(&scaled)?,
        jfi: jain_index(&throughputs)?,
        system_throughput: throughputs.iter().sum(),
        throughputs,
        counters: log.counters,
    })
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for n < 2).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn utility_examples() {
        assert_eq!(pf_utility(&[1.0, 1.0]).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((pf_utility(&[e, e]).unwrap() - 2.0).abs() < 1e-12);
        assert!((pf_utility(&[2.0, 8.0]).unwrap() - 2.772588722239781).abs() < 1e-12);
    }

    #[test]
    fn utility_names_starved_mts() {
        match pf_utility(&[1.0, 0.0, 3.0, 0.0]) {
            Err(Error::StarvedMts(ids)) => assert_eq!(ids, vec![1, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jain_examples() {
        assert!((jain_index(&[1.0, 1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((jain_index(&[2.0, 0.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((jain_index(&[1.0, 3.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!(jain_index(&[0.0, 0.0]).is_err());
    }

    fn log(bits: Vec<f64>, slots: u64) -> RunLog {
        RunLog {
            slots,
            scheduled_slots: vec![0; bits.len()],
            decision_bits: bits.iter().sum(),
            decisions: 0,
            delivered_bits: bits,
            counters: ComplexityCounters::default(),
        }
    }

    #[test]
    fn aggregate_examples() {
        // 5000 bits in half of 10,000 slots
        let m = aggregate(&log(vec![5000.0 * 5000.0], 10_000), 1.0).unwrap();
        assert_eq!(m.throughputs, vec![2500.0]);
        assert_eq!(m.jfi, 1.0);
        assert!((m.pf_utility - 2500f64.ln()).abs() < 1e-12);
        // 1000 bits/slot on each of two links
        let m = aggregate(&log(vec![2.0 * 1000.0 * 100.0], 100), 1.0).unwrap();
        assert_eq!(m.system_throughput, 2000.0);
    }

    #[test]
    fn mean_sd_small_samples() {
        assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.2909944487358056).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn jain_scale_invariant(xs in prop::collection::vec(0.01f64..1e4, 1..20), a in 0.01f64..100.0) {
            let scaled: Vec<f64> = xs.iter().map(|x| x * a).collect();
            let j = jain_index(&xs).unwrap();
            prop_assert!((j - jain_index(&scaled).unwrap()).abs() < 1e-12);
            prop_assert!(j > 0.0 && j <= 1.0 + 1e-12);
        }

        #[test]
        fn utility_log_additive(xs in prop::collection::vec(0.01f64..1e4, 1..20), a in 0.01f64..100.0) {
            let scaled: Vec<f64> = xs.iter().map(|x| x * a).collect();
            let lhs = pf_utility(&scaled).unwrap();
            let rhs = pf_utility(&xs).unwrap() + xs.len() as f64 * a.ln();
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
