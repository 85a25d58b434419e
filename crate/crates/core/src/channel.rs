//! Link budget and per-slot rates.
//!
//! Long-term quantities (path loss, RSRP) come from the tier-specific
//! path-loss laws; the short-term part is an i.i.d. unit-mean exponential
//! power gain per link per slot. Macro and pico tiers sit on different
//! carriers, so only co-tier transmitters interfere, and every BS is
//! always transmitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::association::Link;
use crate::topology::{BaseStation, MobileTerminal, NetworkTopology, Tier};

/// Distances below this are clamped before evaluating path loss.
pub const MIN_DISTANCE_M: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub slot_duration_s: f64,
    /// Linear SINR floor; 0 disables it.
    pub min_sinr: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            slot_duration_s: 1.0e-3,
            min_sinr: 0.0,
        }
    }
}

impl RadioConfig {
    pub fn noise_power_dbm(&self, bandwidth_hz: f64) -> f64 {
        self.noise_density_dbm_hz + 10.0 * bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.slot_duration_s > 0.0) {
            return Err("slot_duration_s must be positive".into());
        }
        if !(self.min_sinr >= 0.0) {
            return Err("min_sinr must be non-negative".into());
        }
        Ok(())
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Path loss in dB for a link of `distance_km`.
pub fn path_loss_db(tier: Tier, distance_km: f64) -> f64 {
    let d = distance_km.max(MIN_DISTANCE_M / 1000.0);
    match tier {
        Tier::Macro => 128.1 + 37.6 * d.log10(),
        Tier::Pico => 140.7 + 36.7 * d.log10(),
    }
}

/// Long-term received power (no fading).
pub fn rsrp_dbm(bs: &BaseStation, mt: &MobileTerminal) -> f64 {
    let d_km = bs.position.distance(&mt.position) / 1000.0;
    bs.tx_power_dbm - path_loss_db(bs.tier, d_km)
}

/// One unit-mean exponential power gain (Rayleigh envelope).
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let g: f64 = rng.sample(Exp1);
        if g > 0.0 {
            return g;
        }
    }
}

/// Bits per slot at the given SINR over the full band.
pub fn shannon_bits(sinr: f64, bandwidth_hz: f64, slot_duration_s: f64) -> f64 {
    slot_duration_s * bandwidth_hz * (1.0 + sinr.max(0.0)).log2()
}

/// SINR of `signal_mw` against `noise_mw` plus the sum of `interference_mw`.
pub fn sinr(signal_mw: f64, interference_mw: &[f64], noise_mw: f64) -> f64 {
    signal_mw / (noise_mw + interference_mw.iter().sum::<f64>())
}

/// RSRP for every (BS, MT) pair, BS-major, with each BS's tier.
#[derive(Debug, Clone, PartialEq)]
pub struct RsrpMatrix {
    num_bs: usize,
    num_mts: usize,
    values: Vec<f64>,
    tiers: Vec<Tier>,
}

impl RsrpMatrix {
    /// `rows[b][u]` is the RSRP of BS `b` at MT `u`.
    pub fn from_rows(rows: Vec<Vec<f64>>, tiers: Vec<Tier>) -> Self {
        assert_eq!(rows.len(), tiers.len(), "one tier per BS row");
        let num_bs = rows.len();
        let num_mts = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == num_mts), "ragged RSRP rows");
        Self {
            num_bs,
            num_mts,
            values: rows.into_iter().flatten().collect(),
            tiers,
        }
    }

    pub fn from_topology(topo: &NetworkTopology) -> Self {
        let rows = topo
            .base_stations
            .iter()
            .map(|bs| topo.mts.iter().map(|mt| rsrp_dbm(bs, mt)).collect())
            .collect();
        Self::from_rows(rows, topo.tiers())
    }

    pub fn num_bs(&self) -> usize {
        self.num_bs
    }

    pub fn num_mts(&self) -> usize {
        self.num_mts
    }

    pub fn get(&self, bs: usize, mt: usize) -> f64 {
        self.values[bs * self.num_mts + mt]
    }

    pub fn set(&mut self, bs: usize, mt: usize, v: f64) {
        self.values[bs * self.num_mts + mt] = v;
    }

    pub fn tier(&self, bs: usize) -> Tier {
        self.tiers[bs]
    }

    pub fn tiers(&self) -> &[Tier] {
        &self.tiers
    }
}

/// Produces the achievable rate of each requested link, one slot per call.
pub trait RateSource {
    fn slot_rates(&mut self, links: &[Link], out: &mut [f64]);
}

/// Rates that never change. `rates[b][u]` in bits/slot.
#[derive(Debug, Clone)]
pub struct StaticRates {
    rates: Vec<Vec<f64>>,
}

impl StaticRates {
    pub fn new(rates: Vec<Vec<f64>>) -> Self {
        Self { rates }
    }
}

impl RateSource for StaticRates {
    fn slot_rates(&mut self, links: &[Link], out: &mut [f64]) {
        for (o, l) in out.iter_mut().zip(links) {
            *o = self.rates[l.bs][l.mt];
        }
    }
}

/// Full-buffer two-tier channel with independent fading per link.
///
/// Link `(b, u)` draws from its own ChaCha stream (`b * M + u`), so the gain
/// sequence of a link does not depend on which other links are evaluated.
pub struct FadingChannel {
    num_mts: usize,
    tiers: Vec<Tier>,
    bandwidth_hz: Vec<f64>,
    slot_duration_s: f64,
    min_sinr: f64,
    /// Noise power in mW per BS (bandwidth may differ per BS).
    noise_mw: Vec<f64>,
    /// Long-term received power in mW, BS-major.
    mean_rx_mw: Vec<f64>,
    streams: Vec<ChaCha8Rng>,
    rx_mw: Vec<f64>,
    /// Per MT, total received power on the macro and pico carriers this slot.
    tier_total: Vec<[f64; 2]>,
}

fn tier_index(t: Tier) -> usize {
    match t {
        Tier::Macro => 0,
        Tier::Pico => 1,
    }
}

impl FadingChannel {
    pub fn new(topo: &NetworkTopology, config: &RadioConfig, seed: u64) -> Self {
        let n = topo.num_bs();
        let m = topo.num_mts();
        let mut mean_rx_mw = Vec::with_capacity(n * m);
        for bs in &topo.base_stations {
            for mt in &topo.mts {
                mean_rx_mw.push(dbm_to_mw(rsrp_dbm(bs, mt)));
            }
        }
        let streams = (0..n * m)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                rng
            })
            .collect();
        Self {
            num_mts: m,
            tiers: topo.tiers(),
            bandwidth_hz: topo.base_stations.iter().map(|b| b.bandwidth_hz).collect(),
            slot_duration_s: config.slot_duration_s,
            min_sinr: config.min_sinr,
            noise_mw: topo
                .base_stations
                .iter()
                .map(|b| dbm_to_mw(config.noise_power_dbm(b.bandwidth_hz)))
                .collect(),
            mean_rx_mw,
            streams,
            rx_mw: vec![0.0; n * m],
            tier_total: vec![[0.0; 2]; m],
        }
    }

    /// Draws this slot's fading on every link and refreshes per-carrier totals.
    pub fn advance(&mut self) {
        for t in self.tier_total.iter_mut() {
            *t = [0.0; 2];
        }
        let m = self.num_mts;
        for (b, tier) in self.tiers.iter().enumerate() {
            let ti = tier_index(*tier);
            for u in 0..m {
                let i = b * m + u;
                let g = draw_fading(&mut self.streams[i]);
                let rx = self.mean_rx_mw[i] * g;
                self.rx_mw[i] = rx;
                self.tier_total[u][ti] += rx;
            }
        }
    }

    /// Rate on link (bs, mt) for the current slot.
    pub fn rate(&self, bs: usize, mt: usize) -> f64 {
        let rx = self.rx_mw[bs * self.num_mts + mt];
        let co_tier = self.tier_total[mt][tier_index(self.tiers[bs])];
        let interference = (co_tier - rx).max(0.0);
        let s = (rx / (self.noise_mw[bs] + interference)).max(self.min_sinr);
        shannon_bits(s, self.bandwidth_hz[bs], self.slot_duration_s)
    }

    /// Rate on link (bs, mt) with interference removed.
    pub fn interference_free_rate(&self, bs: usize, mt: usize) -> f64 {
        let rx = self.rx_mw[bs * self.num_mts + mt];
        let s = (rx / self.noise_mw[bs]).max(self.min_sinr);
        shannon_bits(s, self.bandwidth_hz[bs], self.slot_duration_s)
    }
}

impl RateSource for FadingChannel {
    fn slot_rates(&mut self, links: &[Link], out: &mut [f64]) {
        self.advance();
        for (o, l) in out.iter_mut().zip(links) {
            *o = self.rate(l.bs, l.mt);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_topology, Position, Scenario, ScenarioSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn path_loss_table_values() {
        assert!(close(path_loss_db(Tier::Macro, 1.0), 128.1, 1e-12));
        // 128.1 + 37.6 * log10(0.5)
        assert!(close(path_loss_db(Tier::Macro, 0.5), 116.781, 5e-3));
        // 140.7 + 36.7 * log10(0.08)
        assert!(close(path_loss_db(Tier::Pico, 0.08), 100.444, 5e-3));
    }

    #[test]
    fn path_loss_clamped_at_ten_meters() {
        let at_clamp = path_loss_db(Tier::Pico, 0.01);
        assert_eq!(path_loss_db(Tier::Pico, 0.0), at_clamp);
        assert_eq!(path_loss_db(Tier::Pico, 0.001), at_clamp);
        assert!(path_loss_db(Tier::Macro, 0.0).is_finite());
    }

    #[test]
    fn rsrp_examples() {
        let mt = MobileTerminal {
            id: 0,
            position: Position::new(0.0, 0.0),
            hotspot: false,
        };
        let macro_bs = BaseStation::new(0, Tier::Macro, Position::new(1000.0, 0.0));
        assert!(close(rsrp_dbm(&macro_bs, &mt), -82.1, 1e-9));
        let pico = BaseStation::new(1, Tier::Pico, Position::new(0.0, 80.0));
        assert!(close(rsrp_dbm(&pico, &mt), -70.444, 5e-3));
        let far = BaseStation::new(2, Tier::Pico, Position::new(0.0, 81.0));
        assert!(rsrp_dbm(&far, &mt) < rsrp_dbm(&pico, &mt));
    }

    #[test]
    fn noise_power_over_five_mhz() {
        let cfg = RadioConfig::default();
        assert!(close(cfg.noise_power_dbm(5.0e6), -98.0103, 1e-4));
    }

    #[test]
    fn shannon_examples() {
        assert!(close(shannon_bits(1.0, 5.0e6, 1.0e-3), 5000.0, 1e-9));
        assert_eq!(shannon_bits(0.0, 5.0e6, 1.0e-3), 0.0);
    }

    #[test]
    fn fading_mean_and_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let g = draw_fading(&mut rng);
            assert!(g > 0.0);
            sum += g;
        }
        assert!(close(sum / n as f64, 1.0, 0.02));
    }

    #[test]
    fn fading_deterministic_per_seed() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(draw_fading(&mut a), draw_fading(&mut b));
        }
    }

    #[test]
    fn more_interferers_never_raise_sinr() {
        let interferers = [1e-9, 3e-10, 2e-11, 7e-9];
        let noise = 1e-10;
        let mut last = f64::INFINITY;
        for k in 0..=interferers.len() {
            let s = sinr(5e-9, &interferers[..k], noise);
            assert!(s <= last);
            last = s;
        }
    }

    #[test]
    fn channel_rates_bounded_by_interference_free() {
        let topo = generate_topology(&ScenarioSpec::new(Scenario::RandomHotspot, 20, 3)).unwrap();
        let mut ch = FadingChannel::new(&topo, &RadioConfig::default(), 77);
        for _ in 0..20 {
            ch.advance();
            for b in 0..topo.num_bs() {
                for u in 0..topo.num_mts() {
                    let r = ch.rate(b, u);
                    assert!(r >= 0.0);
                    assert!(r <= ch.interference_free_rate(b, u) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn link_streams_independent_of_request_set() {
        let topo = generate_topology(&ScenarioSpec::new(Scenario::FixedUniform, 6, 1)).unwrap();
        let cfg = RadioConfig::default();
        let all: Vec<Link> = (0..topo.num_bs())
            .flat_map(|b| (0..6).map(move |u| Link { bs: b, mt: u }))
            .collect();
        let one = vec![Link { bs: 4, mt: 2 }];
        let mut a = FadingChannel::new(&topo, &cfg, 9);
        let mut b = FadingChannel::new(&topo, &cfg, 9);
        let mut out_all = vec![0.0; all.len()];
        let mut out_one = vec![0.0; 1];
        for _ in 0..10 {
            a.slot_rates(&all, &mut out_all);
            b.slot_rates(&one, &mut out_one);
            assert_eq!(out_all[4 * 6 + 2], out_one[0]);
        }
    }

    #[test]
    fn rsrp_matrix_matches_direct_rsrp() {
        let topo = generate_topology(&ScenarioSpec::new(Scenario::FixedHotspot, 5, 2)).unwrap();
        let mat = RsrpMatrix::from_topology(&topo);
        assert_eq!(mat.num_bs(), 12);
        assert_eq!(mat.num_mts(), 5);
        for b in &topo.base_stations {
            for u in &topo.mts {
                assert_eq!(mat.get(b.id, u.id), rsrp_dbm(b, u));
            }
        }
    }
}
