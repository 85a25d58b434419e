//! Two-tier deployment geometry: macro sites on an equilateral triangle,
//! pico cells inside each macro disc, and MT drops for the four scenarios.
//!
//! Base station ids are assigned macros first (`0..macro_sites`), then picos
//! grouped by parent macro. Positions are in meters.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MACRO_TX_POWER_DBM: f64 = 46.0;
pub const PICO_TX_POWER_DBM: f64 = 30.0;
pub const MACRO_ANTENNA_HEIGHT_M: f64 = 32.0;
pub const PICO_ANTENNA_HEIGHT_M: f64 = 10.0;
pub const BANDWIDTH_HZ: f64 = 5.0e6;

const MAX_REJECTION_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Macro,
    Pico,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub id: usize,
    pub tier: Tier,
    pub position: Position,
    pub tx_power_dbm: f64,
    pub antenna_height_m: f64,
    pub bandwidth_hz: f64,
}

impl BaseStation {
    pub fn new(id: usize, tier: Tier, position: Position) -> Self {
        let (tx_power_dbm, antenna_height_m) = match tier {
            Tier::Macro => (MACRO_TX_POWER_DBM, MACRO_ANTENNA_HEIGHT_M),
            Tier::Pico => (PICO_TX_POWER_DBM, PICO_ANTENNA_HEIGHT_M),
        };
        Self {
            id,
            tier,
            position,
            tx_power_dbm,
            antenna_height_m,
            bandwidth_hz: BANDWIDTH_HZ,
        }
    }

    pub fn is_macro(&self) -> bool {
        self.tier == Tier::Macro
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobileTerminal {
    pub id: usize,
    pub position: Position,
    /// Dropped (or incidentally landed) inside some pico disc.
    pub hotspot: bool,
}

/// Deployment scenario: pico placement × MT drop rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Fixed non-overlapping picos, hotspot drop.
    FixedHotspot = 1,
    /// Fixed non-overlapping picos, uniform drop.
    FixedUniform = 2,
    /// Random (possibly overlapping) picos, hotspot drop.
    RandomHotspot = 3,
    /// Random (possibly overlapping) picos, uniform drop.
    RandomUniform = 4,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::FixedHotspot,
        Scenario::FixedUniform,
        Scenario::RandomHotspot,
        Scenario::RandomUniform,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Scenario::FixedHotspot),
            2 => Ok(Scenario::FixedUniform),
            3 => Ok(Scenario::RandomHotspot),
            4 => Ok(Scenario::RandomUniform),
            other => Err(Error::Scenario(format!(
                "scenario id must be 1..=4, got {other}"
            ))),
        }
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn fixed_picos(self) -> bool {
        matches!(self, Scenario::FixedHotspot | Scenario::FixedUniform)
    }

    pub fn hotspot_drop(self) -> bool {
        matches!(self, Scenario::FixedHotspot | Scenario::RandomHotspot)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub num_mts: usize,
    pub seed: u64,
    pub macro_isd: f64,
    pub pico_radius: f64,
    pub picos_per_macro: usize,
    /// Number of macro sites taken from the triangle vertices (1..=3).
    pub macro_sites: usize,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, num_mts: usize, seed: u64) -> Self {
        Self {
            scenario,
            num_mts,
            seed,
            macro_isd: 500.0,
            pico_radius: 80.0,
            picos_per_macro: 3,
            macro_sites: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_mts == 0 {
            return Err(Error::Scenario("num_mts must be at least 1".into()));
        }
        if !(self.macro_isd > 0.0) {
            return Err(Error::Scenario("macro_isd must be positive".into()));
        }
        if !(1..=3).contains(&self.macro_sites) {
            return Err(Error::Scenario(format!(
                "macro_sites must be 1..=3, got {}",
                self.macro_sites
            )));
        }
        let coverage = macro_coverage_radius(self);
        if !(self.pico_radius > 0.0) || self.pico_radius >= coverage {
            return Err(Error::Scenario(format!(
                "pico_radius {} must lie in (0, {coverage}) (macro coverage radius)",
                self.pico_radius
            )));
        }
        if self.scenario.hotspot_drop() && self.picos_per_macro == 0 {
            return Err(Error::Scenario(
                "hotspot drop needs at least one pico per macro".into(),
            ));
        }
        if self.scenario.fixed_picos() && self.picos_per_macro > 0 {
            if 3.0 * self.pico_radius > coverage {
                return Err(Error::Scenario(format!(
                    "fixed pico ring does not fit: 3 * pico_radius > {coverage}"
                )));
            }
        }
        Ok(())
    }
}

/// Radius of the disc around each macro site in which MTs are dropped.
pub fn macro_coverage_radius(spec: &ScenarioSpec) -> f64 {
    spec.macro_isd / 2.0
}

/// Ring radius for fixed pico placement. 160 m for the default 80 m pico radius.
pub fn fixed_ring_radius(spec: &ScenarioSpec) -> f64 {
    2.0 * spec.pico_radius
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    pub base_stations: Vec<BaseStation>,
    pub mts: Vec<MobileTerminal>,
    pub coverage_radius: f64,
    pub pico_radius: f64,
}

impl NetworkTopology {
    pub fn num_bs(&self) -> usize {
        self.base_stations.len()
    }

    pub fn num_mts(&self) -> usize {
        self.mts.len()
    }

    pub fn macros(&self) -> impl Iterator<Item = &BaseStation> {
        self.base_stations.iter().filter(|b| b.is_macro())
    }

    pub fn picos(&self) -> impl Iterator<Item = &BaseStation> {
        self.base_stations.iter().filter(|b| !b.is_macro())
    }

    pub fn tiers(&self) -> Vec<Tier> {
        self.base_stations.iter().map(|b| b.tier).collect()
    }

    pub fn in_any_pico(&self, p: &Position) -> bool {
        self.picos()
            .any(|b| b.position.distance(p) <= self.pico_radius)
    }

    pub fn in_any_macro(&self, p: &Position) -> bool {
        self.macros()
            .any(|b| b.position.distance(p) <= self.coverage_radius)
    }

    /// Axis-aligned box enclosing every macro coverage disc.
    pub fn bounding_box(&self) -> (Position, Position) {
        let r = self.coverage_radius;
        let mut lo = Position::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Position::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for m in self.macros() {
            lo.x = lo.x.min(m.position.x - r);
            lo.y = lo.y.min(m.position.y - r);
            hi.x = hi.x.max(m.position.x + r);
            hi.y = hi.y.max(m.position.y + r);
        }
        (lo, hi)
    }
}

fn macro_sites(spec: &ScenarioSpec) -> Vec<Position> {
    let d = spec.macro_isd;
    [
        Position::new(0.0, 0.0),
        Position::new(d, 0.0),
        Position::new(d / 2.0, d * 3f64.sqrt() / 2.0),
    ]
    .into_iter()
    .take(spec.macro_sites)
    .collect()
}

fn uniform_in_disc<R: Rng>(rng: &mut R, center: Position, radius: f64) -> Position {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Position::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

fn place_picos<R: Rng>(spec: &ScenarioSpec, sites: &[Position], rng: &mut R) -> Vec<Position> {
    let k = spec.picos_per_macro;
    let mut out = Vec::with_capacity(sites.len() * k);
    for site in sites {
        if spec.scenario.fixed_picos() {
            let ring = fixed_ring_radius(spec);
            for i in 0..k {
                let angle = (30.0 + 360.0 * i as f64 / k as f64).to_radians();
                out.push(Position::new(
                    site.x + ring * angle.cos(),
                    site.y + ring * angle.sin(),
                ));
            }
        } else {
            let inner = macro_coverage_radius(spec) - spec.pico_radius;
            for _ in 0..k {
                out.push(uniform_in_disc(rng, *site, inner));
            }
        }
    }
    out
}

/// Builds the BS layout and MT drop for one scenario. Deterministic in `spec.seed`.
pub fn generate_topology(spec: &ScenarioSpec) -> Result<NetworkTopology> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let coverage = macro_coverage_radius(spec);
    let sites = macro_sites(spec);
    let pico_centers = place_picos(spec, &sites, &mut rng);

    let mut base_stations: Vec<BaseStation> = sites
        .iter()
        .map(|&p| BaseStation::new(0, Tier::Macro, p))
        .chain(pico_centers.iter().map(|&p| BaseStation::new(0, Tier::Pico, p)))
        .collect();
    for (id, bs) in base_stations.iter_mut().enumerate() {
        bs.id = id;
    }

    let mut topo = NetworkTopology {
        base_stations,
        mts: Vec::with_capacity(spec.num_mts),
        coverage_radius: coverage,
        pico_radius: spec.pico_radius,
    };

    if spec.scenario.fixed_picos() {
        for (i, a) in pico_centers.iter().enumerate() {
            for b in &pico_centers[i + 1..] {
                if a.distance(b) <= 2.0 * spec.pico_radius {
                    return Err(Error::Scenario(format!(
                        "fixed pico layout overlaps for picos_per_macro = {}",
                        spec.picos_per_macro
                    )));
                }
            }
        }
    }

    let m = spec.num_mts;
    let inside = if spec.scenario.hotspot_drop() {
        (2 * m).div_ceil(3)
    } else {
        0
    };

    for id in 0..m {
        let (position, hotspot) = if id < inside {
            (drop_in_pico_union(&topo, &pico_centers, &mut rng), true)
        } else if spec.scenario.hotspot_drop() {
            (drop_outside_picos(&topo, &sites, &mut rng)?, false)
        } else {
            let site = sites[rng.random_range(0..sites.len())];
            let p = uniform_in_disc(&mut rng, site, coverage);
            (p, topo.in_any_pico(&p))
        };
        topo.mts.push(MobileTerminal {
            id,
            position,
            hotspot,
        });
    }
    Ok(topo)
}

/// Uniform over the union of pico discs: pick a disc, draw inside it, and
/// thin by the number of discs covering the point.
fn drop_in_pico_union<R: Rng>(topo: &NetworkTopology, centers: &[Position], rng: &mut R) -> Position {
    let r = topo.pico_radius;
    loop {
        let c = centers[rng.random_range(0..centers.len())];
        let p = uniform_in_disc(rng, c, r);
        let cover = centers.iter().filter(|q| q.distance(&p) <= r).count().max(1);
        if cover == 1 || rng.random::<f64>() < 1.0 / cover as f64 {
            return p;
        }
    }
}

fn drop_outside_picos<R: Rng>(
    topo: &NetworkTopology,
    sites: &[Position],
    rng: &mut R,
) -> Result<Position> {
    for _ in 0..MAX_REJECTION_DRAWS {
        let site = sites[rng.random_range(0..sites.len())];
        let p = uniform_in_disc(rng, site, topo.coverage_radius);
        if !topo.in_any_pico(&p) {
            return Ok(p);
        }
    }
    Err(Error::Scenario(
        "pico discs cover the macro area; cannot drop MTs outside them".into(),
    ))
}
