use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::association::{AssociationAlgorithm, AssociationParams};
use crate::channel::RadioConfig;
use crate::error::{Error, Result};
use crate::scheduling::{Procedure, SchedulerParams};
use crate::topology::{Scenario, ScenarioSpec};

/// Unit in which per-MT throughput enters the PF utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityUnit {
    Mbps,
    BitsPerSlot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub scenarios: Vec<u8>,
    pub mt_counts: Vec<usize>,
    pub procedures: Vec<Procedure>,
    /// Dual association algorithms; SCP always uses best RSRP and ACP all BSs.
    pub associations: Vec<AssociationAlgorithm>,
    pub slots: u64,
    pub replications: u32,
    pub base_seed: u64,
    /// Draw a new topology per replication (otherwise only fading changes).
    pub redraw_topology: bool,
    pub utility_unit: UtilityUnit,
    pub output: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            scenarios: vec![1],
            mt_counts: vec![30, 60, 90],
            procedures: Procedure::ALL.to_vec(),
            associations: vec![
                AssociationAlgorithm::Uigo,
                AssociationAlgorithm::Bigu,
                AssociationAlgorithm::Sm,
            ],
            slots: 10_000,
            replications: 10,
            base_seed: 1,
            redraw_topology: true,
            utility_unit: UtilityUnit::BitsPerSlot,
            output: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    pub macro_isd: f64,
    pub pico_radius: f64,
    pub picos_per_macro: usize,
    pub macro_sites: usize,
}

impl Default for TopologySection {
    fn default() -> Self {
        Self {
            macro_isd: 500.0,
            pico_radius: 80.0,
            picos_per_macro: 3,
            macro_sites: 3,
        }
    }
}

/// Full experiment description. Parsed from TOML with one table per section:
///
/// ```toml
/// [experiment]
/// scenarios = [3]
/// mt_counts = [30]
/// procedures = ["scp", "dcp", "acp"]
/// associations = ["uigo"]
///
/// [scheduler]
/// sync_period = 25
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub topology: TopologySection,
    pub scheduler: SchedulerParams,
    pub association: AssociationParams,
    pub radio: RadioConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.slots == 0 {
            return Err(Error::Config("slots must be at least 1".into()));
        }
        if e.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if e.procedures.is_empty() {
            return Err(Error::Config("at least one procedure is required".into()));
        }
        if e.scenarios.is_empty() || e.mt_counts.is_empty() {
            return Err(Error::Config("scenarios and mt_counts must be non-empty".into()));
        }
        for &s in &e.scenarios {
            Scenario::from_id(s)?;
        }
        if e.mt_counts.contains(&0) {
            return Err(Error::Config("mt_counts entries must be positive".into()));
        }
        let dual = e.procedures.iter().any(|p| matches!(p, Procedure::Dcsp | Procedure::Dcp));
        if dual {
            if e.associations.is_empty() {
                return Err(Error::Config(
                    "DCSP/DCP need at least one association algorithm".into(),
                ));
            }
            if let Some(a) = e.associations.iter().find(|a| {
                matches!(a, AssociationAlgorithm::Best | AssociationAlgorithm::All)
            }) {
                return Err(Error::Config(format!(
                    "'{a}' is not a dual association algorithm"
                )));
            }
        }
        self.scheduler.validate()?;
        self.association.validate()?;
        self.radio.validate().map_err(Error::Config)?;
        Ok(())
    }

    pub fn scenario_spec(&self, scenario: Scenario, num_mts: usize, seed: u64) -> ScenarioSpec {
        let t = &self.topology;
        ScenarioSpec {
            scenario,
            num_mts,
            seed,
            macro_isd: t.macro_isd,
            pico_radius: t.pico_radius,
            picos_per_macro: t.picos_per_macro,
            macro_sites: t.macro_sites,
        }
    }

    /// Multiplier taking bits/slot to the configured utility unit.
    pub fn utility_scale(&self) -> f64 {
        match self.experiment.utility_unit {
            UtilityUnit::BitsPerSlot => 1.0,
            UtilityUnit::Mbps => 1.0 / (self.radio.slot_duration_s * 1.0e6),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.experiment.slots, 10_000);
        assert_eq!(cfg.experiment.replications, 10);
        assert_eq!(cfg.scheduler.sync_period, 25);
        assert_eq!(cfg.utility_scale(), 1.0);
        let mut mbps = cfg.clone();
        mbps.experiment.utility_unit = UtilityUnit::Mbps;
        assert!((mbps.utility_scale() - 1.0e-3).abs() < 1e-18);
    }

    #[test]
    fn parses_sections() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            [experiment]
            scenarios = [3]
            mt_counts = [30]
            procedures = ["scp", "dcp", "acp"]
            associations = ["uigo"]
            slots = 500
            utility_unit = "mbps"

            [scheduler]
            gamma = 0.02

            [association]
            h1 = 6.0

            [radio]
            noise_figure_db = 7.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.experiment.scenarios, vec![3]);
        assert_eq!(cfg.experiment.procedures, vec![Procedure::Scp, Procedure::Dcp, Procedure::Acp]);
        assert_eq!(cfg.scheduler.gamma, 0.02);
        assert_eq!(cfg.scheduler.sync_period, 25);
        assert_eq!(cfg.association.h1, 6.0);
        assert_eq!(cfg.radio.noise_figure_db, 7.0);
        assert!((cfg.utility_scale() - 1.0e-3).abs() < 1e-18);
    }

    #[test]
    fn rejects_unknown_keys_and_values() {
        assert!(ExperimentConfig::from_toml_str("[experiment]\nslotz = 3\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[experiment]\nprocedures = [\"xyz\"]\n").is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.slots = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.associations = vec![AssociationAlgorithm::Best];
        assert!(cfg.validate().is_err());
    }
}
