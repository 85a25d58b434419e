use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use pfdc_sim::association::AssociationAlgorithm;
use pfdc_sim::engine::{run_experiment, summarize, write_outputs, ExperimentConfig, SummaryRow};
use pfdc_sim::scheduling::Procedure;
use pfdc_sim::Result;

/// Run a PF scheduling experiment over scenarios, MT counts, procedures
/// and association algorithms, and write CSV results.
#[derive(Debug, Parser)]
#[command(name = "pfdc-sim", version)]
struct Cli {
    /// TOML config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario ids (1-4), comma separated.
    #[arg(long, value_delimiter = ',')]
    scenario: Option<Vec<u8>>,
    /// MT counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    mts: Option<Vec<usize>>,
    /// Procedures: scp, dcsp, dcp, acp.
    #[arg(long, value_delimiter = ',')]
    procedure: Option<Vec<Procedure>>,
    /// Dual association algorithms: uigo, bigu, sm.
    #[arg(long, value_delimiter = ',')]
    association: Option<Vec<AssociationAlgorithm>>,
    #[arg(long)]
    slots: Option<u64>,
    #[arg(long)]
    reps: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// DCP exchange period in slots.
    #[arg(long)]
    sync_period: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// UIGO threshold (dB).
    #[arg(long)]
    h1: Option<f64>,
    /// BIGU threshold (dB).
    #[arg(long)]
    h2: Option<f64>,
    /// Macro sites to place (1-3).
    #[arg(long)]
    macro_sites: Option<usize>,
    #[arg(long)]
    picos_per_macro: Option<usize>,
    /// Output directory for runs.csv and mt_throughput.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cli {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let e = &mut cfg.experiment;
        if let Some(v) = self.scenario {
            e.scenarios = v;
        }
        if let Some(v) = self.mts {
            e.mt_counts = v;
        }
        if let Some(v) = self.procedure {
            e.procedures = v;
        }
        if let Some(v) = self.association {
            e.associations = v;
        }
        if let Some(v) = self.slots {
            e.slots = v;
        }
        if let Some(v) = self.reps {
            e.replications = v;
        }
        if let Some(v) = self.seed {
            e.base_seed = v;
        }
        if let Some(v) = self.out {
            e.output = v;
        }
        if let Some(v) = self.sync_period {
            cfg.scheduler.sync_period = v;
        }
        if let Some(v) = self.gamma {
            cfg.scheduler.gamma = v;
        }
        if let Some(v) = self.h1 {
            cfg.association.h1 = v;
        }
        if let Some(v) = self.h2 {
            cfg.association.h2 = v;
        }
        if let Some(v) = self.macro_sites {
            cfg.topology.macro_sites = v;
        }
        if let Some(v) = self.picos_per_macro {
            cfg.topology.picos_per_macro = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:>3} {:>5} {:<5} {:<5} {:>4} {:>22} {:>14} {:>7} {:>10}",
        "scn", "M", "proc", "assoc", "reps", "pf_utility (mean±sd)", "sys_tput", "jfi", "msgs/slot"
    );
    for r in rows {
        println!(
            "{:>3} {:>5} {:<5} {:<5} {:>4} {:>13.4} ±{:>7.4} {:>14.1} {:>7.4} {:>10.3}",
            r.scenario,
            r.num_mts,
            r.procedure,
            r.association,
            r.replications,
            r.pf_utility_mean,
            r.pf_utility_sd,
            r.system_throughput_mean,
            r.jfi_mean,
            r.messages_per_slot_mean,
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.into_config()?;
    let records = run_experiment(&cfg)?;
    let files = write_outputs(&records, &cfg.experiment.output)?;
    print_summary(&summarize(&records));
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
