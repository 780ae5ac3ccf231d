//! Scenario loading, end-to-end experiments, sweeps and result files.

mod experiment;
mod identify;
mod output;
mod scenario;
mod sweep;

pub use experiment::{
    optimize_thresholds, receiver_setups, run_experiment, slot_seed, within_binomial_band, EmpiricalRates,
    ExperimentResult, Hypothesis, Metadata, PreparedExperiment, ReceiverSetup, RuleResult, RunOptions,
    SatelliteResult, SlotEngine, RESULT_SCHEMA_VERSION,
};
pub use identify::{identifiability_report, IdentifiabilityReport, ReceiverDoppler};
pub use output::{write_experiment_csv, write_fusion_csv, write_json, write_roc_csv, OutputFormat};
pub use scenario::{BetaSpec, PsdShape, PsdSpec, Scenario, SCENARIO_SCHEMA_VERSION};
pub use sweep::{fusion_sweep, linspace, roc_sweep, FusionRow, FusionSweep, RocPoint};
