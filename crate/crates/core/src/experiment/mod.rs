//! Seeded experiment harness: TOML configs, calibration of free constants,
//! parallel trial runner, CSV records and plot tables.

pub mod calibration;
pub mod config;
pub mod families;
pub mod instances;
pub mod plot;
pub mod records;
pub mod runner;

pub use calibration::{calibrate, Calibration};
pub use config::{ClusteringSpec, ExperimentConfig, Fixed, Grid, GridPoint, Op};
pub use families::DistributionFamily;
pub use plot::{plot_data, write_plot_csv, PlotRow, PLOT_KINDS};
pub use records::{read_records, write_timings, ExperimentRecord, RecordWriter, TimingRecord, SCHEMA_LINE};
pub use runner::{run_experiment, run_experiment_with, summarize, Summary, SummaryRow};
