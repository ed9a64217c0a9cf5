//! Experiment harness for the swarm simulator: parameter sweeps, CSV
//! results, SVG charts and the statistics used to compare algorithms.

pub mod chart;
pub mod stats;
pub mod sweep;
pub mod table;

pub use chart::{chart, ChartError, Series};
pub use sweep::{parse_algos, run_config, run_sweep, Arm, Cell, SweepError, SweepParam, SweepSpec};
pub use table::{fmt_g6, write_csv, Table, TableError};
