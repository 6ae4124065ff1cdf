//! Monte-Carlo experiments, brute-force oracles and CSV output.

mod check;
mod config;
mod csv_io;
mod mobility;
mod oracle;
mod sweep;
mod trace;
mod trial;

pub use check::{
    clears_box, constraint_violation, feasibility_mismatch, oracle_check, power_violations, OracleReport, ASCENT_TOL,
    CLEARANCE, GRID_TOL, KKT_TOL,
};
pub use config::{ExperimentConfig, MobilityConfig, SweepPoint};
pub use csv_io::{emit_csv, parse_csv, read_rows, write_rows, write_sweep, SWEEP_COLUMNS};
pub use mobility::{run_mobility, MobilityRow, MOBILITY_COLUMNS};
pub use oracle::{
    grid_neighbors, oracle_feasible, oracle_power, random_group, GridPoint, NeighborCheck, PowerGrid,
    MAX_FEASIBILITY_DIM, MAX_GRID_DIM, MAX_GRID_RESOLUTION, ORACLE_SAMPLES, VERTEX_TOL,
};
pub use sweep::{mean_std, run_sweep, run_trials, SweepRow, SweepTable};
pub use trace::{decreasing_series, run_trace, TraceRow, TRACE_COLUMNS};
pub use trial::{
    allocation_violations, run_trial, schedule_options, schedule_timed, scheduler_rng, GroupDetail, TrialResult,
    QOS_TOL,
};
