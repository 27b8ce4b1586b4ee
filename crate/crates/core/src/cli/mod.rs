//! Configuration, presets and the commands behind the `lerayflow` binary.
//! This is the only module that touches the filesystem.

mod commands;
mod config;
pub mod presets;
mod verify;

pub use commands::{
    build_lift_for, build_system, cmd_exhaust, cmd_lift_check, cmd_oracle, cmd_simulate, cmd_verify,
    flatness_slope, oracle_compare, setup, system_options, trajectory_rows, write_csv, OracleReport,
    Outcome, Problem, TrajectoryRow, Verdict, EXIT_CONFIG,
};
pub use config::{
    apply_env_overrides, load_config, DataSpec, LadderSettings, LiftProjection, Overrides, RunConfig,
    VerifySettings, ENV_PREFIX, FLAG_ENV,
};
pub use presets::Preset;
pub use verify::{cutoff_sandwich_defect, run_verify, CheckEntry, VerifyReport};
