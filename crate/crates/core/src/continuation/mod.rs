//! Time integration, the horizon-extension ladder, blow-up detection and
//! stability diagnostics.

mod audit;
mod ladder;
mod ode;

pub use audit::{
    apriori_l2_bound, energy_audit, gronwall_certificate, twin_run_divergence, AprioriBound,
    EnergyAudit, EnergyAugmented, GronwallCertificate, TwinReport,
};
pub use ladder::{
    enstrophy_sample, estimate_c3, extend_horizon, run_ladder, BlowupReport, ContinuationLog,
    EnstrophySample, Extension, LadderConfig, LadderRun, LadderStatus, Rung,
};
pub use ode::{
    integrate, uniform_times, IntegrationStatus, Monitor, OdeSystem, StepMode, StepperConfig,
    Trajectory,
};
