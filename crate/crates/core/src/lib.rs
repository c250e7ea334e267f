//! Throughput-maximizing schedules for a UAV store-then-amplify-and-forward
//! relay: causal slot pairing, power allocation and trajectory design by
//! alternating optimization, with IAF and static-AF baselines.

pub mod channel;
pub mod error;
pub mod experiment;
pub mod export;
pub mod optimizer;
pub mod pairing;
pub mod power;
pub mod scenario;
pub mod trajectory;

pub use error::{Error, Result};
pub use experiment::{parse_config, run_experiment, ExperimentSpec, Variant};
pub use optimizer::{
    solve_iaf, solve_saf, solve_saf_delay_constrained, solve_static_af, SolveResult, Status,
};
pub use pairing::{solve_pairing, Pairing};
pub use power::PowerProfile;
pub use scenario::{Endpoints, ScenarioConfig, SolverParams, Trajectory, Waypoint};
