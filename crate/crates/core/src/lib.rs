//! Queueing with tail-sensitive customers.
//!
//! * [`dist`]: discrete wait distributions and their statistics
//! * [`matching`]: moment-matched distributions on a fixed support
//! * [`phasetype`]: exact sojourn-time laws as hypoexponential stage chains
//! * [`utility`]: mean-only, mean-variance and tail-based utilities
//! * [`des`]: pooled and dedicated discrete-event simulation with balking
//! * [`choice`]: binary logit estimation on pairwise wait choices
//! * [`report`]: CSV rendering of simulation output

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod choice;
pub mod des;
pub mod dist;
pub mod matching;
pub mod phasetype;
pub mod report;
pub mod streams;
pub mod study;
pub mod utility;

pub use des::{run_replication, run_scenario, sweep, Grid, Scenario, SimMetrics};
pub use dist::{CvarConvention, DiscretePmf, DistError, Moments};
pub use matching::{moment_match, MatchError, MomentTargets};
pub use phasetype::{PhaseType, PhaseTypeError, Topology};
pub use utility::{Coefficients, Decision, ModelKind, UtilityModel};
